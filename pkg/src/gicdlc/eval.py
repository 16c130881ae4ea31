"""Dataset ingestion, benchmark reporting, bicubic baseline, energy estimator.

IDX is the MNIST-family binary format: big-endian magic 0x00000803 for
ubyte image tensors (count, height, width) and 0x00000801 for ubyte label
vectors, optionally gzip-compressed.  Reports aggregate actual coded bits
per pixel (payload-only by default, full container optionally) alongside
the entropy-model ideal, per level, and can split by digit/letter labels.

The energy estimator is analytical: the networks run once per pixel at
the finest level and twice per coarser-level pixel (one upsampling pass
plus one autoregressive pass), so for 28x28 with two halvings the count
is (28^2 + 2*14^2 + 2*7^2)/28^2 = 1.625 runs per pixel; each run is
charged a fixed LUT-inference energy and every coded symbol a fixed
number of coder operations.
"""

import gzip
import hashlib
import json
import statistics
import struct
from dataclasses import dataclass, field

import numpy as np

from .codec import CodecConfig, config_for, encode_image, theoretical_report
from .errors import DataFormatError
from .pyramid import level_shapes

IDX_MAGIC_IMAGES = 0x00000803
IDX_MAGIC_LABELS = 0x00000801


@dataclass(frozen=True)
class Dataset:
    name: str
    images: np.ndarray  # (count, height, width) uint8
    digest: str


@dataclass(frozen=True)
class EnergyModel:
    e_lut_inference: float = 2.5   # nJ per network run
    e_ans_op: float = 0.1          # nJ per coder integer op
    ans_ops_per_symbol: int = 8

    def __post_init__(self):
        if self.e_lut_inference < 0 or self.e_ans_op < 0 or self.ans_ops_per_symbol < 0:
            raise ValueError("energy parameters must be nonnegative")


def _maybe_gunzip(data: bytes) -> bytes:
    if data[:2] == b"\x1f\x8b":
        return gzip.decompress(data)
    return data


def _read_source(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if hasattr(source, "read"):
        return source.read()
    with open(source, "rb") as f:
        return f.read()


def load_idx(source, name: str = "dataset") -> Dataset:
    """Parse an IDX ubyte image tensor (gzip transparently unwrapped)."""
    raw = _read_source(source)
    data = _maybe_gunzip(raw)
    if len(data) < 16:
        raise DataFormatError("IDX file shorter than the image header")
    magic, count, h, w = struct.unpack_from(">IIII", data, 0)
    if magic != IDX_MAGIC_IMAGES:
        raise DataFormatError(f"bad IDX image magic 0x{magic:08x}")
    need = 16 + count * h * w
    if len(data) < need:
        raise DataFormatError(f"IDX payload truncated: {len(data)} < {need} bytes")
    images = np.frombuffer(data, dtype=np.uint8, count=count * h * w, offset=16)
    return Dataset(name, images.reshape(count, h, w).copy(),
                   hashlib.sha256(raw).hexdigest())


def load_idx_labels(source) -> np.ndarray:
    """Parse an IDX ubyte label vector (gzip transparently unwrapped)."""
    data = _maybe_gunzip(_read_source(source))
    if len(data) < 8:
        raise DataFormatError("IDX file shorter than the label header")
    magic, count = struct.unpack_from(">II", data, 0)
    if magic != IDX_MAGIC_LABELS:
        raise DataFormatError(f"bad IDX label magic 0x{magic:08x}")
    if len(data) < 8 + count:
        raise DataFormatError("IDX label payload truncated")
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=8).copy()


def energy_estimate(height: int, width: int, levels: int,
                    model: EnergyModel = EnergyModel()) -> dict:
    """Analytical per-pixel energy of decoding one image."""
    shapes = level_shapes((height, width), levels)
    hw = float(height * width)
    runs = 0.0
    symbols = 0.0
    for lev, (h, w) in enumerate(shapes):
        cost = 1.0 if lev == 0 else 2.0
        runs += cost * h * w
        symbols += float(h * w)
    runs_per_pixel = runs / hw
    symbols_per_pixel = symbols / hw
    lut_nj = runs_per_pixel * model.e_lut_inference
    ans_nj = symbols_per_pixel * model.ans_ops_per_symbol * model.e_ans_op
    return {
        "runs_per_pixel": runs_per_pixel,
        "symbols_per_pixel": symbols_per_pixel,
        "lut_nj_per_pixel": lut_nj,
        "ans_nj_per_pixel": ans_nj,
        "nj_per_pixel": lut_nj + ans_nj,
    }


_CATMULL_A = -0.5


def _catmull_weight(t: float) -> float:
    # Catmull-Rom cubic kernel, a = -0.5
    t = abs(t)
    if t < 1.0:
        return ((_CATMULL_A + 2.0) * t - (_CATMULL_A + 3.0)) * t * t + 1.0
    if t < 2.0:
        return (((t - 5.0) * t + 8.0) * t - 4.0) * _CATMULL_A
    return 0.0


def bicubic_upsample(lowres) -> np.ndarray:
    """Classical 2x bicubic upsampling (Catmull-Rom, centers aligned,
    edges replicated); float output, the fixed-function baseline the
    learned upsampler is compared against."""
    src = np.asarray(lowres, dtype=np.float64)
    if src.ndim != 2:
        raise DataFormatError(f"expected a 2-D image, got shape {src.shape}")
    h, w = src.shape

    def axis_weights(n_out, n_in):
        # output center o samples the input at (o + 0.5)/2 - 0.5
        centers = (np.arange(n_out) + 0.5) / 2.0 - 0.5
        base = np.floor(centers).astype(np.int64)
        idx = np.empty((n_out, 4), np.int64)
        wts = np.empty((n_out, 4), np.float64)
        for o in range(n_out):
            for k in range(4):
                p = base[o] - 1 + k
                idx[o, k] = min(max(p, 0), n_in - 1)
                wts[o, k] = _catmull_weight(centers[o] - p)
        return idx, wts

    ri, rw = axis_weights(2 * h, h)
    ci, cw = axis_weights(2 * w, w)
    tmp = np.zeros((2 * h, w), dtype=np.float64)
    for k in range(4):
        tmp += rw[:, k:k + 1] * src[ri[:, k], :]
    out = np.zeros((2 * h, 2 * w), dtype=np.float64)
    for k in range(4):
        out += cw[:, k] * tmp[:, ci[:, k]]
    return out


def rmse(a, b) -> float:
    """Root mean squared difference in intensity units."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DataFormatError(f"shape mismatch {x.shape} vs {y.shape}")
    return float(np.sqrt(np.mean((x - y) ** 2)))


def bpp_report(ds: Dataset, ups, arm, config: CodecConfig = None, labels=None,
               payload_only: bool = True, limit: int = None) -> dict:
    """Code every image and aggregate actual and ideal bits per pixel.

    Deterministic: fixed iteration order, sums and medians only.  With
    labels, adds a digits (0-9) / letters (10+) split.
    """
    if config is None:
        config = config_for(ups, arm)
    images = ds.images[:limit] if limit else ds.images
    lbl = None
    if labels is not None:
        lbl = np.asarray(labels)[:len(images)]
        if len(lbl) != len(images):
            raise DataFormatError("label count does not match image count")

    n_levels = config.levels + 1
    actual, theo = [], []
    level_bits = [0.0] * n_levels
    for img in images:
        container = encode_image(img, ups, arm, config)
        report = theoretical_report(img, ups, arm, config)
        hw = img.size
        payload_len = len(container) - 86  # header 82 + crc 4
        coded_bytes = payload_len if payload_only else len(container)
        actual.append(coded_bytes * 8.0 / hw)
        theo.append(report["total_bpp"])
        for entry in report["levels"]:
            level_bits[entry["level"]] += entry["bits"]

    def agg(rows):
        return {
            "count": len(rows),
            "mean_bpp": statistics.fmean(rows) if rows else 0.0,
            "median_bpp": statistics.median(rows) if rows else 0.0,
        }

    out = {
        "dataset": ds.name,
        "payload_only": payload_only,
        **agg(actual),
        "mean_theoretical_bpp": statistics.fmean(theo) if theo else 0.0,
        "mean_level_bits": [b / max(len(images), 1) for b in level_bits],
    }
    if lbl is not None:
        digit_rows = [a for a, l in zip(actual, lbl) if l <= 9]
        letter_rows = [a for a, l in zip(actual, lbl) if l > 9]
        out["digits"] = agg(digit_rows)
        out["letters"] = agg(letter_rows)
    return out


def format_report(report: dict, baselines: dict = None) -> str:
    """Aligned human-readable rendering of a bpp_report result."""
    lines = []
    scope = "payload" if report["payload_only"] else "container"
    lines.append(f"dataset {report['dataset']}: {report['count']} images, {scope} bits")
    lines.append(f"  {'codec':<12} {'mean bpp':>9} {'median':>9}")
    lines.append(f"  {'this codec':<12} {report['mean_bpp']:>9.4f} {report['median_bpp']:>9.4f}")
    if baselines:
        for name in sorted(baselines):
            lines.append(f"  {name:<12} {float(baselines[name]):>9.4f} {'':>9}")
    lines.append(f"  ideal (model) {report['mean_theoretical_bpp']:.4f} bpp")
    per_level = ", ".join(
        f"level {lev}: {bits:.1f}" for lev, bits in enumerate(report["mean_level_bits"])
    )
    lines.append(f"  mean bits per image by level: {per_level}")
    for split in ("digits", "letters"):
        if split in report:
            sub = report[split]
            lines.append(
                f"  {split:<8} {sub['count']:>6} images  mean {sub['mean_bpp']:.4f}"
                f"  median {sub['median_bpp']:.4f}"
            )
    return "\n".join(lines) + "\n"


def read_baseline_results(source) -> dict:
    """Load externally measured codec results: a JSON object name -> bpp."""
    data = _read_source(source)
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"baseline results not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise DataFormatError("baseline results must be a JSON object")
    return {str(k): float(v) for k, v in obj.items()}
