"""Command-line surface: encode, decode, inspect, eval, energy.

Exit codes are stable:

    0  success
    2  usage error (argparse)
    3  I/O error (missing or unreadable file)
    4  data format error (bad PGM/IDX/image values)
    5  model file error (bad magic, version, hash, truncation)
    6  model mismatch (wrong model for a container or config)
    7  container error (bad magic, version, checksum, truncation)
    8  corrupt entropy stream

Diagnostics go to stderr; reports and field dumps go to stdout; image
and container payloads go to files.  Single images travel as binary PGM
(P5, maxval 255) or as one record of an IDX tensor selected with
--index.  If GICDLC_MODEL_DIR is set, relative model paths that do not
resolve locally are looked up under it.
"""

import argparse
import os
import re
import sys

import numpy as np

from . import eval as eval_mod
from .codec import (
    CodecConfig,
    decode_image,
    encode_image,
    parse_container,
    theoretical_report,
)
from .errors import (
    ContainerError,
    CorruptStreamError,
    DataFormatError,
    GicdlcError,
    ModelFormatError,
    ModelMismatchError,
)
from .lutnet import load_model

EXIT_OK = 0
EXIT_IO = 3
EXIT_DATA = 4
EXIT_MODEL_FORMAT = 5
EXIT_MODEL_MISMATCH = 6
EXIT_CONTAINER = 7
EXIT_STREAM = 8


def read_pgm(data: bytes) -> np.ndarray:
    """Parse binary PGM (P5, maxval 255, comments allowed in the header)."""
    if data[:2] != b"P5":
        raise DataFormatError("not a binary PGM (P5) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        m = re.compile(rb"[ \t\r\n]+(?:#[^\n]*\n[ \t\r\n]*)*").match(data, pos)
        if m is None or m.end() == pos:
            raise DataFormatError("malformed PGM header")
        pos = m.end()
        m = re.compile(rb"[0-9]+").match(data, pos)
        if m is None:
            raise DataFormatError("malformed PGM header")
        fields.append(int(m.group()))
        pos = m.end()
    w, h, maxval = fields
    if maxval != 255:
        raise DataFormatError(f"PGM maxval {maxval} unsupported, need 255")
    pos += 1  # single whitespace byte before the raster
    if len(data) < pos + h * w:
        raise DataFormatError("PGM raster truncated")
    return np.frombuffer(data, dtype=np.uint8, count=h * w, offset=pos).reshape(h, w).copy()


def write_pgm(img: np.ndarray) -> bytes:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def _load_image(path: str, index: int) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"P5":
        return read_pgm(data)
    ds = eval_mod.load_idx(data, name=os.path.basename(path))
    if not 0 <= index < len(ds.images):
        raise DataFormatError(f"index {index} outside dataset of {len(ds.images)} images")
    return ds.images[index]


def _model_path(path: str) -> str:
    if os.path.exists(path):
        return path
    root = os.environ.get("GICDLC_MODEL_DIR")
    if root and not os.path.isabs(path):
        candidate = os.path.join(root, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _load_models(args):
    ups = load_model(_model_path(args.ups))
    arm = load_model(_model_path(args.arm))
    return ups, arm


def _add_model_args(p):
    p.add_argument("--ups", required=True, help="upsampler model file (GLC1)")
    p.add_argument("--arm", required=True, help="autoregressive model file (GLC1)")


def cmd_encode(args) -> int:
    img = _load_image(args.input, args.index)
    ups, arm = _load_models(args)
    config = CodecConfig(levels=args.levels, kernel=arm.kernel, channels=arm.channels)
    container = encode_image(img, ups, arm, config)
    with open(args.output, "wb") as f:
        f.write(container)
    if args.report_theoretical:
        rep = theoretical_report(img, ups, arm, config)
        per = " ".join(f"level{e['level']}={e['bpp']:.4f}" for e in rep["levels"])
        print(f"theoretical bpp: total={rep['total_bpp']:.4f} {per}", file=sys.stderr)
    return EXIT_OK


def cmd_decode(args) -> int:
    with open(args.input, "rb") as f:
        data = f.read()
    ups, arm = _load_models(args)
    img = decode_image(data, ups, arm)
    with open(args.output, "wb") as f:
        f.write(write_pgm(img))
    return EXIT_OK


def cmd_inspect(args) -> int:
    with open(args.input, "rb") as f:
        c = parse_container(f.read())
    print(f"version: {c.version}")
    print(f"height: {c.height}")
    print(f"width: {c.width}")
    print(f"channels: {c.channels}")
    print(f"levels: {c.levels}")
    print(f"kernel: {c.kernel}")
    print(f"ups_hash: {c.ups_hash.hex()}")
    print(f"arm_hash: {c.arm_hash.hex()}")
    print(f"payload_bytes: {len(c.payload)}")
    return EXIT_OK


def cmd_eval(args) -> int:
    with open(args.dataset, "rb") as f:
        ds = eval_mod.load_idx(f.read(), name=os.path.basename(args.dataset))
    labels = None
    if args.labels:
        with open(args.labels, "rb") as f:
            labels = eval_mod.load_idx_labels(f.read())
    ups, arm = _load_models(args)
    config = CodecConfig(levels=args.levels, kernel=arm.kernel, channels=arm.channels)
    report = eval_mod.bpp_report(
        ds, ups, arm, config, labels=labels,
        payload_only=not args.total_bpp, limit=args.limit,
    )
    baselines = None
    if args.baselines:
        with open(args.baselines, "rb") as f:
            baselines = eval_mod.read_baseline_results(f.read())
    sys.stdout.write(eval_mod.format_report(report, baselines))
    return EXIT_OK


def cmd_energy(args) -> int:
    model = eval_mod.EnergyModel(
        e_lut_inference=args.e_lut,
        e_ans_op=args.e_ans,
        ans_ops_per_symbol=args.ans_ops,
    )
    est = eval_mod.energy_estimate(args.height, args.width, args.levels, model)
    print(f"runs_per_pixel: {est['runs_per_pixel']:.6g}")
    print(f"symbols_per_pixel: {est['symbols_per_pixel']:.6g}")
    print(f"lut_nj_per_pixel: {est['lut_nj_per_pixel']:.6g}")
    print(f"ans_nj_per_pixel: {est['ans_nj_per_pixel']:.6g}")
    print(f"nj_per_pixel: {est['nj_per_pixel']:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gicdlc",
        description="Lossless grayscale codec driven by lookup-table networks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encode", help="encode a PGM or IDX image to a container")
    e.add_argument("input")
    e.add_argument("output")
    _add_model_args(e)
    e.add_argument("--levels", type=int, default=2)
    e.add_argument("--index", type=int, default=0, help="image index for IDX inputs")
    e.add_argument("--report-theoretical", action="store_true")
    e.set_defaults(fn=cmd_encode)

    d = sub.add_parser("decode", help="decode a container to PGM")
    d.add_argument("input")
    d.add_argument("output")
    _add_model_args(d)
    d.set_defaults(fn=cmd_decode)

    i = sub.add_parser("inspect", help="print container header fields")
    i.add_argument("input")
    i.set_defaults(fn=cmd_inspect)

    v = sub.add_parser("eval", help="bits-per-pixel report over an IDX dataset")
    v.add_argument("dataset")
    _add_model_args(v)
    v.add_argument("--labels", help="IDX label file for the digit/letter split")
    v.add_argument("--levels", type=int, default=2)
    v.add_argument("--limit", type=int, default=None)
    v.add_argument("--total-bpp", action="store_true",
                   help="count full container bytes instead of payload only")
    v.add_argument("--baselines", help="JSON file of externally measured codec bpp rows")
    v.set_defaults(fn=cmd_eval)

    g = sub.add_parser("energy", help="analytical energy estimate")
    g.add_argument("--height", type=int, required=True)
    g.add_argument("--width", type=int, required=True)
    g.add_argument("--levels", type=int, default=2)
    g.add_argument("--e-lut", type=float, default=2.5)
    g.add_argument("--e-ans", type=float, default=0.1)
    g.add_argument("--ans-ops", type=int, default=8)
    g.set_defaults(fn=cmd_energy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as e:
        print(f"gicdlc: i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except CorruptStreamError as e:
        print(f"gicdlc: corrupt stream: {e}", file=sys.stderr)
        return EXIT_STREAM
    except ContainerError as e:
        print(f"gicdlc: container error: {e}", file=sys.stderr)
        return EXIT_CONTAINER
    except ModelMismatchError as e:
        print(f"gicdlc: model mismatch: {e}", file=sys.stderr)
        return EXIT_MODEL_MISMATCH
    except ModelFormatError as e:
        print(f"gicdlc: model file error: {e}", file=sys.stderr)
        return EXIT_MODEL_FORMAT
    except DataFormatError as e:
        print(f"gicdlc: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except GicdlcError as e:
        print(f"gicdlc: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
