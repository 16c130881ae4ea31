"""Hierarchical encode/decode orchestration and the GICD container format.

Coding order: the coarsest pyramid level is decoded first in raster order
with an all-zero context initialization, then each finer level is decoded
in raster order with the upsampler's prediction of it (from the coarser,
already decoded level) standing in for not-yet-decoded pixels.  Encoding
simulates that decoder exactly against the ground-truth pyramid (coding
is lossless, so "already decoded" equals ground truth), collects the
per-pixel Laplace parameters and symbols in global decode order, and
feeds them to the rANS encoder in reverse.

GICD container layout (integers little-endian):

    offset  size  field
    0       4     magic "GICD"
    4       2     format version (u16, currently 1)
    6       2     height (u16)
    8       2     width (u16)
    10      1     channels
    11      1     levels L
    12      1     kernel K
    13      1     reserved (0)
    14      32    UPS model content hash
    46      32    ARM model content hash
    78      4     payload length (u32)
    82      ...   rANS payload
    ...     4     CRC32 of every preceding byte
"""

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import (
    BadContainerMagic,
    ChecksumMismatch,
    CorruptStreamError,
    DataFormatError,
    ModelMismatchError,
    TruncatedContainer,
    UnsupportedContainerVersion,
)
from .lutnet import HardLutNetwork
from .pyramid import as_image, decompose, level_shapes
from .rans import RANS_L

CONTAINER_MAGIC = b"GICD"
CONTAINER_VERSION = 1
HEADER_LEN = 82
MAX_DIM = 0xFFFF


@dataclass(frozen=True)
class CodecConfig:
    """Coding geometry; must agree with the metadata of both networks."""

    levels: int = 2
    kernel: int = 5
    channels: int = 1

    def __post_init__(self):
        if self.levels < 0:
            raise ValueError(f"levels {self.levels} negative")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"kernel {self.kernel} must be odd")


@dataclass(frozen=True)
class BitstreamContainer:
    version: int
    height: int
    width: int
    channels: int
    levels: int
    kernel: int
    ups_hash: bytes
    arm_hash: bytes
    payload: bytes


def config_for(ups: HardLutNetwork, arm: HardLutNetwork, levels=None) -> CodecConfig:
    """Derive the coding config from model metadata (levels overridable)."""
    return CodecConfig(
        levels=arm.levels if levels is None else levels,
        kernel=arm.kernel,
        channels=arm.channels,
    )


def _check_models(ups: HardLutNetwork, arm: HardLutNetwork, config: CodecConfig) -> None:
    problems = []
    if ups.role != "UPS":
        problems.append(f"upsampler model has role {ups.role}")
    if arm.role != "ARM":
        problems.append(f"autoregressive model has role {arm.role}")
    for name, net in (("UPS", ups), ("ARM", arm)):
        if net.kernel != config.kernel:
            problems.append(f"{name} kernel {net.kernel} != config kernel {config.kernel}")
        if net.channels != config.channels:
            problems.append(f"{name} channels {net.channels} != config channels {config.channels}")
        if net.levels != config.levels:
            problems.append(f"{name} levels {net.levels} != config levels {config.levels}")
    if config.channels != 1:
        problems.append("only single-channel coding is implemented")
    if problems:
        raise ModelMismatchError("; ".join(problems))


def global_decode_order(height: int, width: int, levels: int) -> list:
    """(level, row, col) triples in decode order: coarsest level first,
    raster order within each level."""
    shapes = level_shapes((height, width), levels)
    order = []
    for lev in range(levels, -1, -1):
        h, w = shapes[lev]
        for i in range(h):
            for j in range(w):
                order.append((lev, i, j))
    return order


def predict_ups_level(lowres: np.ndarray, ups: HardLutNetwork, out_shape=None) -> np.ndarray:
    """Upsample one level: real-valued predictions at (about) double size.

    Every lowres pixel yields one network inference whose four group
    averages fill its 2x2 output block, scaled to [0, 255].  out_shape
    crops replication padding when the finer level had odd dimensions.
    """
    lowres = as_image(lowres)
    h, w = lowres.shape
    if out_shape is None:
        out_shape = (2 * h, 2 * w)
    node_in, node_tab, layer_off, gstart, gsize, widest = ups.packed()
    return K.k_ups_predict(
        lowres, node_in, node_tab, layer_off, gstart, gsize,
        ups.kernel, widest, out_shape[0], out_shape[1],
    )


def _prior_canvas(preds: np.ndarray) -> np.ndarray:
    # round half up and clamp, the same rule the context assembly contract uses
    return np.clip(np.floor(preds + 0.5), 0.0, 255.0).astype(np.uint8)


def _simulate(img, ups, arm, config):
    """Run the decoder simulation; returns (pyramid, mu, b, symbols, level slices)."""
    pyr = decompose(img, config.levels)
    counts = [p.size for p in pyr]
    total = sum(counts)
    mu_arr = np.empty(total, np.float64)
    b_arr = np.empty(total, np.float64)
    sym_arr = np.empty(total, np.int64)
    node_in, node_tab, layer_off, gstart, gsize, widest = arm.packed()
    slices = {}
    off = 0
    for lev in range(config.levels, -1, -1):
        plane = pyr[lev]
        if lev == config.levels:
            canvas = np.zeros(plane.shape, np.uint8)
        else:
            preds = predict_ups_level(pyr[lev + 1], ups, out_shape=plane.shape)
            canvas = _prior_canvas(preds)
        end = K.k_encode_level(
            canvas, plane, node_in, node_tab, layer_off, gstart, gsize,
            arm.kernel, widest, mu_arr, b_arr, sym_arr, off,
        )
        slices[lev] = (off, end)
        off = end
    return pyr, mu_arr, b_arr, sym_arr, slices


def encode_image(img, ups: HardLutNetwork, arm: HardLutNetwork,
                 config: CodecConfig = None, _capture=None) -> bytes:
    """Encode one grayscale image; returns the container bytes."""
    img = as_image(img)
    h, w = img.shape
    if h > MAX_DIM or w > MAX_DIM:
        raise DataFormatError(f"image {h}x{w} exceeds the {MAX_DIM} per-side limit")
    if config is None:
        config = config_for(ups, arm)
    _check_models(ups, arm, config)
    _, mu_arr, b_arr, sym_arr, _ = _simulate(img, ups, arm, config)
    n = mu_arr.shape[0]
    buf = np.empty(2 * n + 16, np.uint8)
    length = K.k_rans_encode(mu_arr, b_arr, sym_arr, n, buf)
    payload = buf[:length].tobytes()
    if _capture is not None:
        _capture.update(mu=mu_arr, b=b_arr, sym=sym_arr)
    return pack_container(
        BitstreamContainer(
            CONTAINER_VERSION, h, w, config.channels, config.levels,
            config.kernel, ups.content_hash, arm.content_hash, payload,
        )
    )


def theoretical_report(img, ups: HardLutNetwork, arm: HardLutNetwork,
                       config: CodecConfig = None) -> dict:
    """Ideal code lengths from the model, per level and total.

    bpp values are normalized by the original pixel count, so the total
    is the sum of the per-level entries.
    """
    img = as_image(img)
    if config is None:
        config = config_for(ups, arm)
    _check_models(ups, arm, config)
    _, mu_arr, b_arr, sym_arr, slices = _simulate(img, ups, arm, config)
    hw = img.size
    levels = []
    for lev in range(config.levels + 1):
        start, end = slices[lev]
        bits = K.k_theoretical_bits(mu_arr, b_arr, sym_arr, start, end)
        levels.append({"level": lev, "bits": bits, "bpp": bits / hw})
    return {
        "levels": levels,
        "total_bits": sum(e["bits"] for e in levels),
        "total_bpp": sum(e["bpp"] for e in levels),
    }


def pack_container(c: BitstreamContainer) -> bytes:
    head = bytearray()
    head += CONTAINER_MAGIC
    head += struct.pack("<H", c.version)
    head += struct.pack("<HH", c.height, c.width)
    head += struct.pack("<BBBB", c.channels, c.levels, c.kernel, 0)
    head += c.ups_hash
    head += c.arm_hash
    head += struct.pack("<I", len(c.payload))
    data = bytes(head) + c.payload
    return data + struct.pack("<I", zlib.crc32(data))


def parse_container(data: bytes) -> BitstreamContainer:
    if len(data) < 4:
        raise TruncatedContainer("shorter than magic")
    if data[:4] != CONTAINER_MAGIC:
        raise BadContainerMagic(f"bad magic {data[:4]!r}")
    if len(data) < HEADER_LEN:
        raise TruncatedContainer("header truncated")
    version = struct.unpack_from("<H", data, 4)[0]
    if version != CONTAINER_VERSION:
        raise UnsupportedContainerVersion(f"version {version} not supported")
    h, w = struct.unpack_from("<HH", data, 6)
    channels, levels, kernel, _ = struct.unpack_from("<BBBB", data, 10)
    ups_hash = data[14:46]
    arm_hash = data[46:78]
    payload_len = struct.unpack_from("<I", data, 78)[0]
    if len(data) < HEADER_LEN + payload_len + 4:
        raise TruncatedContainer("payload truncated")
    body_end = HEADER_LEN + payload_len
    stored = struct.unpack_from("<I", data, body_end)[0]
    if stored != zlib.crc32(data[:body_end]):
        raise ChecksumMismatch("container checksum does not validate")
    return BitstreamContainer(
        version, h, w, channels, levels, kernel,
        ups_hash, arm_hash, data[HEADER_LEN:body_end],
    )


def decode_image(container, ups: HardLutNetwork, arm: HardLutNetwork,
                 _capture=None) -> np.ndarray:
    """Decode a container back to the original image, bit exactly."""
    if isinstance(container, (bytes, bytearray)):
        container = parse_container(bytes(container))
    if container.ups_hash != ups.content_hash:
        raise ModelMismatchError("container was encoded with a different UPS model")
    if container.arm_hash != arm.content_hash:
        raise ModelMismatchError("container was encoded with a different ARM model")
    if container.channels != 1:
        raise DataFormatError("only single-channel streams are supported")
    config = CodecConfig(container.levels, container.kernel, container.channels)
    _check_models(ups, arm, config)

    payload = np.frombuffer(container.payload, dtype=np.uint8)
    if payload.size < 8:
        raise CorruptStreamError("payload shorter than the 8 flushed state bytes")
    x = 0
    for byte in payload[-8:]:
        x = (x << 8) | int(byte)
    st = np.array([x, payload.size - 8, 0], dtype=np.int64)

    shapes = level_shapes((container.height, container.width), container.levels)
    total = sum(h * w for h, w in shapes)
    mu_arr = np.empty(total, np.float64)
    b_arr = np.empty(total, np.float64)
    node_in, node_tab, layer_off, gstart, gsize, widest = arm.packed()
    planes = [None] * (container.levels + 1)
    off = 0
    for lev in range(container.levels, -1, -1):
        h, w = shapes[lev]
        if lev == container.levels:
            canvas = np.zeros((h, w), np.uint8)
        else:
            preds = predict_ups_level(planes[lev + 1], ups, out_shape=(h, w))
            canvas = _prior_canvas(preds)
        off = K.k_decode_level(
            canvas, payload, st, node_in, node_tab, layer_off, gstart, gsize,
            arm.kernel, widest, mu_arr, b_arr, off,
        )
        if st[2] != 0:
            raise CorruptStreamError("payload exhausted with symbols outstanding")
        planes[lev] = canvas
    if st[0] != RANS_L or st[1] != 0:
        raise CorruptStreamError("stream did not drain to the initial coder state")
    if _capture is not None:
        _capture.update(mu=mu_arr, b=b_arr)
    return planes[0]
