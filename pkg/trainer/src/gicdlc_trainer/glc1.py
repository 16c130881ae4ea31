"""GLC1 model files: the byte contract shared with the codec.

The trainer emits models the codec consumes, so the layout here must stay
byte-for-byte compatible with the codec's loader (all integers little
endian):

    magic "GLC1" | version u16 | role u8 | K u8 | C u8 | L u8
    input_width u32 | n_layers u16 | n_groups u16
    layer sizes, u32 each | group records, (start u32, size u32) each
    per node, layer by layer: 6 input indices u32 + truth table u64
    SHA-256 over everything above

Truth-table entry t holds the node output for the input combination whose
bit k equals input k.  A small hard-inference routine lives here too; the
ARM trainer uses it to compute upsampler priors exactly as the decoder
will.
"""

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .encoding import THRESHOLDS, ups_context

MAGIC = b"GLC1"
FORMAT_VERSION = 1
FAN_IN = 6
ROLE_CODES = {"UPS": 0, "ARM": 1}
ROLE_NAMES = {0: "UPS", 1: "ARM"}


@dataclass
class HardModel:
    """A hardened network as written to / read from a GLC1 file."""

    role: str
    kernel: int
    channels: int
    levels: int
    layer_inputs: list   # per layer: int64 array (n, 6)
    layer_tables: list   # per layer: uint64 array (n,)
    groups: list         # (start, size) into the last layer

    @property
    def input_width(self) -> int:
        return self.kernel * self.kernel * self.channels * THRESHOLDS

    def infer(self, bits) -> np.ndarray:
        """Evaluate the circuit; returns the group averages in [0, 1]."""
        x = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if x.size != self.input_width:
            raise ValueError(f"input has {x.size} bits, expected {self.input_width}")
        for inp, tab in zip(self.layer_inputs, self.layer_tables):
            idx = np.zeros(len(tab), dtype=np.uint64)
            for k in range(FAN_IN):
                idx |= x[inp[:, k]].astype(np.uint64) << np.uint64(k)
            x = ((tab >> idx) & np.uint64(1)).astype(np.uint8)
        return np.array([x[s:s + n].sum() / n for s, n in self.groups])

    def serialize(self) -> bytes:
        body = bytearray()
        body += MAGIC
        body += struct.pack("<H", FORMAT_VERSION)
        body += struct.pack("<BBBB", ROLE_CODES[self.role], self.kernel,
                            self.channels, self.levels)
        body += struct.pack("<I", self.input_width)
        body += struct.pack("<HH", len(self.layer_tables), len(self.groups))
        for tab in self.layer_tables:
            body += struct.pack("<I", len(tab))
        for start, size in self.groups:
            body += struct.pack("<II", start, size)
        for inp, tab in zip(self.layer_inputs, self.layer_tables):
            n = len(tab)
            rec = np.empty((n, 8), dtype="<u4")
            rec[:, :FAN_IN] = inp
            rec[:, FAN_IN:] = np.asarray(tab, dtype="<u8").view("<u4").reshape(n, 2)
            body += rec.tobytes()
        return bytes(body) + hashlib.sha256(body).digest()


def save_model(model: HardModel, path) -> None:
    with open(path, "wb") as f:
        f.write(model.serialize())


def load_model(source) -> HardModel:
    """Parse GLC1 bytes (or a file path); verifies the content hash."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(source, "rb") as f:
            data = f.read()
    if len(data) < 50:
        raise ValueError("model file truncated")
    if data[:4] != MAGIC:
        raise ValueError("bad model magic")
    version, = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {version}")
    if hashlib.sha256(data[:-32]).digest() != data[-32:]:
        raise ValueError("model content hash mismatch")
    role_code, kernel, channels, levels = struct.unpack_from("<BBBB", data, 6)
    input_width, = struct.unpack_from("<I", data, 10)
    n_layers, n_groups = struct.unpack_from("<HH", data, 14)
    pos = 18
    sizes = []
    for _ in range(n_layers):
        sizes.append(struct.unpack_from("<I", data, pos)[0])
        pos += 4
    groups = []
    for _ in range(n_groups):
        groups.append(struct.unpack_from("<II", data, pos))
        pos += 8
    layer_inputs, layer_tables = [], []
    for n in sizes:
        rec = np.frombuffer(data, dtype="<u4", count=n * 8, offset=pos).reshape(n, 8)
        layer_inputs.append(rec[:, :FAN_IN].astype(np.int64))
        layer_tables.append(rec[:, FAN_IN:].copy().view("<u8").reshape(n))
        pos += n * 32
    model = HardModel(ROLE_NAMES[role_code], kernel, channels, levels,
                      layer_inputs, layer_tables, groups)
    if model.input_width != input_width:
        raise ValueError("stored input width disagrees with geometry")
    return model


def predict_ups(model: HardModel, lowres: np.ndarray, fine_h: int, fine_w: int) -> np.ndarray:
    """Upsampler prior for a whole level, cropped to the true finer dims.

    Group g of the 4-group output fills block pixel (2i + g//2, 2j + g%2)
    with 255 * average, matching the decoder's use of the model.
    """
    h, w = lowres.shape
    out = np.zeros((2 * h, 2 * w))
    for i in range(h):
        for j in range(w):
            avgs = model.infer(ups_context(lowres, i, j, model.kernel))
            for g in range(4):
                out[2 * i + g // 2, 2 * j + g % 2] = 255.0 * avgs[g]
    return out[:fine_h, :fine_w]
