"""Hardened lookup-table networks: representation, inference, and the GLC1 file format.

A network is a stack of layers; every node reads 6 bits from the previous
layer (layer 0 reads from the input bit vector) and maps them through a
64-entry truth table.  Truth-table entry t holds the output for the input
combination where bit k of t equals input k.  The last layer is split into
contiguous output groups; the network's outputs are the per-group averages
of the node bits, so each output is a multiple of 1/group_size in [0, 1].

GLC1 file layout (all integers little-endian):

    offset  size  field
    0       4     magic "GLC1"
    4       2     format version (u16, currently 1)
    6       1     role (0 = UPS, 1 = ARM)
    7       1     kernel K
    8       1     channels C
    9       1     levels L
    10      4     input width in bits (u32, must equal K*K*C*255)
    14      2     number of layers (u16)
    16      2     number of output groups (u16)
    18      4*n_layers   layer sizes (u32 each)
    ...     8*n_groups   group records: start u32, size u32 (into last layer)
    ...     per node, layer by layer: 6 input indices (u32 each), truth table (u64)
    ...     32    SHA-256 of every preceding byte

The node input indices of layer 0 address input bits; deeper layers address
the previous layer's node outputs.
"""

import hashlib
import struct

import numpy as np

from .errors import (
    BadModelMagic,
    ModelHashMismatch,
    TruncatedModel,
    UnsupportedModelVersion,
)

MAGIC = b"GLC1"
FORMAT_VERSION = 1
FAN_IN = 6
ROLE_CODES = {"UPS": 0, "ARM": 1}
ROLE_NAMES = {0: "UPS", 1: "ARM"}


class HardLutNetwork:
    """Immutable hardened network plus its codec-facing metadata."""

    def __init__(self, role, kernel, channels, levels, layer_inputs, layer_tables,
                 groups, version: int = FORMAT_VERSION):
        if role not in ROLE_CODES:
            raise ValueError(f"role must be UPS or ARM, got {role!r}")
        self.role = role
        self.kernel = int(kernel)
        self.channels = int(channels)
        self.levels = int(levels)
        self.version = int(version)
        self.layer_inputs = [np.ascontiguousarray(a, dtype=np.int64) for a in layer_inputs]
        self.layer_tables = [np.ascontiguousarray(t, dtype=np.uint64) for t in layer_tables]
        self.groups = [(int(s), int(n)) for s, n in groups]
        self.input_width = self.kernel * self.kernel * self.channels * 255
        self._packed = None
        self._hash = None

    @property
    def n_layers(self) -> int:
        return len(self.layer_inputs)

    @property
    def layer_sizes(self) -> list:
        return [len(t) for t in self.layer_tables]

    @property
    def group_count(self) -> int:
        return len(self.groups)

    def infer(self, bits) -> np.ndarray:
        """Run the hardened circuit on one binary input vector.

        Returns the G group averages as float64 in [0, 1].  Pure and
        deterministic; the input must have exactly input_width entries.
        """
        x = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if x.size != self.input_width:
            raise ValueError(
                f"input has {x.size} bits, network expects {self.input_width}"
            )
        for inp, tab in zip(self.layer_inputs, self.layer_tables):
            idx = np.zeros(len(tab), dtype=np.uint64)
            for k in range(FAN_IN):
                idx |= x[inp[:, k]].astype(np.uint64) << np.uint64(k)
            x = ((tab >> idx) & np.uint64(1)).astype(np.uint8)
        out = np.empty(len(self.groups), dtype=np.float64)
        for g, (start, size) in enumerate(self.groups):
            out[g] = int(x[start:start + size].sum()) / size
        return out

    def validate(self) -> list:
        """Check structural invariants; returns a list of diagnostics (empty = ok)."""
        bad = []
        if self.kernel < 1 or self.kernel % 2 == 0:
            bad.append(f"kernel {self.kernel} is not odd and positive")
        if not 1 <= self.channels <= 4:
            bad.append(f"channels {self.channels} outside 1..4")
        if self.levels < 0:
            bad.append(f"levels {self.levels} negative")
        if self.input_width != self.kernel * self.kernel * self.channels * 255:
            bad.append("input width does not match kernel/channel geometry")
        if self.n_layers < 1:
            bad.append("network has no layers")
        if len(self.layer_inputs) != len(self.layer_tables):
            bad.append("layer input/table list lengths differ")
        feed = self.input_width
        for l, (inp, tab) in enumerate(zip(self.layer_inputs, self.layer_tables)):
            if inp.shape != (len(tab), FAN_IN):
                bad.append(f"layer {l}: input index array shape {inp.shape} invalid")
                continue
            if len(tab) < 1:
                bad.append(f"layer {l}: empty layer")
            if inp.size and (inp.min() < 0 or inp.max() >= feed):
                bad.append(f"layer {l}: node input index out of range (feed width {feed})")
            feed = len(tab)
        last = self.layer_sizes[-1] if self.layer_sizes else 0
        if not self.groups:
            bad.append("no output groups")
        pos = 0
        for g, (start, size) in enumerate(self.groups):
            if size < 1:
                bad.append(f"group {g} empty")
            if start != pos:
                bad.append(f"group {g} not contiguous with previous (start {start}, expected {pos})")
            pos = start + size
        if self.groups and pos != last:
            bad.append(f"groups cover {pos} of {last} last-layer nodes")
        expected_g = 4 * self.channels if self.role == "UPS" else 2 * self.channels
        if self.group_count != expected_g:
            bad.append(
                f"{self.role} network should have {expected_g} groups, has {self.group_count}"
            )
        return bad

    def serialize(self) -> bytes:
        """Encode to GLC1 bytes, content hash included."""
        head = bytearray()
        head += MAGIC
        head += struct.pack("<H", self.version)
        head += struct.pack(
            "<BBBB", ROLE_CODES[self.role], self.kernel, self.channels, self.levels
        )
        head += struct.pack("<I", self.input_width)
        head += struct.pack("<HH", self.n_layers, self.group_count)
        for size in self.layer_sizes:
            head += struct.pack("<I", size)
        for start, size in self.groups:
            head += struct.pack("<II", start, size)
        for inp, tab in zip(self.layer_inputs, self.layer_tables):
            n = len(tab)
            rec = np.empty((n, 8), dtype="<u4")
            rec[:, :FAN_IN] = inp
            rec[:, FAN_IN:] = tab.astype("<u8").view("<u4").reshape(n, 2)
            head += rec.tobytes()
        return bytes(head) + hashlib.sha256(head).digest()

    @property
    def content_hash(self) -> bytes:
        """SHA-256 of the serialized body, as stored in the model file."""
        if self._hash is None:
            self._hash = self.serialize()[-32:]
        return self._hash

    def dump_text(self) -> str:
        """Human-readable dump, one node per line, for debugging diffs."""
        lines = [
            f"glc1 role={self.role} kernel={self.kernel} channels={self.channels} "
            f"levels={self.levels} layers={self.layer_sizes} "
            f"groups={self.groups} hash={self.content_hash.hex()}"
        ]
        for l, (inp, tab) in enumerate(zip(self.layer_inputs, self.layer_tables)):
            for n in range(len(tab)):
                ins = " ".join(str(v) for v in inp[n])
                lines.append(f"layer {l} node {n}: inputs {ins} table {int(tab[n]):016x}")
        return "\n".join(lines) + "\n"

    def packed(self):
        """Flat arrays for the compiled kernels: (inputs, tables, layer offsets,
        group starts, group sizes, widest layer)."""
        if self._packed is None:
            node_in = np.concatenate(self.layer_inputs, axis=0)
            node_tab = np.concatenate(self.layer_tables).view(np.int64)
            off = np.zeros(self.n_layers + 1, dtype=np.int64)
            np.cumsum(self.layer_sizes, out=off[1:])
            gs = np.array([g[0] for g in self.groups], dtype=np.int64)
            gn = np.array([g[1] for g in self.groups], dtype=np.int64)
            widest = max(self.layer_sizes)
            self._packed = (node_in, node_tab, off, gs, gn, widest)
        return self._packed


def save_model(net: HardLutNetwork, path) -> None:
    data = net.serialize()
    if hasattr(path, "write"):
        path.write(data)
    else:
        with open(path, "wb") as f:
            f.write(data)


def load_model(source) -> HardLutNetwork:
    """Parse GLC1 bytes (or a path / readable file) into a HardLutNetwork.

    Verifies magic, version, structural sizes, and the trailing content
    hash; failures raise distinct ModelFormatError subclasses.
    """
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as f:
            data = f.read()

    if len(data) < 4:
        raise TruncatedModel("file shorter than magic")
    if data[:4] != MAGIC:
        raise BadModelMagic(f"bad magic {data[:4]!r}")
    if len(data) < 18:
        raise TruncatedModel("header truncated")
    version = struct.unpack_from("<H", data, 4)[0]
    if version != FORMAT_VERSION:
        raise UnsupportedModelVersion(f"version {version} not supported")
    role_code, kernel, channels, levels = struct.unpack_from("<BBBB", data, 6)
    if role_code not in ROLE_NAMES:
        raise BadModelMagic(f"unknown role code {role_code}")
    input_width = struct.unpack_from("<I", data, 10)[0]
    n_layers, n_groups = struct.unpack_from("<HH", data, 14)
    pos = 18
    need = pos + 4 * n_layers + 8 * n_groups
    if len(data) < need:
        raise TruncatedModel("layer/group tables truncated")
    sizes = list(struct.unpack_from(f"<{n_layers}I", data, pos)) if n_layers else []
    pos += 4 * n_layers
    groups = []
    for _ in range(n_groups):
        start, size = struct.unpack_from("<II", data, pos)
        groups.append((start, size))
        pos += 8
    node_bytes = sum(sizes) * (4 * FAN_IN + 8)
    if len(data) < pos + node_bytes + 32:
        raise TruncatedModel("node records truncated")
    body_end = pos + node_bytes
    stored = data[body_end:body_end + 32]
    digest = hashlib.sha256(data[:body_end]).digest()
    if stored != digest:
        raise ModelHashMismatch("content hash does not match model bytes")

    layer_inputs, layer_tables = [], []
    for size in sizes:
        rec = np.frombuffer(data, dtype="<u4", count=size * 8, offset=pos).reshape(size, 8)
        layer_inputs.append(rec[:, :FAN_IN].astype(np.int64))
        layer_tables.append(
            np.ascontiguousarray(rec[:, FAN_IN:]).view("<u8").reshape(size).astype(np.uint64)
        )
        pos += size * 32
    net = HardLutNetwork(
        ROLE_NAMES[role_code], kernel, channels, levels,
        layer_inputs, layer_tables, groups, version=version,
    )
    if net.input_width != input_width:
        # header lied about the geometry; surface through validate-style error
        raise BadModelMagic(
            f"stored input width {input_width} does not match geometry {net.input_width}"
        )
    return net
