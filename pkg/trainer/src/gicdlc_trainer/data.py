"""Datasets, training configuration, and batch sampling.

Batches are drawn as independent (image, level, position) samples.  The
upsampler sees the thermometer context of a coarse pixel and regresses
the true 2x2 block of the finer level; the autoregressive model sees a
context assembled exactly as the decoder will - causal ground truth plus
the hardened upsampler's rounded prior - and is scored on the true pixel.
"""

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from . import encoding
from .augment import dihedral
from .glc1 import HardModel, predict_ups

IDX_MAGIC_IMAGES = 0x00000803


def load_idx(path) -> np.ndarray:
    """Read an IDX ubyte image tensor, gzip unwrapped transparently."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    if len(data) < 16:
        raise ValueError("IDX file shorter than the image header")
    magic, count, h, w = struct.unpack_from(">IIII", data, 0)
    if magic != IDX_MAGIC_IMAGES:
        raise ValueError(f"bad IDX image magic 0x{magic:08x}")
    need = 16 + count * h * w
    if len(data) < need:
        raise ValueError("IDX payload truncated")
    return np.frombuffer(data, dtype=np.uint8, count=count * h * w,
                         offset=16).reshape(count, h, w).copy()


@dataclass
class TrainConfig:
    lr: float = 0.01
    batch: int = 16
    iterations: int = 8000
    kernel: int = 5
    levels: int = 2
    layer_sizes: tuple = (1024, 1024)
    hidden: tuple = (16, 8)
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    tau_conn_start: float = 1.0
    tau_conn_end: float = 1e-4
    tau_node_start: float = 10.0
    tau_node_end: float = 1.0
    decay_every: int = 2000
    decay_factor: float = 0.1
    total_samples: int = 128_000
    augment: bool = True
    seed: int = 0

    def validate(self) -> list:
        bad = []
        if self.lr <= 0 or self.batch < 1 or self.iterations < 1:
            bad.append("lr/batch/iterations must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0:
            bad.append(f"kernel {self.kernel} is not odd and positive")
        if self.levels < 0:
            bad.append("levels negative")
        for start, end in ((self.tau_conn_start, self.tau_conn_end),
                           (self.tau_node_start, self.tau_node_end)):
            if not (start >= end > 0):
                bad.append("temperature schedules must be positive and nonincreasing")
        if not 0 < self.decay_factor <= 1:
            bad.append("decay factor outside (0, 1]")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            bad.append("adam betas outside [0, 1)")
        if self.batch * self.iterations != self.total_samples:
            bad.append(
                f"batch*iterations = {self.batch * self.iterations} "
                f"!= total_samples {self.total_samples}"
            )
        return bad


def tau_at(start: float, end: float, iteration: int, cfg: TrainConfig) -> float:
    """Step decay by cfg.decay_factor every cfg.decay_every, clamped at end."""
    return max(end, start * cfg.decay_factor ** (iteration // cfg.decay_every))


@dataclass
class SampleSource:
    """Draws training samples from a stack of images.

    Pyramids are built per draw on the augmented variant; for ARM draws
    the hardened upsampler's prior plane is cached per (image, variant,
    level) since only eight variants exist per image.
    """

    images: np.ndarray
    cfg: TrainConfig
    ups: HardModel = None
    _priors: dict = field(default_factory=dict)

    def _variant(self, rng):
        idx = int(rng.integers(len(self.images)))
        v = int(rng.integers(8)) if self.cfg.augment else 0
        img = dihedral(self.images[idx], v & 3, bool(v >> 2))
        return idx, v, img

    def draw_ups(self, rng):
        """One upsampler sample: (context bits, four target pixels).

        Requires images at least 2^L on each side so every finer level
        has whole 2x2 blocks to regress.
        """
        cfg = self.cfg
        _, _, img = self._variant(rng)
        pyr = encoding.decompose(img, cfg.levels)
        lev = int(rng.integers(1, cfg.levels + 1))
        fine, coarse = pyr[lev - 1], pyr[lev]
        # keep the whole 2x2 target block inside the finer level
        i = int(rng.integers(fine.shape[0] // 2))
        j = int(rng.integers(fine.shape[1] // 2))
        ctx = encoding.ups_context(coarse, i, j, cfg.kernel)
        tgt = np.array([fine[2 * i, 2 * j], fine[2 * i, 2 * j + 1],
                        fine[2 * i + 1, 2 * j], fine[2 * i + 1, 2 * j + 1]],
                       dtype=np.float64)
        return ctx, tgt

    def _prior_plane(self, key, pyr, lev):
        if key not in self._priors:
            if len(self._priors) > 4096:
                self._priors.clear()
            fine = pyr[lev]
            self._priors[key] = predict_ups(self.ups, pyr[lev + 1],
                                            fine.shape[0], fine.shape[1])
        return self._priors[key]

    def draw_arm(self, rng):
        """One autoregressive sample: (context bits, true pixel value)."""
        cfg = self.cfg
        idx, v, img = self._variant(rng)
        pyr = encoding.decompose(img, cfg.levels)
        lev = int(rng.integers(cfg.levels + 1))
        plane = pyr[lev]
        if lev == cfg.levels:
            prior = None
        else:
            prior = self._prior_plane((idx, v, lev), pyr, lev)
        h, w = plane.shape
        i, j = int(rng.integers(h)), int(rng.integers(w))
        ctx = encoding.arm_context(plane, prior, i, j, cfg.kernel)
        return ctx, int(plane[i, j])


def ups_batch(src: SampleSource, rng):
    cfg = src.cfg
    ctxs = np.empty((cfg.batch, cfg.kernel * cfg.kernel * encoding.THRESHOLDS),
                    dtype=np.float32)
    tgts = np.empty((cfg.batch, 4), dtype=np.float32)
    for n in range(cfg.batch):
        ctxs[n], tgts[n] = src.draw_ups(rng)
    return ctxs, tgts


def arm_batch(src: SampleSource, rng):
    cfg = src.cfg
    ctxs = np.empty((cfg.batch, cfg.kernel * cfg.kernel * encoding.THRESHOLDS),
                    dtype=np.float32)
    vals = np.empty(cfg.batch, dtype=np.int64)
    for n in range(cfg.batch):
        ctxs[n], vals[n] = src.draw_arm(rng)
    return ctxs, vals
