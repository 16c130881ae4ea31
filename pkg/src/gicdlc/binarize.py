"""Thermometer binarization and context window assembly.

The networks consume binary inputs only.  A pixel value v in [0, 255] is
expanded into 255 threshold bits, bit t = 1 iff v > t.  A context is a
K x K window of pixels around a target location (edge-clamped), flattened
window-position-major: bit index (p * C + c) * 255 + t for window position
p (row-major), channel c, threshold t.

These are the plain-numpy reference implementations; the compiled kernels
in _kernels.py must agree with them bit for bit.
"""

from dataclasses import dataclass

import numpy as np

THRESHOLDS = 255


def thermometer(values) -> np.ndarray:
    """Thermometer-encode an array of uint8 values.

    Output has one extra trailing axis of length 255, dtype uint8, where
    out[..., t] = 1 iff value > t.
    """
    v = np.asarray(values)
    if v.size and (v.min() < 0 or v.max() > 255):
        raise ValueError("values outside [0, 255]")
    t = np.arange(THRESHOLDS, dtype=np.int64)
    return (v[..., None].astype(np.int64) > t).astype(np.uint8)


@dataclass(frozen=True)
class ContextSpec:
    """Geometry of a context window.

    window: K, the side of the square window (odd).
    channels: C, number of image planes stacked per window position.
    """

    window: int
    channels: int

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")

    @property
    def bits(self) -> int:
        return self.window * self.window * self.channels * THRESHOLDS


def _clamp(idx: int, size: int) -> int:
    if idx < 0:
        return 0
    if idx >= size:
        return size - 1
    return idx


def assemble_context(planes: list[np.ndarray], i: int, j: int, spec: ContextSpec) -> np.ndarray:
    """Gather the K x K x C window around (i, j) and thermometer-encode it.

    All planes must share one shape; window positions outside the image
    are clamped to the nearest in-image pixel.  Returns a flat uint8
    vector of spec.bits entries.
    """
    if len(planes) != spec.channels:
        raise ValueError(f"expected {spec.channels} planes, got {len(planes)}")
    h, w = planes[0].shape
    k = spec.window
    r = k // 2
    vals = np.empty(k * k * spec.channels, dtype=np.uint8)
    p = 0
    for di in range(-r, r + 1):
        ii = _clamp(i + di, h)
        for dj in range(-r, r + 1):
            jj = _clamp(j + dj, w)
            for c in range(spec.channels):
                vals[p * spec.channels + c] = planes[c][ii, jj]
            p += 1
    return thermometer(vals).reshape(-1)


def assemble_ups_context(lowres: np.ndarray, i: int, j: int, spec: ContextSpec) -> np.ndarray:
    """Upsampler input: the K x K window of the coarser level around (i, j)."""
    lowres = np.asarray(lowres)
    if lowres.ndim != 2 or spec.channels != 1:
        raise ValueError("upsampler contexts are single-channel")
    h, w = lowres.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"position ({i}, {j}) outside {h}x{w} image")
    return assemble_context([lowres], i, j, spec)


def round_half_up(value: float) -> int:
    """The codec's estimate-to-intensity rounding: floor(x + 0.5), clamped."""
    v = int(np.floor(value + 0.5))
    if v < 0:
        return 0
    if v > 255:
        return 255
    return v


def assemble_arm_context(decoded: np.ndarray, ups_estimate, i: int, j: int,
                         spec: ContextSpec) -> np.ndarray:
    """Autoregressive input at scan position (i, j).

    Window values come from `decoded` at positions strictly before (i, j)
    in raster order, and from the rounded upsampler estimate elsewhere;
    with no estimate (the coarsest level) undecoded positions read 0.
    Border positions take the value the rule produces at the nearest
    in-image position.
    """
    decoded = np.asarray(decoded)
    if decoded.ndim != 2 or spec.channels != 1:
        raise ValueError("autoregressive contexts are single-channel")
    h, w = decoded.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"position ({i}, {j}) outside {h}x{w} image")
    plane = np.empty((h, w), dtype=np.uint8)
    for ci in range(h):
        for cj in range(w):
            if ci < i or (ci == i and cj < j):
                plane[ci, cj] = decoded[ci, cj]
            elif ups_estimate is None:
                plane[ci, cj] = 0
            else:
                plane[ci, cj] = round_half_up(float(ups_estimate[ci, cj]))
    return assemble_context([plane], i, j, spec)
