"""Input encoding for training: thermometer bits, pyramid levels, contexts.

The trainer talks to the codec only through files, so it carries its own
copy of the input conventions the deployed models will see: 255-threshold
thermometer codes, 2x2 average pooling with round-half-up, and K x K
edge-clamped context windows laid out window-position-major.  Training
data built here must match what the codec assembles at decode time, or
the hardened models would be trained on the wrong distribution.

Everything here is single-channel; the trainer only produces C=1 models.
"""

import numpy as np

THRESHOLDS = 255


def thermometer(values) -> np.ndarray:
    """Threshold-encode values in [0, 255]; out[..., t] = 1 iff v > t."""
    v = np.asarray(values)
    if v.size and (v.min() < 0 or v.max() > 255):
        raise ValueError("values outside [0, 255]")
    t = np.arange(THRESHOLDS, dtype=np.int64)
    return (v[..., None].astype(np.int64) > t).astype(np.uint8)


def downsample_once(img: np.ndarray) -> np.ndarray:
    """2x2 average pooling, round half up, odd edges replicated."""
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("expected a 2-d grayscale image")
    if img.shape[0] % 2:
        img = np.concatenate([img, img[-1:, :]], axis=0)
    if img.shape[1] % 2:
        img = np.concatenate([img, img[:, -1:]], axis=1)
    s = img.astype(np.uint32)
    total = s[0::2, 0::2] + s[0::2, 1::2] + s[1::2, 0::2] + s[1::2, 1::2]
    return ((total + 2) >> 2).astype(np.uint8)


def decompose(img: np.ndarray, levels: int) -> list:
    """Build the L+1 pyramid levels, finest first."""
    out = [np.asarray(img, dtype=np.uint8)]
    for _ in range(levels):
        if min(out[-1].shape) < 2:
            raise ValueError("pyramid level would collapse below 1x1")
        out.append(downsample_once(out[-1]))
    return out


def _clamp(idx: int, size: int) -> int:
    return 0 if idx < 0 else size - 1 if idx >= size else idx


def window_values(plane: np.ndarray, i: int, j: int, kernel: int) -> np.ndarray:
    """K*K window pixels around (i, j), row-major, edges clamped."""
    h, w = plane.shape
    r = kernel // 2
    vals = np.empty(kernel * kernel, dtype=np.uint8)
    p = 0
    for di in range(-r, r + 1):
        ii = _clamp(i + di, h)
        for dj in range(-r, r + 1):
            vals[p] = plane[ii, _clamp(j + dj, w)]
            p += 1
    return vals


def ups_context(lowres: np.ndarray, i: int, j: int, kernel: int) -> np.ndarray:
    """Upsampler input bits: thermometer codes of the K x K window."""
    return thermometer(window_values(lowres, i, j, kernel)).reshape(-1)


def round_half_up(value: float) -> int:
    v = int(np.floor(value + 0.5))
    return 0 if v < 0 else 255 if v > 255 else v


def arm_context(truth: np.ndarray, prior, i: int, j: int, kernel: int) -> np.ndarray:
    """Autoregressive input bits at scan position (i, j).

    Window positions strictly before (i, j) in raster order read the true
    (will-be-decoded) pixels; the rest read the rounded upsampler prior,
    or 0 when there is none (the coarsest level).  Out-of-image positions
    clamp to the nearest in-image pixel before the before/after rule.
    """
    h, w = truth.shape
    r = kernel // 2
    vals = np.empty(kernel * kernel, dtype=np.uint8)
    p = 0
    for di in range(-r, r + 1):
        ci = _clamp(i + di, h)
        for dj in range(-r, r + 1):
            cj = _clamp(j + dj, w)
            if ci < i or (ci == i and cj < j):
                vals[p] = truth[ci, cj]
            elif prior is None:
                vals[p] = 0
            else:
                vals[p] = round_half_up(float(prior[ci, cj]))
            p += 1
    return thermometer(vals).reshape(-1)
