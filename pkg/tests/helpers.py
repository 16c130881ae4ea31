"""Shared test utilities: IDX writing, numeric oracles, random model builders."""

import math
import struct

import numpy as np

from gicdlc.lutnet import HardLutNetwork


def write_idx_images(images: np.ndarray) -> bytes:
    """Inverse of eval.load_idx for roundtrip tests."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    n, h, w = images.shape
    return struct.pack(">IIII", 0x00000803, n, h, w) + images.tobytes()


def write_idx_labels(labels) -> bytes:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    return struct.pack(">II", 0x00000801, len(labels)) + labels.tobytes()


def adaptive_simpson(f, a, b, tol=1e-13, depth=48):
    """Plain adaptive Simpson quadrature, independent of the code under test."""

    def simpson(x0, x2):
        x1 = 0.5 * (x0 + x2)
        return (x2 - x0) / 6.0 * (f(x0) + 4.0 * f(x1) + f(x2)), x1

    def recurse(x0, x2, whole, x1, eps, d):
        left, lm = simpson(x0, x1)
        right, rm = simpson(x1, x2)
        if d <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, x1, left, lm, eps / 2.0, d - 1)
                + recurse(x1, x2, right, rm, eps / 2.0, d - 1))

    whole, mid = simpson(a, b)
    return recurse(a, b, whole, mid, tol, depth)


def laplace_density(mu, b):
    return lambda x: math.exp(-abs(x - mu) / b) / (2.0 * b)


def laplace_interval_mass(mu, b, lo, hi):
    """Numerically integrate the Laplace density over [lo, hi], splitting
    at the kink; tails are truncated where the density is below 1e-25."""
    reach = b * 60.0  # exp(-60) ~ 9e-27
    lo = max(lo, mu - reach - 1.0)
    hi = min(hi, mu + reach + 1.0)
    if hi <= lo:
        return 0.0
    f = laplace_density(mu, b)
    if lo < mu < hi:
        return adaptive_simpson(f, lo, mu) + adaptive_simpson(f, mu, hi)
    return adaptive_simpson(f, lo, hi)


def random_net(rng, role="ARM", kernel=3, channels=1, levels=2, sizes=(16, 8)):
    """A structurally valid network with random wiring and truth tables."""
    width = kernel * kernel * channels * 255
    layer_inputs, layer_tables = [], []
    feed = width
    for size in sizes:
        layer_inputs.append(rng.integers(0, feed, (size, 6)).astype(np.int64))
        layer_tables.append(rng.integers(0, 1 << 64, size, dtype=np.uint64))
        feed = size
    last = sizes[-1]
    n_groups = 4 * channels if role == "UPS" else 2 * channels
    assert last % n_groups == 0
    gs = last // n_groups
    groups = [(g * gs, gs) for g in range(n_groups)]
    return HardLutNetwork(role, kernel, channels, levels, layer_inputs, layer_tables, groups)


def matched_noise_image(rng, shape, b=1.0):
    """Pixels Laplace-distributed around 127.5: roughly what the uniform
    ARM fixture models, so ideal and actual code lengths line up."""
    noise = rng.laplace(127.5, b, shape)
    return np.clip(np.floor(noise + 0.5), 0, 255).astype(np.uint8)


def max_pyramid_levels(h, w):
    n = 0
    while (h, w) != (1, 1):
        h, w = (h + 1) // 2, (w + 1) // 2
        n += 1
    return n
