"""Dataset augmentation: the eight dihedral variants of an image."""

import numpy as np


def dihedral(img: np.ndarray, rotations: int, flip: bool) -> np.ndarray:
    """Apply an optional horizontal flip, then rotate by 90 deg steps."""
    out = np.fliplr(img) if flip else img
    return np.ascontiguousarray(np.rot90(out, rotations % 4))


def augment(img: np.ndarray, rng) -> np.ndarray:
    """Uniform choice among the 8 flip/rotation variants, pixel-exact."""
    v = int(rng.integers(8))
    return dihedral(img, v & 3, bool(v >> 2))
