"""Handcrafted deterministic models for tests and demos.

These fixtures exercise the full coding pipeline without any training:

* make_uniform_arm builds an ARM whose two group averages are exactly 0.5
  on every input, so every pixel is coded against the same discretized
  Laplace with mu = 127.5 and b = 1.
* make_passthrough_ups builds a UPS that replicates the window's center
  pixel into all four block outputs (nearest-neighbor upsampling), exact
  when group_size = 255 and within 255/group_size otherwise via strided
  thermometer taps.

Both validate cleanly and are small enough for exhaustive tests.
"""

import numpy as np

from .lutnet import HardLutNetwork

TABLE_ZEROS = np.uint64(0)
TABLE_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
# output = input bit 0: table entry t is bit 0 of t
TABLE_PASS0 = np.uint64(0xAAAAAAAAAAAAAAAA)


def _const_inputs(n: int) -> np.ndarray:
    return np.zeros((n, 6), dtype=np.int64)


def make_uniform_arm(kernel: int = 3, channels: int = 1, levels: int = 2,
                     layer_sizes=(8, 8)) -> HardLutNetwork:
    """ARM fixture: both group averages are 0.5 for every context."""
    first, last = layer_sizes
    if last % 4:
        raise ValueError("last layer size must be divisible by 4")
    tables0 = np.full(first, TABLE_ZEROS, dtype=np.uint64)
    half = last // 2
    quarter = half // 2
    tables1 = np.empty(last, dtype=np.uint64)
    for g in range(2):
        base = g * half
        tables1[base:base + quarter] = TABLE_ONES
        tables1[base + quarter:base + half] = TABLE_ZEROS
    groups = [(0, half), (half, half)]
    return HardLutNetwork(
        "ARM", kernel, channels, levels,
        [_const_inputs(first), _const_inputs(last)],
        [tables0, tables1],
        groups,
    )


def make_passthrough_ups(kernel: int = 3, channels: int = 1, levels: int = 2,
                         group_size: int = 64) -> HardLutNetwork:
    """UPS fixture: nearest-neighbor upsampling via center-pixel taps.

    Layer 0 holds group_size passthrough nodes wired to evenly strided
    thermometer bits of the window's center pixel; the last layer repeats
    them once per output group.  The group average is then the fraction
    of sampled thresholds below the center value, so the prediction
    255*avg tracks the center pixel within 255/group_size (exactly, when
    group_size = 255).
    """
    if not 1 <= group_size <= 255:
        raise ValueError("group_size must be in 1..255")
    center = (kernel * kernel) // 2
    bit_base = center * channels * 255
    taps = np.array([bit_base + (m * 255) // group_size for m in range(group_size)],
                    dtype=np.int64)
    inputs0 = np.zeros((group_size, 6), dtype=np.int64)
    inputs0[:, 0] = taps
    tables0 = np.full(group_size, TABLE_PASS0, dtype=np.uint64)
    last = 4 * channels * group_size
    inputs1 = np.zeros((last, 6), dtype=np.int64)
    inputs1[:, 0] = np.arange(last, dtype=np.int64) % group_size
    tables1 = np.full(last, TABLE_PASS0, dtype=np.uint64)
    groups = [(g * group_size, group_size) for g in range(4 * channels)]
    return HardLutNetwork(
        "UPS", kernel, channels, levels,
        [inputs0, inputs1],
        [tables0, tables1],
        groups,
    )


def make_constant_ups(kernel: int = 3, channels: int = 1, levels: int = 2,
                      ones: bool = True) -> HardLutNetwork:
    """UPS whose every node is constant: predicts 255 (ones) or 0 everywhere."""
    table = TABLE_ONES if ones else TABLE_ZEROS
    last = 8 * channels
    tables0 = np.full(8, table, dtype=np.uint64)
    tables1 = np.full(last, table, dtype=np.uint64)
    groups = [(g * 2, 2) for g in range(4 * channels)]
    return HardLutNetwork(
        "UPS", kernel, channels, levels,
        [_const_inputs(8), _const_inputs(last)],
        [tables0, tables1],
        groups,
    )


def fixture_pair(levels: int = 2, kernel: int = 3):
    """The standard (ups, arm) fixture pair for a given pyramid depth."""
    return (
        make_passthrough_ups(kernel=kernel, levels=levels),
        make_uniform_arm(kernel=kernel, levels=levels),
    )
