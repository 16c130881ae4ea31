"""Laplace parameter mapping, discretization, and integer frequency tables.

The networks emit group averages in [0, 1].  The mean average maps to
mu = 255*ybar; the scale average maps through exp(logit(ybar)) = y/(1-y)
with y clamped to [1/1024, 1023/1024], so b is confined to
[1/1023, 1023].  The Laplace CDF is then integrated over each intensity's
quantization interval [v-0.5, v+0.5], with both tails folded into symbols
0 and 255, and the resulting distribution is quantized to integer
frequencies summing to F_TOTAL = 2^14 for the entropy coder.

Everything here must be bit-reproducible across platforms: the encoder
and the decoder each rebuild the frequency tables from network outputs,
so a single ulp of divergence desynchronizes the stream.  That is why
discretize() uses exp_neg(), a fixed range-reduced polynomial evaluated
in a pinned operation order, instead of the platform libm exponential.
The compiled kernels reimplement these routines with the identical
operation order; tests assert bit equality between the two routes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

F_BITS = 14
F_TOTAL = 1 << F_BITS

AVG_EPS = 1.0 / 1024.0
B_MIN = AVG_EPS / (1.0 - AVG_EPS)
B_MAX = (1.0 - AVG_EPS) / AVG_EPS
PROB_FLOOR = 2.0 ** -64

# Cody-Waite split of ln 2 plus log2(e), the constants used by fdlibm.
LOG2E = 1.4426950408889634074
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10


def exp_neg(x: float) -> float:
    """Deterministic e**x for x <= 0.

    Range reduction x = k*ln2 + r with |r| <= ln2/2, then a degree-13
    Taylor polynomial in Horner form and an exact 2**k scaling.  All
    steps are correctly-rounded IEEE double operations in a fixed order,
    so the result is identical on every platform.  Accuracy is far below
    1e-12 relative over the whole domain.
    """
    if x == 0.0:
        return 1.0
    if x < -746.0:
        return 0.0
    kf = math.floor(x * LOG2E + 0.5)
    hi = x - kf * LN2_HI
    r = hi - kf * LN2_LO
    p = 1.0 / 6227020800.0
    p = p * r + 1.0 / 479001600.0
    p = p * r + 1.0 / 39916800.0
    p = p * r + 1.0 / 3628800.0
    p = p * r + 1.0 / 362880.0
    p = p * r + 1.0 / 40320.0
    p = p * r + 1.0 / 5040.0
    p = p * r + 1.0 / 720.0
    p = p * r + 1.0 / 120.0
    p = p * r + 1.0 / 24.0
    p = p * r + 1.0 / 6.0
    p = p * r + 1.0 / 2.0
    p = p * r + 1.0
    p = p * r + 1.0
    return math.ldexp(p, int(kf))


def mu_from_average(ybar: float) -> float:
    """Location parameter: scale the group average to intensity units."""
    return 255.0 * ybar


def sigma_from_average(ybar: float) -> float:
    """Scale parameter b = exp(logit(y)) = y/(1-y), y clamped away from {0,1}.

    Monotone in ybar, b = 1 at ybar = 0.5, range [B_MIN, B_MAX].
    """
    y = ybar
    if y < AVG_EPS:
        y = AVG_EPS
    elif y > 1.0 - AVG_EPS:
        y = 1.0 - AVG_EPS
    return y / (1.0 - y)


@dataclass(frozen=True)
class LaplaceParams:
    """Per-pixel Laplace location and scale; b is clamped on construction."""

    mu: float
    b: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 255.0:
            raise ValueError(f"mu {self.mu} outside [0, 255]")
        b = self.b
        if b < B_MIN:
            b = B_MIN
        elif b > B_MAX:
            b = B_MAX
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class SymbolDistribution:
    """256 per-intensity probabilities, strictly positive, summing to ~1."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.probs, dtype=np.float64)
        if p.shape != (256,):
            raise ValueError(f"expected 256 probabilities, got shape {p.shape}")
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class FrequencyTable:
    """Integer frequencies for the entropy coder: freq >= 1, sum = F_TOTAL.

    cum[s] is the exclusive prefix sum, cum[256] = F_TOTAL.
    """

    freq: np.ndarray
    cum: np.ndarray
    total: int = field(default=F_TOTAL)


def fill_probs(mu: float, b: float, probs: np.ndarray) -> None:
    """Write the discretized Laplace pmf for (mu, b) into probs[0:256].

    Evaluated with one exp_neg per side of the distribution's center
    symbol and the geometric ratio g = e**(-1/b) marching outward, so the
    whole pmf costs three exponentials.  Tail mass beyond [-0.5, 255.5]
    folds into symbols 0 and 255.  Every entry is floored at PROB_FLOOR
    (2^-64) so downstream logs and frequencies stay finite; the floor
    adds at most 256*2^-64 of mass, far inside the 1e-9 sum tolerance.
    """
    g = exp_neg(-1.0 / b)
    mc = int(math.floor(mu + 0.5))
    e_l = exp_neg((mc - 0.5 - mu) / b)
    e_r = exp_neg(-((mc + 0.5 - mu) / b))
    if mc == 0:
        p = 1.0 - 0.5 * e_r
    elif mc == 255:
        p = 1.0 - 0.5 * e_l
    else:
        p = 0.5 * (1.0 - e_l) + 0.5 * (1.0 - e_r)
    if p < PROB_FLOOR:
        p = PROB_FLOOR
    probs[mc] = p
    e = e_l
    for s in range(mc - 1, -1, -1):
        if s == 0:
            p = 0.5 * e
        else:
            p = 0.5 * e * (1.0 - g)
        if p < PROB_FLOOR:
            p = PROB_FLOOR
        probs[s] = p
        e = e * g
    e = e_r
    for s in range(mc + 1, 256):
        if s == 255:
            p = 0.5 * e
        else:
            p = 0.5 * e * (1.0 - g)
        if p < PROB_FLOOR:
            p = PROB_FLOOR
        probs[s] = p
        e = e * g


def discretize(params: LaplaceParams) -> SymbolDistribution:
    """Integrate the Laplace density over every intensity's unit interval."""
    probs = np.empty(256, dtype=np.float64)
    fill_probs(params.mu, params.b, probs)
    return SymbolDistribution(probs)


def quantize_table(probs: np.ndarray, freq: np.ndarray, cum: np.ndarray) -> None:
    """Largest-remainder quantization of probs to integers summing to F_TOTAL.

    Steps, all deterministic: floor every probs[s]*F; hand the deficit to
    the largest remainders (ties to the lowest symbol, via a stable sort);
    bump zero frequencies to 1; drain the resulting surplus by repeatedly
    decrementing the currently-largest frequency (ties to the lowest
    symbol).  The drain can never push a frequency to 0 because while a
    surplus exists the maximum frequency exceeds F_TOTAL/256.
    """
    scaled = probs * float(F_TOTAL)
    base = np.floor(scaled)
    rem = scaled - base
    f = base.astype(np.int64)
    deficit = F_TOTAL - int(f.sum())
    if deficit > 0:
        order = np.argsort(-rem, kind="mergesort")
        for i in range(deficit):
            f[order[i]] += 1
    for s in range(256):
        if f[s] == 0:
            f[s] = 1
    surplus = int(f.sum()) - F_TOTAL
    while surplus > 0:
        mi = 0
        mv = f[0]
        for s in range(1, 256):
            if f[s] > mv:
                mv = f[s]
                mi = s
        f[mi] -= 1
        surplus -= 1
    freq[:] = f
    c = 0
    for s in range(256):
        cum[s] = c
        c += f[s]
    cum[256] = c


def quantize_freqs(d: SymbolDistribution) -> FrequencyTable:
    freq = np.empty(256, dtype=np.int64)
    cum = np.empty(257, dtype=np.int64)
    quantize_table(d.probs, freq, cum)
    return FrequencyTable(freq, cum)


def theoretical_bits(d: SymbolDistribution, v: int) -> float:
    """Ideal code length for intensity v under the model: -log2 p(v)."""
    if not 0 <= v <= 255:
        raise ValueError(f"intensity {v} outside [0, 255]")
    return -math.log2(d.probs[v])
