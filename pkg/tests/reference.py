"""Independent straightforward reimplementations used as test oracles.

Everything here favors obviousness over speed and deliberately avoids
sharing code with the package: contexts are assembled value by value,
networks are simulated node by node with explicit truth-table lists,
the quantizer is the textbook largest-remainder procedure on Python
lists, and the rANS coder works on plain ints with a list as the byte
stack.  The reference codec wires these together following the written
contract; only the probability discretization is taken from the package
(payload comparisons need bit-identical frequency tables).
"""

import math

import numpy as np

from gicdlc import prob
from gicdlc.pyramid import decompose, level_shapes


def ref_thermometer(v):
    return [1 if v > t else 0 for t in range(255)]


def ref_window_values(value_at, i, j, k, h, w):
    """K x K window around (i, j), coordinates clamped into the image."""
    r = k // 2
    out = []
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            ci = min(max(i + di, 0), h - 1)
            cj = min(max(j + dj, 0), w - 1)
            out.append(value_at(ci, cj))
    return out


def ref_ups_context(lowres, i, j, k):
    h, w = lowres.shape
    vals = ref_window_values(lambda a, b: int(lowres[a, b]), i, j, k, h, w)
    bits = []
    for v in vals:
        bits.extend(ref_thermometer(v))
    return bits


def ref_arm_context(decoded, estimate, i, j, k):
    h, w = decoded.shape

    def value_at(ci, cj):
        if (ci, cj) < (i, j):
            return int(decoded[ci, cj])
        if estimate is None:
            return 0
        v = math.floor(float(estimate[ci, cj]) + 0.5)
        return min(max(v, 0), 255)

    vals = ref_window_values(value_at, i, j, k, h, w)
    bits = []
    for v in vals:
        bits.extend(ref_thermometer(v))
    return bits


def ref_net_sim(net, bits):
    """Node-by-node simulation with truth tables expanded to 64-entry lists."""
    acts = list(bits)
    for inp, tab in zip(net.layer_inputs, net.layer_tables):
        nxt = []
        for n in range(len(tab)):
            entries = [(int(tab[n]) >> t) & 1 for t in range(64)]
            t = 0
            for k in range(6):
                t += acts[int(inp[n, k])] * (2 ** k)
            nxt.append(entries[t])
        acts = nxt
    return [sum(acts[s:s + n]) / n for s, n in net.groups]


def ref_quantize(probs):
    """Textbook largest-remainder apportionment to 2^14 with a 1 floor."""
    F = 1 << 14
    scaled = [p * F for p in probs]
    freq = [math.floor(v) for v in scaled]
    rem = [v - f for v, f in zip(scaled, freq)]
    deficit = F - sum(freq)
    if deficit > 0:
        order = sorted(range(256), key=lambda s: (-rem[s], s))
        for s in order[:deficit]:
            freq[s] += 1
    freq = [max(f, 1) for f in freq]
    while sum(freq) > F:
        m = max(freq)
        freq[freq.index(m)] -= 1
    cum = [0]
    for f in freq:
        cum.append(cum[-1] + f)
    return freq, cum


def ref_params(avgs):
    mu = 255.0 * avgs[0]
    y = min(max(avgs[1], 1.0 / 1024.0), 1023.0 / 1024.0)
    return mu, y / (1.0 - y)


class RefRans:
    """Plain-integer rANS with an explicit byte stack."""

    L = 1 << 31
    F_BITS = 14

    @classmethod
    def encode(cls, pairs):
        """pairs = [(symbol, freq, cum), ...] in reverse decode order."""
        x = cls.L
        stack = []
        for s, freq, cum in pairs:
            while x >= ((cls.L >> cls.F_BITS) << 8) * freq:
                stack.append(x & 0xFF)
                x >>= 8
            x = (x // freq) * (1 << cls.F_BITS) + cum[s] + x % freq
        for k in range(7, -1, -1):
            stack.append((x >> (8 * k)) & 0xFF)
        return bytes(stack)

    @classmethod
    def decoder(cls, payload):
        x = int.from_bytes(payload[-8:], "big")
        rest = list(payload[:-8])
        state = {"x": x, "rest": rest}

        def step(freq, cum):
            m = state["x"] & ((1 << cls.F_BITS) - 1)
            s = 0
            while not (cum[s] <= m < cum[s + 1]):
                s += 1
            state["x"] = freq[s] * (state["x"] >> cls.F_BITS) + m - cum[s]
            while state["x"] < cls.L:
                state["x"] = (state["x"] << 8) | state["rest"].pop()
            return s

        return step, state


def _tables_for(mu, b, cache):
    key = (mu, b)
    if key not in cache:
        probs = np.empty(256, np.float64)
        prob.fill_probs(mu, b, probs)
        cache[key] = ref_quantize(list(probs))
    return cache[key]


def ref_ups_predict(lowres, net, out_shape):
    h, w = lowres.shape
    preds = np.zeros(out_shape, np.float64)
    for i in range(h):
        for j in range(w):
            avgs = ref_net_sim(net, ref_ups_context(lowres, i, j, net.kernel))
            for g in range(4):
                oi, oj = 2 * i + g // 2, 2 * j + g % 2
                if oi < out_shape[0] and oj < out_shape[1]:
                    preds[oi, oj] = 255.0 * avgs[g]
    return preds


def ref_encode(img, ups, arm, levels, trace=None):
    """Full reference encoder; returns the rANS payload bytes."""
    pyr = decompose(img, levels)
    cache = {}
    pairs = []
    for lev in range(levels, -1, -1):
        plane = pyr[lev]
        est = None if lev == levels else ref_ups_predict(pyr[lev + 1], ups, plane.shape)
        h, w = plane.shape
        for i in range(h):
            for j in range(w):
                bits = ref_arm_context(plane, est, i, j, arm.kernel)
                mu, b = ref_params(ref_net_sim(arm, bits))
                freq, cum = _tables_for(mu, b, cache)
                if trace is not None:
                    trace.append((lev, i, j, mu, b, tuple(freq)))
                pairs.append((int(plane[i, j]), freq[int(plane[i, j])], cum))
    return RefRans.encode(list(reversed(pairs)))


def ref_decode(payload, ups, arm, height, width, levels, trace=None):
    """Full reference decoder; returns the level-0 image."""
    shapes = level_shapes((height, width), levels)
    step, state = RefRans.decoder(payload)
    cache = {}
    planes = [None] * (levels + 1)
    for lev in range(levels, -1, -1):
        h, w = shapes[lev]
        decoded = np.zeros((h, w), np.uint8)
        est = None if lev == levels else ref_ups_predict(planes[lev + 1], ups, (h, w))
        for i in range(h):
            for j in range(w):
                bits = ref_arm_context(decoded, est, i, j, arm.kernel)
                mu, b = ref_params(ref_net_sim(arm, bits))
                freq, cum = _tables_for(mu, b, cache)
                if trace is not None:
                    trace.append((lev, i, j, mu, b, tuple(freq)))
                decoded[i, j] = step(freq, cum)
        planes[lev] = decoded
    assert state["x"] == RefRans.L and not state["rest"], "stream did not drain"
    return planes[0]
