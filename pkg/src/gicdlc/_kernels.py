"""Compiled inner loops for the codec hot path.

Every routine here mirrors a pure-Python reference in prob.py, rans.py,
binarize.py or lutnet.py with the identical operation order, because the
bitstream depends on bit-exact agreement between the encoder's decoder
simulation and the real decoder.  Tests assert bit equality between the
two routes.  No fastmath anywhere: reassociation would break the
determinism contract.

The kernels operate on flat arrays only (see HardLutNetwork.packed) and
report stream errors through a small int64 state array instead of
exceptions; the codec module translates those flags.
"""

import math

import numpy as np
from numba import njit

F_BITS = 14
F_TOTAL = 1 << F_BITS
RANS_L = 1 << 31
AVG_EPS = 1.0 / 1024.0
PROB_FLOOR = 2.0 ** -64

LOG2E = 1.4426950408889634074
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10

THRESHOLDS = 255


@njit(cache=True)
def k_exp_neg(x):
    # mirrors prob.exp_neg bit for bit
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
    return math.ldexp(p, np.int64(kf))


@njit(cache=True)
def k_exp_neg_arr(xs, out):
    for i in range(xs.shape[0]):
        out[i] = k_exp_neg(xs[i])


@njit(cache=True)
def k_fill_probs(mu, b, probs):
    # mirrors prob.fill_probs
    g = k_exp_neg(-1.0 / b)
    mc = np.int64(math.floor(mu + 0.5))
    e_l = k_exp_neg((mc - 0.5 - mu) / b)
    e_r = k_exp_neg(-((mc + 0.5 - mu) / b))
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


@njit(cache=True)
def k_quantize(probs, freq, cum):
    # mirrors prob.quantize_table
    scaled = probs * 16384.0
    base = np.floor(scaled)
    rem = scaled - base
    f = base.astype(np.int64)
    total = np.int64(0)
    for s in range(256):
        total += f[s]
    deficit = F_TOTAL - total
    if deficit > 0:
        order = np.argsort(-rem, kind="mergesort")
        for i in range(deficit):
            f[order[i]] += 1
    for s in range(256):
        if f[s] == 0:
            f[s] = 1
    total = np.int64(0)
    for s in range(256):
        total += f[s]
    surplus = total - F_TOTAL
    while surplus > 0:
        mi = 0
        mv = f[0]
        for s in range(1, 256):
            if f[s] > mv:
                mv = f[s]
                mi = s
        f[mi] -= 1
        surplus -= 1
    for s in range(256):
        freq[s] = f[s]
    c = np.int64(0)
    for s in range(256):
        cum[s] = c
        c += f[s]
    cum[256] = c


@njit(cache=True)
def k_gather_context(plane, i, j, kernel, bits):
    # K x K window around (i, j), edge clamped, thermometer encoded,
    # window positions row-major; single channel
    h, w = plane.shape
    r = kernel >> 1
    p = 0
    for di in range(-r, r + 1):
        ii = i + di
        if ii < 0:
            ii = 0
        elif ii >= h:
            ii = h - 1
        for dj in range(-r, r + 1):
            jj = j + dj
            if jj < 0:
                jj = 0
            elif jj >= w:
                jj = w - 1
            v = plane[ii, jj]
            base = p * THRESHOLDS
            for t in range(v):
                bits[base + t] = 1
            for t in range(v, THRESHOLDS):
                bits[base + t] = 0
            p += 1


@njit(cache=True)
def k_net_apply(in_bits, node_in, node_tab, layer_off, buf_a, buf_b, gstart, gsize, out):
    n_layers = layer_off.shape[0] - 1
    src = in_bits
    for l in range(n_layers):
        lo = layer_off[l]
        hi = layer_off[l + 1]
        dst = buf_a if (l & 1) == 0 else buf_b
        for n in range(lo, hi):
            idx = np.int64(0)
            for k in range(6):
                idx |= np.int64(src[node_in[n, k]]) << k
            dst[n - lo] = (node_tab[n] >> idx) & 1
        src = dst
    for g in range(gstart.shape[0]):
        acc = np.int64(0)
        start = gstart[g]
        for n in range(start, start + gsize[g]):
            acc += src[n]
        out[g] = acc / gsize[g]


@njit(cache=True)
def k_ups_predict(lowres, node_in, node_tab, layer_off, gstart, gsize, kernel,
                  widest, out_h, out_w):
    # one inference per lowres pixel; group g fills block pixel
    # (2i + g//2, 2j + g%2); positions beyond the true dims are dropped
    in_w = kernel * kernel * THRESHOLDS
    bits = np.empty(in_w, np.uint8)
    buf_a = np.empty(widest, np.uint8)
    buf_b = np.empty(widest, np.uint8)
    out = np.empty(gstart.shape[0], np.float64)
    preds = np.zeros((out_h, out_w), np.float64)
    lh, lw = lowres.shape
    for i in range(lh):
        for j in range(lw):
            k_gather_context(lowres, i, j, kernel, bits)
            k_net_apply(bits, node_in, node_tab, layer_off, buf_a, buf_b,
                        gstart, gsize, out)
            for g in range(4):
                oi = 2 * i + (g >> 1)
                oj = 2 * j + (g & 1)
                if oi < out_h and oj < out_w:
                    preds[oi, oj] = 255.0 * out[g]
    return preds


@njit(cache=True)
def k_encode_level(canvas, plane, node_in, node_tab, layer_off, gstart, gsize,
                   kernel, widest, mu_arr, b_arr, sym_arr, off):
    # decoder simulation: model inputs come from the canvas (prior values
    # ahead of the scan, real pixels behind it), symbols from the plane
    h, w = plane.shape
    in_w = kernel * kernel * THRESHOLDS
    bits = np.empty(in_w, np.uint8)
    buf_a = np.empty(widest, np.uint8)
    buf_b = np.empty(widest, np.uint8)
    out = np.empty(gstart.shape[0], np.float64)
    idx = off
    for i in range(h):
        for j in range(w):
            k_gather_context(canvas, i, j, kernel, bits)
            k_net_apply(bits, node_in, node_tab, layer_off, buf_a, buf_b,
                        gstart, gsize, out)
            mu_arr[idx] = 255.0 * out[0]
            y = out[1]
            if y < AVG_EPS:
                y = AVG_EPS
            elif y > 1.0 - AVG_EPS:
                y = 1.0 - AVG_EPS
            b_arr[idx] = y / (1.0 - y)
            sym_arr[idx] = plane[i, j]
            canvas[i, j] = plane[i, j]
            idx += 1
    return idx


@njit(cache=True)
def k_decode_level(canvas, payload, st, node_in, node_tab, layer_off, gstart,
                   gsize, kernel, widest, mu_arr, b_arr, off):
    # sequential rANS decode of one level; canvas arrives holding the
    # prior values and leaves holding the decoded pixels.
    # st = [state x, unread byte count, error flag]
    h, w = canvas.shape
    in_w = kernel * kernel * THRESHOLDS
    bits = np.empty(in_w, np.uint8)
    buf_a = np.empty(widest, np.uint8)
    buf_b = np.empty(widest, np.uint8)
    out = np.empty(gstart.shape[0], np.float64)
    probs = np.empty(256, np.float64)
    freq = np.empty(256, np.int64)
    cum = np.empty(257, np.int64)
    have = False
    cmu = 0.0
    cb = 0.0
    x = st[0]
    pos = st[1]
    idx = off
    for i in range(h):
        for j in range(w):
            k_gather_context(canvas, i, j, kernel, bits)
            k_net_apply(bits, node_in, node_tab, layer_off, buf_a, buf_b,
                        gstart, gsize, out)
            mu = 255.0 * out[0]
            y = out[1]
            if y < AVG_EPS:
                y = AVG_EPS
            elif y > 1.0 - AVG_EPS:
                y = 1.0 - AVG_EPS
            b = y / (1.0 - y)
            mu_arr[idx] = mu
            b_arr[idx] = b
            idx += 1
            if (not have) or mu != cmu or b != cb:
                k_fill_probs(mu, b, probs)
                k_quantize(probs, freq, cum)
                cmu = mu
                cb = b
                have = True
            m = x & (F_TOTAL - 1)
            lo = 0
            hi = 256
            while hi - lo > 1:
                mid = (lo + hi) >> 1
                if cum[mid] <= m:
                    lo = mid
                else:
                    hi = mid
            s = lo
            x = freq[s] * (x >> F_BITS) + m - cum[s]
            while x < RANS_L:
                if pos == 0:
                    st[0] = x
                    st[1] = pos
                    st[2] = 1
                    return idx
                pos -= 1
                x = (x << 8) | np.int64(payload[pos])
            canvas[i, j] = s
    st[0] = x
    st[1] = pos
    return idx


@njit(cache=True)
def k_rans_encode(mu_arr, b_arr, sym_arr, n, out_bytes):
    # reverse-order streaming encode over the collected per-pixel params;
    # returns the payload length written into out_bytes
    probs = np.empty(256, np.float64)
    freq = np.empty(256, np.int64)
    cum = np.empty(257, np.int64)
    have = False
    cmu = 0.0
    cb = 0.0
    x = np.int64(RANS_L)
    w = 0
    for i in range(n - 1, -1, -1):
        mu = mu_arr[i]
        b = b_arr[i]
        if (not have) or mu != cmu or b != cb:
            k_fill_probs(mu, b, probs)
            k_quantize(probs, freq, cum)
            cmu = mu
            cb = b
            have = True
        s = sym_arr[i]
        f = freq[s]
        limit = f << 25
        while x >= limit:
            out_bytes[w] = x & 0xFF
            w += 1
            x >>= 8
        x = ((x // f) << F_BITS) + cum[s] + (x % f)
    for k in range(7, -1, -1):
        out_bytes[w] = (x >> (8 * k)) & 0xFF
        w += 1
    return w


@njit(cache=True)
def k_theoretical_bits(mu_arr, b_arr, sym_arr, start, end):
    # sum of ideal code lengths over one level's pixels
    probs = np.empty(256, np.float64)
    have = False
    cmu = 0.0
    cb = 0.0
    total = 0.0
    for i in range(start, end):
        mu = mu_arr[i]
        b = b_arr[i]
        if (not have) or mu != cmu or b != cb:
            k_fill_probs(mu, b, probs)
            cmu = mu
            cb = b
            have = True
        total += -math.log2(probs[sym_arr[i]])
    return total
