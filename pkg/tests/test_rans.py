import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gicdlc.errors import CorruptStreamError
from gicdlc.prob import F_BITS, F_TOTAL, FrequencyTable
from gicdlc.rans import (
    RANS_L,
    RansDecoder,
    RansEncoder,
    decode_step,
    encode_step,
)
from reference import RefRans


def make_table(freq):
    freq = np.asarray(freq, dtype=np.int64)
    assert freq.sum() == F_TOTAL
    cum = np.zeros(257, dtype=np.int64)
    np.cumsum(freq, out=cum[1:])
    return FrequencyTable(freq, cum)


def geometric_table(ratio=0.97):
    w = ratio ** np.arange(256)
    p = w / w.sum()
    freq = np.maximum(1, np.floor(p * F_TOTAL).astype(np.int64))
    freq[0] += F_TOTAL - freq.sum()
    return make_table(freq)


def test_transition_hand_example():
    # x=10, total 2^3, symbol freq 2 at cumulative offset 4:
    # x' = (10//2)*8 + 4 + (10%2) = 44, and the inverse recovers (s, 10)
    x2 = encode_step(10, 2, 4, f_bits=3)
    assert x2 == 44
    # 4 symbols of freq 2; pad the prefix array to the 257 entries the
    # search expects
    cum = [0, 2, 4, 6] + [8] * 253
    s, x = decode_step(44, cum, f_bits=3)
    assert s == 2
    assert x == 10


def test_transition_roundtrip_property():
    rng = np.random.default_rng(10)
    ft = geometric_table()
    cum = ft.cum.tolist()
    for _ in range(2000):
        s = int(rng.integers(0, 256))
        x = int(rng.integers(RANS_L, 1 << 39))
        f = int(ft.freq[s])
        x2 = encode_step(x, f, int(ft.cum[s]))
        s2, x3 = decode_step(x2, cum)
        assert s2 == s
        assert x3 == x


def test_stream_roundtrip_single_table():
    rng = np.random.default_rng(11)
    ft = geometric_table()
    p = ft.freq / ft.freq.sum()
    symbols = rng.choice(256, 5000, p=p)
    enc = RansEncoder()
    for s in reversed(symbols):  # encoder consumes reverse decode order
        enc.encode(int(s), ft)
    payload = enc.flush()
    dec = RansDecoder(payload)
    out = [dec.decode(ft) for _ in range(len(symbols))]
    assert out == symbols.tolist()
    assert dec.exhausted


def test_stream_roundtrip_mixed_tables():
    rng = np.random.default_rng(12)
    tables = [geometric_table(r) for r in (0.5, 0.9, 0.999)]
    plan = [(int(rng.integers(0, 256)), tables[int(rng.integers(0, 3))])
            for _ in range(3000)]
    enc = RansEncoder()
    for s, ft in reversed(plan):
        enc.encode(s, ft)
    payload = enc.flush()
    dec = RansDecoder(payload)
    for s, ft in plan:
        assert dec.decode(ft) == s
    assert dec.exhausted


def test_empty_stream_flush_and_drain():
    payload = RansEncoder().flush()
    assert len(payload) == 8
    assert int.from_bytes(payload, "big") == RANS_L
    dec = RansDecoder(payload)
    assert dec.exhausted


def test_payload_matches_plain_integer_model():
    rng = np.random.default_rng(13)
    ft = geometric_table(0.93)
    symbols = [int(s) for s in rng.integers(0, 256, 1200)]
    enc = RansEncoder()
    for s in reversed(symbols):
        enc.encode(s, ft)
    got = enc.flush()
    cum = ft.cum.tolist()
    pairs = [(s, int(ft.freq[s]), cum) for s in reversed(symbols)]
    want = RefRans.encode(pairs)
    assert got == want


def test_decoder_rejects_short_payload():
    with pytest.raises(CorruptStreamError):
        RansDecoder(b"\x00" * 7)


def test_decoder_starvation():
    ft = geometric_table()
    enc = RansEncoder()
    for s in (3, 200, 77):
        enc.encode(s, ft)
    payload = enc.flush()
    dec = RansDecoder(payload)
    for _ in range(3):
        dec.decode(ft)
    assert dec.exhausted
    # asking for more symbols than were coded; skewed tables force renorms
    skew = np.ones(256, dtype=np.int64)
    skew[0] = F_TOTAL - 255
    hungry = make_table(skew)
    with pytest.raises(CorruptStreamError):
        for _ in range(64):
            dec.decode(hungry)


def test_encoder_rejects_zero_freq():
    freq = np.ones(256, dtype=np.int64)
    freq[0] = 0
    freq[1] = F_TOTAL - 254
    cum = np.zeros(257, dtype=np.int64)
    np.cumsum(freq, out=cum[1:])
    ft = FrequencyTable(freq, cum)
    enc = RansEncoder()
    with pytest.raises(ValueError):
        enc.encode(0, ft)


def test_state_bounds_through_stream():
    # the working state stays in [L, 2^39) after every operation
    rng = np.random.default_rng(14)
    ft = geometric_table(0.98)
    enc = RansEncoder()
    for s in rng.integers(0, 256, 4000):
        enc.encode(int(s), ft)
        assert RANS_L <= enc.x < 1 << 39
    payload = enc.flush()
    dec = RansDecoder(payload)
    for _ in range(4000):
        dec.decode(ft)
        assert RANS_L <= dec.x < 1 << 39 or dec.exhausted


def test_near_optimality_small():
    # payload within a tenth of a percent of the table entropy
    rng = np.random.default_rng(15)
    ft = geometric_table(0.96)
    p = ft.freq / float(F_TOTAL)
    n = 20000
    symbols = rng.choice(256, n, p=p)
    enc = RansEncoder()
    for s in reversed(symbols):
        enc.encode(int(s), ft)
    payload = enc.flush()
    ideal = -np.log2(p[symbols]).sum()
    assert len(payload) * 8 <= ideal + 0.001 * n + 128


@given(st.lists(st.integers(0, 255), min_size=0, max_size=400),
       st.sampled_from([0.6, 0.95, 0.999]))
@settings(max_examples=50, deadline=None)
def test_roundtrip_hypothesis(symbols, ratio):
    ft = geometric_table(ratio)
    enc = RansEncoder()
    for s in reversed(symbols):
        enc.encode(s, ft)
    dec = RansDecoder(enc.flush())
    assert [dec.decode(ft) for _ in symbols] == symbols
    assert dec.exhausted
