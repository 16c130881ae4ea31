"""Range-based asymmetric numeral system coder with byte renormalization.

State updates for a symbol s with frequency freq, cumulative cum and
total F = 2^F_BITS:

    encode:  x' = (x // freq) * F + cum[s] + x % freq
    decode:  m = x mod F;  find s with cum[s] <= m < cum[s+1];
             x' = freq[s] * (x // F) + m - cum[s]

The stream is LIFO: the decoder recovers symbols in the reverse of the
encoder's processing order, so callers that want forward decode order
feed the encoder backwards.  The 64-bit state is kept in
[RANS_L, 256*RANS_L) by emitting low bytes before each encode step and
re-absorbing them after each decode step.  flush() appends the final
8 state bytes high-first, so the decoder can seed itself from the tail
of the payload and then walk the renormalization bytes backwards.

encode_step / decode_step are the bare state updates with a caller-chosen
precision, usable for worked examples and tests; the classes implement
the full streaming coder at F_BITS = 14.
"""

from .errors import CorruptStreamError
from .prob import F_BITS, F_TOTAL, FrequencyTable

RANS_L = 1 << 31
# renormalized states stay below 2^39; encode emits bytes while
# x >= RENORM_FACTOR * freq so the next update cannot overflow
RENORM_FACTOR = (RANS_L >> F_BITS) << 8


def encode_step(x: int, freq: int, cum_s: int, f_bits: int = F_BITS) -> int:
    """One rANS encode update without renormalization."""
    return ((x // freq) << f_bits) + cum_s + (x % freq)


def decode_step(x: int, cum, f_bits: int = F_BITS):
    """One rANS decode update without renormalization.

    cum is the length-257 exclusive prefix array; returns (s, x').
    """
    mask = (1 << f_bits) - 1
    m = x & mask
    lo, hi = 0, 256
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if cum[mid] <= m:
            lo = mid
        else:
            hi = mid
    s = lo
    freq = cum[s + 1] - cum[s]
    return s, freq * (x >> f_bits) + m - cum[s]


class RansEncoder:
    """Streaming encoder; feed symbols in reverse of the desired decode order."""

    def __init__(self):
        self.x = RANS_L
        self._bytes = bytearray()

    def encode(self, s: int, ft: FrequencyTable) -> None:
        freq = int(ft.freq[s])
        cum_s = int(ft.cum[s])
        if freq < 1:
            raise ValueError(f"symbol {s} has zero frequency")
        x = self.x
        limit = RENORM_FACTOR * freq
        while x >= limit:
            self._bytes.append(x & 0xFF)
            x >>= 8
        self.x = ((x // freq) << F_BITS) + cum_s + (x % freq)

    def flush(self) -> bytes:
        """Append the 8 final-state bytes (high byte first) and return the payload."""
        for k in range(7, -1, -1):
            self._bytes.append((self.x >> (8 * k)) & 0xFF)
        return bytes(self._bytes)


class RansDecoder:
    """Streaming decoder over a flushed payload."""

    def __init__(self, payload: bytes):
        if len(payload) < 8:
            raise CorruptStreamError("payload shorter than the 8 flushed state bytes")
        self.payload = payload
        x = 0
        for byte in payload[-8:]:
            x = (x << 8) | byte
        self.x = x
        self.pos = len(payload) - 8

    def decode(self, ft: FrequencyTable) -> int:
        m = self.x & (F_TOTAL - 1)
        cum = ft.cum
        lo, hi = 0, 256
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if cum[mid] <= m:
                lo = mid
            else:
                hi = mid
        s = lo
        x = int(ft.freq[s]) * (self.x >> F_BITS) + m - int(cum[s])
        while x < RANS_L:
            if self.pos == 0:
                raise CorruptStreamError("payload exhausted with symbols outstanding")
            self.pos -= 1
            x = (x << 8) | self.payload[self.pos]
        self.x = x
        return s

    @property
    def exhausted(self) -> bool:
        """True once every encoded symbol has been decoded."""
        return self.pos == 0 and self.x == RANS_L
