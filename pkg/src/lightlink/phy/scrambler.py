"""Frame-synchronous scrambler, generator x^7 + x^4 + 1.

The register is r[0..6] = x1..x7; bit i of the integer seed initializes
x_{i+1}.  Each step outputs x4 xor x7 and shifts that bit in at x1.  The
keystream has period 127, so it is generated once per seed and tiled.
"""

from __future__ import annotations

import numpy as np

_PERIOD = 127
_cache: dict[int, np.ndarray] = {}


def keystream(seed: int, n: int) -> np.ndarray:
    """First n keystream bits for the given 7-bit nonzero seed."""
    if not 0 < seed < 128:
        raise ValueError(f"scrambler seed must be a nonzero 7-bit value, got {seed}")
    if seed not in _cache:
        r = [(seed >> i) & 1 for i in range(7)]
        out = np.empty(_PERIOD, dtype=np.uint8)
        for k in range(_PERIOD):
            b = r[3] ^ r[6]
            out[k] = b
            r = [b] + r[:6]
        _cache[seed] = out
    reps = -(-n // _PERIOD)
    return np.tile(_cache[seed], reps)[:n]


def scramble(bits: np.ndarray, seed: int) -> np.ndarray:
    """XOR bits with the keystream; self-inverse for a fixed seed."""
    bits = np.asarray(bits, dtype=np.uint8)
    return bits ^ keystream(seed, len(bits))


descramble = scramble


def recover_seed(scrambled_prefix: np.ndarray) -> int:
    """Recover the seed from the first 7 scrambled bits of an all-zero prefix.

    The service field starts with zero bits, so the first 7 received bits are
    the keystream itself; match them against the 127 possible streams.
    """
    prefix = tuple(int(b) & 1 for b in scrambled_prefix[:7])
    for seed in range(1, 128):
        if tuple(keystream(seed, 7)) == prefix:
            return seed
    raise ValueError("no scrambler seed matches prefix")
