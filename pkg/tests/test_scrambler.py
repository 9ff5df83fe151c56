import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightlink.phy.scrambler import descramble, keystream, recover_seed, scramble


def reference_lfsr(seed, n):
    """Independent bit-by-bit stepper: register r[0..6] = x1..x7,
    output x4 ^ x7, shifted in at x1."""
    r = [(seed >> i) & 1 for i in range(7)]
    out = []
    for _ in range(n):
        b = r[3] ^ r[6]
        out.append(b)
        r = [b] + r[:6]
    return out


def test_keystream_matches_hand_stepped_reference():
    # First 16 bits for seed 0b1011101, stepped by hand with the reference.
    expected = reference_lfsr(0b1011101, 16)
    assert expected == [0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1]
    assert list(keystream(0b1011101, 16)) == expected


def test_all_ones_seed_standard_sequence_prefix():
    # The classic 127-bit sequence generated from the all-ones state.
    expected = [0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 1, 0]
    assert list(keystream(0b1111111, 16)) == expected


def test_scramble_all_zero_input_yields_keystream():
    zeros = np.zeros(127, dtype=np.uint8)
    assert np.array_equal(scramble(zeros, 0b1011101), keystream(0b1011101, 127))


@given(
    data=st.binary(min_size=1, max_size=400),
    seed=st.integers(min_value=1, max_value=127),
)
@settings(max_examples=50, deadline=None)
def test_involution(data, seed):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    assert np.array_equal(descramble(scramble(bits, seed), seed), bits)


def test_output_length_preserved():
    bits = np.zeros(1000, dtype=np.uint8)
    assert len(scramble(bits, 5)) == 1000


def test_flips_about_half_the_bits():
    # Monte-Carlo over 100 seeds: fraction of flipped bits is 0.5 +- 0.05.
    rng = np.random.default_rng(7)
    x = rng.integers(0, 2, 8000).astype(np.uint8)
    fracs = [np.mean(scramble(x, seed) != x) for seed in range(1, 101)]
    assert abs(np.mean(fracs) - 0.5) < 0.05


def test_zero_seed_rejected():
    with pytest.raises(ValueError):
        scramble(np.zeros(8, dtype=np.uint8), 0)
    with pytest.raises(ValueError):
        scramble(np.zeros(8, dtype=np.uint8), 128)


def test_seed_recovery_roundtrip():
    for seed in range(1, 128):
        assert recover_seed(keystream(seed, 7)) == seed
