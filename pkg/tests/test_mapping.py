import numpy as np
import pytest

from lightlink.mcs import Modulation
from lightlink.phy.mapping import (
    constellation,
    demap_symbols,
    hard_bits,
    map_symbols,
)


def test_bpsk_mapping():
    out = map_symbols(np.array([0, 1], dtype=np.uint8), Modulation.BPSK)
    assert out[0] == -1 + 0j
    assert out[1] == 1 + 0j


@pytest.mark.parametrize("mod", list(Modulation))
def test_unit_average_power(mod):
    points = constellation(mod)
    assert abs(np.mean(np.abs(points) ** 2) - 1.0) < 1e-12


@pytest.mark.parametrize("mod", list(Modulation))
def test_map_demap_roundtrip_zero_noise(mod):
    rng = np.random.default_rng(mod.value)
    n = 10000 - (10000 % mod.bits_per_symbol)
    bits = rng.integers(0, 2, n).astype(np.uint8)
    symbols = map_symbols(bits, mod)
    llrs = demap_symbols(symbols, mod, 1e-12)
    assert np.array_equal(hard_bits(llrs), bits)


def test_gray_property_neighbours_differ_by_one_bit():
    # Horizontally adjacent 16-QAM points differ in exactly one bit.
    points, = (constellation(Modulation.QAM16),)
    words = np.arange(16)
    for w1 in words:
        for w2 in words:
            d = points[w1] - points[w2]
            if abs(d.imag) < 1e-9 and abs(abs(d.real) - 2 / np.sqrt(10)) < 1e-9:
                assert bin(w1 ^ w2).count("1") == 1


def test_llr_sign_tracks_distance():
    # A symbol close to a bit-0 point gives positive LLR for that bit.
    llrs = demap_symbols(np.array([-1.0 + 0j]), Modulation.BPSK, 0.1)
    assert llrs[0] > 0
    llrs = demap_symbols(np.array([1.0 + 0j]), Modulation.BPSK, 0.1)
    assert llrs[0] < 0


def test_llr_scales_with_noise_variance():
    sym = np.array([0.5 + 0j])
    weak = demap_symbols(sym, Modulation.BPSK, 1.0)
    strong = demap_symbols(sym, Modulation.BPSK, 0.1)
    assert abs(strong[0]) > abs(weak[0])


def test_indivisible_bit_count_rejected():
    with pytest.raises(ValueError):
        map_symbols(np.zeros(5, dtype=np.uint8), Modulation.QAM16)
