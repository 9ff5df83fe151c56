"""Per-symbol block interleaver, 802.11n single-stream rules.

Two permutations: the first spreads adjacent coded bits across columns
(onto distant subcarriers), the second rotates bits within a subcarrier so
neighbours alternate between constellation bit significances.
"""

from __future__ import annotations

import numpy as np

from lightlink.mcs import Bandwidth, McsParams

_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _n_columns(bandwidth: Bandwidth) -> int:
    return 13 if bandwidth is Bandwidth.MHZ20 else 18


def _permutation(n_bpsc: int, bandwidth: Bandwidth) -> np.ndarray:
    """perm[k] = output position of input bit k."""
    n_col = _n_columns(bandwidth)
    n_row = (4 if bandwidth is Bandwidth.MHZ20 else 6) * n_bpsc
    n_cbps = n_col * n_row
    s = max(n_bpsc // 2, 1)
    k = np.arange(n_cbps)
    i = n_row * (k % n_col) + k // n_col
    j = s * (i // s) + (i + n_cbps - (n_col * i) // n_cbps) % s
    return j


def _tables(mcs: McsParams, bandwidth: Bandwidth) -> tuple[np.ndarray, np.ndarray]:
    key = (mcs.n_bpsc, bandwidth.value)
    if key not in _cache:
        perm = _permutation(mcs.n_bpsc, bandwidth)
        assert np.array_equal(np.sort(perm), np.arange(len(perm)))
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        _cache[key] = (perm, inv)
    return _cache[key]


def interleave(bits: np.ndarray, mcs: McsParams, bandwidth: Bandwidth) -> np.ndarray:
    perm, _ = _tables(mcs, bandwidth)
    bits = np.asarray(bits)
    if len(bits) != len(perm):
        raise ValueError(f"block length {len(bits)} != n_cbps {len(perm)}")
    out = np.empty_like(bits)
    out[perm] = bits
    return out


def deinterleave(values: np.ndarray, mcs: McsParams, bandwidth: Bandwidth) -> np.ndarray:
    _, inv = _tables(mcs, bandwidth)
    values = np.asarray(values)
    if len(values) != len(inv):
        raise ValueError(f"block length {len(values)} != n_cbps {len(inv)}")
    out = np.empty_like(values)
    out[inv] = values
    return out
