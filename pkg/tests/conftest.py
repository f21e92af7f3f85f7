"""Shared fixtures and oracle helpers for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from polarseq.code import CodeSpec, bit_reversal_permutation, validate_spec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense_transform_matrix(m: int) -> np.ndarray:
    """B_m F^{otimes m} by direct matrix construction (test oracle)."""
    f = np.array([[1, 0], [1, 1]], dtype=np.int8)
    a = np.array([[1]], dtype=np.int8)
    for _ in range(m):
        a = np.kron(a, f)
    perm = bit_reversal_permutation(m)
    b = np.zeros((1 << m, 1 << m), dtype=np.int8)
    b[np.arange(1 << m), perm] = 1
    return (b @ a) % 2


def dense_encode(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.int8)
    m = len(u).bit_length() - 1
    return (u @ dense_transform_matrix(m)) % 2


def random_spec(rng, m: int, k: int, dynamic: bool = True) -> CodeSpec:
    """Random valid code spec: k random non-frozen positions, each frozen
    position constrained to a random causal XOR (or statically to zero)."""
    n = 1 << m
    frozen = np.sort(rng.choice(n, size=n - k, replace=False))
    rows = []
    for i in frozen:
        row = {int(i)}
        if dynamic and i > 0:
            extra = rng.integers(0, 2, size=int(i)).astype(bool)
            row |= {int(s) for s in np.nonzero(extra)[0]}
        rows.append(sorted(row))
    return validate_spec(m, k, rows)


def all_codewords(spec: CodeSpec) -> np.ndarray:
    """All 2^k codewords, one per row (oracle scale only)."""
    from polarseq.code import expand_info, polar_transform

    k = spec.k
    assert k <= 16
    words = ((np.arange(1 << k)[:, None] >> np.arange(k)[::-1]) & 1).astype(np.int8)
    u = np.stack([expand_info(spec, d) for d in words])
    return polar_transform(u)
