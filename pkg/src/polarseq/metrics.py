"""Min-sum kernels, penalty/score arithmetic, and small-n brute-force oracles.

Sign convention: sgn(0) := +1 everywhere, so zero-LLR ties are resolved
deterministically towards bit 0.
"""
from __future__ import annotations

import numpy as np

from .code import polar_transform

#: Largest code length accepted by the exhaustive oracles.
ORACLE_MAX_N = 16


def sgn(x):
    """Sign with sgn(0) := +1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def q_op(a, b):
    """Min-sum check kernel Q(a,b) = sgn(a) sgn(b) min(|a|,|b|)."""
    return sgn(a) * sgn(b) * np.minimum(np.abs(a), np.abs(b))


def p_op(v, a, b):
    """Variable kernel P(v,a,b) = (-1)^v a + b."""
    return np.where(np.asarray(v) == 0, a, -np.asarray(a, dtype=np.float64)) + b


def q_op_exact(a, b):
    """Exact check kernel 2 atanh(tanh(a/2) tanh(b/2)), computed stably.

    Used only by the log-domain sum-product path metric; the min-sum
    kernel is the production rule.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (
        sgn(a) * sgn(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def penalty(s, v):
    """Penalty tau(S,v): 0 when v agrees with sgn(S), else -|S|.

    With sgn(0) := +1 this is exactly min((1-2v) S, 0).
    """
    s = np.asarray(s, dtype=np.float64)
    return np.minimum((1.0 - 2.0 * np.asarray(v)) * s, 0.0)


def correlation_discrepancy(c, s) -> float:
    """Ellipsoidal weight E(c,S) = -sum_i tau(S_i, c_i); >= 0.

    ML decoding minimizes this quantity over the code.
    """
    c = np.asarray(c)
    s = np.asarray(s, dtype=np.float64)
    if c.shape != s.shape:
        raise ValueError(f"length mismatch: {c.shape} vs {s.shape}")
    return float(-np.sum(penalty(s, c)))


def llr_to_posteriors(llr):
    """Per-symbol posteriors (W{0|y}, W{1|y}) from channel LLRs."""
    llr = np.asarray(llr, dtype=np.float64)
    p0 = 1.0 / (1.0 + np.exp(-llr))
    return p0, 1.0 - p0


def _continuations(prefix, n):
    """All 2^(n-phi) input vectors extending the prefix, one per row."""
    prefix = np.asarray(prefix, dtype=np.int8)
    phi = prefix.shape[0]
    tail = n - phi
    rows = 1 << tail
    v = np.zeros((rows, n), dtype=np.int8)
    v[:, :phi] = prefix
    for j in range(tail):
        v[:, phi + j] = (np.arange(rows) >> (tail - 1 - j)) & 1
    return v


def exact_prefix_prob(prefix, llr) -> float:
    """W_m^{(phi-1)}{v_0^{phi-1} | y} by brute-force summation.

    Sums the product posterior of v A_m over all unconstrained
    continuations of the prefix; normalized so the phi=0 value is 1.
    Oracle-scale only (n <= 16).
    """
    llr = np.asarray(llr, dtype=np.float64)
    n = llr.shape[0]
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    v = _continuations(prefix, n)
    c = polar_transform(v)
    p0, p1 = llr_to_posteriors(llr)
    probs = np.where(c == 0, p0, p1).prod(axis=1)
    return float(probs.sum())


def brute_force_m2(prefix, llr) -> float:
    """Score M2: max over continuations of -E(v A_m, S), with R^(-1) = 0."""
    llr = np.asarray(llr, dtype=np.float64)
    n = llr.shape[0]
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    v = _continuations(prefix, n)
    c = polar_transform(v)
    weights = penalty(llr[None, :], c).sum(axis=1)
    return float(weights.max())
