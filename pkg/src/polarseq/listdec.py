"""Min-sum successive cancellation list decoding (Tal-Vardy style).

All surviving paths are processed in lock step, so the per-layer arrays
carry a leading list dimension and the whole phase update vectorizes.
Path selection keeps the L best of the 2L forked candidates by accumulated
penalty score; ties prefer the bit-0 child, then the lower path index.
The final answer is the complete path with the best score (the freezing
constraints, including any CRC, are enforced during decoding, so no
reselection stage is needed).
"""
from __future__ import annotations

import numpy as np

from .channel import LLR_SAT
from .code import CodeSpec, extract_info, polar_transform
from .metrics import penalty
from .path import COMPLETED, DecodeOutcome, OpCounters


def scl_decode(spec: CodeSpec, channel_llrs, list_size: int) -> DecodeOutcome:
    """Decode with at most `list_size` surviving paths."""
    if list_size < 1:
        raise ValueError(f"list size must be >= 1, got {list_size}")
    llrs = np.clip(np.asarray(channel_llrs, dtype=np.float64), -LLR_SAT, LLR_SAT)
    n, m = spec.n, spec.m
    if llrs.shape != (n,):
        raise ValueError(f"LLR length {llrs.shape} != code length {n}")
    ops = OpCounters()

    # One path to start with; arrays grow along axis 0 as paths fork.
    P = [llrs[None, :].copy()]
    for lam in range(1, m + 1):
        P.append(np.zeros((1, 1 << (m - lam)), dtype=np.float64))
    C = [np.zeros((1, 1 << (m - lam), 2), dtype=np.int8) for lam in range(m + 1)]
    scores = np.zeros(1, dtype=np.float64)
    uhist = np.zeros((1, n), dtype=np.int8)

    def compute(lam, psi):
        if lam == 0:
            return
        if psi % 2 == 0:
            compute(lam - 1, psi >> 1)
        a = P[lam - 1][:, 0::2]
        b = P[lam - 1][:, 1::2]
        if psi % 2 == 0:
            out = np.minimum(np.abs(a), np.abs(b))
            out[(a < 0) != (b < 0)] *= -1.0
            P[lam][:] = out
            ops.comparisons += out.size
        else:
            u = C[lam][:, :, 0]
            P[lam][:] = np.where(u == 0, a, -a) + b
            ops.summations += P[lam].size

    def propagate(lam, psi):
        j = (psi >> 1) & 1
        C[lam - 1][:, 0::2, j] = C[lam][:, :, 0] ^ C[lam][:, :, 1]
        C[lam - 1][:, 1::2, j] = C[lam][:, :, 1]
        if lam > 1 and (psi >> 1) & 1:
            propagate(lam - 1, psi >> 1)

    def take(rows):
        for lam in range(m + 1):
            P[lam] = P[lam][rows]
            C[lam] = C[lam][rows]

    for phi in range(n):
        compute(m, phi)
        s = P[m][:, 0]
        if phi in spec.frozen_set:
            row = sorted(spec.constraints[spec.row_of[phi]] - {phi})
            if row:
                bits = uhist[:, row].sum(axis=1).astype(np.int8) & 1
            else:
                bits = np.zeros(s.shape[0], dtype=np.int8)
            scores = scores + penalty(s, bits)
            ops.summations += s.shape[0]
        else:
            cur = s.shape[0]
            parents = np.repeat(np.arange(cur), 2)
            cand_bits = np.tile(np.array([0, 1], dtype=np.int8), cur)
            cand_scores = scores[parents] + penalty(s[parents], cand_bits)
            ops.summations += cand_scores.shape[0]
            if 2 * cur <= list_size:
                keep = np.arange(2 * cur)
            else:
                order = np.lexsort((parents, cand_bits, -cand_scores))
                keep = np.sort(order[:list_size])
            take(parents[keep])
            uhist = uhist[parents[keep]]
            scores = cand_scores[keep]
            bits = cand_bits[keep]
        uhist[:, phi] = bits
        C[m][:, 0, phi & 1] = bits
        if phi & 1:
            propagate(m, phi)

    best = int(np.argmax(scores))
    u = uhist[best].copy()
    return DecodeOutcome(
        info_bits=extract_info(spec, u),
        codeword=polar_transform(u),
        u=u,
        iterations=n,
        ops=ops,
        termination=COMPLETED,
        score=float(scores[best]),
    )
