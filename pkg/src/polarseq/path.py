"""Path state with copy-on-write LLR/partial-sum memory, and the SC decoder.

Memory layout follows the usual lazy-copy list-decoder design: per layer
lambda in 0..m there is an LLR array of length 2^(m-lambda) and a partial
sum array of shape (2^(m-lambda), 2).  Layer 0 holds the channel LLRs,
layer m the single decision LLR S_m^(phi).  Forked paths share arrays and
copy an array only immediately before writing it, so snapshots shared
between paths are never mutated in place.

Operation counting convention (applied uniformly across all decoders):
each check-kernel evaluation is one comparison, each variable-kernel
evaluation and each penalty accumulation is one summation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LLR_SAT
from .code import CodeSpec, dynamic_frozen_value, extract_info, polar_transform
from .metrics import penalty, q_op_exact

COMPLETED = "completed"
ABORTED_THRESHOLD = "aborted_threshold"
ABORTED_BUDGET = "aborted_budget"


@dataclass
class OpCounters:
    """Arithmetic operation counters, shared by all paths of one decode."""

    summations: int = 0
    comparisons: int = 0


@dataclass
class DecodeOutcome:
    info_bits: np.ndarray
    codeword: np.ndarray
    u: np.ndarray
    iterations: int
    ops: OpCounters
    termination: str = COMPLETED
    score: float = 0.0


class PathMemory:
    """One path prefix v_0^{phi-1} with shareable decoder state."""

    __slots__ = (
        "m",
        "n",
        "llr",
        "bits",
        "prefix",
        "_own_llr",
        "_own_bits",
        "_own_prefix",
        "phase",
        "score",
        "ops",
        "kernel",
    )

    def __init__(self, channel_llrs, ops: OpCounters | None = None, kernel: str = "minsum"):
        channel_llrs = np.asarray(channel_llrs, dtype=np.float64)
        n = channel_llrs.shape[0]
        m = n.bit_length() - 1
        if 1 << m != n:
            raise ValueError(f"LLR length {n} is not a power of two")
        if kernel not in ("minsum", "exact"):
            raise ValueError(f"unknown kernel {kernel!r}")
        self.m = m
        self.n = n
        self.llr = [np.clip(channel_llrs, -LLR_SAT, LLR_SAT)]
        self.bits = [np.zeros((1 << (m - lam), 2), dtype=np.int8) for lam in range(m + 1)]
        for lam in range(1, m + 1):
            self.llr.append(np.zeros(1 << (m - lam), dtype=np.float64))
        self.prefix = np.zeros(n, dtype=np.int8)
        self._own_llr = [True] * (m + 1)
        self._own_bits = [True] * (m + 1)
        self._own_prefix = True
        self.phase = 0
        self.score = 0.0
        self.ops = ops if ops is not None else OpCounters()
        self.kernel = kernel

    def fork(self) -> "PathMemory":
        """Cheap copy sharing all arrays; both sides copy before writing."""
        child = PathMemory.__new__(PathMemory)
        child.m = self.m
        child.n = self.n
        child.llr = list(self.llr)
        child.bits = list(self.bits)
        child.prefix = self.prefix
        self._own_llr = [False] * (self.m + 1)
        self._own_bits = [False] * (self.m + 1)
        self._own_prefix = False
        child._own_llr = [False] * (self.m + 1)
        child._own_bits = [False] * (self.m + 1)
        child._own_prefix = False
        child.phase = self.phase
        child.score = self.score
        child.ops = self.ops
        child.kernel = self.kernel
        return child

    def _writable_llr(self, lam: int) -> np.ndarray:
        if not self._own_llr[lam]:
            self.llr[lam] = self.llr[lam].copy()
            self._own_llr[lam] = True
        return self.llr[lam]

    def _writable_bits(self, lam: int) -> np.ndarray:
        if not self._own_bits[lam]:
            self.bits[lam] = self.bits[lam].copy()
            self._own_bits[lam] = True
        return self.bits[lam]

    def compute_llr(self) -> float:
        """S_m^(phi) for the current phase, recomputing only stale layers."""
        if self.phase >= self.n:
            raise ValueError("path is already complete")
        self._compute(self.m, self.phase)
        return float(self.llr[self.m][0])

    def _compute(self, lam: int, psi: int) -> None:
        if lam == 0:
            return
        if psi % 2 == 0:
            self._compute(lam - 1, psi >> 1)
        src = self.llr[lam - 1]
        a = src[0::2]
        b = src[1::2]
        dst = self._writable_llr(lam)
        if psi % 2 == 0:
            if self.kernel == "exact":
                dst[:] = q_op_exact(a, b)
            else:
                np.minimum(np.abs(a), np.abs(b), out=dst)
                neg = (a < 0) != (b < 0)
                dst[neg] = -dst[neg]
            self.ops.comparisons += dst.shape[0]
        else:
            u = self.bits[lam][:, 0]
            np.copyto(dst, np.where(u == 0, a, -a))
            dst += b
            self.ops.summations += dst.shape[0]

    def push_bit(self, v: int, score_delta: float = 0.0) -> None:
        """Record the phase decision in place and advance the phase.

        compute_llr must already have been evaluated at the current phase.
        """
        phi = self.phase
        pre = self.prefix
        if not self._own_prefix:
            pre = self.prefix = self.prefix.copy()
            self._own_prefix = True
        pre[phi] = v
        cb = self._writable_bits(self.m)
        cb[0, phi & 1] = v
        if phi & 1:
            self._propagate(self.m, phi)
        self.phase = phi + 1
        self.score += score_delta
        self.ops.summations += 1  # penalty accumulation

    def _propagate(self, lam: int, psi: int) -> None:
        # psi is odd: fold the decided pair down one layer.
        src = self.bits[lam]
        dst = self._writable_bits(lam - 1)
        j = (psi >> 1) & 1
        dst[0::2, j] = src[:, 0] ^ src[:, 1]
        dst[1::2, j] = src[:, 1]
        if lam > 1 and (psi >> 1) & 1:
            self._propagate(lam - 1, psi >> 1)

    def extend_path(self, v: int, score_delta: float = 0.0) -> "PathMemory":
        """Fork and extend with bit v; the parent is left untouched."""
        child = self.fork()
        child.push_bit(v, score_delta)
        return child


def init_path(channel_llrs, ops: OpCounters | None = None) -> PathMemory:
    """Fresh path at phase 0 with layer-0 LLRs set to the channel LLRs."""
    return PathMemory(channel_llrs, ops=ops)


def sc_decode(spec: CodeSpec, channel_llrs) -> DecodeOutcome:
    """Plain successive cancellation with min-sum LLRs.

    Frozen symbols are set from the constraint rows, information symbols
    by the LLR sign (L >= 0 -> 0).
    """
    ops = OpCounters()
    path = PathMemory(channel_llrs, ops=ops)
    if path.n != spec.n:
        raise ValueError(f"LLR length {path.n} != code length {spec.n}")
    for i in range(spec.n):
        s = path.compute_llr()
        if i in spec.frozen_set:
            v = dynamic_frozen_value(spec, i, path.prefix)
        else:
            v = 0 if s >= 0 else 1
        path.push_bit(v, float(penalty(s, v)))
    u = path.prefix.copy()
    return DecodeOutcome(
        info_bits=extract_info(spec, u),
        codeword=polar_transform(u),
        u=u,
        iterations=spec.n,
        ops=ops,
        termination=COMPLETED,
        score=path.score,
    )


def allzero_path_llrs(channel_llrs_batch) -> np.ndarray:
    """Decision LLRs S_m^(i) along the all-zero path, batched over frames.

    Monte Carlo oracle used to validate the density-evolution bias table:
    on the correct all-zero path all partial sums vanish, so the variable
    kernel degenerates to a + b and the whole recursion vectorizes over
    frames.  Returns an array of shape (frames, n).
    """
    batch = np.asarray(channel_llrs_batch, dtype=np.float64)
    if batch.ndim != 2:
        raise ValueError("expected a (frames, n) array")
    frames, n = batch.shape
    m = n.bit_length() - 1
    if 1 << m != n:
        raise ValueError(f"n={n} is not a power of two")
    layers = [np.clip(batch, -LLR_SAT, LLR_SAT)]
    for lam in range(1, m + 1):
        layers.append(np.zeros((frames, 1 << (m - lam)), dtype=np.float64))

    def compute(lam, psi):
        if lam == 0:
            return
        if psi % 2 == 0:
            compute(lam - 1, psi >> 1)
        a = layers[lam - 1][:, 0::2]
        b = layers[lam - 1][:, 1::2]
        if psi % 2 == 0:
            out = np.minimum(np.abs(a), np.abs(b))
            out[(a < 0) != (b < 0)] *= -1.0
            layers[lam][:] = out
        else:
            layers[lam][:] = a + b

    out = np.zeros((frames, n), dtype=np.float64)
    for phi in range(n):
        compute(m, phi)
        out[:, phi] = layers[m][:, 0]
    return out
