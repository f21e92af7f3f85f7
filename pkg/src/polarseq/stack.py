"""Sequential (stack) decoding with a bounded double-ended priority queue.

The decoder implements the seven-step best-first tree search: pop the
best-scored path, extend its valid children, evict minima when the queue
would overflow its capacity D, and purge all paths at or below phase phi
once phi has been visited L times.  Purging is realized as a monotone
"minimum admissible phase" barrier with lazy deletion at pop time, which
is where suspended paths are captured when list size adaptation is on.

Score functions:
  m2 - accumulated min-sum penalties (the most-likely-continuation score);
  m3 - m2 minus the precomputed bias psi(phi) of the correct path;
  m1 - log-domain sum-product path probability (exact kernel), kept only
       for complexity comparisons against the plain stack algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .code import CodeSpec, dynamic_frozen_value, extract_info, polar_transform
from .density import BiasTable
from .metrics import penalty
from .path import (
    ABORTED_BUDGET,
    ABORTED_THRESHOLD,
    COMPLETED,
    DecodeOutcome,
    OpCounters,
    PathMemory,
)


def _level(i: int) -> int:
    return (i + 1).bit_length() - 1


class MinMaxHeap:
    """Min-max heap keyed by totally ordered tuples; O(log n) at both ends."""

    def __init__(self):
        self._a = []

    def __len__(self):
        return len(self._a)

    def push(self, key, payload) -> None:
        a = self._a
        a.append((key, payload))
        i = len(a) - 1
        if i == 0:
            return
        p = (i - 1) >> 1
        if _level(i) % 2 == 0:  # min level
            if a[i][0] > a[p][0]:
                a[i], a[p] = a[p], a[i]
                self._bubble(p, up_max=True)
            else:
                self._bubble(i, up_max=False)
        else:
            if a[i][0] < a[p][0]:
                a[i], a[p] = a[p], a[i]
                self._bubble(p, up_max=False)
            else:
                self._bubble(i, up_max=True)

    def _bubble(self, i: int, up_max: bool) -> None:
        a = self._a
        while i >= 3:
            g = (((i - 1) >> 1) - 1) >> 1
            if up_max:
                if a[i][0] > a[g][0]:
                    a[i], a[g] = a[g], a[i]
                    i = g
                else:
                    break
            else:
                if a[i][0] < a[g][0]:
                    a[i], a[g] = a[g], a[i]
                    i = g
                else:
                    break

    def _min_index(self) -> int:
        return 0

    def _max_index(self) -> int:
        a = self._a
        if len(a) == 1:
            return 0
        if len(a) == 2:
            return 1
        return 1 if a[1][0] > a[2][0] else 2

    def peek_min(self):
        return self._a[0]

    def peek_max(self):
        return self._a[self._max_index()]

    def pop_min(self):
        return self._pop_at(0, maximize=False)

    def pop_max(self):
        return self._pop_at(self._max_index(), maximize=True)

    def _pop_at(self, i: int, maximize: bool):
        a = self._a
        item = a[i]
        last = a.pop()
        if i < len(a):
            a[i] = last
            self._trickle(i)
        return item

    def _trickle(self, i: int) -> None:
        a = self._a
        minimize = _level(i) % 2 == 0
        while True:
            first = 2 * i + 1
            if first >= len(a):
                return
            # best among children and grandchildren
            cands = [c for c in range(first, min(first + 2, len(a)))]
            cands += [c for c in range(2 * first + 1, min(2 * first + 5, len(a)))]
            if minimize:
                c = min(cands, key=lambda j: a[j][0])
                better = a[c][0] < a[i][0]
            else:
                c = max(cands, key=lambda j: a[j][0])
                better = a[c][0] > a[i][0]
            if not better:
                return
            a[i], a[c] = a[c], a[i]
            if c < first + 2:  # child: done
                return
            p = (c - 1) >> 1
            if minimize:
                if a[c][0] > a[p][0]:
                    a[c], a[p] = a[p], a[c]
            else:
                if a[c][0] < a[p][0]:
                    a[c], a[p] = a[p], a[c]
            i = c


@dataclass(frozen=True)
class LsaParams:
    """List size adaptation: doubling schedule for the per-phase budget."""

    kappa0: int
    l_max: int


@dataclass
class StackParams:
    """Stack decoder configuration.

    D defaults to L*n, the worst-case number of stored entries.
    """

    L: int
    D: int | None = None
    score_kind: str = "m3"
    bias: BiasTable | None = None
    lsa: LsaParams | None = None
    early_term_threshold: float | None = None

    def validate(self, n: int) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.D is not None and self.D < 2:
            raise ValueError(f"D must be >= 2, got {self.D}")
        if self.score_kind not in ("m1", "m2", "m3"):
            raise ValueError(f"unknown score kind {self.score_kind!r}")
        if self.score_kind == "m3":
            if self.bias is None:
                raise ValueError("score m3 requires a bias table")
            if self.bias.n != n:
                raise ValueError(f"bias table length {self.bias.n} != n={n}")
        if self.early_term_threshold is not None and self.score_kind != "m3":
            raise ValueError("early termination requires score m3")
        if self.lsa is not None and self.lsa.l_max < self.L:
            raise ValueError("L_max must be >= L")

    def capacity(self, n: int) -> int:
        return self.D if self.D is not None else self.L * n


def score_child(
    parent_score: float,
    s: float,
    v: int,
    bias: BiasTable | None,
    phi: int,
    kind: str = "m2",
) -> float:
    """Score of the child extending a phase-phi path with bit v."""
    tau = float(penalty(s, v))
    if kind == "m2":
        return parent_score + tau
    if kind == "m3":
        if bias is None:
            raise ValueError("score m3 requires a bias table")
        return parent_score + tau - bias.increment(phi)
    if kind == "m1":
        # log P(v | prefix, y) from the exact decision LLR
        x = (1.0 - 2.0 * v) * s
        return parent_score - float(np.log1p(np.exp(-np.clip(x, -700, 700))))
    raise ValueError(f"unknown score kind {kind!r}")


@dataclass
class StackStats:
    """Per-decode instrumentation for invariants and LSA analysis."""

    max_queue_size: int = 0
    purges: int = 0
    doublings: int = 0
    final_L: int = 0
    barrier_trace: list = field(default_factory=list)


def _abort(reason, n, spec, iterations, ops, stats):
    u = np.zeros(n, dtype=np.int8)
    out = DecodeOutcome(
        info_bits=extract_info(spec, u),
        codeword=polar_transform(u),
        u=u,
        iterations=iterations,
        ops=ops,
        termination=reason,
        score=-np.inf,
    )
    return out


def stack_decode(
    spec: CodeSpec,
    channel_llrs,
    params: StackParams,
    stats: StackStats | None = None,
) -> DecodeOutcome:
    """Best-first sequential decoding of one received frame."""
    n = spec.n
    params.validate(n)
    ops = OpCounters()
    kernel = "exact" if params.score_kind == "m1" else "minsum"
    root = PathMemory(channel_llrs, ops=ops, kernel=kernel)
    if root.n != n:
        raise ValueError(f"LLR length {root.n} != code length {n}")
    cap = params.capacity(n)
    bias = params.bias
    kind = params.score_kind
    threshold = params.early_term_threshold
    lsa = params.lsa
    L = params.L
    if stats is None:
        stats = StackStats()

    pq = MinMaxHeap()
    seq = 0
    pq.push((0.0, 0, 0), root)
    live = np.zeros(n + 2, dtype=np.int64)  # physical entries per phase
    live[0] = 1
    t = np.zeros(n, dtype=np.int64)
    barrier = 0
    kappa = 0
    suspended = []  # (key, path) pairs captured at lazy deletion
    iterations = 0

    while len(pq):
        key, path = pq.pop_max()
        phi = path.phase
        live[phi] -= 1
        if phi < barrier:
            if lsa is not None:
                suspended.append((key, path))
            continue
        if phi == n:
            stats.final_L = L
            u = path.prefix
            return DecodeOutcome(
                info_bits=extract_info(spec, u),
                codeword=polar_transform(u),
                u=u.copy(),
                iterations=iterations,
                ops=ops,
                termination=COMPLETED,
                score=path.score,
            )
        if threshold is not None and path.score < threshold:
            stats.final_L = L
            return _abort(ABORTED_THRESHOLD, n, spec, iterations, ops, stats)
        iterations += 1
        t[phi] += 1
        s = path.compute_llr()
        if phi in spec.frozen_set:
            children = (dynamic_frozen_value(spec, phi, path.prefix),)
        else:
            children = (0, 1)
        # step 4: make room for the incoming children
        while len(pq) + len(children) > cap:
            ekey, epath = pq.pop_min()
            live[epath.phase] -= 1
            if epath.phase < barrier and lsa is not None:
                suspended.append((ekey, epath))
        for v in children:
            child_score = score_child(path.score, s, v, bias, phi, kind)
            child = path.extend_path(v)
            child.score = child_score
            seq += 1
            pq.push((child_score, -(phi + 1), -seq), child)
            live[phi + 1] += 1
        stats.max_queue_size = max(stats.max_queue_size, len(pq))
        # step 6: purge everything at or below the exhausted phase
        if t[phi] >= L:
            removed = int(live[barrier : phi + 1].sum())
            if removed > 0:
                kappa += 1
                stats.purges += 1
            barrier = phi + 1
            stats.barrier_trace.append(barrier)
            if lsa is not None and kappa > lsa.kappa0 and L < lsa.l_max:
                L = min(2 * L, lsa.l_max)
                kappa = 0
                stats.doublings += 1
                hot = np.nonzero(t >= L)[0]
                barrier = int(hot.max()) + 1 if hot.size else 0
                stats.barrier_trace.append(barrier)
                m0 = path.score
                still = []
                for skey, spath in suspended:
                    if skey[0] > m0 and spath.phase >= barrier:
                        if len(pq) >= cap:
                            if pq.peek_min()[0] >= skey:
                                still.append((skey, spath))
                                continue
                            ekey, epath = pq.pop_min()
                            live[epath.phase] -= 1
                        pq.push(skey, spath)
                        live[spath.phase] += 1
                    else:
                        still.append((skey, spath))
                suspended = still
    stats.final_L = L
    return _abort(ABORTED_BUDGET, n, spec, iterations, ops, stats)


def decode_outcome_is_error(spec: CodeSpec, outcome: DecodeOutcome, data) -> bool:
    """A frame is an error iff decoding aborted or the info bits differ."""
    if outcome.termination != COMPLETED:
        return True
    return not np.array_equal(outcome.info_bits, np.asarray(data, dtype=np.int8))
