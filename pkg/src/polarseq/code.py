"""Polar (sub)code specifications and the polarizing transform.

A code of length n = 2^m and dimension k is described by n-k freezing
constraint rows.  Each row is a set of input indices; the largest index in
the row is the constrained position i, and u_i must equal the XOR of the
remaining (earlier) indices in the row.  A classical polar code uses
singleton rows (static zero freezing); non-singleton rows give dynamically
frozen symbols.  CRC-aided polar codes are a special case.
"""
from __future__ import annotations

import json

import numpy as np


class SpecError(ValueError):
    """Raised when a code specification violates its invariants."""


class CodeSpec:
    """Validated code specification with derived frozen set and row map.

    Instances are immutable after construction and safe to share between
    simulation workers.
    """

    def __init__(self, m: int, k: int, constraints, name: str = ""):
        if m < 0:
            raise SpecError(f"m must be >= 0, got {m}")
        n = 1 << m
        rows = []
        for r, raw in enumerate(constraints):
            row = frozenset(int(x) for x in raw)
            if not row:
                raise SpecError(f"constraint row {r} is empty")
            if min(row) < 0 or max(row) >= n:
                raise SpecError(f"constraint row {r} has out-of-range index")
            rows.append(row)
        if len(rows) != n - k:
            raise SpecError(
                f"expected {n - k} constraint rows for (n={n}, k={k}), got {len(rows)}"
            )
        row_of = {}
        for r, row in enumerate(rows):
            i = max(row)
            if i in row_of:
                raise SpecError(f"duplicate constrained index {i}")
            row_of[i] = r
        self.name = name
        self.m = m
        self.n = n
        self.k = k
        self.constraints = tuple(rows)
        self.frozen_set = frozenset(row_of)
        self.row_of = row_of

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"CodeSpec{tag}(n={self.n}, k={self.k})"

    def info_positions(self) -> np.ndarray:
        """Non-frozen input indices in ascending order."""
        return np.array(sorted(set(range(self.n)) - self.frozen_set), dtype=np.int64)


def validate_spec(m: int, k: int, constraints, name: str = "") -> CodeSpec:
    """Build a CodeSpec, raising SpecError on any invariant violation."""
    return CodeSpec(m, k, constraints, name=name)


def dynamic_frozen_value(spec: CodeSpec, i: int, prefix) -> int:
    """Value forced on frozen symbol u_i given the decided prefix u_0^{i-1}."""
    if i not in spec.frozen_set:
        raise SpecError(f"index {i} is not frozen")
    row = spec.constraints[spec.row_of[i]]
    v = 0
    for s in row:
        if s != i:
            v ^= int(prefix[s]) & 1
    return v


def expand_info(spec: CodeSpec, data) -> np.ndarray:
    """Map k data bits to the length-n input vector of the transform.

    Non-frozen positions carry the data bits in ascending index order;
    frozen positions are filled causally from the constraint rows.
    """
    data = np.asarray(data, dtype=np.int8)
    if data.shape != (spec.k,):
        raise SpecError(f"data length {data.shape} != k={spec.k}")
    u = np.zeros(spec.n, dtype=np.int8)
    pos = 0
    for i in range(spec.n):
        if i in spec.frozen_set:
            u[i] = dynamic_frozen_value(spec, i, u)
        else:
            u[i] = data[pos]
            pos += 1
    return u


def extract_info(spec: CodeSpec, u) -> np.ndarray:
    """Inverse of expand_info on the non-frozen positions."""
    u = np.asarray(u, dtype=np.int8)
    return u[spec.info_positions()]


def bit_reversal_permutation(m: int) -> np.ndarray:
    """Permutation mapping each m-bit index to its bit-reversed value."""
    if m < 0:
        raise SpecError("m must be >= 0")
    n = 1 << m
    perm = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = 0
        x = i
        for _ in range(m):
            r = (r << 1) | (x & 1)
            x >>= 1
        perm[i] = r
    return perm


def polar_transform(u) -> np.ndarray:
    """Encode u through B_m F^{otimes m} over GF(2).

    Implemented as the bit-reversal permutation followed by an in-place
    butterfly; the dense matrix product is kept as a test oracle only.
    """
    u = np.asarray(u, dtype=np.int8)
    n = u.shape[-1]
    m = n.bit_length() - 1
    if 1 << m != n:
        raise SpecError(f"length {n} is not a power of two")
    x = u[..., bit_reversal_permutation(m)].copy()
    b = n
    while b >= 2:
        view = x.reshape(-1, b)
        view[:, : b // 2] ^= view[:, b // 2 :]
        b //= 2
    return x.reshape(u.shape)


def satisfies_constraints(spec: CodeSpec, u) -> bool:
    """True iff u satisfies every freezing constraint row (u V^T = 0)."""
    u = np.asarray(u, dtype=np.int8)
    for row in spec.constraints:
        if sum(int(u[s]) for s in row) % 2 != 0:
            return False
    return True


def load_spec(path) -> CodeSpec:
    """Load and validate a code-spec JSON file."""
    with open(path) as fh:
        obj = json.load(fh)
    return validate_spec(
        int(obj["m"]), int(obj["k"]), obj["constraints"], name=obj.get("name", "")
    )


def save_spec(spec: CodeSpec, path) -> None:
    obj = {
        "name": spec.name,
        "m": spec.m,
        "k": spec.k,
        "constraints": [sorted(row) for row in spec.constraints],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
