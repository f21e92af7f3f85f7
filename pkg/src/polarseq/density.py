"""Offline density evolution for min-sum decoding.

Computes bit-channel LLR CDFs under the all-zero-codeword assumption, the
score bias table psi, bit-channel error probabilities, and early
termination thresholds.

Quantization: CDFs live on a uniform symmetric grid [-G, +G] with an odd
number of points so that 0 and all convolution offsets fall exactly on
grid points (default G = 64/sigma^2, 2^16 + 1 points).  Convolutions are
FFT-based on the doubled grid; mass that falls outside the grid after
re-truncation is clamped to the boundary bins.  Only low-side clamped mass
can corrupt the negative-part integrals used downstream, so only that side
is checked against the mass budget.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

#: Largest polarization depth the grid budget is validated for.
MAX_DE_LEVELS = 12

#: Mass allowed to escape the grid on the harmful (negative) side.
TRUNCATION_BUDGET = 1e-6


class DensityError(ValueError):
    """Raised when a grid cannot represent a distribution accurately."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric quantization grid for LLR distributions."""

    half_width: float
    points: int = (1 << 16) + 1

    def __post_init__(self):
        if self.points % 2 == 0 or self.points < 3:
            raise DensityError("grid needs an odd number of points >= 3")
        if not self.half_width > 0:
            raise DensityError("grid half width must be positive")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)


def default_grid(params) -> GridSpec:
    """Spec grid for a channel noise level: [-64/sigma^2, +64/sigma^2]."""
    return GridSpec(half_width=64.0 / params.sigma2)


class QuantizedCdf:
    """Step-function CDF of an LLR random variable on a uniform grid."""

    def __init__(self, grid_min: float, step: float, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 2:
            raise DensityError("CDF needs at least two grid values")
        if np.any(np.diff(values) < -1e-12):
            raise DensityError("CDF values must be non-decreasing")
        self.grid_min = float(grid_min)
        self.step = float(step)
        self.values = np.clip(values, 0.0, 1.0)
        self.values[-1] = 1.0

    @property
    def grid_max(self) -> float:
        return self.grid_min + self.step * (len(self.values) - 1)

    def axis(self) -> np.ndarray:
        return self.grid_min + self.step * np.arange(len(self.values))

    def pmf(self) -> np.ndarray:
        """Centered mass assignment; symmetric so first moments are kept."""
        f = self.values
        p = np.empty_like(f)
        p[1:-1] = (f[2:] - f[:-2]) / 2.0
        p[0] = (f[0] + f[1]) / 2.0
        p[-1] = 1.0 - (f[-1] + f[-2]) / 2.0
        return np.maximum(p, 0.0)

    def mean(self) -> float:
        return float(np.dot(self.pmf(), self.axis()))

    def neg_part_mean(self) -> float:
        """E[min(S, 0)] = -integral of F over the negative axis."""
        x = self.axis()
        return float(-self.step * self.values[x < 0.0].sum())

    def prob_below_zero(self) -> float:
        """F(0-) plus half of any mass at exactly 0."""
        x = self.axis()
        z = int(np.searchsorted(x, 0.0))
        if z == 0:
            return 0.5 * float(self.values[0])
        below = float(self.values[z - 1])
        at = float(self.values[z] - self.values[z - 1]) if abs(x[z]) < self.step / 2 else 0.0
        return below + 0.5 * at

    def eval_at(self, x: float) -> float:
        """Right-continuous step evaluation."""
        j = int(np.floor((x - self.grid_min) / self.step + 1e-9))
        if j < 0:
            return 0.0
        if j >= len(self.values):
            return 1.0
        return float(self.values[j])


@dataclass(frozen=True)
class BiasTable:
    """psi(phi) for phi = 0..n: expected score of the correct path."""

    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.float64)
        if psi[0] != 0.0 or np.any(np.diff(psi) > 1e-12) or np.any(psi > 1e-12):
            raise DensityError("psi must start at 0, be non-increasing and <= 0")
        object.__setattr__(self, "psi", psi)

    @property
    def n(self) -> int:
        return len(self.psi) - 1

    def increment(self, phi: int) -> float:
        """psi(phi+1) - psi(phi), the expected penalty of phase phi."""
        return float(self.psi[phi + 1] - self.psi[phi])

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phase", "psi"])
            for phi, v in enumerate(self.psi):
                w.writerow([phi, f"{v:.12g}"])

    @staticmethod
    def load_csv(path) -> "BiasTable":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        psi = np.array([float(r["psi"]) for r in rows])
        return BiasTable(psi=psi)


@dataclass(frozen=True)
class ThresholdParams:
    """Per-code curve-fit constants of the threshold approximation."""

    a: float
    b: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DensityError(f"t must be > 0, got {self.t}")

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"a": self.a, "b": self.b, "t": self.t}, fh)
            fh.write("\n")

    @staticmethod
    def load_json(path) -> "ThresholdParams":
        with open(path) as fh:
            obj = json.load(fh)
        return ThresholdParams(a=float(obj["a"]), b=float(obj["b"]), t=float(obj["t"]))


def channel_cdf(params, grid: GridSpec | None = None) -> QuantizedCdf:
    """CDF of the channel LLR N(2/sigma^2, 4/sigma^2), all-zero assumption."""
    if grid is None:
        grid = default_grid(params)
    mu = 2.0 / params.sigma2
    sd = 2.0 / params.sigma
    x = grid.axis()
    vals = 0.5 * special.erfc(-(x - mu) / (sd * np.sqrt(2.0)))
    outside = vals[0] + (1.0 - vals[-1])
    if outside > 1e-9:
        raise DensityError(f"grid too narrow: {outside:.3g} mass outside")
    return QuantizedCdf(grid_min=-grid.half_width, step=grid.step, values=vals)


def evolve_check(f: QuantizedCdf) -> QuantizedCdf:
    """CDF of Q(a, b) for two independent copies with CDF f.

    Two-branch pointwise formula; the symmetric grid makes F(-x) an index
    reversal.
    """
    v = f.values
    # P(S < -x) on the symmetric grid: index reversal shifted one step so
    # that any atom at -x is excluded (left limit), which keeps degenerate
    # distributions such as a unit step at 0 as exact fixed points
    rv = np.append(v[::-1][1:], 0.0)
    x = f.axis()
    out = np.where(
        x < 0.0,
        2.0 * v * (1.0 - rv),
        2.0 * v - rv * rv - v * v,
    )
    out = np.maximum.accumulate(np.clip(out, 0.0, 1.0))
    return QuantizedCdf(grid_min=f.grid_min, step=f.step, values=out)


def evolve_var(f: QuantizedCdf) -> QuantizedCdf:
    """CDF of the sum of two independent copies with CDF f.

    Convolution on the doubled grid, re-truncated to the original grid with
    out-of-range mass clamped to the boundary bins.
    """
    p = f.pmf()
    conv = signal.fftconvolve(p, p)
    conv = np.maximum(conv, 0.0)
    conv /= conv.sum()
    npts = len(p)
    off = (npts - 1) // 2  # index of the original grid_min on the doubled grid
    low_mass = float(conv[:off].sum())
    if low_mass > TRUNCATION_BUDGET:
        raise DensityError(f"truncated mass {low_mass:.3g} below grid")
    out = conv[off : off + npts].copy()
    out[0] += low_mass
    out[-1] += float(conv[off + npts :].sum())
    cdf = np.minimum(np.cumsum(out), 1.0)
    cdf = np.maximum.accumulate(cdf)
    return QuantizedCdf(grid_min=f.grid_min, step=f.step, values=cdf)


def bit_channel_cdfs(m: int, f0: QuantizedCdf) -> list[QuantizedCdf]:
    """F_m^(i) for i = 0..2^m-1, in decoder phase order.

    Each tree node is evolved once; index bits, most significant first,
    select check (0) or variable (1) at successive layers.
    """
    if m < 0 or m > MAX_DE_LEVELS:
        raise DensityError(f"m={m} outside supported range 0..{MAX_DE_LEVELS}")
    level = [f0]
    for _ in range(m):
        nxt = []
        for f in level:
            nxt.append(evolve_check(f))
            nxt.append(evolve_var(f))
        level = nxt
    return level


def bias_table(cdfs: list[QuantizedCdf]) -> BiasTable:
    """psi[phi] = sum_{i<phi} E[min(S_m^(i), 0)], psi[0] = 0.

    A length-phi prefix accumulates exactly phi penalty expectations, so
    the correct path has expected biased score 0 at every phase.
    """
    inc = np.array([f.neg_part_mean() for f in cdfs])
    psi = np.concatenate([[0.0], np.cumsum(inc)])
    psi = np.minimum(psi, 0.0)
    return BiasTable(psi=psi)


def bit_error_probs(cdfs: list[QuantizedCdf]) -> np.ndarray:
    """Per-bit-channel error probability, mass at 0 split evenly."""
    return np.array([f.prob_below_zero() for f in cdfs])


def _penalty_pmf(f0: QuantizedCdf):
    """PMF and axis of tau(S, 0) = min(S, 0), centered to zero mean."""
    p = f0.pmf()
    x = f0.axis()
    neg = x < 0.0
    z = int(np.searchsorted(x, 0.0))
    pmf = np.zeros(z + 1)
    pmf[:z] = p[:z]
    pmf[z] = p[z:].sum()
    axis = np.concatenate([x[:z], [0.0]])
    mean = float(np.dot(pmf, axis))
    return pmf, axis - mean


def termination_threshold_exact(f0: QuantizedCdf, n: int, p_map: float) -> float:
    """p_map-quantile of the correct-path final score distribution.

    Builds the centered penalty distribution from the channel CDF and
    convolves it n times via log2(n) doubling convolutions; negligible
    tails (< 1e-12 total per side) are trimmed between doublings.
    """
    if not 0.0 < p_map < 1.0:
        raise DensityError(f"p_map must be in (0,1), got {p_map}")
    if n < 1 or n & (n - 1):
        raise DensityError(f"n={n} must be a power of two")
    pmf, axis = _penalty_pmf(f0)
    step = f0.step
    lo = float(axis[0])
    levels = n.bit_length() - 1
    for _ in range(levels):
        pmf = signal.fftconvolve(pmf, pmf)
        pmf = np.maximum(pmf, 0.0)
        pmf /= pmf.sum()
        lo = 2.0 * lo
        # trim negligible tails, folding their mass into the boundary bins
        c = np.cumsum(pmf)
        i0 = int(np.searchsorted(c, 1e-12))
        i1 = int(np.searchsorted(c, 1.0 - 1e-12)) + 1
        i1 = min(i1, len(pmf))
        head = float(pmf[:i0].sum())
        tail = float(pmf[i1:].sum())
        pmf = pmf[i0:i1].copy()
        pmf[0] += head
        pmf[-1] += tail
        lo += i0 * step
    cdf = np.cumsum(pmf)
    j = int(np.searchsorted(cdf, p_map))
    if j >= len(pmf):
        raise DensityError("quantile outside grid")
    return lo + j * step


def termination_threshold_approx(params: ThresholdParams, sigma2: float) -> float:
    """T ~ -min{(a sigma^2 + b)/sigma^2, t/sigma^2}."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    return -min((params.a * sigma2 + params.b) / sigma2, params.t / sigma2)


def fit_threshold_params(sigma2s, thresholds) -> ThresholdParams:
    """Least-squares fit of the threshold approximation constants.

    Fits z = -T sigma^2 = min(a sigma^2 + b, t) by scanning the breakpoint
    between the constant and affine branches.
    """
    s2 = np.asarray(sigma2s, dtype=np.float64)
    z = -np.asarray(thresholds, dtype=np.float64) * s2
    order = np.argsort(s2)
    s2, z = s2[order], z[order]
    if len(s2) < 3:
        raise ValueError("need at least 3 points to fit")
    best = None
    for split in range(len(s2) + 1):
        # constant branch on the low-sigma^2 side, affine on the rest
        t = float(z[:split].mean()) if split > 0 else float(z.max())
        if split < len(s2) - 1:
            A = np.vstack([s2[split:], np.ones(len(s2) - split)]).T
            a, b = np.linalg.lstsq(A, z[split:], rcond=None)[0]
        elif best is not None:
            continue
        else:
            a, b = -1.0, float(z.mean())
        if t <= 0:
            continue
        pred = np.minimum(a * s2 + b, t)
        sse = float(np.sum((pred - z) ** 2))
        if best is None or sse < best[0]:
            best = (sse, float(a), float(b), t)
    if best is None:
        raise ValueError("threshold fit failed")
    _, a, b, t = best
    return ThresholdParams(a=a, b=b, t=t)
