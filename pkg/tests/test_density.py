"""Density evolution: CDF algebra, bias table, and termination thresholds."""
import numpy as np
import pytest
from scipy import stats

from polarseq.channel import ChannelParams
from polarseq.density import (
    BiasTable,
    DensityError,
    GridSpec,
    QuantizedCdf,
    ThresholdParams,
    bias_table,
    bit_channel_cdfs,
    bit_error_probs,
    channel_cdf,
    default_grid,
    evolve_check,
    evolve_var,
    fit_threshold_params,
    termination_threshold_approx,
    termination_threshold_exact,
)
from polarseq.metrics import q_op
from polarseq.path import allzero_path_llrs


def step_cdf(value, grid: GridSpec) -> QuantizedCdf:
    """CDF of a deterministic LLR equal to `value`."""
    x = grid.axis()
    return QuantizedCdf(
        grid_min=-grid.half_width, step=grid.step, values=(x >= value - 1e-12).astype(float)
    )


def empirical_sup_distance(cdf: QuantizedCdf, samples) -> float:
    emp = np.searchsorted(np.sort(samples), cdf.axis(), side="right") / len(samples)
    return float(np.max(np.abs(emp - cdf.values)))


def sample_channel_llrs(rng, sigma, size):
    return rng.normal(2 / sigma**2, 2 / sigma, size)


class TestGridAndCdf:
    def test_grid_validation(self):
        with pytest.raises(DensityError):
            GridSpec(half_width=1.0, points=10)
        with pytest.raises(DensityError):
            GridSpec(half_width=-1.0)

    def test_default_grid_width(self):
        g = default_grid(ChannelParams(0.5))
        assert g.half_width == pytest.approx(64 / 0.25)

    def test_cdf_monotone_required(self):
        with pytest.raises(DensityError):
            QuantizedCdf(0.0, 1.0, [0.5, 0.2, 1.0])

    def test_channel_cdf_values(self):
        f = channel_cdf(ChannelParams(1.0))
        assert f.eval_at(2.0) == pytest.approx(0.5, abs=1e-4)
        assert f.eval_at(0.0) == pytest.approx(stats.norm.cdf(-1), abs=1e-4)
        assert f.values[0] == pytest.approx(0.0, abs=1e-9)
        assert f.values[-1] == 1.0

    def test_channel_cdf_rejects_narrow_grid(self):
        with pytest.raises(DensityError, match="narrow"):
            channel_cdf(ChannelParams(1.0), GridSpec(half_width=4.0, points=257))

    def test_pmf_mean_matches_gaussian(self):
        f = channel_cdf(ChannelParams(0.8))
        assert f.mean() == pytest.approx(2 / 0.64, rel=1e-6)


class TestEvolveCheck:
    def test_step_at_zero_fixed_point(self):
        g = GridSpec(half_width=8.0, points=513)
        out = evolve_check(step_cdf(0.0, g))
        assert np.allclose(out.values, step_cdf(0.0, g).values)

    def test_constant_positive_fixed_point(self):
        g = GridSpec(half_width=8.0, points=1025)
        out = evolve_check(step_cdf(3.0, g))
        assert out.eval_at(2.9) == pytest.approx(0.0, abs=1e-12)
        assert out.eval_at(3.1) == pytest.approx(1.0, abs=1e-12)

    def test_monte_carlo_oracle(self, rng):
        f = channel_cdf(ChannelParams(1.0))
        a = sample_channel_llrs(rng, 1.0, 10**6)
        b = sample_channel_llrs(rng, 1.0, 10**6)
        assert empirical_sup_distance(evolve_check(f), q_op(a, b)) <= 0.01

    def test_mean_degrades(self):
        f = channel_cdf(ChannelParams(1.0))
        assert evolve_check(f).mean() <= f.mean()


class TestEvolveVar:
    def test_step_doubles(self):
        g = GridSpec(half_width=8.0, points=1025)
        out = evolve_var(step_cdf(1.5, g))
        assert out.eval_at(2.9) == pytest.approx(0.0, abs=1e-9)
        assert out.eval_at(3.1) == pytest.approx(1.0, abs=1e-9)

    def test_gaussian_closure(self):
        f = channel_cdf(ChannelParams(1.0))
        out = evolve_var(f)
        x = out.axis()
        ref = stats.norm.cdf(x, loc=4.0, scale=np.sqrt(8.0))
        assert np.max(np.abs(out.values - ref)) < 1e-3

    def test_monte_carlo_oracle(self, rng):
        f = channel_cdf(ChannelParams(1.0))
        a = sample_channel_llrs(rng, 1.0, 10**6)
        b = sample_channel_llrs(rng, 1.0, 10**6)
        assert empirical_sup_distance(evolve_var(f), a + b) <= 0.01

    def test_mean_doubles(self):
        f = channel_cdf(ChannelParams(1.0))
        assert evolve_var(f).mean() == pytest.approx(2 * f.mean(), rel=1e-3)

    def test_rejects_heavy_truncation(self):
        g = GridSpec(half_width=3.0, points=257)
        x = g.axis()
        vals = stats.norm.cdf(x, loc=-2.0, scale=0.4)
        vals = np.clip(vals, 0, 1)
        vals[-1] = 1.0
        with pytest.raises(DensityError):
            evolve_var(QuantizedCdf(-3.0, g.step, vals))


class TestBitChannels:
    def test_m0_identity(self):
        f = channel_cdf(ChannelParams(1.0))
        (out,) = bit_channel_cdfs(0, f)
        assert np.array_equal(out.values, f.values)

    def test_m1_pair(self):
        f = channel_cdf(ChannelParams(1.0))
        lo, hi = bit_channel_cdfs(1, f)
        assert np.allclose(lo.values, evolve_check(f).values)
        assert np.allclose(hi.values, evolve_var(f).values)

    def test_m3_extremes(self):
        f = channel_cdf(ChannelParams(1.0))
        probs = bit_error_probs(bit_channel_cdfs(3, f))
        assert probs.argmax() == 0 and probs.argmin() == 7

    def test_rejects_large_m(self):
        f = channel_cdf(ChannelParams(1.0))
        with pytest.raises(DensityError):
            bit_channel_cdfs(13, f)


class TestBitErrorProbs:
    def test_deterministic_positive(self):
        g = GridSpec(half_width=8.0, points=513)
        assert bit_error_probs([step_cdf(2.0, g)])[0] == 0.0

    def test_symmetric_half(self):
        # tolerance is set by the half-bin quantization of the mass at 0
        g = GridSpec(half_width=8.0, points=8193)
        x = g.axis()
        vals = stats.norm.cdf(x, scale=1.5)
        vals[-1] = 1.0
        assert bit_error_probs([QuantizedCdf(-8.0, g.step, vals)])[0] == pytest.approx(
            0.5, abs=1e-3
        )

    def test_genie_monte_carlo(self, rng):
        # per-channel error rates on the correct all-zero path
        sigma, m, frames = 1.0, 3, 200_000
        llrs = sample_channel_llrs(rng, sigma, (frames, 1 << m))
        genie = allzero_path_llrs(llrs)
        emp = (genie < 0).mean(axis=0)
        probs = bit_error_probs(bit_channel_cdfs(m, channel_cdf(ChannelParams(sigma))))
        mc = np.sqrt(np.maximum(probs * (1 - probs), 1e-9) / frames)
        assert np.all(np.abs(emp - probs) < 4 * mc + 5e-4)


class TestBiasTable:
    def test_basic_shape(self):
        f = channel_cdf(ChannelParams(1.0))
        table = bias_table(bit_channel_cdfs(3, f))
        assert table.psi[0] == 0.0
        assert np.all(np.diff(table.psi) <= 1e-12)
        assert np.all(table.psi <= 1e-12)

    def test_increment_identity(self):
        f = channel_cdf(ChannelParams(0.9))
        cdfs = bit_channel_cdfs(3, f)
        table = bias_table(cdfs)
        for phi in range(8):
            assert table.increment(phi) == pytest.approx(
                cdfs[phi].neg_part_mean(), abs=1e-12
            )

    def test_monte_carlo_psi(self, rng):
        sigma, m, frames = 1.0, 3, 100_000
        llrs = sample_channel_llrs(rng, sigma, (frames, 1 << m))
        genie = allzero_path_llrs(llrs)
        emp = np.minimum(genie, 0.0).sum(axis=1).mean()
        table = bias_table(bit_channel_cdfs(m, channel_cdf(ChannelParams(sigma))))
        assert table.psi[-1] == pytest.approx(emp, rel=0.02)

    def test_csv_roundtrip(self, tmp_path):
        table = bias_table(bit_channel_cdfs(2, channel_cdf(ChannelParams(1.0))))
        path = tmp_path / "bias.csv"
        table.save_csv(path)
        assert path.read_text().splitlines()[0] == "phase,psi"
        back = BiasTable.load_csv(path)
        assert np.allclose(back.psi, table.psi)
        assert back.n == 4

    def test_validation(self):
        with pytest.raises(DensityError):
            BiasTable(psi=np.array([0.0, 1.0]))
        with pytest.raises(DensityError):
            BiasTable(psi=np.array([-1.0, -2.0]))


class TestThresholds:
    def test_exact_centered_median(self):
        f0 = channel_cdf(ChannelParams(1.0))
        t = termination_threshold_exact(f0, 8, 0.5)
        # the n-fold sum of centered penalties has mean 0; the median of a
        # mildly skewed sum stays within a fraction of its std of 0
        assert abs(t) < 1.0

    def test_exact_nondecreasing_in_pmap(self):
        f0 = channel_cdf(ChannelParams(1.0))
        ts = [
            termination_threshold_exact(f0, 16, p) for p in (0.001, 0.01, 0.1, 0.5)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(ts, ts[1:]))
        assert ts[0] < ts[-1]

    def test_exact_monte_carlo(self, rng):
        sigma, n, p_map, frames = 1.0, 8, 0.01, 10**6
        f0 = channel_cdf(ChannelParams(sigma))
        s = sample_channel_llrs(rng, sigma, (frames, n))
        tau = np.minimum(s, 0.0)
        centered = (tau - tau.mean()).sum(axis=1)
        emp = np.quantile(centered, p_map)
        t = termination_threshold_exact(f0, n, p_map)
        assert t == pytest.approx(emp, abs=0.05)

    def test_exact_validation(self):
        f0 = channel_cdf(ChannelParams(1.0))
        with pytest.raises(DensityError):
            termination_threshold_exact(f0, 8, 0.0)
        with pytest.raises(DensityError):
            termination_threshold_exact(f0, 6, 0.1)

    def test_approx_reference_constants(self):
        # published curve-fit constants for two codes, evaluated by hand
        high_rate = ThresholdParams(a=-108.27, b=50.84, t=12.0)
        assert termination_threshold_approx(high_rate, 0.31) == pytest.approx(
            -12.0 / 0.31, abs=0.01
        )
        half_rate = ThresholdParams(a=-116.37, b=121.41, t=43.0)
        assert termination_threshold_approx(half_rate, 1.0) == pytest.approx(
            -5.04, abs=0.01
        )

    def test_approx_branch_semantics(self):
        p = ThresholdParams(a=1.0, b=0.0, t=100.0)
        assert termination_threshold_approx(p, 2.0) == pytest.approx(-1.0)

    def test_params_validation_and_io(self, tmp_path):
        with pytest.raises(DensityError):
            ThresholdParams(a=0.0, b=0.0, t=0.0)
        p = ThresholdParams(a=-2.0, b=3.0, t=1.5)
        path = tmp_path / "thresh.json"
        p.save_json(path)
        assert ThresholdParams.load_json(path) == p

    def test_fit_recovers_synthetic_params(self):
        true = ThresholdParams(a=-110.0, b=120.0, t=40.0)
        s2 = np.linspace(0.3, 1.2, 10)
        ts = [termination_threshold_approx(true, v) for v in s2]
        fit = fit_threshold_params(s2, ts)
        for v in s2:
            got = termination_threshold_approx(fit, v)
            want = termination_threshold_approx(true, v)
            assert got == pytest.approx(want, rel=0.02)

    def test_fit_needs_three_points(self):
        with pytest.raises(ValueError):
            fit_threshold_params([1.0, 2.0], [-1.0, -2.0])
