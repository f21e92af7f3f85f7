"""Stack decoder: min-max heap, scores, budgets, LSA, early termination."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarseq.channel import ChannelParams, awgn_sample, channel_llr, modulate_bpsk
from polarseq.code import expand_info, polar_transform, validate_spec
from polarseq.density import BiasTable
from polarseq.metrics import correlation_discrepancy, exact_prefix_prob
from polarseq.path import ABORTED_BUDGET, ABORTED_THRESHOLD, COMPLETED
from polarseq.stack import (
    LsaParams,
    MinMaxHeap,
    StackParams,
    StackStats,
    score_child,
    stack_decode,
)

from conftest import all_codewords, random_spec


def flat_bias(n):
    return BiasTable(psi=np.zeros(n + 1))


class TestMinMaxHeap:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=200))
    def test_pop_min_sorted(self, keys):
        h = MinMaxHeap()
        for i, k in enumerate(keys):
            h.push((k, i), None)
        out = [h.pop_min()[0][0] for _ in range(len(keys))]
        assert out == sorted(keys)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=200))
    def test_pop_max_sorted(self, keys):
        h = MinMaxHeap()
        for i, k in enumerate(keys):
            h.push((k, i), None)
        out = [h.pop_max()[0][0] for _ in range(len(keys))]
        assert out == sorted(keys, reverse=True)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(st.booleans(), st.integers(-100, 100)),
            min_size=1,
            max_size=300,
        )
    )
    def test_interleaved_against_reference(self, script):
        import heapq

        h = MinMaxHeap()
        ref = []
        uid = 0
        for is_pop, k in script:
            if is_pop and ref:
                lo = min(ref)
                hi = max(ref)
                assert h.peek_min()[0] == lo and h.peek_max()[0] == hi
                assert h.pop_min()[0] == lo
                ref.remove(lo)
            else:
                h.push((k, uid), uid)
                ref.append((k, uid))
                uid += 1
        while ref:
            assert h.pop_max()[0] == max(ref)
            ref.remove(max(ref))


class TestScoreChild:
    def test_m2_agreement_keeps_score(self):
        assert score_child(-1.5, 3.0, 0, None, 0, "m2") == -1.5
        assert score_child(-1.5, 3.0, 1, None, 0, "m2") == -4.5

    def test_m3_is_m2_shifted_by_bias_increment(self):
        bias = BiasTable(psi=np.array([0.0, -0.4, -1.0]))
        for v in (0, 1):
            m2 = score_child(-2.0, -1.0, v, None, 1, "m2")
            m3 = score_child(-2.0, -1.0, v, bias, 1, "m3")
            assert m3 - m2 == pytest.approx(-bias.increment(1)) == pytest.approx(0.6)

    def test_m3_requires_bias(self):
        with pytest.raises(ValueError):
            score_child(0.0, 1.0, 0, None, 0, "m3")

    def test_m1_is_log_posterior(self):
        s = 1.3
        total = np.exp(score_child(0.0, s, 0, None, 0, "m1")) + np.exp(
            score_child(0.0, s, 1, None, 0, "m1")
        )
        assert total == pytest.approx(1.0)


class TestStackDecode:
    def test_noiseless_n_iterations(self, rng):
        for kind in ("m1", "m2", "m3"):
            spec = random_spec(rng, 4, 8)
            data = rng.integers(0, 2, spec.k, dtype=np.int8)
            llr = modulate_bpsk(polar_transform(expand_info(spec, data))) * 1e6
            params = StackParams(
                L=4, score_kind=kind, bias=flat_bias(16) if kind == "m3" else None
            )
            out = stack_decode(spec, llr, params)
            assert out.termination == COMPLETED
            assert out.iterations == spec.n
            assert np.array_equal(out.info_bits, data)

    def test_m2_exhaustive_is_ml(self, rng):
        from polarseq.metrics import penalty

        chan = ChannelParams(0.8)
        for _ in range(20):
            spec = random_spec(rng, 4, 8)
            data = rng.integers(0, 2, spec.k, dtype=np.int8)
            x = modulate_bpsk(polar_transform(expand_info(spec, data)))
            llr = channel_llr(awgn_sample(x, chan, rng), chan)
            out = stack_decode(
                spec, llr, StackParams(L=1 << spec.k, score_kind="m2")
            )
            assert out.termination == COMPLETED
            words = all_codewords(spec)
            best = float(-penalty(llr[None, :], words).sum(axis=1).max())
            assert correlation_discrepancy(out.codeword, llr) == pytest.approx(
                best, abs=1e-9
            )

    def test_m1_exhaustive_maximizes_path_probability(self, rng):
        chan = ChannelParams(1.0)
        spec = random_spec(rng, 3, 8)  # rate 1, every input valid
        for _ in range(10):
            llr = channel_llr(rng.normal(0.5, 1.0, 8), chan)
            out = stack_decode(spec, llr, StackParams(L=256, score_kind="m1"))
            probs = [
                exact_prefix_prob(
                    [(w >> (7 - j)) & 1 for j in range(8)], llr
                )
                for w in range(256)
            ]
            assert out.score == pytest.approx(np.log(max(probs)), abs=1e-6)

    def test_budget_and_queue_invariants(self, rng):
        chan = ChannelParams(1.3)
        for _ in range(30):
            m = int(rng.integers(3, 6))
            spec = random_spec(rng, m, int(rng.integers(1, 1 << m)))
            L = int(rng.integers(1, 9))
            D = int(rng.integers(2, 4 * L * spec.n))
            llr = channel_llr(rng.normal(0.2, 1.0, spec.n), chan)
            stats = StackStats()
            out = stack_decode(
                spec, llr, StackParams(L=L, D=D, score_kind="m2"), stats=stats
            )
            assert out.iterations <= L * spec.n
            assert stats.max_queue_size <= D
            assert np.all(np.diff(stats.barrier_trace) >= 0)

    def test_tiny_queue_still_terminates(self, rng):
        # every live pop pushes at least one live child, so even D=2 cannot
        # strand the search: it must complete (possibly wrongly) in <= L*n
        spec = random_spec(rng, 4, 12)
        chan = ChannelParams(2.0)
        for _ in range(200):
            llr = channel_llr(rng.normal(0.1, 1.0, 16), chan)
            out = stack_decode(spec, llr, StackParams(L=2, D=2, score_kind="m2"))
            assert out.termination == COMPLETED
            assert out.iterations <= 2 * spec.n

    def test_early_termination_threshold(self, rng):
        spec = random_spec(rng, 4, 8)
        n = spec.n
        chan = ChannelParams(1.0)
        llr = channel_llr(rng.normal(0.4, 1.0, n), chan)
        never = stack_decode(
            spec,
            llr,
            StackParams(L=8, score_kind="m3", bias=flat_bias(n), early_term_threshold=-np.inf),
        )
        assert never.termination == COMPLETED
        always = stack_decode(
            spec,
            llr,
            StackParams(L=8, score_kind="m3", bias=flat_bias(n), early_term_threshold=1.0),
        )
        assert always.termination == ABORTED_THRESHOLD
        # boundary: popped score exactly T does not abort (root score 0)
        boundary = stack_decode(
            spec,
            llr,
            StackParams(L=8, score_kind="m3", bias=flat_bias(n), early_term_threshold=0.0),
        )
        assert boundary.iterations >= 1

    def test_early_termination_requires_m3(self):
        with pytest.raises(ValueError):
            StackParams(L=4, score_kind="m2", early_term_threshold=-1.0).validate(16)

    def test_m3_requires_matching_bias(self, rng):
        with pytest.raises(ValueError):
            StackParams(L=4, score_kind="m3", bias=flat_bias(8)).validate(16)

    def test_lsa_degenerate_equals_plain(self, rng):
        chan = ChannelParams(1.1)
        spec = random_spec(rng, 5, 16)
        for _ in range(20):
            llr = channel_llr(rng.normal(0.3, 1.0, 32), chan)
            plain = stack_decode(spec, llr, StackParams(L=4, score_kind="m2"))
            lsa = stack_decode(
                spec,
                llr,
                StackParams(L=4, score_kind="m2", lsa=LsaParams(kappa0=3, l_max=4)),
            )
            assert np.array_equal(plain.u, lsa.u)
            assert plain.iterations == lsa.iterations

    def test_lsa_doubles_and_respects_cap(self, rng):
        chan = ChannelParams(1.6)
        spec = random_spec(rng, 5, 20)
        doubled = 0
        for _ in range(100):
            llr = channel_llr(rng.normal(0.2, 1.0, 32), chan)
            stats = StackStats()
            out = stack_decode(
                spec,
                llr,
                StackParams(L=2, score_kind="m2", lsa=LsaParams(kappa0=1, l_max=8)),
                stats=stats,
            )
            assert stats.final_L in (2, 4, 8)
            assert out.iterations <= 8 * spec.n
            doubled += stats.doublings > 0
        assert doubled > 0

    def test_lsa_recovers_frames_plain_stack_loses(self, rng):
        # with a tight budget, adaptation should never do worse overall
        chan = ChannelParams(1.2)
        spec = random_spec(rng, 6, 32, dynamic=False)
        plain_err = lsa_err = 0
        for _ in range(150):
            data = rng.integers(0, 2, spec.k, dtype=np.int8)
            x = modulate_bpsk(polar_transform(expand_info(spec, data)))
            llr = channel_llr(awgn_sample(x, chan, rng), chan)
            p = stack_decode(spec, llr, StackParams(L=2, score_kind="m2"))
            a = stack_decode(
                spec,
                llr,
                StackParams(L=2, score_kind="m2", lsa=LsaParams(kappa0=2, l_max=16)),
            )
            plain_err += not np.array_equal(p.info_bits, data)
            lsa_err += not np.array_equal(a.info_bits, data)
        assert lsa_err <= plain_err
