"""Quick internal consistency checks, runnable without pytest.

Each check exercises one cross-module identity on small codes; the full
oracle suite lives in tests/.  Returns a nonzero exit code on any failure.
"""
from __future__ import annotations

import numpy as np

from .channel import ChannelParams, awgn_sample, channel_llr, ebn0_to_sigma, modulate_bpsk
from .code import expand_info, polar_transform, satisfies_constraints, validate_spec
from .construct import construct_polar
from .density import bias_table, bit_channel_cdfs, channel_cdf
from .listdec import scl_decode
from .metrics import brute_force_m2, correlation_discrepancy
from .path import sc_decode
from .stack import StackParams, stack_decode


def _check_transform_involution(rng) -> None:
    for m in range(1, 7):
        u = rng.integers(0, 2, 1 << m, dtype=np.int8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)


def _check_noiseless_roundtrip(rng) -> None:
    spec = construct_polar(5, 16, ChannelParams(0.8))
    data = rng.integers(0, 2, spec.k, dtype=np.int8)
    u = expand_info(spec, data)
    assert satisfies_constraints(spec, u)
    llr = modulate_bpsk(polar_transform(u)) * 50.0
    for out in (sc_decode(spec, llr), scl_decode(spec, llr, 4)):
        assert np.array_equal(out.info_bits, data)


def _check_sc_score_identity(rng) -> None:
    spec = construct_polar(3, 4, ChannelParams(0.9))
    params = ebn0_to_sigma(2.0, spec.k / spec.n)
    data = rng.integers(0, 2, spec.k, dtype=np.int8)
    x = modulate_bpsk(polar_transform(expand_info(spec, data)))
    llr = channel_llr(awgn_sample(x, params, rng), params)
    out = sc_decode(spec, llr)
    assert abs(out.score + correlation_discrepancy(out.codeword, llr)) < 1e-9


def _check_stack_matches_brute_force(rng) -> None:
    spec = validate_spec(3, 8, [])  # rate-1: stack search == ML over all u
    params = ChannelParams(1.0)
    llr = channel_llr(awgn_sample(np.ones(8), params, rng), params)
    out = stack_decode(spec, llr, StackParams(L=8, score_kind="m2"))
    assert abs(out.score - brute_force_m2(out.u, llr)) < 1e-9
    assert abs(out.score - brute_force_m2([], llr)) < 1e-9


def _check_bias_table_shape() -> None:
    f0 = channel_cdf(ChannelParams(1.0))
    table = bias_table(bit_channel_cdfs(4, f0))
    assert table.n == 16 and table.psi[0] == 0.0
    assert np.all(np.diff(table.psi) <= 1e-12)


def run() -> int:
    rng = np.random.default_rng(7)
    checks = [
        ("transform involution", _check_transform_involution, True),
        ("noiseless roundtrip", _check_noiseless_roundtrip, True),
        ("sc score identity", _check_sc_score_identity, True),
        ("stack vs brute force", _check_stack_matches_brute_force, True),
        ("bias table shape", _check_bias_table_shape, False),
    ]
    failures = 0
    for name, fn, takes_rng in checks:
        try:
            fn(rng) if takes_rng else fn()
            print(f"ok   {name}")
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc}")
    return 1 if failures else 0
