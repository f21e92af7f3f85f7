"""Command line interface.

Subcommands:
  construct  build a code spec (optionally CRC-aided) and write it as JSON
  bias       compute score-bias tables for a list of noise levels
  threshold  compute exact early-termination thresholds and/or fit the
             three-constant approximation
  simulate   run a Monte Carlo campaign, writing a results CSV, per-SNR
             iteration histograms, and (optionally) report figures
  selftest   run quick internal consistency checks
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .channel import ChannelParams
from .code import load_spec, save_spec
from .construct import attach_crc, construct_polar
from .density import (
    BiasTable,
    ThresholdParams,
    bias_table,
    bit_channel_cdfs,
    bit_error_probs,
    channel_cdf,
    fit_threshold_params,
    termination_threshold_approx,
    termination_threshold_exact,
)
from .sim import (
    CampaignConfig,
    run_campaign,
    write_histogram_csv,
    write_results_csv,
)
from .stack import LsaParams


def _bias_filename(m: int, sigma: float) -> str:
    return f"bias_m{m}_s{sigma:.6f}.csv"


def compute_bias(m: int, sigma: float) -> BiasTable:
    f0 = channel_cdf(ChannelParams(sigma))
    return bias_table(bit_channel_cdfs(m, f0))


def _parse_float_list(text: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _cmd_construct(args) -> int:
    params = ChannelParams(args.design_sigma)
    if args.crc:
        base = construct_polar(args.m, args.k + args.crc, params)
        spec = attach_crc(base, args.crc, args.poly) if args.poly else attach_crc(
            base, args.crc, {8: 0x07, 16: 0x1021}[args.crc]
        )
    else:
        spec = construct_polar(args.m, args.k, params)
    if args.name:
        spec.name = args.name
    save_spec(spec, args.out)
    print(f"wrote {spec!r} to {args.out}")
    return 0


def _cmd_bias(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    for sigma in args.sigma:
        table = compute_bias(args.m, sigma)
        path = os.path.join(args.out_dir, _bias_filename(args.m, sigma))
        table.save_csv(path)
        print(f"wrote {path} (psi[n] = {table.psi[-1]:.4f})")
    return 0


def _cmd_threshold(args) -> int:
    spec = load_spec(args.code) if args.code else None
    sigmas = args.sigma
    thresholds = []
    for sigma in sigmas:
        params = ChannelParams(sigma)
        f0 = channel_cdf(params)
        if args.p_map == "auto":
            if spec is None:
                print("--p-map auto requires --code", file=sys.stderr)
                return 2
            probs = bit_error_probs(bit_channel_cdfs(spec.m, f0))
            info = spec.info_positions()
            p_map = float(min(0.5, probs[info].sum()))
            p_map = max(p_map, 1e-9)
        else:
            p_map = float(args.p_map)
        n = spec.n if spec is not None else args.n
        thresholds.append(termination_threshold_exact(f0, n, p_map))
    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sigma", "T"])
            for sigma, t in zip(sigmas, thresholds):
                w.writerow([f"{sigma:.6f}", f"{t:.8g}"])
        print(f"wrote {args.out}")
    if args.fit:
        tp = fit_threshold_params([s * s for s in sigmas], thresholds)
        tp.save_json(args.fit)
        print(f"fit a={tp.a:.4f} b={tp.b:.4f} t={tp.t:.4f} -> {args.fit}")
        if args.plot:
            from .plots import plot_threshold_fit

            fig_path = os.path.splitext(args.fit)[0] + ".png"
            plot_threshold_fit([1.0 / (s * s) for s in sigmas], thresholds, tp, fig_path)
            print(f"wrote {fig_path}")
    for sigma, t in zip(sigmas, thresholds):
        print(f"sigma={sigma:.4f}  T={t:.4f}")
    return 0


def _load_threshold_table(path) -> dict:
    import csv

    with open(path, newline="") as fh:
        return {float(r["sigma"]): float(r["T"]) for r in csv.DictReader(fh)}


def _cmd_simulate(args) -> int:
    spec = load_spec(args.code)
    lsa = None
    if args.lsa:
        lsa = LsaParams(kappa0=args.kappa0, l_max=args.lmax or 4 * args.list_size)
    cfg = CampaignConfig(
        decoder=args.decoder,
        snr_db=tuple(args.snr_db),
        max_frames=args.frames,
        max_errors=args.max_errors,
        seed=args.seed,
        all_zero=args.all_zero,
        noiseless=args.noiseless,
        score=args.score,
        list_size=args.list_size,
        queue_size=args.queue_size,
        lsa=lsa,
        workers=args.workers,
    )

    bias_provider = None
    if args.decoder == "stack" and args.score == "m3":
        cache = {}

        def bias_provider(sigma, _cache=cache):
            key = round(sigma, 9)
            if key in _cache:
                return _cache[key]
            if args.bias_dir:
                path = os.path.join(args.bias_dir, _bias_filename(spec.m, sigma))
                if os.path.exists(path):
                    _cache[key] = BiasTable.load_csv(path)
                    return _cache[key]
                if not args.bias_auto:
                    raise FileNotFoundError(f"missing bias table {path}")
                table = compute_bias(spec.m, sigma)
                os.makedirs(args.bias_dir, exist_ok=True)
                table.save_csv(path)
            elif args.bias_auto:
                table = compute_bias(spec.m, sigma)
            else:
                raise FileNotFoundError(
                    "score m3 needs --bias-dir and/or --bias-auto"
                )
            _cache[key] = table
            return table

    threshold_provider = None
    if args.early_term == "exact":
        if not args.threshold_table:
            print("--early-term exact requires --threshold-table", file=sys.stderr)
            return 2
        table = _load_threshold_table(args.threshold_table)

        def threshold_provider(sigma, _table=table):
            for s, t in _table.items():
                if abs(s - sigma) < 1e-6:
                    return t
            raise KeyError(f"no threshold entry for sigma={sigma:.6f}")

    elif args.early_term == "approx":
        if not args.threshold_params:
            print("--early-term approx requires --threshold-params", file=sys.stderr)
            return 2
        tp = ThresholdParams.load_json(args.threshold_params)

        def threshold_provider(sigma, _tp=tp):
            return termination_threshold_approx(_tp, sigma * sigma)

    rows, histograms = run_campaign(
        spec, cfg, bias_provider=bias_provider, threshold_provider=threshold_provider
    )
    write_results_csv(rows, args.out)
    print(f"wrote {args.out}")
    stem = os.path.splitext(args.out)[0]
    for snr, buckets in histograms.items():
        hpath = f"{stem}_hist_{snr:g}dB.csv"
        write_histogram_csv(buckets, hpath)
    if args.plot:
        from .plots import plot_complexity, plot_fer, plot_iteration_histogram

        plot_fer(rows, f"{stem}_fer.png", label=spec.name)
        plot_complexity(rows, f"{stem}_complexity.png", label=spec.name)
        for snr, buckets in histograms.items():
            plot_iteration_histogram(
                buckets, f"{stem}_hist_{snr:g}dB.png", title=f"{snr:g} dB"
            )
        print(f"wrote figures next to {args.out}")
    for r in rows:
        print(
            f"snr={r.snr_db:g}dB frames={r.frames} fer={r.fer:.3e} "
            f"iters={r.avg_iterations:.1f} aborts={r.abort_count}"
        )
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarseq")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a code spec JSON")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--k", type=int, required=True, help="data dimension (excl. CRC)")
    c.add_argument("--design-sigma", type=float, required=True)
    c.add_argument("--crc", type=int, default=0, choices=[0, 8, 16])
    c.add_argument("--poly", type=lambda s: int(s, 0), default=None)
    c.add_argument("--name", default="")
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_construct)

    b = sub.add_parser("bias", help="emit bias tables for a sigma list")
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--sigma", type=_parse_float_list, required=True)
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=_cmd_bias)

    t = sub.add_parser("threshold", help="exact thresholds and curve fit")
    t.add_argument("--code", default=None)
    t.add_argument("--n", type=int, default=None, help="code length if no --code")
    t.add_argument("--sigma", type=_parse_float_list, required=True)
    t.add_argument("--p-map", default="auto", help="'auto' (union bound) or a float")
    t.add_argument("--out", default=None, help="CSV sigma,T output")
    t.add_argument("--fit", default=None, help="write fitted a,b,t JSON here")
    t.add_argument("--plot", action="store_true")
    t.set_defaults(func=_cmd_threshold)

    s = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    s.add_argument("--code", required=True)
    s.add_argument("--decoder", choices=["sc", "scl", "stack"], default="stack")
    s.add_argument("--score", choices=["m1", "m2", "m3"], default="m3")
    s.add_argument("--list-size", type=int, default=32)
    s.add_argument("--queue-size", type=int, default=None, help="default L*n")
    s.add_argument("--lsa", action="store_true")
    s.add_argument("--kappa0", type=int, default=20)
    s.add_argument("--lmax", type=int, default=None)
    s.add_argument("--early-term", choices=["off", "exact", "approx"], default="off")
    s.add_argument("--threshold-table", default=None, help="CSV sigma,T")
    s.add_argument("--threshold-params", default=None, help="JSON a,b,t")
    s.add_argument("--bias-dir", default=None)
    s.add_argument("--bias-auto", action="store_true", help="compute missing bias tables")
    s.add_argument("--snr-db", type=_parse_float_list, required=True)
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--max-errors", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--all-zero", action="store_true")
    s.add_argument("--noiseless", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--plot", action="store_true")
    s.set_defaults(func=_cmd_simulate)

    st = sub.add_parser("selftest", help="quick oracle suites")
    st.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.frames < 1:
        parser.error("--frames must be >= 1")
    if args.command == "threshold" and args.code is None and args.n is None:
        parser.error("threshold needs --code or --n")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
