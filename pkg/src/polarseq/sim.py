"""Monte Carlo campaign driver: frame generation, decoder dispatch,
statistics, and CSV/histogram outputs.

Reproducibility contract: the noise of frame f at SNR point s is drawn
from an RNG substream keyed by (master seed, s, f), so results are
bit-identical for a fixed seed regardless of the worker count.  Frames
are folded into the statistics in index order and the stopping rule
(max frames / max frame-errors) is evaluated per frame, so early stopping
is deterministic too.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import LLR_SAT, ChannelParams, awgn_sample, channel_llr, ebn0_to_sigma, modulate_bpsk
from .code import CodeSpec, expand_info, polar_transform
from .listdec import scl_decode
from .path import COMPLETED, sc_decode
from .stack import LsaParams, StackParams, stack_decode

RESULTS_HEADER = [
    "snr_db",
    "frames",
    "frame_errors",
    "fer",
    "avg_iterations",
    "avg_summations",
    "avg_comparisons",
    "abort_count",
]

HISTOGRAM_HEADER = ["bucket_lo", "bucket_hi", "count_correct", "count_error"]


@dataclass(frozen=True)
class CampaignConfig:
    decoder: str  # sc | scl | stack
    snr_db: tuple
    max_frames: int
    max_errors: int = 100
    seed: int = 0
    all_zero: bool = False
    noiseless: bool = False
    score: str = "m3"
    list_size: int = 32
    queue_size: int | None = None
    lsa: LsaParams | None = None
    workers: int = 1

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.decoder not in ("sc", "scl", "stack"):
            raise ValueError(f"unknown decoder {self.decoder!r}")


@dataclass
class CampaignRow:
    snr_db: float
    frames: int
    frame_errors: int
    fer: float
    avg_iterations: float
    avg_summations: float
    avg_comparisons: float
    abort_count: int


@dataclass
class FrameRecord:
    error: bool
    aborted: bool
    iterations: int
    summations: int
    comparisons: int


def _snr_key(snr_db: float) -> int:
    return int(round(snr_db * 1000)) + (1 << 24)


def frame_rng(seed: int, snr_db: float, frame: int) -> np.random.Generator:
    return np.random.default_rng([seed, _snr_key(snr_db), frame])


def run_frame(
    spec: CodeSpec,
    cfg: CampaignConfig,
    params: ChannelParams,
    stack_params: StackParams | None,
    snr_db: float,
    frame: int,
) -> FrameRecord:
    rng = frame_rng(cfg.seed, snr_db, frame)
    if cfg.all_zero:
        data = np.zeros(spec.k, dtype=np.int8)
    else:
        data = rng.integers(0, 2, spec.k, dtype=np.int8)
    u = expand_info(spec, data)
    x = modulate_bpsk(polar_transform(u))
    if cfg.noiseless:
        llr = x * LLR_SAT
    else:
        llr = channel_llr(awgn_sample(x, params, rng), params)
    if cfg.decoder == "sc":
        out = sc_decode(spec, llr)
    elif cfg.decoder == "scl":
        out = scl_decode(spec, llr, cfg.list_size)
    else:
        out = stack_decode(spec, llr, stack_params)
    aborted = out.termination != COMPLETED
    error = aborted or not np.array_equal(out.info_bits, data)
    return FrameRecord(
        error=error,
        aborted=aborted,
        iterations=out.iterations,
        summations=out.ops.summations,
        comparisons=out.ops.comparisons,
    )


def _run_chunk(args):
    spec, cfg, params, stack_params, snr_db, lo, hi = args
    return [
        run_frame(spec, cfg, params, stack_params, snr_db, f) for f in range(lo, hi)
    ]


def iteration_histogram(records: list[FrameRecord]) -> list[tuple]:
    """Power-of-two iteration buckets split by decode correctness."""
    if not records:
        return []
    edges = [0, 1]
    top = max(r.iterations for r in records)
    while edges[-1] <= top:
        edges.append(edges[-1] * 2)
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ok = sum(1 for r in records if lo <= r.iterations < hi and not r.error)
        bad = sum(1 for r in records if lo <= r.iterations < hi and r.error)
        rows.append((lo, hi, ok, bad))
    return rows


def run_campaign(
    spec: CodeSpec,
    cfg: CampaignConfig,
    bias_provider=None,
    threshold_provider=None,
):
    """Run all SNR points; returns (rows, histograms) with histograms a
    dict snr_db -> bucket rows.

    bias_provider: sigma -> BiasTable, required for the m3 stack score.
    threshold_provider: sigma -> early-termination threshold T, optional.
    """
    rate = spec.k / spec.n
    rows = []
    histograms = {}
    chunk = 64
    for snr_db in cfg.snr_db:
        params = ebn0_to_sigma(snr_db, rate)
        stack_params = None
        if cfg.decoder == "stack":
            bias = None
            if cfg.score == "m3":
                if bias_provider is None:
                    raise ValueError("score m3 needs a bias provider")
                bias = bias_provider(params.sigma)
            threshold = (
                threshold_provider(params.sigma) if threshold_provider else None
            )
            stack_params = StackParams(
                L=cfg.list_size,
                D=cfg.queue_size,
                score_kind=cfg.score,
                bias=bias,
                lsa=cfg.lsa,
                early_term_threshold=threshold,
            )
            stack_params.validate(spec.n)
        records = []
        errors = 0
        stopped = False
        next_frame = 0
        pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
        try:
            while not stopped and next_frame < cfg.max_frames:
                wave = min(cfg.max_frames - next_frame, chunk * max(cfg.workers, 1))
                tasks = [
                    (spec, cfg, params, stack_params, snr_db, lo, min(lo + chunk, next_frame + wave))
                    for lo in range(next_frame, next_frame + wave, chunk)
                ]
                if pool is not None:
                    results = pool.map(_run_chunk, tasks)
                else:
                    results = map(_run_chunk, tasks)
                for batch in results:
                    for rec in batch:
                        if stopped:
                            break
                        records.append(rec)
                        if rec.error:
                            errors += 1
                            if cfg.max_errors and errors >= cfg.max_errors:
                                stopped = True
                next_frame += wave
        finally:
            if pool is not None:
                pool.shutdown()
        frames = len(records)
        rows.append(
            CampaignRow(
                snr_db=snr_db,
                frames=frames,
                frame_errors=errors,
                fer=errors / frames,
                avg_iterations=float(np.mean([r.iterations for r in records])),
                avg_summations=float(np.mean([r.summations for r in records])),
                avg_comparisons=float(np.mean([r.comparisons for r in records])),
                abort_count=sum(r.aborted for r in records),
            )
        )
        histograms[snr_db] = iteration_histogram(records)
    return rows, histograms


def write_results_csv(rows: list[CampaignRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_HEADER)
        for r in rows:
            w.writerow(
                [
                    f"{r.snr_db:g}",
                    r.frames,
                    r.frame_errors,
                    f"{r.fer:.8e}",
                    f"{r.avg_iterations:.6f}",
                    f"{r.avg_summations:.6f}",
                    f"{r.avg_comparisons:.6f}",
                    r.abort_count,
                ]
            )


def write_histogram_csv(buckets, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HISTOGRAM_HEADER)
        for lo, hi, ok, bad in buckets:
            w.writerow([lo, hi, ok, bad])
