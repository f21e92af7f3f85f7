"""Polar subcode toolkit: encoding, SC/SCL/stack decoding, density
evolution (bias tables and early-termination thresholds), code
construction, and a Monte Carlo simulation harness."""

from .channel import ChannelParams, awgn_sample, channel_llr, ebn0_to_sigma, modulate_bpsk
from .code import (
    CodeSpec,
    SpecError,
    bit_reversal_permutation,
    dynamic_frozen_value,
    expand_info,
    extract_info,
    load_spec,
    polar_transform,
    satisfies_constraints,
    save_spec,
    validate_spec,
)
from .construct import (
    attach_crc,
    attach_crc16,
    construct_crc_polar,
    construct_polar,
    crc_remainder,
)
from .density import (
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
from .listdec import scl_decode
from .metrics import correlation_discrepancy, p_op, penalty, q_op, q_op_exact
from .path import (
    ABORTED_BUDGET,
    ABORTED_THRESHOLD,
    COMPLETED,
    DecodeOutcome,
    OpCounters,
    PathMemory,
    allzero_path_llrs,
    init_path,
    sc_decode,
)
from .sim import CampaignConfig, run_campaign, write_histogram_csv, write_results_csv
from .stack import LsaParams, StackParams, StackStats, stack_decode

__version__ = "0.1.0"

__all__ = [
    "ABORTED_BUDGET",
    "ABORTED_THRESHOLD",
    "BiasTable",
    "COMPLETED",
    "CampaignConfig",
    "ChannelParams",
    "CodeSpec",
    "DecodeOutcome",
    "DensityError",
    "GridSpec",
    "LsaParams",
    "OpCounters",
    "PathMemory",
    "QuantizedCdf",
    "SpecError",
    "StackParams",
    "StackStats",
    "ThresholdParams",
    "allzero_path_llrs",
    "attach_crc",
    "attach_crc16",
    "awgn_sample",
    "bias_table",
    "bit_channel_cdfs",
    "bit_error_probs",
    "bit_reversal_permutation",
    "channel_cdf",
    "channel_llr",
    "construct_crc_polar",
    "construct_polar",
    "correlation_discrepancy",
    "crc_remainder",
    "default_grid",
    "dynamic_frozen_value",
    "ebn0_to_sigma",
    "evolve_check",
    "evolve_var",
    "expand_info",
    "extract_info",
    "fit_threshold_params",
    "init_path",
    "load_spec",
    "modulate_bpsk",
    "p_op",
    "penalty",
    "polar_transform",
    "q_op",
    "q_op_exact",
    "run_campaign",
    "satisfies_constraints",
    "save_spec",
    "sc_decode",
    "scl_decode",
    "stack_decode",
    "termination_threshold_approx",
    "termination_threshold_exact",
    "validate_spec",
    "write_histogram_csv",
    "write_results_csv",
]
