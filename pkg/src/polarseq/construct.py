"""Code construction: classical polar codes via density evolution, and
CRC-aided polar codes expressed as dynamic frozen symbols.

CRC check bits occupy the highest-index non-frozen positions, so every
constraint row is automatically causal; the CRC is computed over the data
bits in ascending u-domain order.
"""
from __future__ import annotations

import numpy as np

from .channel import ChannelParams
from .code import CodeSpec, validate_spec
from .density import GridSpec, bit_channel_cdfs, bit_error_probs, channel_cdf

#: CRC-16/CCITT generator (x^16 + x^12 + x^5 + 1), as used with 16-bit CRCs.
CRC16_POLY = 0x1021
#: CRC-8/CCITT generator (x^8 + x^2 + x + 1).
CRC8_POLY = 0x07


def crc_remainder(bits, poly: int, width: int) -> list[int]:
    """CRC bits of a bit sequence, MSB first; init 0, no reflection.

    Linear in the message, so each check bit is a XOR of message bits.
    """
    reg = 0
    mask = (1 << width) - 1
    for b in bits:
        fb = ((reg >> (width - 1)) ^ int(b)) & 1
        reg = ((reg << 1) & mask) ^ (poly if fb else 0)
    return [(reg >> (width - 1 - t)) & 1 for t in range(width)]


def construct_polar(
    m: int, k: int, design_params: ChannelParams, grid: GridSpec | None = None
) -> CodeSpec:
    """Freeze the n-k least reliable bit subchannels at the design SNR.

    Ties are broken by freezing the lower index.  All constraints are
    singletons (static zero freezing).
    """
    n = 1 << m
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    if k == n:
        return validate_spec(m, k, [], name=f"polar({n},{k})")
    f0 = channel_cdf(design_params, grid)
    probs = bit_error_probs(bit_channel_cdfs(m, f0))
    order = np.lexsort((np.arange(n), -probs))
    frozen = np.sort(order[: n - k])
    return validate_spec(
        m, k, [[int(i)] for i in frozen], name=f"polar({n},{k})"
    )


def attach_crc(base: CodeSpec, width: int, poly: int) -> CodeSpec:
    """Turn the `width` highest-index non-frozen positions into CRC checks.

    The base code must have k + width non-frozen positions; the resulting
    code has dimension base.k - width, with each check bit expressed as a
    causal XOR constraint row over the data positions it depends on.
    """
    info = base.info_positions()
    if len(info) <= width:
        raise ValueError(
            f"base code has only {len(info)} info positions, need > {width}"
        )
    data_pos = info[:-width]
    crc_pos = info[-width:]
    k_data = len(data_pos)
    rows = [sorted(row) for row in base.constraints]
    # unit responses give the XOR support of each check bit
    responses = []
    for j in range(k_data):
        msg = [0] * k_data
        msg[j] = 1
        responses.append(crc_remainder(msg, poly, width))
    for t in range(width):
        row = [int(data_pos[j]) for j in range(k_data) if responses[j][t]]
        row.append(int(crc_pos[t]))
        assert max(row) == crc_pos[t], "CRC row must stay causal"
        rows.append(row)
    name = f"{base.name}+crc{width}" if base.name else f"crc{width}"
    return validate_spec(base.m, k_data, rows, name=name)


def attach_crc16(base: CodeSpec, poly: int = CRC16_POLY) -> CodeSpec:
    """CRC-16 aided polar code as a polar subcode."""
    return attach_crc(base, 16, poly)


def construct_crc_polar(
    m: int,
    k: int,
    design_params: ChannelParams,
    crc_width: int = 16,
    poly: int | None = None,
    grid: GridSpec | None = None,
) -> CodeSpec:
    """DE-constructed (n, k) code whose last crc_width info slots carry a CRC."""
    if poly is None:
        poly = {8: CRC8_POLY, 16: CRC16_POLY}.get(crc_width)
        if poly is None:
            raise ValueError(f"no default polynomial for width {crc_width}")
    base = construct_polar(m, k + crc_width, design_params, grid)
    return attach_crc(base, crc_width, poly)
