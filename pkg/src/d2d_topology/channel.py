"""
D2D transmission model.

Geometry, Rayleigh fading, SNR-threshold success probabilities, per-component
Bernoulli erasure masks and the synchronous round latency. Everything here is
pure given an explicit numpy Generator.
"""

import logging
from typing import Tuple

import numpy as np

from .constants import (
    FIELD_BANDWIDTH_HZ,
    FIELD_DECODE_THRESHOLD_DB,
    FIELD_NOISE_POWER_DBM,
    FIELD_PACKAGE_BITS,
    FIELD_REGION_SIDE_M,
    FIELD_TX_POWER_DBM,
)
from .errors import DegenerateLinkError
from .models.channel import FadingDraw, Mask, Placement, SuccessMatrix
from .models.config import ChannelParams
from .models.topology import MixingMatrix
from .utils import db_to_linear, dbm_to_watts

logger = logging.getLogger(__name__)


def field_channel_params() -> ChannelParams:
    """Field-scale preset: 10 dBm, -169 dBm noise, 0 dB threshold, 5 MHz, 1.2 MB, 1 km square."""
    return ChannelParams(
        tx_power=dbm_to_watts(FIELD_TX_POWER_DBM),
        noise_power=dbm_to_watts(FIELD_NOISE_POWER_DBM),
        decode_threshold=db_to_linear(FIELD_DECODE_THRESHOLD_DB),
        bandwidth=FIELD_BANDWIDTH_HZ,
        package_bits=FIELD_PACKAGE_BITS,
        region_side=FIELD_REGION_SIDE_M,
    )


def toy_channel_params() -> ChannelParams:
    """Desk-scale preset with off-diagonal success roughly in [0.5, 0.99]."""
    return ChannelParams()


def success_probability(dist: float, params: ChannelParams) -> float:
    """P[SNR > threshold] under unit-mean Rayleigh power fading; exactly 1 at distance 0."""
    if dist < 0:
        raise ValueError(f"distance must be non-negative, got {dist}")
    if dist == 0:
        return 1.0
    exponent = params.decode_threshold * params.noise_power * dist * dist / params.tx_power
    return float(np.exp(-exponent))


def place_clients(num_clients: int, region_side: float, rng: np.random.Generator) -> Placement:
    """Uniformly random client positions in [0, region_side]^2."""
    if num_clients < 1:
        raise ValueError(f"num_clients must be at least 1, got {num_clients}")
    positions = rng.uniform(0.0, region_side, size=(num_clients, 2))
    return Placement.from_positions(positions)


def build_success_matrix(placement: Placement, params: ChannelParams) -> SuccessMatrix:
    """Apply the success probability to every pair; the diagonal is 1."""
    d2 = placement.distances ** 2
    p = np.exp(-params.decode_threshold * params.noise_power * d2 / params.tx_power)
    np.fill_diagonal(p, 1.0)
    # symmetric up to rounding already; enforce bitwise symmetry
    p = np.minimum(p, p.T)
    logger.debug(f"Success matrix built for {placement.num_clients} clients, min p={p.min():.4f}")
    return SuccessMatrix(p=p)


def success_range(success: SuccessMatrix) -> Tuple[float, float]:
    """Min and max off-diagonal success probability."""
    n = success.num_clients
    if n < 2:
        return 1.0, 1.0
    off = success.p[~np.eye(n, dtype=bool)]
    return float(off.min()), float(off.max())


def draw_bits(p, shape, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(p) bits as uint8; a bit is set when a uniform draw falls below p."""
    return (rng.random(shape) < p).astype(np.uint8)


def sample_mask(p: float, d: int, rng: np.random.Generator) -> Mask:
    """d independent Bernoulli(p) erasure bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    return Mask(bits=draw_bits(p, d, rng))


def sample_round_masks(success: SuccessMatrix, d: int, rng: np.random.Generator) -> np.ndarray:
    """
    Masks of every ordered pair for one round, shape (N, N, d).

    masks[i, j] is the mask of link j -> i. Self-links never traverse the
    channel and are all ones. Drawing every pair (active or not) keeps the
    draws shared across topologies for the same seed.
    """
    p = success.p
    masks = draw_bits(p[:, :, None], (p.shape[0], p.shape[1], d), rng)
    idx = np.arange(p.shape[0])
    masks[idx, idx, :] = 1
    return masks


def mask_variance_exact(p: float, d: int) -> float:
    """E||p*1 - m||^2 = d p (1 - p)."""
    return d * p * (1.0 - p)


def mask_variance_enumerated(p: float, d: int) -> float:
    """Brute-force E||p*1 - m||^2 over all 2^d masks (small d only)."""
    if d > 16:
        raise ValueError(f"enumeration is limited to d <= 16, got {d}")
    total = 0.0
    for code in range(2 ** d):
        bits = np.array([(code >> k) & 1 for k in range(d)], dtype=float)
        ones = bits.sum()
        prob = p ** ones * (1.0 - p) ** (d - ones)
        total += prob * float(np.sum((p - bits) ** 2))
    return total


def sample_fading(num_clients: int, rng: np.random.Generator) -> FadingDraw:
    """Unit-mean exponential power fading, one independent draw per ordered link."""
    return FadingDraw(h=rng.exponential(1.0, size=(num_clients, num_clients)))


def link_rates(placement: Placement, fading: FadingDraw, params: ChannelParams) -> np.ndarray:
    """Shannon rate B log2(1 + SNR) of every ordered link (bits/s); diagonal is inf."""
    d2 = placement.distances ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = params.tx_power * fading.h / (d2 * params.noise_power)
        # co-located clients: infinite SNR unless the fading draw itself is zero
        snr = np.where(d2 == 0, np.where(fading.h > 0, np.inf, 0.0), snr)
        rates = params.bandwidth * np.log2(1.0 + snr)
    np.fill_diagonal(rates, np.inf)
    return rates


def round_latency(
    theta: MixingMatrix,
    placement: Placement,
    fading: FadingDraw,
    params: ChannelParams,
) -> float:
    """
    Synchronous round latency: max over active links of Q / (B log2(1 + SNR)).

    Raises:
        DegenerateLinkError: If an active link has a zero SNR term
    """
    active = theta.active_links()
    if not active.any():
        return 0.0
    rates = link_rates(placement, fading, params)
    receivers, senders = np.nonzero(active)
    active_rates = rates[receivers, senders]
    zero = np.flatnonzero(active_rates <= 0)
    if zero.size:
        k = int(zero[0])
        raise DegenerateLinkError(int(receivers[k]), int(senders[k]))
    with np.errstate(divide="ignore"):
        latencies = params.package_bits / active_rates
    return float(np.max(latencies))
