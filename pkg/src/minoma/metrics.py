"""Link metrics: normalized gains, per-user rates, cell throughput, and the
orthogonal-sharing baseline.

The normalized gain of a user folds its decoding scale, the precoder, the
other beams' budgets and the noise floor into a single 1/W figure, after
which the rate is a plain Shannon capacity with residual intra-cluster
interference. The decoding scale acts on the desired path only: the
receiver's effective channel for its serving beam is d * h (its scaled-up
estimate of the cluster's equivalent channel), while the other beams and
the thermal noise arrive on the raw channel. Scaling everything would
cancel out of the ratio and the weight would do nothing.

The orthogonal baseline gives each user a bandwidth share and the matching
share of the beam budget; power, interference, and noise all scale with the
share, so the in-band SINR equals the full-band value and the rate simply
scales by the share.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .power import RateTargets

__all__ = [
    "LinkMetrics",
    "link_metrics",
    "normalized_gain",
    "beam_gains",
    "user_rate",
    "cell_throughput",
    "oma_rate",
    "rate_targets_from_oma",
]


@dataclass(frozen=True)
class LinkMetrics:
    """Per-user link figures for one trial."""

    g: float  # normalized gain, 1/W
    sinr: float
    rate_bps: float


def link_metrics(
    g: float, p_own_w: float, p_stronger_w: float, bandwidth_hz: float
) -> LinkMetrics:
    """Bundle the SINR and rate implied by a normalized gain and powers."""
    sinr = g * p_own_w / (g * p_stronger_w + 1.0)
    return LinkMetrics(
        g=g, sinr=sinr, rate_bps=bandwidth_hz * float(np.log2(1.0 + sinr))
    )


def beam_gains(h_row: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Raw per-beam power gains |h @ m_i|^2."""
    return np.abs(np.asarray(h_row) @ np.asarray(M)) ** 2


def normalized_gain(
    h_row: np.ndarray,
    d: complex,
    M: np.ndarray,
    beam_index: int,
    beam_budgets_w: Sequence[float],
    noise_density_w_hz: float,
    bandwidth_hz: float,
) -> float:
    """Desired-beam gain over inter-beam leakage plus noise (1/W).

    The numerator is |d h m_n|^2; the denominator sums the raw leakage
    |h m_i|^2 p_i over the other beams and adds the noise power N0 B.
    """
    gains = beam_gains(h_row, M)
    leak = float(
        sum(p * gains[i] for i, p in enumerate(beam_budgets_w) if i != beam_index)
    )
    noise = noise_density_w_hz * bandwidth_hz
    return float(abs(d) ** 2 * gains[beam_index] / (leak + noise))


def user_rate(
    g: float, p_own_w: float, p_stronger_w: float, bandwidth_hz: float
) -> float:
    """Shannon rate with residual interference from stronger-ranked users.

    ``p_stronger_w`` is the summed power of the users ranked above this one
    in its cluster (zero for the head).
    """
    return link_metrics(g, p_own_w, p_stronger_w, bandwidth_hz).rate_bps


def cell_throughput(
    rates_bps: Sequence[float], bandwidth_hz: float
) -> tuple[float, float]:
    """Sum rate and spectral efficiency (bits/s, bits/s/Hz)."""
    total = float(sum(rates_bps))
    return total, total / bandwidth_hz


def oma_rate(
    g: float, beta: float, cluster_budget_w: float, bandwidth_hz: float
) -> float:
    """Rate of a user holding a ``beta`` share of its beam.

    The user gets beta * B of bandwidth and beta * p_n of power; since
    leakage and noise inside the share scale the same way, the SINR equals
    the full-band g * p_n and the rate is beta * B * log2(1 + g * p_n).
    """
    if not 0.0 < beta <= 1.0:
        raise ConfigError(f"bandwidth share must lie in (0, 1], got {beta}")
    return beta * bandwidth_hz * float(np.log2(1.0 + g * cluster_budget_w))


def rate_targets_from_oma(
    cluster_gains: Sequence[Sequence[float]],
    beam_budgets_w: Sequence[float],
    beta_per_rank: Sequence[float],
    bandwidth_hz: float,
) -> list[RateTargets]:
    """Per-cluster guaranteed rates: each non-head user's own orthogonal
    rate at its configured bandwidth share.

    ``beta_per_rank[k-1]`` is the share of the user at in-cluster rank k;
    heads carry no target. Works for mixed cluster sizes (singletons get an
    empty target set beyond the head).
    """
    targets = []
    for gains, budget in zip(cluster_gains, beam_budgets_w):
        rates = [0.0]
        for rank, g in enumerate(gains[1:], start=1):
            beta = beta_per_rank[rank - 1]
            rates.append(oma_rate(g, beta, budget, bandwidth_hz))
        targets.append(
            RateTargets(bandwidth_hz=bandwidth_hz, rates_bps=tuple(rates))
        )
    return targets
