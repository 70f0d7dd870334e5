"""Two-step power allocation.

Step one splits the per-antenna budget across beams in proportion to the
number of users each beam serves (equal-size clusters each get exactly the
per-antenna budget). Step two solves, per cluster, the sum-rate-maximizing
split under three constraints: the beam budget, a guaranteed rate for every
non-head user, and a minimum received-power separation between superposed
signals so the receivers can cancel interference successively.

At the optimum the budget is tight and every non-head user sits exactly on
the larger of its two requirements; the head absorbs the slack. This gives a
backward recursion over the budget available to the strongest k users:
``T_1 = p_total`` read top-down,

    rate branch:       remaining = (T - (phi_k - 1) / g_k) / phi_k
    separation branch: remaining = (T - p_tol / g_{k-1}) / 2

taking whichever branch leaves less to the users above (i.e. demands the
larger power for user k). ``oracle_allocate`` solves the same program
numerically without using any of this structure and is kept as an
independent check.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, GainOrderingError

__all__ = [
    "RateTargets",
    "PowerAllocation",
    "inter_cluster_split",
    "intra_cluster_allocate",
    "oracle_allocate",
    "feasibility_check",
    "dbm_to_watts",
]

FEAS_ATOL = 1e-12  # grace on p >= 0 so exact-boundary instances count as feasible


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class RateTargets:
    """Guaranteed rates for one cluster, indexed by in-cluster rank.

    ``rates_bps[0]`` belongs to the head and must be 0 (the head has no
    guarantee; it takes the residual budget). ``phi`` converts each rate to
    its SNR factor 2**(R/B).
    """

    bandwidth_hz: float
    rates_bps: tuple[float, ...]

    def __post_init__(self):
        if self.bandwidth_hz <= 0.0:
            raise ConfigError("bandwidth must be positive")
        if self.rates_bps and self.rates_bps[0] != 0.0:
            raise ConfigError("the head (rank 0) carries no rate target")
        if any(r < 0.0 for r in self.rates_bps):
            raise ConfigError("rate targets must be non-negative")

    @property
    def size(self) -> int:
        return len(self.rates_bps)

    def phi(self) -> list[float]:
        return [2.0 ** (r / self.bandwidth_hz) for r in self.rates_bps]


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user powers for one cluster plus which constraint fixed each one.

    ``binding[k]`` is "rate" or "sic" for non-head users and "excess" for
    the head. When infeasible, ``deficit`` records how much budget is
    missing and the powers still satisfy every non-head requirement.
    """

    p_total: float
    powers: np.ndarray
    binding: tuple[str, ...]
    feasible: bool
    p_tol: float
    deficit: float = 0.0

    @property
    def sic_bound(self) -> tuple[int, ...]:
        return tuple(k for k, b in enumerate(self.binding) if b == "sic")


def inter_cluster_split(
    per_antenna_budget_w: float,
    cluster_sizes: Sequence[int],
    overrides_w: Sequence[float] | None = None,
) -> list[float]:
    """Per-beam budgets proportional to cluster size.

    Beam n gets ``per_antenna_budget_w * size_n / mean(sizes)`` so the total
    equals beams * per-antenna budget and equal-size clusters each receive
    exactly the per-antenna budget. Explicit overrides (watts, one per beam)
    replace the rule for power-control scenarios.
    """
    if per_antenna_budget_w <= 0.0:
        raise ConfigError("per-antenna budget must be positive")
    if overrides_w is not None:
        if len(overrides_w) != len(cluster_sizes):
            raise ConfigError(
                f"{len(overrides_w)} budget overrides for {len(cluster_sizes)} beams"
            )
        if any(p <= 0.0 for p in overrides_w):
            raise ConfigError("budget overrides must be positive")
        return [float(p) for p in overrides_w]
    mean_size = sum(cluster_sizes) / len(cluster_sizes)
    return [per_antenna_budget_w * k / mean_size for k in cluster_sizes]


def _check_gains(g: Sequence[float], size: int) -> list[float]:
    g = [float(x) for x in g]
    if len(g) != size:
        raise ConfigError(f"{len(g)} gains for a cluster of {size}")
    if any(x <= 0.0 for x in g):
        raise GainOrderingError("normalized gains must be positive")
    if any(a <= b for a, b in zip(g, g[1:])):
        raise GainOrderingError("normalized gains must be strictly decreasing")
    return g


def intra_cluster_allocate(
    g: Sequence[float],
    p_total: float,
    targets: RateTargets,
    p_tol: float,
) -> PowerAllocation:
    """Closed-form optimal split of one beam's budget.

    ``g`` are the normalized gains in decreasing order (1/W), ``p_total``
    the beam budget, ``p_tol`` the received-power separation needed for
    successive cancellation. Infeasible clusters are returned with
    ``feasible=False`` and the missing budget in ``deficit``.
    """
    g = _check_gains(g, targets.size)
    if p_total <= 0.0:
        raise ConfigError("beam budget must be positive")
    if p_tol < 0.0:
        raise ConfigError("p_tol must be non-negative")
    K = len(g)
    phi = targets.phi()

    powers = [0.0] * K
    binding = ["excess"] + [""] * (K - 1)
    available = p_total  # budget left for users 0..k
    for k in range(K - 1, 0, -1):
        rem_rate = (available - (phi[k] - 1.0) / g[k]) / phi[k]
        rem_sic = (available - p_tol / g[k - 1]) / 2.0
        if rem_sic < rem_rate:
            binding[k] = "sic"
            remaining = rem_sic
        else:
            binding[k] = "rate"
            remaining = rem_rate
        powers[k] = available - remaining
        available = remaining
    powers[0] = available

    atol = FEAS_ATOL * max(1.0, p_total)
    feasible = all(p >= -atol for p in powers)
    arr = np.array(powers)
    if feasible:
        arr = np.maximum(arr, 0.0)
    deficit = max(0.0, -min(powers))
    return PowerAllocation(
        p_total=p_total,
        powers=arr,
        binding=tuple(binding),
        feasible=feasible,
        p_tol=p_tol,
        deficit=0.0 if feasible else deficit,
    )


def feasibility_check(
    g: Sequence[float], p_total: float, targets: RateTargets, p_tol: float
) -> bool:
    """True when the closed-form allocation satisfies every constraint."""
    return intra_cluster_allocate(g, p_total, targets, p_tol).feasible


# ---------------------------------------------------------------------------
# numerical oracle


def _sum_rate(g: Sequence[float], powers: np.ndarray, bandwidth: float) -> float:
    total = 0.0
    below = 0.0
    for k, gk in enumerate(g):
        total += bandwidth * np.log2(1.0 + gk * powers[k] / (gk * below + 1.0))
        below += powers[k]
    return total


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section search for the maximizer of a unimodal f on [lo, hi]."""
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _oracle_pair(
    g: list[float], p_total: float, targets: RateTargets, p_tol: float
) -> PowerAllocation | None:
    """2-user solve: head power sweep on [0, feasible upper end]."""
    B = targets.bandwidth_hz
    r2 = targets.rates_bps[1]

    def member_rate(p1: float) -> float:
        p2 = p_total - p1
        return B * np.log2(1.0 + g[1] * p2 / (g[1] * p1 + 1.0))

    def sic_margin(p1: float) -> float:
        return (p_total - 2.0 * p1) * g[0] - p_tol

    if member_rate(0.0) < r2 or sic_margin(0.0) < 0.0:
        return None
    hi = p_total
    if member_rate(hi) < r2:
        hi = brentq(lambda p: member_rate(p) - r2, 0.0, hi, xtol=1e-13)
    if sic_margin(hi) < 0.0:
        hi = brentq(sic_margin, 0.0, p_total, xtol=1e-13)
        hi = min(hi, p_total)

    def objective(p1: float) -> float:
        return _sum_rate(g, np.array([p1, p_total - p1]), B)

    p1 = _golden_max(objective, 0.0, hi, tol=1e-11)
    return _finish_oracle(g, np.array([p1, p_total - p1]), p_total, targets, p_tol)


def _oracle_grid(
    g: list[float], p_total: float, targets: RateTargets, p_tol: float
) -> PowerAllocation | None:
    """3/4-user solve: refine a grid over the non-head powers.

    The head takes the budget residue. Candidates are ranked by
    (constraint violation, -objective); the window shrinks around the best
    candidate until its width drops below 1e-6 W per dimension.
    """
    B = targets.bandwidth_hz
    K = len(g)
    n_free = K - 1
    rates = np.array(targets.rates_bps)
    garr = np.array(g)
    points_per_dim = 13
    keep_cells = 2.0

    lo = np.zeros(n_free)
    hi = np.full(n_free, p_total)

    best = None
    prev_center = None
    for _ in range(600):
        axes = [np.linspace(lo[d], hi[d], points_per_dim) for d in range(n_free)]
        mesh = np.meshgrid(*axes, indexing="ij")
        members = np.stack([m.ravel() for m in mesh], axis=1)  # (n, n_free)
        head = p_total - members.sum(axis=1)
        powers = np.concatenate([head[:, None], members], axis=1)  # (n, K)

        below = np.cumsum(powers, axis=1) - powers
        sinr = garr * powers / (garr * below + 1.0)
        # negative-power candidates are ranked out by the violation term;
        # clamp so their rates stay finite for the lexsort
        rate = B * np.log2(np.maximum(1.0 + sinr, 1e-300))
        margins = (powers[:, 1:] - below[:, 1:]) * garr[:-1] - p_tol

        violation = np.maximum(-powers, 0.0).sum(axis=1)
        violation += np.maximum(rates[1:] - rate[:, 1:], 0.0).sum(axis=1) / B
        violation += np.maximum(-margins, 0.0).sum(axis=1)
        objective = rate.sum(axis=1)

        order = np.lexsort((-objective, violation))
        idx = order[0]
        best = (violation[idx], powers[idx].copy())

        span = hi - lo
        if span.max() <= 1e-6:
            break
        cell = span / (points_per_dim - 1)
        center = members[idx]
        moved = (
            prev_center is None or np.any(np.abs(center - prev_center) > cell)
        )
        prev_center = center
        if violation[idx] <= 1e-9 and not moved:
            # the incumbent is feasible and stable; shrink fast around it
            radius = keep_cells * cell
        elif violation[idx] <= 1e-9:
            # feasible but still walking along the constraint surface
            radius = 0.45 * span
        else:
            # chasing feasibility: recenter, shrink gently
            radius = 0.35 * span
        lo = np.clip(center - radius, 0.0, p_total)
        hi = np.clip(center + radius, 0.0, p_total)

    violation, powers = best
    if violation > 1e-7:
        return None
    return _finish_oracle(g, powers, p_total, targets, p_tol)


def _finish_oracle(
    g: list[float],
    powers: np.ndarray,
    p_total: float,
    targets: RateTargets,
    p_tol: float,
) -> PowerAllocation:
    powers = np.maximum(powers, 0.0)
    B = targets.bandwidth_hz
    binding = ["excess"]
    below = powers[0]
    for k in range(1, len(g)):
        rate = B * np.log2(1.0 + g[k] * powers[k] / (g[k] * below + 1.0))
        margin = (powers[k] - below) * g[k - 1]
        rate_gap = abs(rate - targets.rates_bps[k]) / max(targets.rates_bps[k], 1e-30)
        sic_gap = abs(margin - p_tol) / max(p_tol, 1e-30)
        binding.append("rate" if rate_gap <= sic_gap else "sic")
        below += powers[k]
    return PowerAllocation(
        p_total=p_total,
        powers=powers,
        binding=tuple(binding),
        feasible=True,
        p_tol=p_tol,
    )


def oracle_allocate(
    g: Sequence[float],
    p_total: float,
    targets: RateTargets,
    p_tol: float,
) -> PowerAllocation:
    """Solve the intra-cluster program numerically (clusters of up to 4).

    Independent of the closed form: a golden-section sweep of the head power
    for pairs, projected grid refinement for 3- and 4-user clusters. Returns
    ``feasible=False`` when the constraint set is empty.
    """
    g = _check_gains(g, targets.size)
    if len(g) > 4:
        raise ConfigError("the oracle handles clusters of up to 4 users")
    if len(g) == 1:
        return PowerAllocation(
            p_total=p_total,
            powers=np.array([p_total]),
            binding=("excess",),
            feasible=True,
            p_tol=p_tol,
        )
    if len(g) == 2:
        result = _oracle_pair(g, p_total, targets, p_tol)
    else:
        result = _oracle_grid(g, p_total, targets, p_tol)
    if result is None:
        return PowerAllocation(
            p_total=p_total,
            powers=np.zeros(len(g)),
            binding=tuple(["excess"] + [""] * (len(g) - 1)),
            feasible=False,
            p_tol=p_tol,
            deficit=float("nan"),
        )
    return result
