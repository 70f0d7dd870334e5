"""Scenario configuration, seeded Monte-Carlo execution, and result export.

A trial draws one channel realization, clusters the users once, then
evaluates every requested transmission mode on that same realization:

* ``proposed``     - equivalent-channel zero-forcing, decoding scale
                     weights, power-domain sharing of each beam,
* ``conventional`` - zero-forcing on the head rows only (weights of 1),
                     power-domain sharing,
* ``oma``          - the proposed beams with orthogonal (bandwidth-share)
                     scheduling inside each cluster.

Non-head rate guarantees are each user's own orthogonal rate at its
configured bandwidth share, evaluated per mode on the current realization.
Infeasible power allocations flag the trial for that mode; sweeps report the
feasible fraction and aggregate spectral efficiency over feasible trials.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .beamforming import (
    BeamformingSolution,
    conventional_precoder,
    proposed_solution,
)
from .channel import (
    ChannelRealization,
    GeometryConfig,
    fading_correlation_matrix,
    realize_channel,
    scalar_gains,
)
from .clustering import (
    ClusterAssignment,
    build_feasibility,
    cluster_algorithm1,
    cluster_algorithm2,
    initial_cluster_count,
)
from .errors import (
    ClusteringError,
    ConfigError,
    DegenerateChannelError,
    GainOrderingError,
    SingularPrecoderError,
    WeightSingularError,
)
from .metrics import beam_gains, oma_rate, rate_targets_from_oma, user_rate
from .power import (
    RateTargets,
    dbm_to_watts,
    inter_cluster_split,
    intra_cluster_allocate,
)

__all__ = [
    "ScenarioConfig",
    "TrialRecord",
    "ModeResult",
    "UserRecord",
    "SweepResult",
    "SweepPoint",
    "ModeStats",
    "run_trial",
    "run_sweep",
    "export",
    "export_csv",
    "export_json",
    "export_plotdata_csv",
    "CSV_HEADER",
]

MODES = ("proposed", "conventional", "oma")
SCHEMA_VERSION = 1
CSV_HEADER = (
    "sweep_axis,value,mode,mean_se_bps_hz,p10,p50,p90,feasible_frac,trials"
)
SWEEP_AXES = ("edge_coverage_m", "rho", "beta", "cluster_size", "n_tx")


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario. Defaults follow the LTE-style desk profile."""

    inter_site_m: float = 600.0
    bandwidth_hz: float = 8.64e6
    n_tx: int = 3
    cluster_size: int = 2
    per_antenna_dbm: float = 43.0
    p_tol_dbm: float = 10.0
    alpha: float = 4.0
    noise_dbm_hz: float = -169.0
    head_radius_m: float = 150.0
    edge_coverage_m: float = 150.0
    rho: float = 0.0
    rho_threshold: float = 0.5
    beta_per_rank: tuple[float, ...] | None = None  # default: equal 1/K shares
    trials: int = 2000
    master_seed: int = 1
    modes: tuple[str, ...] = MODES
    clustering_algorithm: str | None = None  # "alg1" | "alg2" | None = auto
    power_overrides_dbm: tuple[float, ...] | None = None
    n_users: int | None = None
    sweep_axis: str = "edge_coverage_m"
    sweep_values: tuple[float, ...] | None = None

    # -- resolved views ----------------------------------------------------

    @property
    def resolved_n_users(self) -> int:
        return self.n_users if self.n_users is not None else self.n_tx * self.cluster_size

    @property
    def resolved_algorithm(self) -> str:
        if self.clustering_algorithm is not None:
            return self.clustering_algorithm
        return "alg2" if self.cluster_size == 2 else "alg1"

    @property
    def resolved_beta(self) -> tuple[float, ...]:
        if self.beta_per_rank is not None:
            return tuple(self.beta_per_rank)
        k = self.cluster_size
        return tuple(1.0 / k for _ in range(k - 1))

    @property
    def n_heads(self) -> int:
        if self.resolved_algorithm == "alg1":
            return self.n_tx
        return initial_cluster_count(self.resolved_n_users, self.n_tx)

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_tx < 1 or self.cluster_size < 1:
            raise ConfigError("n_tx and cluster_size must be >= 1")
        algorithm = self.resolved_algorithm
        if algorithm not in ("alg1", "alg2"):
            raise ConfigError(f"unknown clustering algorithm {algorithm!r}")
        if algorithm == "alg2" and self.cluster_size != 2:
            raise ConfigError("the pairing scheme builds 2-user clusters")
        if algorithm == "alg1" and self.resolved_n_users != self.n_tx * self.cluster_size:
            raise ConfigError(
                f"{self.resolved_n_users} users cannot fill {self.n_tx} clusters "
                f"of {self.cluster_size}"
            )
        for mode in self.modes:
            if mode not in MODES:
                raise ConfigError(f"unknown mode {mode!r}")
        beta = self.resolved_beta
        if len(beta) != self.cluster_size - 1:
            raise ConfigError(
                f"beta_per_rank needs {self.cluster_size - 1} entries, got {len(beta)}"
            )
        if any(not 0.0 < b <= 1.0 for b in beta):
            raise ConfigError("bandwidth shares must lie in (0, 1]")
        if sum(beta) >= 1.0:
            raise ConfigError("non-head bandwidth shares must leave room for the head")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}")
        self.geometry().validate()

    def geometry(self) -> GeometryConfig:
        n_heads = self.n_heads
        return GeometryConfig(
            n_tx=self.n_tx,
            n_heads=n_heads,
            n_edge_users=self.resolved_n_users - n_heads,
            head_radius_m=self.head_radius_m,
            inter_site_m=self.inter_site_m,
            edge_coverage_m=self.edge_coverage_m,
            alpha=self.alpha,
            rho=self.rho,
        )

    def with_axis_value(self, value: float) -> "ScenarioConfig":
        """Copy of this config with one sweep-axis value applied."""
        if self.sweep_axis == "beta":
            shares = tuple(float(value) for _ in range(self.cluster_size - 1))
            return replace(self, beta_per_rank=shares)
        if self.sweep_axis in ("cluster_size", "n_tx"):
            return replace(self, **{self.sweep_axis: int(value)})
        return replace(self, **{self.sweep_axis: float(value)})

    def resolved_sweep_values(self) -> tuple[float, ...]:
        if self.sweep_values is not None:
            return tuple(self.sweep_values)
        return (float(getattr(self, self.sweep_axis)),)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        kwargs = dict(data)
        for key in (
            "beta_per_rank",
            "modes",
            "power_overrides_dbm",
            "sweep_values",
        ):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class UserRecord:
    """Per-user outcome inside one mode of one trial."""

    user_id: int
    beam: int
    rank: int  # 0 = head
    g: float
    leakage_ratio: float
    rate_bps: float | None
    target_bps: float | None
    binding: str


@dataclass(frozen=True)
class ModeResult:
    feasible: bool
    reason: str | None
    se_bps_hz: float | None
    users: tuple[UserRecord, ...] = ()


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: tuple[int, int]
    beam_sizes: tuple[int, ...]
    modes: dict[str, ModeResult] = field(default_factory=dict)
    clustering_failed: str | None = None


# ---------------------------------------------------------------------------
# trial pipeline


def _nominal_pair_gate(config: ScenarioConfig, gain_by_id: dict[int, float]):
    """Pair feasibility at nominal budget, before any beamforming exists.

    Uses interference-free normalized gains (row gain over the noise power)
    and the first-rank bandwidth share for the member's rate guarantee.
    """
    noise_w = dbm_to_watts(config.noise_dbm_hz) * config.bandwidth_hz
    budget_w = dbm_to_watts(config.per_antenna_dbm)
    p_tol_w = dbm_to_watts(config.p_tol_dbm)
    beta = config.resolved_beta[0]
    B = config.bandwidth_hz

    def gate(head_id: int, member_id: int) -> bool:
        g_head = gain_by_id[head_id] / noise_w
        g_member = gain_by_id[member_id] / noise_w
        if g_head <= g_member:
            return False
        target = oma_rate(g_member, beta, budget_w, B)
        try:
            return intra_cluster_allocate(
                [g_head, g_member],
                budget_w,
                RateTargets(bandwidth_hz=B, rates_bps=(0.0, target)),
                p_tol_w,
            ).feasible
        except GainOrderingError:
            return False

    return gate


def _cluster_users(
    realization: ChannelRealization, config: ScenarioConfig
) -> ClusterAssignment:
    gains = scalar_gains(realization)
    correlations = None
    if config.rho > 0.0:
        correlations = fading_correlation_matrix(realization.H)
    if config.resolved_algorithm == "alg1":
        return cluster_algorithm1(
            gains,
            config.n_tx,
            config.cluster_size,
            correlations=correlations,
            rho_threshold=config.rho_threshold,
        )
    gate = _nominal_pair_gate(config, {g.user_id: g.gain for g in gains})
    feasibility = build_feasibility(gains, gate)
    return cluster_algorithm2(
        gains,
        config.n_tx,
        feasibility,
        correlations=correlations,
        rho_threshold=config.rho_threshold,
    )


def _beam_clusters(assignment: ClusterAssignment) -> list[tuple[int, ...]]:
    """Every beam's users: multi-user clusters first, then singletons."""
    return list(assignment.clusters) + [(u,) for u in assignment.singletons]


def _oma_share_for_head(beta: tuple[float, ...], size: int) -> float:
    return 1.0 - sum(beta[: size - 1])


def _link_gains(
    solution: BeamformingSolution,
    realization: ChannelRealization,
    beams: list[tuple[int, ...]],
    budgets_w: list[float],
    config: ScenarioConfig,
) -> tuple[list[list[float]], list[list[float]]]:
    """Per-user normalized gains and raw leakage-to-desired ratios, by beam.

    A head's interference rejection works against the row its beam was
    designed for: under equivalent-channel precoding that row is the
    cluster's equivalent row, so the head's residual inter-beam terms
    vanish by construction (for the head-row baseline the design row is the
    head's own row, with the same effect). Members receive the other beams
    on their physical rows; their decoding scale boosts the desired path
    only, since a common scale on every term would cancel out of the ratio.

    The reported leakage ratio is always the physical one (raw rows, no
    scaling): inter-beam leakage power over desired-beam power.
    """
    noise_w = dbm_to_watts(config.noise_dbm_hz) * config.bandwidth_hz
    cluster_g: list[list[float]] = []
    leakage: list[list[float]] = []
    for n, users in enumerate(beams):
        g_row: list[float] = []
        leak_row: list[float] = []
        for k, uid in enumerate(users):
            d = solution.weights[n][k]
            gains = beam_gains(realization.H[uid], solution.M)
            leak = sum(
                p * gains[i] for i, p in enumerate(budgets_w) if i != n
            )
            if k == 0 and solution.equivalent is not None:
                design = beam_gains(solution.equivalent.rows[n], solution.M)
                design_leak = sum(
                    p * design[i] for i, p in enumerate(budgets_w) if i != n
                )
                g_row.append(float(design[n] / (design_leak + noise_w)))
            else:
                g_row.append(float(abs(d) ** 2 * gains[n] / (leak + noise_w)))
            desired = gains[n] * budgets_w[n]
            leak_row.append(float(leak / desired) if desired > 0.0 else float("inf"))
        cluster_g.append(g_row)
        leakage.append(leak_row)
    return cluster_g, leakage


def _evaluate_mode(
    mode: str,
    solution: BeamformingSolution,
    realization: ChannelRealization,
    beams: list[tuple[int, ...]],
    budgets_w: list[float],
    config: ScenarioConfig,
) -> ModeResult:
    B = config.bandwidth_hz
    p_tol_w = dbm_to_watts(config.p_tol_dbm)
    beta = config.resolved_beta
    cluster_g, leakage = _link_gains(solution, realization, beams, budgets_w, config)

    # Scheduling order inside a beam follows the normalized gains, which for
    # several weighted members need not match the raw-gain order the
    # clusters were built in. Bandwidth shares and rate guarantees attach to
    # these normalized ranks.
    order = [
        sorted(range(len(g_row)), key=lambda k: (-g_row[k], k))
        for g_row in cluster_g
    ]

    users_out: list[UserRecord] = []

    if mode == "oma":
        rates: list[float] = []
        for n, users in enumerate(beams):
            head_share = _oma_share_for_head(beta, len(users))
            for rank, k in enumerate(order[n]):
                share = head_share if rank == 0 else beta[rank - 1]
                rate = oma_rate(cluster_g[n][k], share, budgets_w[n], B)
                rates.append(rate)
                users_out.append(
                    UserRecord(
                        user_id=users[k],
                        beam=n,
                        rank=rank,
                        g=cluster_g[n][k],
                        leakage_ratio=leakage[n][k],
                        rate_bps=rate,
                        target_bps=None,
                        binding="oma",
                    )
                )
        return ModeResult(
            feasible=True,
            reason=None,
            se_bps_hz=sum(rates) / B,
            users=tuple(users_out),
        )

    # Non-head guarantees: each user's own orthogonal rate at its share,
    # evaluated with this mode's link gains (the requirement rule is the
    # same for every mode; the numbers adapt to what each system delivers).
    sorted_g = [[cluster_g[n][k] for k in order[n]] for n in range(len(beams))]
    targets = rate_targets_from_oma(sorted_g, budgets_w, beta, B)
    rates = []
    all_feasible = True
    reason = None
    for n, users in enumerate(beams):
        try:
            allocation = intra_cluster_allocate(
                sorted_g[n], budgets_w[n], targets[n], p_tol_w
            )
        except GainOrderingError:
            # exactly equal normalized gains; no consistent decode order
            all_feasible = False
            reason = "gain_ordering"
            for rank, k in enumerate(order[n]):
                users_out.append(
                    UserRecord(users[k], n, rank, cluster_g[n][k], leakage[n][k],
                               None, None, "unordered")
                )
            continue
        if not allocation.feasible:
            all_feasible = False
            reason = "power_infeasible"
        stronger = 0.0
        for rank, k in enumerate(order[n]):
            rate = None
            if allocation.feasible:
                rate = user_rate(sorted_g[n][rank], allocation.powers[rank], stronger, B)
                rates.append(rate)
                stronger += allocation.powers[rank]
            users_out.append(
                UserRecord(
                    user_id=users[k],
                    beam=n,
                    rank=rank,
                    g=cluster_g[n][k],
                    leakage_ratio=leakage[n][k],
                    rate_bps=rate,
                    target_bps=targets[n].rates_bps[rank] if rank > 0 else None,
                    binding=allocation.binding[rank],
                )
            )
    if not all_feasible:
        return ModeResult(False, reason, None, tuple(users_out))
    return ModeResult(True, None, sum(rates) / B, tuple(users_out))


def run_trial(config: ScenarioConfig, trial_index: int) -> TrialRecord:
    """One seeded realization evaluated under every configured mode.

    Deterministic in (master_seed, trial_index). Failures (clustering
    deadlock, rank-deficient precoders, infeasible power) are recorded, not
    raised.
    """
    seed = (config.master_seed, trial_index)
    realization = realize_channel(config.geometry(), seed)

    def failed(reason: str) -> TrialRecord:
        return TrialRecord(
            trial_index=trial_index,
            seed=seed,
            beam_sizes=(),
            modes={m: ModeResult(False, reason, None) for m in config.modes},
            clustering_failed=reason,
        )

    try:
        assignment = _cluster_users(realization, config)
    except ClusteringError:
        return failed("clustering_deadlock")
    beams = _beam_clusters(assignment)
    if len(beams) > config.n_tx:
        return failed("more_beams_than_antennas")

    overrides = None
    if config.power_overrides_dbm is not None:
        if len(config.power_overrides_dbm) != len(beams):
            return failed("override_count_mismatch")
        overrides = [dbm_to_watts(x) for x in config.power_overrides_dbm]
    budgets_w = inter_cluster_split(
        dbm_to_watts(config.per_antenna_dbm),
        [len(c) for c in beams],
        overrides,
    )

    beam_assignment = ClusterAssignment(clusters=tuple(tuple(c) for c in beams))
    solutions: dict[str, BeamformingSolution] = {}
    results: dict[str, ModeResult] = {}
    for mode in config.modes:
        scheme = "conventional" if mode == "conventional" else "proposed"
        try:
            if scheme not in solutions:
                solutions[scheme] = (
                    conventional_precoder(realization, beam_assignment)
                    if scheme == "conventional"
                    else proposed_solution(realization, beam_assignment)
                )
            results[mode] = _evaluate_mode(
                mode, solutions[scheme], realization, beams, budgets_w, config
            )
        except (SingularPrecoderError, DegenerateChannelError):
            results[mode] = ModeResult(False, "singular_precoder", None)
        except WeightSingularError:
            results[mode] = ModeResult(False, "weight_singular", None)

    return TrialRecord(
        trial_index=trial_index,
        seed=seed,
        beam_sizes=tuple(len(c) for c in beams),
        modes=results,
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class ModeStats:
    mean_se_bps_hz: float
    p10: float
    p50: float
    p90: float
    feasible_frac: float
    n_feasible: int
    median_member_leakage: float


@dataclass(frozen=True)
class SweepPoint:
    value: float
    stats: dict[str, ModeStats]


@dataclass(frozen=True)
class SweepResult:
    sweep_axis: str
    points: tuple[SweepPoint, ...]
    config: ScenarioConfig
    config_hash: str
    trials: int
    master_seed: int


def _trial_summary(config_dict: dict, trial_index: int) -> dict:
    """Compact per-trial payload (also the worker entry point)."""
    config = ScenarioConfig.from_dict(config_dict)
    record = run_trial(config, trial_index)
    out = {}
    for mode, res in record.modes.items():
        member_leak = [
            u.leakage_ratio for u in res.users if u.rank > 0 and np.isfinite(u.leakage_ratio)
        ]
        out[mode] = (res.feasible, res.se_bps_hz, member_leak)
    return out


def _aggregate(config: ScenarioConfig, summaries: list[dict]) -> dict[str, ModeStats]:
    stats = {}
    for mode in config.modes:
        se = np.array(
            [s[mode][1] for s in summaries if s[mode][0]], dtype=float
        )
        leaks: list[float] = []
        for s in summaries:
            leaks.extend(s[mode][2])
        n_feasible = se.size
        if n_feasible:
            p10, p50, p90 = np.percentile(se, [10, 50, 90])
            mean = float(se.mean())
        else:
            mean = p10 = p50 = p90 = float("nan")
        stats[mode] = ModeStats(
            mean_se_bps_hz=mean,
            p10=float(p10),
            p50=float(p50),
            p90=float(p90),
            feasible_frac=n_feasible / len(summaries),
            n_feasible=int(n_feasible),
            median_member_leakage=float(np.median(leaks)) if leaks else float("nan"),
        )
    return stats


def run_sweep(config: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Run the configured sweep, aggregating per-mode statistics per point.

    Trials are independent given (master_seed, trial_index), so they can be
    evaluated in parallel; aggregation is order-independent.
    """
    config.validate()
    points = []
    for value in config.resolved_sweep_values():
        point_config = config.with_axis_value(value)
        point_config.validate()
        cfg_dict = point_config.to_dict()
        indices = range(point_config.trials)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                summaries = list(
                    pool.map(
                        _trial_summary,
                        [cfg_dict] * point_config.trials,
                        indices,
                        chunksize=max(1, point_config.trials // (workers * 8)),
                    )
                )
        else:
            summaries = [_trial_summary(cfg_dict, i) for i in indices]
        points.append(SweepPoint(value=float(value), stats=_aggregate(point_config, summaries)))
    return SweepResult(
        sweep_axis=config.sweep_axis,
        points=tuple(points),
        config=config,
        config_hash=config.hash(),
        trials=config.trials,
        master_seed=config.master_seed,
    )


# ---------------------------------------------------------------------------
# export


def _fmt(x: float) -> str:
    return format(x, ".10g")


def export_csv(result: SweepResult, path: str) -> None:
    """One row per sweep point per mode; byte-stable for fixed inputs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for point in result.points:
            for mode in result.config.modes:
                s = point.stats[mode]
                writer.writerow(
                    [
                        result.sweep_axis,
                        _fmt(point.value),
                        mode,
                        _fmt(s.mean_se_bps_hz),
                        _fmt(s.p10),
                        _fmt(s.p50),
                        _fmt(s.p90),
                        _fmt(s.feasible_frac),
                        result.trials,
                    ]
                )


def export_json(result: SweepResult, path: str) -> None:
    """Full config echo plus per-point stats."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": result.config.to_dict(),
        "config_hash": result.config_hash,
        "master_seed": result.master_seed,
        "sweep_axis": result.sweep_axis,
        "trials": result.trials,
        "points": [
            {
                "value": point.value,
                "modes": {mode: asdict(s) for mode, s in point.stats.items()},
            }
            for point in result.points
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def export_plotdata_csv(result: SweepResult, path: str) -> None:
    """Long-format (tidy) CSV: one row per point, mode, and statistic."""
    stats = ("mean_se_bps_hz", "p10", "p50", "p90", "feasible_frac")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sweep_axis", "axis_value", "mode", "stat", "value"])
        for point in result.points:
            for mode in result.config.modes:
                s = point.stats[mode]
                for name in stats:
                    writer.writerow(
                        [result.sweep_axis, _fmt(point.value), mode, name,
                         _fmt(getattr(s, name))]
                    )


def export(result: SweepResult, fmt: str, path: str) -> None:
    """Dispatch to one of the export formats: csv, json, or plotdata."""
    if fmt == "csv":
        export_csv(result, path)
    elif fmt == "json":
        export_json(result, path)
    elif fmt == "plotdata":
        export_plotdata_csv(result, path)
    else:
        raise ConfigError(f"unknown export format {fmt!r}")
