"""Geometry and radio channel generation.

Users are receive antennas. A configurable number of "head" candidates is
dropped uniformly in a disc around the base station; the remaining users are
dropped uniformly in an annulus at the cell edge. Each channel row is
sqrt(path_loss) times a unit-variance complex Gaussian fading row, with an
optional linear mixing that correlates every edge user with one head
candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "UserGeometry",
    "ChannelRealization",
    "ScalarGain",
    "GeometryConfig",
    "path_loss",
    "draw_fading",
    "draw_correlated_fading",
    "realize_channel",
    "scalar_gain",
    "scalar_gains",
    "fading_correlation_matrix",
]


@dataclass(frozen=True)
class UserGeometry:
    """Placement of one receive antenna.

    Several user_ids may share a ue_id (multi-antenna terminals); user_ids
    are unique and equal the row index into the channel matrix.
    """

    user_id: int
    distance_m: float
    ue_id: int


@dataclass(frozen=True)
class GeometryConfig:
    """Geometry and fading parameters for one realization."""

    n_tx: int
    n_heads: int
    n_edge_users: int
    head_radius_m: float
    inter_site_m: float
    edge_coverage_m: float
    alpha: float = 4.0
    rho: float = 0.0
    ue_ids: tuple[int, ...] | None = None  # defaults to one antenna per UE

    def validate(self) -> None:
        if self.n_tx < 1 or self.n_heads < 1 or self.n_edge_users < 0:
            raise ConfigError("need at least one transmit antenna and one head user")
        if not 0.0 < self.head_radius_m:
            raise ConfigError("head_radius_m must be positive")
        if not 0.0 < self.edge_coverage_m <= self.inter_site_m:
            raise ConfigError("edge_coverage_m must lie in (0, inter_site_m]")
        if self.head_radius_m >= self.inter_site_m - self.edge_coverage_m:
            raise ConfigError(
                "head disc must end before the cell-edge annulus starts "
                f"(head radius {self.head_radius_m} m, annulus starts at "
                f"{self.inter_site_m - self.edge_coverage_m} m)"
            )
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        n_users = self.n_heads + self.n_edge_users
        if self.ue_ids is not None and len(self.ue_ids) != n_users:
            raise ConfigError("ue_ids must have one entry per user")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the downlink channel.

    H has one row per user (L x n_tx); entries are dimensionless amplitude
    gains. ``correlated_with`` maps edge-user ids to the head id their fading
    row was mixed against (empty when rho == 0).
    """

    H: np.ndarray
    geometry: tuple[UserGeometry, ...]
    rho: float
    seed: int | tuple[int, ...]
    correlated_with: dict[int, int] = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return self.H.shape[0]

    @property
    def n_tx(self) -> int:
        return self.H.shape[1]

    def ue_ids(self) -> tuple[int, ...]:
        return tuple(g.ue_id for g in self.geometry)


@dataclass(frozen=True)
class ScalarGain:
    """Squared Euclidean norm of one user's channel row."""

    user_id: int
    gain: float


def path_loss(distance_m: float, alpha: float) -> float:
    """Free-space style power attenuation d**-alpha.

    Raises ConfigError for non-positive distance or exponent.
    """
    if distance_m <= 0.0:
        raise ConfigError(f"distance must be positive, got {distance_m}")
    if alpha <= 0.0:
        raise ConfigError(f"path-loss exponent must be positive, got {alpha}")
    return float(distance_m) ** (-alpha)


def draw_fading(n_users: int, n_tx: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an (n_users, n_tx) matrix of iid unit-variance complex Gaussians.

    Real and imaginary parts each carry variance 1/2 so that E|h|^2 = 1.
    """
    if n_users < 1 or n_tx < 1:
        raise ConfigError("fading matrix needs at least one row and one column")
    re = rng.standard_normal((n_users, n_tx))
    im = rng.standard_normal((n_users, n_tx))
    return (re + 1j * im) / np.sqrt(2.0)


def draw_correlated_fading(
    head_row: np.ndarray, rho: float, rng: np.random.Generator
) -> np.ndarray:
    """Mix a fresh fading row against ``head_row``.

    Returns rho * head_row + sqrt(1 - rho^2) * w with w iid unit variance,
    which preserves unit variance and has complex correlation exactly rho
    with the head row.
    """
    if not 0.0 <= rho <= 1.0:
        raise ConfigError(f"rho must lie in [0, 1], got {rho}")
    head_row = np.asarray(head_row)
    w = draw_fading(1, head_row.shape[-1], rng)[0]
    return rho * head_row + np.sqrt(1.0 - rho * rho) * w


def _uniform_disc_radii(radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # uniform over the disc area => radius = R * sqrt(u)
    return radius * np.sqrt(rng.uniform(0.0, 1.0, n))


def _uniform_annulus_radii(
    r_min: float, r_max: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    # uniform over the annulus area
    u = rng.uniform(0.0, 1.0, n)
    return np.sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min))


def realize_channel(
    config: GeometryConfig, seed: int | tuple[int, ...]
) -> ChannelRealization:
    """Draw geometry and fading for one trial.

    Head candidates land uniformly within the head disc; the remaining users
    land uniformly in the cell-edge annulus [inter_site - edge_coverage,
    inter_site]. When rho > 0, edge user m is mixed against head (m mod
    n_heads). Pure in (config, seed).
    """
    config.validate()
    rng = np.random.default_rng(seed)

    n_heads, n_edge = config.n_heads, config.n_edge_users
    head_d = _uniform_disc_radii(config.head_radius_m, n_heads, rng)
    edge_d = _uniform_annulus_radii(
        config.inter_site_m - config.edge_coverage_m,
        config.inter_site_m,
        n_edge,
        rng,
    )
    distances = np.concatenate([head_d, edge_d])

    n_users = n_heads + n_edge
    fading = draw_fading(n_users, config.n_tx, rng)
    pairing: dict[int, int] = {}
    if config.rho > 0.0 and n_edge > 0:
        for m in range(n_edge):
            head = m % n_heads
            fading[n_heads + m] = draw_correlated_fading(fading[head], config.rho, rng)
            pairing[n_heads + m] = head

    attenuation = np.array(
        [path_loss(d, config.alpha) for d in distances]
    )
    H = np.sqrt(attenuation)[:, None] * fading

    ue_ids = config.ue_ids if config.ue_ids is not None else tuple(range(n_users))
    geometry = tuple(
        UserGeometry(user_id=u, distance_m=float(distances[u]), ue_id=ue_ids[u])
        for u in range(n_users)
    )
    return ChannelRealization(
        H=H, geometry=geometry, rho=config.rho, seed=seed, correlated_with=pairing
    )


def scalar_gain(realization: ChannelRealization, user_id: int) -> ScalarGain:
    """Squared row norm of one user's channel row."""
    if not 0 <= user_id < realization.n_users:
        raise ConfigError(f"unknown user id {user_id}")
    row = realization.H[user_id]
    return ScalarGain(user_id=user_id, gain=float(np.real(np.vdot(row, row))))


def scalar_gains(realization: ChannelRealization) -> list[ScalarGain]:
    """Scalar gains for every user, in row order."""
    return [scalar_gain(realization, u) for u in range(realization.n_users)]


def fading_correlation_matrix(H: np.ndarray) -> np.ndarray:
    """Magnitude of the complex Pearson correlation between channel rows.

    Row scaling (path loss) drops out, so this equals the fading-row
    correlation. Entries lie in [0, 1]; the diagonal is 1.
    """
    H = np.asarray(H)
    centered = H - H.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    inner = centered @ centered.conj().T
    return np.abs(inner) / np.outer(norms, norms)
