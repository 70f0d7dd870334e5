"""Precoding and decoding scale weights.

Each cluster is collapsed to a single equivalent row: the cluster channel's
principal left-singular vector applied to the cluster matrix. Zero-forcing
is then a normalized right pseudo-inverse of the stacked equivalent rows.
Every non-head receiver scales its observation by the ratio of the head's
singular-vector entry to its own, which steers its effective channel toward
the cluster's equivalent row. The baseline precoder ("conventional") uses
the raw head rows instead and applies no scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .clustering import ClusterAssignment
from .errors import DegenerateChannelError, SingularPrecoderError, WeightSingularError

__all__ = [
    "EquivalentChannel",
    "BeamformingSolution",
    "equivalent_channel",
    "precoder",
    "decode_weights",
    "proposed_solution",
    "conventional_precoder",
]

RANK_RCOND = 1e-10  # singular values below this fraction of the largest count as zero
WEIGHT_EPS = 1e-12


@dataclass(frozen=True)
class EquivalentChannel:
    """Stacked per-cluster equivalent rows and their mixing vectors.

    Row n of ``rows`` equals u1[n]^H @ H_n where u1[n] is the unit principal
    left-singular vector of cluster n's channel matrix.
    """

    rows: np.ndarray  # (n_clusters, n_tx)
    u1: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class BeamformingSolution:
    """Precoding matrix plus per-user decoding scale weights.

    ``M`` has unit-norm columns, one per cluster. ``weights[n][k]`` is the
    complex scale applied by the k-th user of cluster n (1 for every head).
    """

    M: np.ndarray  # (n_tx, n_clusters)
    weights: tuple[np.ndarray, ...]
    equivalent: EquivalentChannel | None
    scheme: str  # "proposed" | "conventional"


def _phase_fix(u1: np.ndarray) -> np.ndarray:
    """Rotate so the head entry (index 0) is real and non-negative.

    Falls back to the largest-magnitude entry when the head entry vanishes,
    which keeps the output independent of the SVD backend's phase choices.
    """
    ref = u1[0]
    if abs(ref) <= WEIGHT_EPS * np.linalg.norm(u1):
        ref = u1[np.argmax(np.abs(u1))]
    return u1 * (ref.conjugate() / abs(ref))


def equivalent_channel(H_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Equivalent row and principal mixing vector of one cluster matrix.

    Returns (row, u1) with row = u1^H @ H_n. Raises DegenerateChannelError
    for an all-zero matrix.
    """
    H_n = np.atleast_2d(np.asarray(H_n))
    if not np.any(H_n):
        raise DegenerateChannelError("cluster channel matrix has no energy")
    u, _, _ = np.linalg.svd(H_n, full_matrices=False)
    u1 = _phase_fix(u[:, 0])
    return u1.conjugate() @ H_n, u1


def precoder(equivalent_rows: np.ndarray) -> np.ndarray:
    """Column-normalized right pseudo-inverse of the stacked equivalent rows.

    The product rows @ M is diagonal with real positive diagonal. Raises
    SingularPrecoderError when the rows are numerically rank deficient.
    """
    rows = np.atleast_2d(np.asarray(equivalent_rows))
    n, n_tx = rows.shape
    if n > n_tx:
        raise SingularPrecoderError(f"{n} beams need at least {n} antennas, got {n_tx}")
    s = np.linalg.svd(rows, compute_uv=False)
    if s[-1] <= RANK_RCOND * s[0]:
        raise SingularPrecoderError("equivalent rows are rank deficient")
    M = np.linalg.pinv(rows)
    return M / np.linalg.norm(M, axis=0, keepdims=True)


def decode_weights(u1: np.ndarray) -> np.ndarray:
    """Per-user decoding scales u1[0] / u1[k] (head weight is exactly 1).

    Raises WeightSingularError when some entry of u1 is too small to divide
    by; the affected user cannot estimate the equivalent channel.
    """
    u1 = np.asarray(u1)
    small = np.abs(u1) < WEIGHT_EPS
    if np.any(small):
        raise WeightSingularError(int(np.argmax(small)))
    d = u1[0] / u1
    d[0] = 1.0
    return d


def _cluster_rows(H: np.ndarray, assignment: ClusterAssignment) -> list[np.ndarray]:
    return [H[list(c), :] for c in assignment.clusters]


def proposed_solution(
    realization: ChannelRealization, assignment: ClusterAssignment
) -> BeamformingSolution:
    """Equivalent-channel zero-forcing with decoding scale weights."""
    rows = []
    u1s = []
    weights = []
    for H_n in _cluster_rows(realization.H, assignment):
        row, u1 = equivalent_channel(H_n)
        rows.append(row)
        u1s.append(u1)
        weights.append(decode_weights(u1))
    stacked = np.vstack(rows)
    return BeamformingSolution(
        M=precoder(stacked),
        weights=tuple(weights),
        equivalent=EquivalentChannel(rows=stacked, u1=tuple(u1s)),
        scheme="proposed",
    )


def conventional_precoder(
    realization: ChannelRealization, assignment: ClusterAssignment
) -> BeamformingSolution:
    """Zero-forcing on the cluster-head rows only; all weights are 1."""
    head_rows = np.vstack([realization.H[c[0]] for c in assignment.clusters])
    weights = tuple(
        np.ones(len(c), dtype=complex) for c in assignment.clusters
    )
    return BeamformingSolution(
        M=precoder(head_rows),
        weights=weights,
        equivalent=None,
        scheme="conventional",
    )
