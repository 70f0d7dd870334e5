"""Gain-ordered user clustering.

Two schemes are provided. The fixed-size scheme partitions L = N*K users
into N clusters of K by walking gain tiers: the top-N users become cluster
heads, then each following tier of N users is matched to clusters, first by
channel correlation, then by index order. The pairing scheme builds 2-user
clusters from a feasibility matrix by scanning members from weakest to
strongest and matching each to the weakest head that can support it; users
that cannot be paired are left as singletons.

Both schemes never place two antennas of the same terminal in one cluster
and keep every cluster sorted by descending scalar gain (head first).
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .channel import ScalarGain
from .errors import ClusteringError, ConfigError

__all__ = [
    "ClusterAssignment",
    "FeasibilityMatrix",
    "sort_users",
    "cluster_algorithm1",
    "cluster_algorithm2",
    "build_feasibility",
]


@dataclass(frozen=True)
class ClusterAssignment:
    """Ordered partition of user ids.

    ``clusters`` holds the multi-user groups (first entry of each is the
    head, members sorted by descending gain); ``singletons`` holds users the
    pairing scheme could not place. Together they cover every user exactly
    once.
    """

    clusters: tuple[tuple[int, ...], ...]
    singletons: tuple[int, ...] = ()

    def all_users(self) -> list[int]:
        out: list[int] = []
        for c in self.clusters:
            out.extend(c)
        out.extend(self.singletons)
        return out

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class FeasibilityMatrix:
    """Pairability of (head, member) combinations.

    ``order`` lists user ids by descending scalar gain; ``allowed[i, j]``
    says whether the user at sorted position i may head a 2-user cluster
    with the user at position j as member. Closure along the gain order is
    enforced: if a pair works, every stronger head works for that member.
    """

    order: tuple[int, ...]
    allowed: np.ndarray

    def allows(self, head_id: int, member_id: int) -> bool:
        i = self.order.index(head_id)
        j = self.order.index(member_id)
        return bool(self.allowed[i, j])


def sort_users(gains: Sequence[ScalarGain]) -> list[int]:
    """User ids by descending gain; ties broken by ascending id."""
    for g in gains:
        if not np.isfinite(g.gain):
            raise ConfigError(f"non-finite gain for user {g.user_id}")
    return [g.user_id for g in sorted(gains, key=lambda g: (-g.gain, g.user_id))]


def _default_ue_ids(gains: Sequence[ScalarGain]) -> dict[int, int]:
    return {g.user_id: g.user_id for g in gains}


def _best_correlated(
    head_id: int,
    candidates: Sequence[int],
    correlations: np.ndarray,
    rho_threshold: float,
) -> int | None:
    """Unique best-correlated candidate above threshold, else None."""
    values = [correlations[head_id, j] for j in candidates]
    best = max(values)
    if best < rho_threshold:
        return None
    winners = [j for j, v in zip(candidates, values) if v == best]
    if len(winners) != 1:
        return None
    return winners[0]


def cluster_algorithm1(
    gains: Sequence[ScalarGain],
    n_clusters: int,
    cluster_size: int,
    *,
    correlations: np.ndarray | None = None,
    rho_threshold: float = 0.5,
    ue_ids: dict[int, int] | None = None,
) -> ClusterAssignment:
    """Equal-size clustering of L = n_clusters * cluster_size users.

    The top-``n_clusters`` users head the clusters. For every further gain
    tier the candidates are first matched to the head they correlate with
    best (when that correlation clears ``rho_threshold``), then remaining
    slots are filled in index order. A tier in which some cluster cannot
    legally take any candidate raises ClusteringError.
    """
    L = len(gains)
    if n_clusters < 1 or cluster_size < 1:
        raise ConfigError("need at least one cluster of at least one user")
    if L != n_clusters * cluster_size:
        raise ConfigError(
            f"{L} users cannot form {n_clusters} clusters of {cluster_size}"
        )
    ue = ue_ids if ue_ids is not None else _default_ue_ids(gains)
    order = sort_users(gains)
    clusters: list[list[int]] = [[order[i]] for i in range(n_clusters)]

    for tier in range(1, cluster_size):
        candidates = order[tier * n_clusters : (tier + 1) * n_clusters]
        open_clusters = list(range(n_clusters))
        remaining = list(candidates)

        if correlations is not None:
            for i in list(open_clusters):
                if not remaining:
                    break
                legal = [j for j in remaining if _ue_ok(clusters[i], j, ue)]
                if not legal:
                    continue
                pick = _best_correlated(
                    clusters[i][0], legal, correlations, rho_threshold
                )
                # the winner must beat every remaining candidate, not just
                # the legal ones, to stay faithful to the tier scan
                if pick is not None and remaining != legal:
                    all_best = _best_correlated(
                        clusters[i][0], remaining, correlations, rho_threshold
                    )
                    if all_best != pick:
                        pick = None
                if pick is not None:
                    clusters[i].append(pick)
                    open_clusters.remove(i)
                    remaining.remove(pick)

        for i in list(open_clusters):
            taken = None
            for j in remaining:
                if _ue_ok(clusters[i], j, ue):
                    taken = j
                    break
            if taken is not None:
                clusters[i].append(taken)
                open_clusters.remove(i)
                remaining.remove(taken)

        if remaining or open_clusters:
            raise ClusteringError(
                f"tier {tier + 1}: no legal assignment for users {remaining}"
            )

    return ClusterAssignment(clusters=tuple(tuple(c) for c in clusters))


def _ue_ok(cluster: Sequence[int], candidate: int, ue: dict[int, int]) -> bool:
    return all(ue[candidate] != ue[u] for u in cluster)


def initial_cluster_count(n_users: int, n_tx: int) -> int:
    """Head count for the pairing scheme: n_tx when n_tx < L <= 2*n_tx,
    otherwise ceil(L / 2)."""
    if n_tx < n_users <= 2 * n_tx:
        return n_tx
    return (n_users + 1) // 2


def cluster_algorithm2(
    gains: Sequence[ScalarGain],
    n_tx: int,
    feasibility: FeasibilityMatrix | None = None,
    *,
    correlations: np.ndarray | None = None,
    rho_threshold: float = 0.5,
    ue_ids: dict[int, int] | None = None,
) -> ClusterAssignment:
    """2-user clustering with a feasibility gate.

    The strongest N users are head candidates (N from
    :func:`initial_cluster_count`). Correlated pairs form first. The rest are
    paired by scanning members weakest-first and heads weakest-first: a head
    that fails the feasibility gate against the current member is retired (a
    stronger head is needed for every remaining, stronger member as well),
    while a same-terminal conflict only skips that one combination. Unpaired
    users are returned as singletons.
    """
    L = len(gains)
    if L < 2:
        raise ConfigError("pairing needs at least two users")
    ue = ue_ids if ue_ids is not None else _default_ue_ids(gains)
    order = sort_users(gains)
    n_heads = initial_cluster_count(L, n_tx)

    if feasibility is not None and tuple(feasibility.order) != tuple(order):
        raise ConfigError("feasibility matrix order does not match the gain order")

    def can_pair(i: int, j: int) -> bool:  # sorted positions
        if feasibility is None:
            return True
        return bool(feasibility.allowed[i, j])

    heads = list(range(n_heads))
    members = list(range(n_heads, L))
    correlated_pairs: list[tuple[int, int]] = []

    if correlations is not None:
        for i in list(heads):
            if not members:
                break
            legal = [
                j
                for j in members
                if can_pair(i, j) and ue[order[i]] != ue[order[j]]
            ]
            if not legal:
                continue
            pick = _best_correlated(order[i], [order[j] for j in legal],
                                    correlations, rho_threshold)
            if pick is not None and len(legal) != len(members):
                overall = _best_correlated(order[i], [order[j] for j in members],
                                           correlations, rho_threshold)
                if overall != pick:
                    pick = None
            if pick is not None:
                j = order.index(pick)
                correlated_pairs.append((i, j))
                heads.remove(i)
                members.remove(j)

    scan_pairs: list[tuple[int, int]] = []
    retired: list[int] = []
    for j in sorted(members, reverse=True):  # weakest member first
        for i in sorted(heads, reverse=True):  # weakest available head first
            if ue[order[i]] == ue[order[j]]:
                continue
            if not can_pair(i, j):
                heads.remove(i)  # too weak for this and every stronger member
                retired.append(i)
                continue
            scan_pairs.append((i, j))
            heads.remove(i)
            members.remove(j)
            break

    # correlated pairs keep formation order; scanned pairs are appended
    # strongest head first
    ordered = correlated_pairs + sorted(scan_pairs)
    clusters = tuple((order[i], order[j]) for i, j in ordered)
    leftover = sorted(heads + retired + members)
    return ClusterAssignment(
        clusters=clusters, singletons=tuple(order[i] for i in leftover)
    )


def build_feasibility(
    gains: Sequence[ScalarGain],
    can_pair: Callable[[int, int], bool],
) -> FeasibilityMatrix:
    """Evaluate ``can_pair(head_id, member_id)`` over all ordered pairs.

    Only pairs where the head outranks the member are queried; the result is
    then closed upward along the gain order (a member pairable with some
    head is pairable with every stronger head).
    """
    order = tuple(sort_users(gains))
    L = len(order)
    allowed = np.zeros((L, L), dtype=bool)
    for i in range(L):
        for j in range(i + 1, L):
            allowed[i, j] = bool(can_pair(order[i], order[j]))
    # upward closure: position i' < i inherits any True below it
    closed = np.maximum.accumulate(allowed[::-1], axis=0)[::-1]
    return FeasibilityMatrix(order=order, allowed=closed)
