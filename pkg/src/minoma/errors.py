"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A scenario or geometry parameter is out of its valid range."""


class ClusteringError(RuntimeError):
    """No legal cluster assignment exists for the given realization."""


class DegenerateChannelError(RuntimeError):
    """A cluster channel matrix has no energy (rank 0)."""


class SingularPrecoderError(RuntimeError):
    """The stacked per-cluster rows are numerically rank deficient."""


class WeightSingularError(RuntimeError):
    """A decoding scale weight would divide by a (near-)zero entry."""

    def __init__(self, rank_in_cluster: int):
        super().__init__(
            f"principal singular vector entry for in-cluster rank {rank_in_cluster} "
            "is below threshold"
        )
        self.rank_in_cluster = rank_in_cluster


class GainOrderingError(ValueError):
    """Per-user normalized gains are not strictly decreasing within a cluster."""
