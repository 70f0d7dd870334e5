"""minoma: link-level simulator for downlink multiuser MIMO with
power-domain non-orthogonal multiple access.

The library covers channel generation (path loss times Rayleigh fading,
optionally correlated), gain-ordered user clustering, equivalent-channel
zero-forcing beamforming with per-user decoding scale weights, two-step
power allocation with rate and cancellation constraints, and a seeded
Monte-Carlo harness comparing power-domain sharing against orthogonal
sharing and head-only beamforming baselines.
"""

from .beamforming import (
    BeamformingSolution,
    EquivalentChannel,
    conventional_precoder,
    decode_weights,
    equivalent_channel,
    precoder,
    proposed_solution,
)
from .channel import (
    ChannelRealization,
    GeometryConfig,
    ScalarGain,
    UserGeometry,
    draw_correlated_fading,
    draw_fading,
    fading_correlation_matrix,
    path_loss,
    realize_channel,
    scalar_gain,
    scalar_gains,
)
from .clustering import (
    ClusterAssignment,
    FeasibilityMatrix,
    build_feasibility,
    cluster_algorithm1,
    cluster_algorithm2,
    sort_users,
)
from .errors import (
    ClusteringError,
    ConfigError,
    DegenerateChannelError,
    GainOrderingError,
    SingularPrecoderError,
    WeightSingularError,
)
from .harness import (
    ModeResult,
    ModeStats,
    ScenarioConfig,
    SweepPoint,
    SweepResult,
    TrialRecord,
    UserRecord,
    export,
    export_csv,
    export_json,
    export_plotdata_csv,
    run_sweep,
    run_trial,
)
from .metrics import (
    LinkMetrics,
    cell_throughput,
    link_metrics,
    normalized_gain,
    oma_rate,
    rate_targets_from_oma,
    user_rate,
)
from .power import (
    PowerAllocation,
    RateTargets,
    dbm_to_watts,
    feasibility_check,
    inter_cluster_split,
    intra_cluster_allocate,
    oracle_allocate,
)

__version__ = "0.1.0"
