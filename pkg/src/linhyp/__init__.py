"""Exact counting, asymptotic evaluation, switchings and Monte Carlo for sparse linear hypergraphs."""

from .core import (
    Cluster,
    ClusterProfile,
    Hypergraph,
    PropertyReport,
    Regime,
    ThresholdSet,
    auto_regime,
    build,
    cluster_profile,
    clusters,
    codegree,
    count_conflict_free_sets,
    count_one_conflict_sets,
    is_linear,
    property_report,
    thresholds,
)

__version__ = "0.1.0"

from .core import dumps_lh, load_lh, loads_lh  # noqa: E402
from .exact import count_all, count_linear, count_linear_containing, profile_census  # noqa: E402
from .asymptotics import (  # noqa: E402
    binomial_linear_log_prob,
    conditional_edge_params,
    containment_log_prob,
    linear_log_count,
    summation_bounds,
)
