"""Exchangeable rewiring processes on graphs."""

from .graph import (
    Graph,
    Permutation,
    RewiringMap,
    all_graphs,
    all_maps,
    apply_rewiring,
    complement,
    compose,
    distance,
    permute,
    restrict,
)
from .measures import (
    BetaMixedKernelParams,
    GlobalAtom,
    IidEdgeLimit,
    PairStat,
    RewiringMeasureSpec,
    beta_mixed_graph_prob,
    er_graph_prob,
    er_transition_prob,
    iid_limit_density,
    mixed_transition_prob,
    pair_stat,
    reversible_kernel,
    reversible_stationary,
    sample_rewiring,
    stationary_q,
)

__version__ = "0.1.0"
