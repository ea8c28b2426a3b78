"""CONGEST-model simulator and distributed minimum cut approximation library."""
from .errors import (
    BudgetViolation,
    CongestCutError,
    InvalidCut,
    InvalidGraph,
    InvalidParameter,
    InvalidParams,
    InvalidProbability,
    InvalidPromise,
    NoCutFound,
    RoundCapExceeded,
    SizeLimit,
    UnknownPrimitive,
)
from .graph import (
    Cut,
    Multigraph,
    components,
    contract,
    cut_weight,
    diameter,
    min_cut_bruteforce,
    min_cut_exact,
    read_graph,
    sample_edges,
    write_graph,
)
from .layering import collect_family_and_test, cut_tester, layering_mincut
from .lowerbound import (
    gen_base_H,
    gen_dissemination_graphs,
    gen_simple_cut_instance,
    gen_weighted_cut_instance,
    sampled_diameter_experiment,
    verify_family,
)
from .matula import karger_presample, matula_core, matula_mincut
from .primitives import (
    bfs_tree,
    broadcast,
    component_id_multi,
    connectivity_test_multi,
    convergecast_min,
    mst,
    sparse_certificate,
)
from .sampling import approx_edge_connectivity, connectivity_rate, layering_experiment
from .sim import BitBudget, CostLedger, NodeProgram, SimResult, ledger_charge, run_sync

__version__ = "0.1.0"
