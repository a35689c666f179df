"""Kuramoto oscillator networks: fixed points, stability and partition reductions."""

__version__ = "0.1.0"

from .graph import (
    FormatError,
    GadgetDescriptor,
    PhaseState,
    WeightedGraph,
    canonical_rotation,
    parse_graph,
    parse_state,
    serialize_graph,
    serialize_state,
    state_distance,
)
from .dynamics import ModelParams, energy, integrate_to_convergence, kuramoto_rhs, step_rk4
from .fixedpoint import Classification, FixedPointRecord, multistart_search, newton_refine, residual
from .stability import EdgeAngleClass, Verdict, cut_check, edge_angle_check, eigen_symmetric, jacobian, stability_verdict
from .partition import (
    PartitionInstance,
    Status,
    kk_differencing,
    kuramoto_partition_feasible,
    solve_partition_bruteforce,
    solve_partition_dp,
    surd_partition,
)
from .gadgets import (
    build_clique_blowup,
    build_unweighted_gadget,
    build_weighted_gadget,
    unweighted_gadget_fixed_point,
    verify_reduction,
    weighted_gadget_fixed_point,
)
