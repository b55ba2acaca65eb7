"""Voter dynamics on weighted graphs and their kernel limits."""

from ._version import __version__
from .dynamics import (
    CONSENSUS_EPS,
    LIMIT_TOL,
    RK_TOL,
    BipartiteClosedForm,
    InitialCondition,
    StateVector,
    Trajectory,
    average_initial,
    closed_form_bipartite,
    consensus_diameter,
    default_horizon,
    detect_consensus,
    exceptional_measure,
    limit_state,
    make_initial,
    mean_value,
    read_trajectory,
    solve_continuum,
    solve_finite,
    step_exceedance_measure,
    step_l2_distance,
    trajectory_csv_text,
    volterra_residual,
    write_trajectory,
)
from .errors import (
    DomainError,
    SizeLimitError,
    SolverConvergenceError,
    UnsupportedVariantError,
    ValidationError,
    VoterlimError,
)
from .experiments import (
    ErrorRow,
    ErrorTable,
    ExperimentConfig,
    MCResult,
    ProximityReport,
    consensus_proximity,
    convergence_study,
    experiment_metadata,
    randcond_evaluate,
    random_consensus_mc,
)
from .graphs import (
    DEFAULT_N_MAX,
    RNG_ALGORITHM,
    LaplacianOperator,
    WeightedGraph,
    blow_up,
    discretize_kernel,
    laplacian,
    pixel_kernel,
    read_edge_list,
    sample_w_random,
    write_edge_list,
)
from .kernels import (
    BipartiteKernel,
    ConstantKernel,
    DirectSumKernel,
    Kernel,
    Partition,
    ProductKernel,
    StepKernel,
    WattsStrogatzKernel,
    direct_sum,
    l2_distance,
    make_kernel,
    overlap_matrix,
    scale_kernel,
)
from .structure import (
    Component,
    ComponentDecomposition,
    NecessaryConditionReport,
    TwinSet,
    TwinSetPartition,
    connected_components,
    decompose_solution,
    find_maximal_twin_sets,
    is_connected,
    necessary_condition,
    predict_limit,
    structure_report,
)

__all__ = [
    "__version__",
    "BipartiteClosedForm",
    "BipartiteKernel",
    "CONSENSUS_EPS",
    "Component",
    "ComponentDecomposition",
    "ConstantKernel",
    "DEFAULT_N_MAX",
    "DirectSumKernel",
    "DomainError",
    "ErrorRow",
    "ErrorTable",
    "ExperimentConfig",
    "InitialCondition",
    "Kernel",
    "LIMIT_TOL",
    "LaplacianOperator",
    "MCResult",
    "NecessaryConditionReport",
    "Partition",
    "ProductKernel",
    "ProximityReport",
    "RK_TOL",
    "RNG_ALGORITHM",
    "SizeLimitError",
    "SolverConvergenceError",
    "StateVector",
    "StepKernel",
    "Trajectory",
    "TwinSet",
    "TwinSetPartition",
    "UnsupportedVariantError",
    "ValidationError",
    "VoterlimError",
    "WattsStrogatzKernel",
    "WeightedGraph",
    "average_initial",
    "blow_up",
    "closed_form_bipartite",
    "connected_components",
    "consensus_diameter",
    "consensus_proximity",
    "convergence_study",
    "decompose_solution",
    "default_horizon",
    "detect_consensus",
    "direct_sum",
    "discretize_kernel",
    "exceptional_measure",
    "experiment_metadata",
    "find_maximal_twin_sets",
    "is_connected",
    "l2_distance",
    "laplacian",
    "limit_state",
    "make_initial",
    "make_kernel",
    "mean_value",
    "necessary_condition",
    "overlap_matrix",
    "pixel_kernel",
    "predict_limit",
    "randcond_evaluate",
    "random_consensus_mc",
    "read_edge_list",
    "read_trajectory",
    "sample_w_random",
    "scale_kernel",
    "solve_continuum",
    "solve_finite",
    "step_exceedance_measure",
    "step_l2_distance",
    "structure_report",
    "trajectory_csv_text",
    "volterra_residual",
    "write_edge_list",
    "write_trajectory",
]
