"""Random admittance matrices for power networks: concentration bounds for
the operator norm, flat-start (linear coupled) power flow, power-flow
manifold error certificates, and the Monte Carlo / exhaustive experiments
that validate every bound at desk scale."""

from .graph_core import (
    Topology,
    build_topology,
    complete_topology,
    degrees,
    incidence_matrix,
    is_connected,
    is_tree,
    max_degree,
    path_topology,
    sample_er_topology,
    sample_random_tree,
    star_topology,
    topology_from_json,
    topology_to_json,
    unweighted_laplacian,
)
from .spectra import intrinsic_dimension, kron, operator_norm, psd_dominates
from .admittance import (
    AdmittanceMatrix,
    BoundedPerturbation,
    FixedBernoulli,
    FixedDeterministic,
    LineAdmittance,
    SphereUniform,
    assemble_admittance,
    center,
    elementary_jacobian,
    elementary_laplacian,
    expected_admittance,
    flat_start_lift,
    lift_real,
    sample_weights,
)
from .bounds import (
    BoundReport,
    ContingencyModel,
    CriticalityProfile,
    bernstein_tail,
    contingency_factors,
    deterministic_norm_bound,
    lcpf_expectation_bound,
    lcpf_tail_bound,
    lcpf_variance_envelope,
    thm1_expectation_bound,
    thm2_expectation_bound,
    thm2_tail_bound,
    variance_laplacian,
)
from .lcpf import (
    FlatStartJacobian,
    ImpedanceBlocks,
    flat_start_jacobian,
    invert_tree_lcpf,
    lcpf_solve,
)
from .manifold import (
    ManifoldPoint,
    TangentStep,
    distance_bound,
    expected_distance_bound,
    manifold_point,
    power_flow_derivative,
    power_flow_map,
    projection_distance,
    tangent_residual,
    tangent_step,
)
from .experiment_harness import (
    ConfigError,
    ExperimentConfig,
    RunResult,
    SampleStats,
    brute_force_distribution,
    emit,
    monte_carlo_distribution,
    run_experiment,
)

__version__ = "0.1.0"
