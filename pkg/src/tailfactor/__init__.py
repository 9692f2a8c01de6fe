"""Heavy-tailed linear factor models: spectral-measure estimation toolkit."""

from ._kernels import BACKEND
from .estimators import (
    ConvConfig,
    TwoStepConfig,
    conventional_threshold,
    direction_threshold,
    empirical_angular_measure,
    estimate_conventional,
    estimate_directions,
    estimate_two_step,
    solve_theta,
    two_step_from_directions,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    diagnostic_counts,
    emit_outputs,
    ground_truth_for,
    run_convergence_experiment,
)
from .measures import (
    DiscreteMeasure,
    ModelSpec,
    SampleBatch,
    make_measure,
    measure_from_json,
    measure_to_json,
    spectral_measure_of,
    validate_measure,
)
from .numerics import (
    KMeansConfig,
    KMeansResult,
    fit_loglog_slope,
    invert_square_matrix,
    kmeans,
)
from .sampling import (
    RngStream,
    generate_dataset,
    sample_conditional_pareto_vec,
    sample_latent,
    sample_pareto,
    sample_tilted_pareto,
)
from .transport import TransportPlan, ground_cost, wasserstein_p, wasserstein_pp

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvConfig",
    "DiscreteMeasure",
    "ExperimentConfig",
    "ExperimentResult",
    "KMeansConfig",
    "KMeansResult",
    "ModelSpec",
    "RngStream",
    "SampleBatch",
    "TransportPlan",
    "TwoStepConfig",
    "conventional_threshold",
    "diagnostic_counts",
    "direction_threshold",
    "emit_outputs",
    "empirical_angular_measure",
    "estimate_conventional",
    "estimate_directions",
    "estimate_two_step",
    "fit_loglog_slope",
    "generate_dataset",
    "ground_cost",
    "ground_truth_for",
    "invert_square_matrix",
    "kmeans",
    "make_measure",
    "measure_from_json",
    "measure_to_json",
    "run_convergence_experiment",
    "sample_conditional_pareto_vec",
    "sample_latent",
    "sample_pareto",
    "sample_tilted_pareto",
    "solve_theta",
    "spectral_measure_of",
    "two_step_from_directions",
    "validate_measure",
    "wasserstein_p",
    "wasserstein_pp",
]
