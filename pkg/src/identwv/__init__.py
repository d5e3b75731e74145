"""identwv: identification of governing PDEs from a single noisy trajectory.

The pipeline builds a weak-form linear system from localized test
functions, solves it once per dynamics-guided row weighting, and selects
the active terms by occurrence and coefficient voting before a final
rescaled least-squares recovery.
"""

__version__ = "0.1.0"

from .bench import BenchConfig, Score, run_benchmark, score
from .grid import Dataset, Grid, NoiseSpec, add_noise, load_dataset, nsr_sigma, \
    save_dataset, subsample
from .identify import IdentResult, VotingConfig, format_pde, identify
from .library import Coefficients, FeatureLibrary, FeatureSpec, build_library, \
    default_library, true_coefficients
from .sim import SimulationSpec, default_spec, initial_condition, simulate
from .solver import SparseSolveParams, solve_sparse, subspace_pursuit
from .testfn import TestFunction, TestFunctionGrid, default_placement, eval_derivative, \
    place_uniform
from .weak import WeakSystem, assemble, e_astar, pointwise_residual, weak_quadrature
from .weighting import WeightVector, apply_weights, default_reference_set, \
    dynamics_indicator, uniform_reference_set

__all__ = [
    "BenchConfig", "Coefficients", "Dataset", "FeatureLibrary", "FeatureSpec",
    "Grid", "IdentResult", "NoiseSpec", "Score", "SimulationSpec",
    "SparseSolveParams", "TestFunction", "TestFunctionGrid", "VotingConfig",
    "WeakSystem", "WeightVector", "add_noise", "apply_weights", "assemble",
    "build_library", "default_library", "default_placement", "default_reference_set",
    "default_spec", "dynamics_indicator", "e_astar", "eval_derivative", "format_pde",
    "identify", "initial_condition", "load_dataset", "nsr_sigma", "place_uniform",
    "pointwise_residual", "run_benchmark", "save_dataset", "score", "simulate",
    "solve_sparse", "subsample", "subspace_pursuit", "true_coefficients",
    "uniform_reference_set", "weak_quadrature",
]
