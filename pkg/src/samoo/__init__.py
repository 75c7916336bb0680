"""Surrogate-assisted multi-objective optimization for expensive problems.

A toolkit for box-bounded minimization where each objective evaluation is
costly: classifier-guided offspring pre-screening, hypervolume-driven
search on radial basis surrogates, and local refinement of sparse front
regions, plus benchmark problems, quality indicators, and a batch
experiment harness with a command-line interface.
"""

from .core import (
    Archive,
    Bounds,
    EvaluatedSample,
    RankedPopulation,
    crowding_distance,
    dominates,
    environmental_selection,
    latin_hypercube_sample,
    nondominated_sort,
    polynomial_mutation,
    rank_population,
    sbx_crossover,
    differential_mutation,
)
from .indicators import hv_improvement, hypervolume, igd, mc_hypervolume
from .optimizer import RunConfig, RunResult, run, run_variant
from .problems import PROBLEM_NAMES, Problem, make_problem
from .strategies import (
    InfillBatch,
    StrategyParams,
    classifier_rank_prescreen,
    decision_space_uncertainty,
    hv_nondominated_search,
    objective_space_uncertainty,
    sparse_local_search,
)
from .surrogates import PnnModel, RbfModel, pnn_fit, pnn_predict, rbf_fit, rbf_predict

__version__ = "0.1.0"

__all__ = [
    "Archive",
    "Bounds",
    "EvaluatedSample",
    "RankedPopulation",
    "InfillBatch",
    "StrategyParams",
    "RunConfig",
    "RunResult",
    "Problem",
    "PROBLEM_NAMES",
    "RbfModel",
    "PnnModel",
    "dominates",
    "nondominated_sort",
    "crowding_distance",
    "rank_population",
    "environmental_selection",
    "latin_hypercube_sample",
    "sbx_crossover",
    "polynomial_mutation",
    "differential_mutation",
    "hypervolume",
    "mc_hypervolume",
    "hv_improvement",
    "igd",
    "rbf_fit",
    "rbf_predict",
    "pnn_fit",
    "pnn_predict",
    "decision_space_uncertainty",
    "objective_space_uncertainty",
    "classifier_rank_prescreen",
    "hv_nondominated_search",
    "sparse_local_search",
    "make_problem",
    "run",
    "run_variant",
    "__version__",
]
