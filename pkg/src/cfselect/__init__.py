"""Ensemble counterfactual generation with multi-criteria selection.

Generate candidate counterfactuals for a tabular black-box classifier with
an ensemble of base explainers, enforce validity and actionability, reduce
to the Pareto front on (proximity, feasibility, discriminative power), and
pick one compromise counterfactual with the ideal-point method.
"""

from .blackbox import Model, TrainConfig, load_model, save_model, train
from .data import (
    Dataset,
    FeatureSchema,
    FeatureSpec,
    Instance,
    RangeTable,
    heom_distance,
    knn,
    load_dataset,
)
from .explainers import Candidate, ExplainerConfig, generate, run_ensemble
from .mcda import (
    Direction,
    IdealPoint,
    ParetoFront,
    SelectionResult,
    dominates,
    filter_actionable,
    filter_valid,
    normalize_criteria,
    pareto_front,
    select_ideal,
    select_nadir_plane,
)
from .metrics import (
    CriteriaVector,
    InstabilityCalculator,
    discriminative_power,
    feasibility,
    proximity,
    sparsity,
)
from .pipeline import PipelineConfig, explain, replay

__version__ = "0.1.0"
