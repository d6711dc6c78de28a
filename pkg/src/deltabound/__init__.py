"""Hard-label black-box adversarial attack toolkit (L2, low query budgets)."""

from .attack import (
    AttackConfig,
    AttackResult,
    AttackState,
    AttackTrace,
    attack_toy2d,
    delta_value,
    run_attack,
    validate_theorem1,
)
from .bench import BenchReport, avg_l2, run_benchmark, select_eval_samples
from .data import LabeledDataset, load_csv_dataset
from .distance import (
    BoundaryDistance,
    RatioStore,
    compare_at_radius,
    icdf_query,
    improved_binary_search,
    initial_g_evaluation,
)
from .models import ModelSpec, Toy2DClassifier, load_model_spec, save_model_spec, toy2d_classify
from .oracle import DecisionOracle, QueryLedger
from .sampling import SamplerConfig, draw_direction, p_value, sample_dct, sample_normal
from .training import train_tabular_model

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "AttackState",
    "AttackTrace",
    "BenchReport",
    "BoundaryDistance",
    "DecisionOracle",
    "LabeledDataset",
    "ModelSpec",
    "QueryLedger",
    "RatioStore",
    "SamplerConfig",
    "Toy2DClassifier",
    "attack_toy2d",
    "avg_l2",
    "compare_at_radius",
    "delta_value",
    "draw_direction",
    "icdf_query",
    "improved_binary_search",
    "initial_g_evaluation",
    "load_csv_dataset",
    "load_model_spec",
    "p_value",
    "run_attack",
    "run_benchmark",
    "sample_dct",
    "sample_normal",
    "save_model_spec",
    "select_eval_samples",
    "toy2d_classify",
    "train_tabular_model",
    "validate_theorem1",
]
