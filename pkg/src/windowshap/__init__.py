"""Shapley-value explanations for multivariate time-series classifiers.

Time windows act as coalition players, so long series can be explained with
far fewer characteristic-function evaluations than per-cell attribution,
while local accuracy is preserved by distributing each window's value
equally over its cells.
"""

from .algorithms import (
    DynamicParams,
    EngineParams,
    SlidingParams,
    StationaryParams,
    dynamic_windowshap,
    explain,
    sliding_windowshap,
    stationary_windowshap,
)
from .domain import (
    Attribution,
    BackgroundSet,
    Predictor,
    TimeSeriesInstance,
    Window,
    WindowSet,
    new_instance,
    validate_window_set,
)
from .engine import (
    CallCounter,
    CoalitionMask,
    GameSpec,
    characteristic_value,
    exact_shapley,
    kernel_shapley,
    shapley_kernel_weight,
)
from .evaluation import (
    EvalReport,
    RelevanceMatrix,
    bce,
    evaluate_explainer,
    perturb_inverse,
    perturb_mean_interval,
)
from .models import (
    AnomalyPredictor,
    HttpPredictor,
    LinearPredictor,
    RecencyPredictor,
    SubprocessPredictor,
    generate_synthetic,
)
from .windowing import SlidingPlan, SplitState, sliding_plan, split_window, stationary_partition

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "AnomalyPredictor",
    "BackgroundSet",
    "CallCounter",
    "CoalitionMask",
    "DynamicParams",
    "EngineParams",
    "EvalReport",
    "GameSpec",
    "HttpPredictor",
    "LinearPredictor",
    "Predictor",
    "RecencyPredictor",
    "RelevanceMatrix",
    "SlidingParams",
    "SlidingPlan",
    "SplitState",
    "StationaryParams",
    "SubprocessPredictor",
    "TimeSeriesInstance",
    "Window",
    "WindowSet",
    "bce",
    "characteristic_value",
    "dynamic_windowshap",
    "evaluate_explainer",
    "exact_shapley",
    "explain",
    "generate_synthetic",
    "kernel_shapley",
    "new_instance",
    "perturb_inverse",
    "perturb_mean_interval",
    "shapley_kernel_weight",
    "sliding_plan",
    "sliding_windowshap",
    "split_window",
    "stationary_partition",
    "stationary_windowshap",
    "validate_window_set",
]
