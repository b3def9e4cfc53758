"""agewatch: forecast software-aging indicators and schedule rejuvenation.

An RBF feed-forward network (exemplar centers, trained output weights)
predicts aging indicators such as response time, used swap and free
memory; RMSE/MAPE evaluate the forecasts; a scheduler converts predicted
resource-exhaustion crossings into a recommended restart time.
"""

from .baseline_mlp import (
    MlpNetwork,
    init_mlp,
    load_mlp,
    mlp_forward,
    mlp_gradient,
    save_mlp,
    train_mlp,
)
from .benchmark import run_benchmark
from .errors import AgewatchError
from .metrics import EvaluationReport, evaluate, mape, rmse
from .rbfnn import (
    ForecastResult,
    RbfNetwork,
    TrainConfig,
    TrainReport,
    forecast_recursive,
    forward,
    gradient,
    init_network,
    load_model,
    mse,
    rbf_activation,
    save_model,
    train,
)
from .scheduler import (
    IndicatorForecast,
    RejuvenationSchedule,
    ThresholdSpec,
    derive_schedule,
)
from .synthload import AgingProfile, generate_aging_series, profile_from_json
from .timeseries import (
    ResourceSample,
    ScaleParams,
    TimeSeries,
    WindowedDataset,
    embed,
    inverse_scale,
    min_max_scale,
    parse_proc_snapshot,
    parse_series_csv,
    series_to_csv,
    split,
)

__version__ = "0.1.0"

__all__ = [
    "AgewatchError",
    "AgingProfile",
    "EvaluationReport",
    "ForecastResult",
    "IndicatorForecast",
    "MlpNetwork",
    "RbfNetwork",
    "RejuvenationSchedule",
    "ResourceSample",
    "ScaleParams",
    "ThresholdSpec",
    "TimeSeries",
    "TrainConfig",
    "TrainReport",
    "WindowedDataset",
    "derive_schedule",
    "embed",
    "evaluate",
    "forecast_recursive",
    "forward",
    "generate_aging_series",
    "gradient",
    "init_mlp",
    "init_network",
    "inverse_scale",
    "load_mlp",
    "load_model",
    "mape",
    "min_max_scale",
    "mlp_forward",
    "mlp_gradient",
    "mse",
    "parse_proc_snapshot",
    "parse_series_csv",
    "profile_from_json",
    "rbf_activation",
    "rmse",
    "run_benchmark",
    "save_mlp",
    "save_model",
    "series_to_csv",
    "split",
    "train",
    "train_mlp",
]
