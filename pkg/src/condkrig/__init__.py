"""Kriging with length scales tuned for a well-conditioned correlation matrix."""

__version__ = "0.1.0"

from .correlation import (  # noqa: E402
    CONDITION_NORM,
    KAPPA_SENTINEL,
    CorrelationSystem,
    KernelParams,
    build_cross_correlation,
    build_self_correlation,
    condition_number,
    correlate,
)
from .errors import (  # noqa: E402
    FactorizationError,
    InvalidArgumentError,
    ModelSingularError,
    ParseError,
    RegularizationError,
)
from .kriging import KrigingModel, Prediction, TrainingSet, fit, load_model  # noqa: E402
from .regularizer import (  # noqa: E402
    ConvergenceTrace,
    RegularizerConfig,
    direct_search,
    regularize,
    seed_search,
)
from .testlab import FUNCTIONS, GridField, error_report, evaluate, evaluate_grid, sample_random  # noqa: E402
