"""Equilibrium and socially optimal joining in the single-server Markovian
queue with catastrophes and repairs."""

from .model import (
    EconParams,
    MixedStrategy,
    ModelParams,
    NegativeEconValue,
    NonFinite,
    NonPositiveRate,
    ObservableRegime,
    ParameterError,
    PerformanceReport,
    ThresholdKind,
    ThresholdStrategy,
    UnobservableRegime,
    classify_observable,
    classify_unobservable,
    validate,
)
from .observable import (
    CapTooSmall,
    NumericalInstability,
    equilibrium_threshold,
    optimal_threshold_social,
    s_obs,
    social_benefit_observable,
    sojourn_stats,
    stationary_observable,
)
from .unobservable import (
    char_roots,
    eh_limit_check,
    equilibrium_mixed,
    optimal_mixed_social,
    s_un,
    social_benefit_unobservable,
    stationary_unobservable,
)
from .scenario import analyze, sweep
from .simulation import SimConfig, simulate

__version__ = "0.1.0"
