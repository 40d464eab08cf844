"""Two-class income distribution fitting and inequality indicators."""

from .ccdf import (
    EmpiricalCcdf,
    IncomeSample,
    build_ccdf,
    class_statistic,
    empirical_gini,
    empirical_mean,
    inverse_ccdf,
)
from .model import (
    TwoClassParams,
    crossover_income,
    draw_incomes,
    exponential_regime_mean,
    gini_expansion,
    model_ccdf,
    model_log_ccdf,
    model_mean,
    model_pdf,
    sample_incomes,
    theoretical_gini,
)
from .objective import (
    FitContext,
    LossBreakdown,
    SENTINEL_LOSS,
    SearchPoint,
    default_bounds,
    l1_penalty,
    l2_penalty,
    loss,
    resolve_params,
    rmsle,
)
from .swarm import OptimizeResult, SwarmConfig, SwarmState, initialize, optimize, refine, step
from .fitting import FitError, FitResult, FitSettings, fit_sample
from .bootstrap import (
    BaselineFit,
    BootstrapSummary,
    IndicatorStats,
    ReplicaRecord,
    bootstrap_pair,
    fixed_proportion_fit,
    run_validation,
)
from .series import (
    AffineFit,
    IndicatorSeries,
    PearsonResult,
    YearRecord,
    affine_regression,
    build_series,
    pearson,
)
from .pipeline import (
    DatasetSpec,
    IngestResult,
    cmd_baseline,
    cmd_bootstrap,
    cmd_fit,
    cmd_series,
    cmd_synth,
    ingest,
)

__version__ = "0.1.0"
