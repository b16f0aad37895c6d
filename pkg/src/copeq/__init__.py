"""Two-sample copula equality testing.

Compares the dependence structures of two multivariate samples using
Bernstein-smoothed (or raw) empirical copulas, with p-values from a
multiplier bootstrap or from without-replacement subsampling, plus a
Monte Carlo harness for level/power studies.
"""

__version__ = "0.1.0"

from .bernstein import (
    CapacityError,
    EvaluationGrid,
    bernstein_weights,
    binomial_survival,
    make_grid,
    survival_table,
)
from .estimators import (
    CopulaEvaluator,
    bernstein_copula_eval_naive,
    empirical_copula_eval,
    pseudo_observations,
    stieltjes_cell_masses,
)
from .multiplier import (
    TestFragment,
    draw_centered_multipliers,
    g_hat_process,
    multiplier_test,
    p_value,
    replicate_process,
    replicate_statistics,
)
from .runner import (
    ConfigurationError,
    TestConfig,
    TestReport,
    paired_sample_test,
    resolve_orders,
    two_sample_test,
)
from .samplers import (
    CopulaModel,
    RngStream,
    clayton_theta_from_tau,
    gaussian_rho_from_tau,
    sample_clayton,
    sample_gaussian,
    sample_kendall_tau,
)
from .statistics import (
    STATISTIC_NAMES,
    SampleSizes,
    StatisticTriple,
    cvm_copula_statistic,
    cvm_statistic,
    ks_statistic,
    observed_statistics,
)
from .study import StudyConfig, StudyRow, parse_study_config, run_study
from .subsample import (
    SubsampleConfig,
    draw_subsample_indices,
    subsample_replicate_process,
    subsample_test,
)

__all__ = [
    "CapacityError",
    "ConfigurationError",
    "CopulaEvaluator",
    "CopulaModel",
    "EvaluationGrid",
    "RngStream",
    "STATISTIC_NAMES",
    "SampleSizes",
    "StatisticTriple",
    "StudyConfig",
    "StudyRow",
    "SubsampleConfig",
    "TestConfig",
    "TestFragment",
    "TestReport",
    "bernstein_copula_eval_naive",
    "bernstein_weights",
    "binomial_survival",
    "clayton_theta_from_tau",
    "cvm_copula_statistic",
    "cvm_statistic",
    "draw_centered_multipliers",
    "draw_subsample_indices",
    "empirical_copula_eval",
    "g_hat_process",
    "gaussian_rho_from_tau",
    "ks_statistic",
    "make_grid",
    "multiplier_test",
    "observed_statistics",
    "p_value",
    "paired_sample_test",
    "parse_study_config",
    "pseudo_observations",
    "replicate_process",
    "replicate_statistics",
    "resolve_orders",
    "run_study",
    "sample_clayton",
    "sample_gaussian",
    "sample_kendall_tau",
    "stieltjes_cell_masses",
    "subsample_replicate_process",
    "subsample_test",
    "survival_table",
    "two_sample_test",
]
