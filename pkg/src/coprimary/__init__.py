"""Multiplicity-adjusted inference for diagnostic accuracy studies.

Evaluates m candidate tests against minimal acceptance criteria on the
co-primary endpoints sensitivity and specificity, with family-wise error
rate control across candidates.  Provides five procedures (none,
Bonferroni, maxT, pairs bootstrap, wild bootstrap), comparison/confidence
regions, synthetic data generators and a simulation harness.

All stochastic routines take explicit 64-bit seeds and run on the
counter-based Philox generator; fixed seeds give bit-identical results.
"""

from .datagen import (
    BiomarkerScenario,
    InfeasibleCorrelationError,
    LfcScenario,
    auc_to_mean,
    biomarker_params,
    generate,
    generate_biomarker,
    generate_lfc,
    latent_correlation,
    lfc_params,
    scenario_truth,
)
from .estimation import DEFAULT_PSEUDO_COUNT, AccuracySummary, shrink_estimate, summarize
from .model import (
    HypothesisSpec,
    StudyData,
    TruthSet,
    ValidationError,
    constant_columns,
    null_is_true,
    null_truth_vector,
    validate_study,
)
from .numerics import (
    CholeskyFactor,
    CorrelationMatrix,
    QuantileRequest,
    SingularMatrixError,
    StatisticKind,
    bivariate_normal_cdf,
    calibrated_quantile,
    derive_seed,
    empirical_quantile,
    make_rng,
    mvn_sample,
    regularize_and_factor,
    std_normal_cdf,
    std_normal_quantile,
)
from .procedures import (
    DEFAULT_SEED,
    Calibration,
    MethodKind,
    MethodSpec,
    ProcedureResult,
    WildWeights,
    apply_method,
    decide_bonferroni,
    decide_maxt,
    decide_none,
    decide_pairs_bootstrap,
    decide_wild_bootstrap,
)
from .regions import (
    RegionKind,
    RegionSet,
    build_regions,
    export_region_plot_data,
    region_contained,
    region_csv_text,
    write_region_csv,
)
from .simharness import (
    MethodSummary,
    ScenarioSpec,
    SimulationError,
    SimulationSummary,
    count_events,
    run_grid,
    run_scenario,
    summary_csv_rows,
    write_results_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracySummary",
    "BiomarkerScenario",
    "Calibration",
    "CholeskyFactor",
    "CorrelationMatrix",
    "DEFAULT_PSEUDO_COUNT",
    "DEFAULT_SEED",
    "HypothesisSpec",
    "InfeasibleCorrelationError",
    "LfcScenario",
    "MethodKind",
    "MethodSpec",
    "MethodSummary",
    "ProcedureResult",
    "QuantileRequest",
    "RegionKind",
    "RegionSet",
    "ScenarioSpec",
    "SimulationError",
    "SimulationSummary",
    "SingularMatrixError",
    "StatisticKind",
    "StudyData",
    "TruthSet",
    "ValidationError",
    "WildWeights",
    "apply_method",
    "auc_to_mean",
    "biomarker_params",
    "bivariate_normal_cdf",
    "build_regions",
    "calibrated_quantile",
    "constant_columns",
    "count_events",
    "decide_bonferroni",
    "decide_maxt",
    "decide_none",
    "decide_pairs_bootstrap",
    "decide_wild_bootstrap",
    "derive_seed",
    "empirical_quantile",
    "export_region_plot_data",
    "generate",
    "generate_biomarker",
    "generate_lfc",
    "latent_correlation",
    "lfc_params",
    "make_rng",
    "mvn_sample",
    "null_is_true",
    "null_truth_vector",
    "region_contained",
    "region_csv_text",
    "regularize_and_factor",
    "run_grid",
    "run_scenario",
    "scenario_truth",
    "shrink_estimate",
    "std_normal_cdf",
    "std_normal_quantile",
    "summarize",
    "summary_csv_rows",
    "validate_study",
    "write_region_csv",
    "write_results_csv",
]
