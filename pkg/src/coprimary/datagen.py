"""Synthetic data generators for the two simulation settings.

``LfcScenario`` generates correlated multivariate binary correctness data
with each test sitting exactly at one endpoint's null boundary and the
other endpoint at 1 (the least-favorable configuration for family-wise
error).  ``BiomarkerScenario`` draws correlated continuous markers from a
binormal ROC model and dichotomizes them at cutpoints, giving realistic
correlation structures.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import StudyData, TruthSet, ValidationError
from .numerics import (
    CorrelationMatrix,
    bivariate_normal_cdf,
    derive_seed,
    mvn_sample,
    regularize_and_factor,
    std_normal_cdf,
    std_normal_quantile,
)

logger = logging.getLogger(__name__)


class InfeasibleCorrelationError(ValueError):
    """Requested binary correlation lies outside the Frechet-feasible range."""


def _alternating_pattern(m: int) -> tuple:
    return tuple((j + 1) % 2 for j in range(m))  # 1, 0, 1, 0, ...


@dataclass(frozen=True)
class LfcScenario:
    """Least-favorable configuration: boundary parameters, pattern and correlations.

    ``b[j] = 1`` puts Se_j at ``se0`` (Sp_j = 1); ``b[j] = 0`` puts Sp_j at
    ``sp0`` (Se_j = 1).  Equicorrelation applies between the non-degenerate
    coordinates of each group.  Default pattern alternates, covering both
    endpoint boundaries.
    """

    m: int
    se0: float
    sp0: float
    n1: int
    n0: int
    rho_se: float = 0.0
    rho_sp: float = 0.0
    b: tuple = None

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.b is None:
            object.__setattr__(self, "b", _alternating_pattern(self.m))
        else:
            object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        if len(self.b) != self.m or any(v not in (0, 1) for v in self.b):
            raise ValidationError(f"b must be a 0/1 vector of length {self.m}")
        for name, v in (("se0", self.se0), ("sp0", self.sp0)):
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1), got {v}")
        for name, v in (("rho_se", self.rho_se), ("rho_sp", self.rho_sp)):
            if not 0.0 <= v < 1.0:
                raise ValidationError(f"{name} must lie in [0, 1), got {v}")
        if self.n1 < 1 or self.n0 < 1:
            raise ValidationError(f"group sizes must be >= 1, got n1={self.n1}, n0={self.n0}")


@dataclass(frozen=True)
class BiomarkerScenario:
    """Binormal ROC markers dichotomized at cutpoints.

    ``assignments`` maps each test to a (marker index, cutpoint) pair;
    markers have unit variance in both groups, mean 0 for non-diseased and
    a mean in the diseased group solved from the target AUC.
    """

    auc: tuple
    rho0: float
    rho1: float
    assignments: tuple
    n1: int
    n0: int

    def __post_init__(self):
        object.__setattr__(self, "auc", tuple(float(a) for a in self.auc))
        object.__setattr__(
            self, "assignments", tuple((int(k), float(c)) for k, c in self.assignments)
        )
        if len(self.auc) < 1:
            raise ValidationError("at least one marker is required")
        if any(not 0.5 < a < 1.0 for a in self.auc):
            raise ValidationError(f"marker AUCs must lie in (0.5, 1), got {self.auc}")
        if len(self.assignments) < len(self.auc):
            raise ValidationError(
                f"need at least one test per marker: {len(self.assignments)} assignments "
                f"for {len(self.auc)} markers"
            )
        for k, c in self.assignments:
            if not 0 <= k < len(self.auc):
                raise ValidationError(f"marker index {k} out of range for l={len(self.auc)}")
            if not math.isfinite(c):
                raise ValidationError(f"cutpoints must be finite, got {c}")
        for name, v in (("rho0", self.rho0), ("rho1", self.rho1)):
            if not 0.0 <= v < 1.0:
                raise ValidationError(f"{name} must lie in [0, 1), got {v}")
        if self.n1 < 1 or self.n0 < 1:
            raise ValidationError(f"group sizes must be >= 1, got n1={self.n1}, n0={self.n0}")

    @property
    def l(self) -> int:
        return len(self.auc)

    @property
    def m(self) -> int:
        return len(self.assignments)


def lfc_params(scenario: LfcScenario) -> TruthSet:
    """Ground truth of the LFC: one endpoint at its boundary, the other at 1."""
    se = np.where(np.array(scenario.b) == 1, scenario.se0, 1.0)
    sp = np.where(np.array(scenario.b) == 0, scenario.sp0, 1.0)
    return TruthSet(se_true=se, sp_true=sp)


def feasible_binary_correlation(p1: float, p2: float) -> tuple:
    """Frechet bounds on the correlation of two Bernoulli variables."""
    sigma = math.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))
    lo = (max(0.0, p1 + p2 - 1.0) - p1 * p2) / sigma
    hi = (min(p1, p2) - p1 * p2) / sigma
    return lo, hi


def latent_correlation(p1: float, p2: float, rho_target: float) -> float:
    """Latent Gaussian correlation reproducing a target binary correlation.

    Solves ``P(Z1 <= q1, Z2 <= q2; rho_z) = p1 p2 + rho_target * sigma`` by
    bisection on the bivariate normal CDF, to 1e-8 in probability.  The
    thresholded-Gaussian construction attains the whole Frechet range, so
    any feasible target has a solution in [-1, 1].
    """
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 < p < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {p}")
    lo, hi = feasible_binary_correlation(p1, p2)
    if not lo - 1e-12 <= rho_target <= hi + 1e-12:
        raise InfeasibleCorrelationError(
            f"binary correlation {rho_target} infeasible for marginals "
            f"({p1}, {p2}); feasible range is [{lo:.6f}, {hi:.6f}]"
        )
    if rho_target == 0.0:
        return 0.0
    q1 = std_normal_quantile(p1)
    q2 = std_normal_quantile(p2)
    sigma = math.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))
    target = p1 * p2 + rho_target * sigma
    lo_z, hi_z = -1.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo_z + hi_z)
        val = bivariate_normal_cdf(q1, q2, mid)
        if abs(val - target) <= 1e-8:
            return mid
        if val < target:
            lo_z = mid
        else:
            hi_z = mid
        if hi_z - lo_z < 1e-14:
            break
    return 0.5 * (lo_z + hi_z)


@lru_cache(maxsize=1024)
def _cached_latent(p1: float, p2: float, rho: float) -> float:
    return latent_correlation(p1, p2, rho)


def _correlated_binary(params: np.ndarray, rho: float, n: int, seed: int) -> np.ndarray:
    """Binary matrix with given column means and pairwise equicorrelation.

    Non-degenerate coordinates (mean < 1) come from thresholding a latent
    multivariate normal; degenerate ones are constant-1 columns outside the
    latent model.
    """
    m = params.size
    out = np.ones((n, m), dtype=np.uint8)
    live = np.nonzero(params < 1.0)[0]
    d = live.size
    if d == 0:
        return out
    latent = np.eye(d)
    for a in range(d):
        for b in range(a + 1, d):
            latent[a, b] = latent[b, a] = _cached_latent(
                float(params[live[a]]), float(params[live[b]]), float(rho)
            )
    factor = regularize_and_factor(CorrelationMatrix(latent))
    if factor.eps > 1e-4:
        logger.info("latent correlation matrix regularized with eps=%g", factor.eps)
    z = mvn_sample(factor, n, seed)
    thresholds = std_normal_quantile(params[live])
    out[:, live] = (z <= thresholds).astype(np.uint8)
    return out


def generate_lfc(scenario: LfcScenario, seed: int) -> StudyData:
    """StudyData from the LFC generator; deterministic given the seed."""
    truth = lfc_params(scenario)
    q1 = _correlated_binary(truth.se_true, scenario.rho_se, scenario.n1, derive_seed(seed, 1))
    q0 = _correlated_binary(truth.sp_true, scenario.rho_sp, scenario.n0, derive_seed(seed, 2))
    return StudyData(q1=q1, q0=q0)


def auc_to_mean(auc: float) -> float:
    """Diseased-group marker mean achieving a target AUC under unit variances."""
    if not 0.0 < auc < 1.0:
        raise ValueError(f"AUC must lie strictly in (0, 1), got {auc}")
    return math.sqrt(2.0) * std_normal_quantile(auc)


def biomarker_params(scenario: BiomarkerScenario) -> TruthSet:
    """Per-test true accuracies of the dichotomized markers."""
    mu = np.array([auc_to_mean(a) for a in scenario.auc])
    se = np.array([std_normal_cdf(mu[k] - c) for k, c in scenario.assignments])
    sp = np.array([std_normal_cdf(c) for _, c in scenario.assignments])
    return TruthSet(se_true=se, sp_true=sp)


def generate_biomarker(scenario: BiomarkerScenario, seed: int) -> StudyData:
    """StudyData from the binormal marker model; deterministic given the seed.

    Markers are drawn per group, each test classifies via ``marker > cutpoint``
    and correctness is recorded against the group label (diseased correct iff
    test-positive, non-diseased correct iff test-negative).
    """
    mu = np.array([auc_to_mean(a) for a in scenario.auc])
    factor1 = regularize_and_factor(CorrelationMatrix.equicorrelated(scenario.l, scenario.rho1))
    factor0 = regularize_and_factor(CorrelationMatrix.equicorrelated(scenario.l, scenario.rho0))
    v1 = mvn_sample(factor1, scenario.n1, derive_seed(seed, 1)) + mu
    v0 = mvn_sample(factor0, scenario.n0, derive_seed(seed, 2))
    markers = np.array([k for k, _ in scenario.assignments])
    cuts = np.array([c for _, c in scenario.assignments])
    q1 = (v1[:, markers] > cuts).astype(np.uint8)
    q0 = (v0[:, markers] <= cuts).astype(np.uint8)
    return StudyData(q1=q1, q0=q0)


def scenario_truth(scenario) -> TruthSet:
    """Ground truth for either generator type."""
    if isinstance(scenario, LfcScenario):
        return lfc_params(scenario)
    if isinstance(scenario, BiomarkerScenario):
        return biomarker_params(scenario)
    raise TypeError(f"unknown scenario type: {type(scenario)!r}")


def generate(scenario, seed: int) -> StudyData:
    """Generate StudyData for either generator type."""
    if isinstance(scenario, LfcScenario):
        return generate_lfc(scenario, seed)
    if isinstance(scenario, BiomarkerScenario):
        return generate_biomarker(scenario, seed)
    raise TypeError(f"unknown scenario type: {type(scenario)!r}")
