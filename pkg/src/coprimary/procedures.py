"""Multiple comparison procedures for co-primary sensitivity/specificity testing.

Five procedures are provided: no adjustment, Bonferroni, maxT (estimated
multivariate-normal calibration), pairs bootstrap and wild bootstrap.  Each
produces a comparison critical value (test decisions), a confidence critical
value (simultaneous confidence regions), per-test rejections and adjusted
p-values.  A test rejects iff ``min(z_se, z_sp) > c_comparison``.

Calibration of the comparison critical value is controlled by
``MethodSpec.calibration``:

``BINDING`` (default)
    Each test contributes the centered-studentized deviation of its
    empirically binding coordinate (the one with the smaller observed Wald
    statistic); the critical value is the (1 - alpha) quantile of the max
    over tests.  Under a least-favorable configuration this is the
    m-dimensional equicoordinate quantile of the binding block, and for a
    single test it reduces to the unadjusted z quantile.
``MAX_MIN``
    The (1 - alpha) quantile of ``max_j min(pair)`` over both centered
    coordinates of every test.  Anti-conservative when non-binding
    coordinates sit far inside the alternative; exposed for study.
``EQUICOORDINATE_2M``
    Fully conservative: decisions reuse the confidence critical value
    (the (1 - alpha) quantile of the max over all 2m coordinates).

Coordinates with degenerate (constant) data columns carry no sampling
variability and never contribute to calibration; a test whose observed
binding coordinate is degenerate is excluded entirely (its statistic is
constant and cannot drive the family-wise maximum).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .estimation import AccuracySummary
from .model import HypothesisSpec, StudyData
from .numerics import (
    empirical_quantile,
    make_rng,
    mvn_sample,
    regularize_and_factor,
    std_normal_cdf,
    std_normal_quantile,
)

DEFAULT_SEED = 1729


class MethodKind(enum.Enum):
    NONE = "none"
    BONFERRONI = "bonferroni"
    MAXT = "maxt"
    PAIRS_BOOT = "pairs_boot"
    WILD_BOOT = "wild_boot"


class WildWeights(enum.Enum):
    RADEMACHER = "rademacher"
    MAMMEN = "mammen"


class Calibration(enum.Enum):
    BINDING = "binding"
    MAX_MIN = "max_min"
    EQUICOORDINATE_2M = "equicoordinate_2m"


@dataclass(frozen=True)
class MethodSpec:
    """Procedure selection plus resampling/calibration options."""

    kind: MethodKind
    b_boot: int = 2000
    mc_draws: int = 100_000
    wild_weights: WildWeights = WildWeights.RADEMACHER
    calibration: Calibration = Calibration.BINDING
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.b_boot < 100:
            raise ValueError(f"b_boot must be >= 100, got {self.b_boot}")
        if self.mc_draws < 10_000:
            raise ValueError(f"mc_draws must be >= 10000, got {self.mc_draws}")

    @property
    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class ProcedureResult:
    """Critical values, rejection decisions and adjusted p-values."""

    c_comparison: float
    c_confidence: float
    reject: np.ndarray
    p_adj: np.ndarray
    method: MethodSpec


def _finish(summary, c_comparison, c_confidence, p_adj, method) -> ProcedureResult:
    reject = summary.min_z > c_comparison
    p_adj = np.clip(np.asarray(p_adj, dtype=float), 0.0, 1.0)
    reject.flags.writeable = False
    p_adj.flags.writeable = False
    return ProcedureResult(
        c_comparison=float(c_comparison),
        c_confidence=float(c_confidence),
        reject=reject,
        p_adj=p_adj,
        method=method,
    )


def decide_none(
    summary: AccuracySummary, hyp: HypothesisSpec, method: MethodSpec | None = None
) -> ProcedureResult:
    """Unadjusted intersection-union test: c = z_{1-alpha} for every test."""
    method = method or MethodSpec(kind=MethodKind.NONE)
    c_comp = std_normal_quantile(1.0 - hyp.alpha)
    c_conf = std_normal_quantile(1.0 - hyp.alpha / 2.0)
    p_adj = 1.0 - std_normal_cdf(summary.min_z)
    return _finish(summary, c_comp, c_conf, p_adj, method)


def decide_bonferroni(
    summary: AccuracySummary, hyp: HypothesisSpec, method: MethodSpec | None = None
) -> ProcedureResult:
    """Bonferroni: alpha/m for decisions, alpha/(2m) for confidence regions."""
    method = method or MethodSpec(kind=MethodKind.BONFERRONI)
    m = summary.m
    c_comp = std_normal_quantile(1.0 - hyp.alpha / m)
    c_conf = std_normal_quantile(1.0 - hyp.alpha / (2.0 * m))
    p_adj = np.minimum(1.0, m * (1.0 - std_normal_cdf(summary.min_z)))
    return _finish(summary, c_comp, c_conf, p_adj, method)


# ---------------------------------------------------------------------------
# Shared calibration-statistic construction
# ---------------------------------------------------------------------------

def _calibration_stats(
    z_se_star: np.ndarray,
    z_sp_star: np.ndarray,
    summary: AccuracySummary,
    calibration: Calibration,
) -> tuple:
    """Comparison and confidence max-statistics from centered coordinate draws.

    ``z_se_star``/``z_sp_star`` are (n_draws x m) centered-studentized
    deviations (MVN draws for maxT, bootstrap replicates otherwise).
    Degenerate coordinates are dropped; if nothing remains the statistic is
    identically zero.
    """
    live_se = ~summary.se_degenerate
    live_sp = ~summary.sp_degenerate
    n_draws = z_se_star.shape[0]

    live_cols = []
    if np.any(live_se):
        live_cols.append(z_se_star[:, live_se])
    if np.any(live_sp):
        live_cols.append(z_sp_star[:, live_sp])
    if live_cols:
        t_conf = np.hstack(live_cols).max(axis=1)
    else:
        t_conf = np.zeros(n_draws)

    if calibration is Calibration.EQUICOORDINATE_2M:
        return t_conf, t_conf

    if calibration is Calibration.BINDING:
        sel_se = live_se & (summary.z_se <= summary.z_sp)
        sel_sp = live_sp & (summary.z_sp < summary.z_se)
        cols = []
        if np.any(sel_se):
            cols.append(z_se_star[:, sel_se])
        if np.any(sel_sp):
            cols.append(z_sp_star[:, sel_sp])
        t_comp = np.hstack(cols).max(axis=1) if cols else np.zeros(n_draws)
        return t_comp, t_conf

    # MAX_MIN: pairwise minima with degenerate coordinates non-binding.
    pair_mins = []
    for j in range(summary.m):
        if live_se[j] and live_sp[j]:
            pair_mins.append(np.minimum(z_se_star[:, j], z_sp_star[:, j]))
        elif live_se[j]:
            pair_mins.append(z_se_star[:, j])
        elif live_sp[j]:
            pair_mins.append(z_sp_star[:, j])
    t_comp = np.max(pair_mins, axis=0) if pair_mins else np.zeros(n_draws)
    return t_comp, t_conf


def decide_maxt(
    summary: AccuracySummary, hyp: HypothesisSpec, method: MethodSpec
) -> ProcedureResult:
    """Plug-in multivariate normal calibration from the estimated correlations.

    Draws from N(0, r_hat) and calibrates both critical values on the same
    draws, which makes ``c_confidence >= c_comparison`` hold exactly.
    Adjusted p-values are the Monte-Carlo tail proportions of the
    comparison statistic at each observed ``min(z_se, z_sp)``.
    """
    factor = regularize_and_factor(summary.r_hat)
    draws = mvn_sample(factor, method.mc_draws, method.seed)
    m = summary.m
    t_comp, t_conf = _calibration_stats(draws[:, :m], draws[:, m:], summary, method.calibration)
    c_comp = empirical_quantile(t_comp, 1.0 - hyp.alpha)
    c_conf = empirical_quantile(t_conf, 1.0 - hyp.alpha)
    min_z = summary.min_z
    p_adj = np.array([np.mean(t_comp >= z) for z in min_z])
    return _finish(summary, c_comp, c_conf, p_adj, method)


# ---------------------------------------------------------------------------
# Bootstrap procedures
# ---------------------------------------------------------------------------

BOOT_PSEUDO_COUNT = 1.0


def _canonical_rows(q: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically, making resampling invariant to row order."""
    return q[np.lexsort(q.T[::-1])]


def _resample_counts(rng, n: int, b_boot: int) -> np.ndarray:
    """Row multiplicities of ``b_boot`` with-replacement resamples of n rows."""
    idx = rng.integers(0, n, size=(b_boot, n))
    flat = idx + (np.arange(b_boot) * n)[:, None]
    return np.bincount(flat.ravel(), minlength=b_boot * n).reshape(b_boot, n).astype(float)


def _pairs_group_stats(q, counts, n):
    """Centered-studentized column statistics for whole-row resamples.

    The resample pivot uses Laplace (add-one) shrinkage regardless of the
    reporting pseudo-count: extreme resample counts would otherwise blow up
    the studentized tail.  Centering is at the shrunk observed estimate,
    which is the exact conditional expectation of the resample estimator.
    """
    qf = q.astype(float)
    est = (counts @ qf + BOOT_PSEUDO_COUNT) / (n + 2.0 * BOOT_PSEUDO_COUNT)
    center = (qf.sum(axis=0) + BOOT_PSEUDO_COUNT) / (n + 2.0 * BOOT_PSEUDO_COUNT)
    se = np.sqrt(est * (1.0 - est) / n)
    return (est - center) / se


def decide_pairs_bootstrap(
    data: StudyData,
    summary: AccuracySummary,
    hyp: HypothesisSpec,
    method: MethodSpec,
    return_stats: bool = False,
):
    """Pairs bootstrap: resample whole subject rows within each group.

    Rows are kept intact across all m tests, so the cross-test correlation
    structure is replicated.  Resample estimates are shrunk exactly like the
    observed ones and centered at the observed shrunk estimates.  P-values
    use the (k + 1) / (B + 1) convention.
    """
    b = method.b_boot
    rng = make_rng(method.seed)
    counts1 = _resample_counts(rng, data.n1, b)
    counts0 = _resample_counts(rng, data.n0, b)
    z_se_star = _pairs_group_stats(_canonical_rows(data.q1), counts1, data.n1)
    z_sp_star = _pairs_group_stats(_canonical_rows(data.q0), counts0, data.n0)
    return _finish_bootstrap(summary, hyp, method, z_se_star, z_sp_star, return_stats)


def _wild_weights(rng, shape, kind: WildWeights) -> np.ndarray:
    if kind is WildWeights.RADEMACHER:
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    # Mammen two-point: mean 0, variance 1, third moment 1.
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    p_low = (math.sqrt(5.0) + 1.0) / (2.0 * math.sqrt(5.0))
    u = rng.random(shape)
    return np.where(u < p_low, 1.0 - golden, golden)


def _wild_group_stats(q, weights, n):
    """Centered-studentized column statistics for shared-weight perturbations.

    Pseudo-responses are ``qbar + (q - qbar) * w_i`` with one weight per
    subject and pseudo-estimates their column means, centered at ``qbar``
    (their exact conditional expectation).  The variance plugs the clipped
    pseudo-estimate into the binomial formula ``p (1 - p) / n``: the plug-in
    tracks how the real Wald denominator co-moves with the estimate, which
    the flat sample variance of the perturbed column misses.  Pseudo-columns
    with no dispersion produce a zero statistic.
    """
    qf = q.astype(float)
    qbar = qf.mean(axis=0)
    dev = (weights @ (qf - qbar)) / n
    lo = BOOT_PSEUDO_COUNT / (n + 2.0 * BOOT_PSEUDO_COUNT)
    est = np.clip(qbar + dev, lo, 1.0 - lo)
    se = np.sqrt(est * (1.0 - est) / n)
    return dev / se


def decide_wild_bootstrap(
    data: StudyData,
    summary: AccuracySummary,
    hyp: HypothesisSpec,
    method: MethodSpec,
    return_stats: bool = False,
):
    """Wild bootstrap: perturb centered responses by shared per-subject weights.

    Redraws are not necessarily binary; estimates are pseudo-response column
    means centered at the observed column means.  Weight distribution is
    Rademacher by default, Mammen's two-point as an option.
    """
    b = method.b_boot
    rng = make_rng(method.seed)
    q1 = _canonical_rows(data.q1)
    q0 = _canonical_rows(data.q0)
    w1 = _wild_weights(rng, (b, data.n1), method.wild_weights)
    w0 = _wild_weights(rng, (b, data.n0), method.wild_weights)
    z_se_star = _wild_group_stats(q1, w1, data.n1)
    z_sp_star = _wild_group_stats(q0, w0, data.n0)
    return _finish_bootstrap(summary, hyp, method, z_se_star, z_sp_star, return_stats)


def _finish_bootstrap(summary, hyp, method, z_se_star, z_sp_star, return_stats):
    t_comp, t_conf = _calibration_stats(z_se_star, z_sp_star, summary, method.calibration)
    b = t_comp.size
    c_comp = empirical_quantile(t_comp, 1.0 - hyp.alpha)
    c_conf = empirical_quantile(t_conf, 1.0 - hyp.alpha)
    min_z = summary.min_z
    p_adj = np.array([(np.sum(t_comp >= z) + 1.0) / (b + 1.0) for z in min_z])
    result = _finish(summary, c_comp, c_conf, p_adj, method)
    if return_stats:
        return result, {"t_comparison": t_comp, "t_confidence": t_conf}
    return result


def apply_method(
    data: StudyData,
    summary: AccuracySummary,
    hyp: HypothesisSpec,
    method: MethodSpec,
) -> ProcedureResult:
    """Dispatch a MethodSpec to its procedure."""
    if method.kind is MethodKind.NONE:
        return decide_none(summary, hyp, method)
    if method.kind is MethodKind.BONFERRONI:
        return decide_bonferroni(summary, hyp, method)
    if method.kind is MethodKind.MAXT:
        return decide_maxt(summary, hyp, method)
    if method.kind is MethodKind.PAIRS_BOOT:
        return decide_pairs_bootstrap(data, summary, hyp, method)
    if method.kind is MethodKind.WILD_BOOT:
        return decide_wild_bootstrap(data, summary, hyp, method)
    raise ValueError(f"unknown method kind: {method.kind}")


def with_rep_seed(method: MethodSpec, seed: int) -> MethodSpec:
    """Copy of ``method`` with a different seed (per-repetition derivation)."""
    return replace(method, seed=seed)
