"""Shrunk accuracy estimates, Wald statistics and correlation matrices.

Point estimates are shrunk toward 0.5 with pseudo-counts so that every
estimate lies strictly inside (0, 1) and no variance estimate degenerates.
The default pseudo-count of 0.5 per tail reproduces the point estimates
reported for the reference analyses; it is configurable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HypothesisSpec, StudyData
from .numerics import CorrelationMatrix

DEFAULT_PSEUDO_COUNT = 0.5


@dataclass(frozen=True)
class AccuracySummary:
    """Per-test accuracy estimates, standard errors and Wald statistics.

    ``r_hat`` is the 2m x 2m block-diagonal correlation matrix: coordinates
    0..m-1 are the sensitivity block (diseased group), m..2m-1 the
    specificity block (non-diseased group).  Cross-group blocks are exactly
    zero because the groups are independent samples.  ``se_degenerate`` and
    ``sp_degenerate`` flag constant data columns, whose estimators carry no
    sampling variability.
    """

    se_hat: np.ndarray
    sp_hat: np.ndarray
    se_se: np.ndarray
    sp_se: np.ndarray
    z_se: np.ndarray
    z_sp: np.ndarray
    r_hat: CorrelationMatrix
    se_degenerate: np.ndarray
    sp_degenerate: np.ndarray
    n1: int
    n0: int
    test_names: tuple

    @property
    def m(self) -> int:
        return self.se_hat.size

    @property
    def min_z(self) -> np.ndarray:
        """Per-test co-primary statistic min(z_se, z_sp)."""
        return np.minimum(self.z_se, self.z_sp)


def shrink_estimate(successes: int, n: int, pseudo_count: float = DEFAULT_PSEUDO_COUNT) -> float:
    """Proportion estimate shrunk toward 0.5: (x + c) / (n + 2c).

    Always strictly inside (0, 1), keeping the plug-in variance positive
    even for all-0 or all-n counts.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    if pseudo_count <= 0:
        raise ValueError(f"pseudo_count must be positive, got {pseudo_count}")
    return (successes + pseudo_count) / (n + 2.0 * pseudo_count)


def _binary_correlation(q: np.ndarray) -> np.ndarray:
    """Pearson correlation of binary columns; undefined entries become 0."""
    m = q.shape[1]
    if q.shape[0] < 2:
        return np.eye(m)
    centered = q.astype(float) - q.mean(axis=0)
    cov = centered.T @ centered
    sd = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    corr[~np.isfinite(corr)] = 0.0
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return 0.5 * (corr + corr.T)


def summarize(
    data: StudyData,
    hyp: HypothesisSpec,
    pseudo_count: float = DEFAULT_PSEUDO_COUNT,
) -> AccuracySummary:
    """Shrunk estimates, standard errors, Wald statistics and correlations.

    Expects validated StudyData.  Wald statistics are
    ``(estimate - threshold) / sqrt(estimate (1 - estimate) / n_group)``
    with the shrunk estimate plugged into the variance.
    """
    n1, n0, m = data.n1, data.n0, data.m
    s1 = data.q1.sum(axis=0, dtype=np.int64)
    s0 = data.q0.sum(axis=0, dtype=np.int64)

    se_hat = (s1 + pseudo_count) / (n1 + 2.0 * pseudo_count)
    sp_hat = (s0 + pseudo_count) / (n0 + 2.0 * pseudo_count)
    se_se = np.sqrt(se_hat * (1.0 - se_hat) / n1)
    sp_se = np.sqrt(sp_hat * (1.0 - sp_hat) / n0)
    z_se = (se_hat - hyp.se0) / se_se
    z_sp = (sp_hat - hyp.sp0) / sp_se

    r = np.zeros((2 * m, 2 * m))
    r[:m, :m] = _binary_correlation(data.q1)
    r[m:, m:] = _binary_correlation(data.q0)

    se_degenerate = np.array([np.all(data.q1[:, j] == data.q1[0, j]) for j in range(m)])
    sp_degenerate = np.array([np.all(data.q0[:, j] == data.q0[0, j]) for j in range(m)])

    for arr in (se_hat, sp_hat, se_se, sp_se, z_se, z_sp, se_degenerate, sp_degenerate):
        arr.flags.writeable = False

    return AccuracySummary(
        se_hat=se_hat,
        sp_hat=sp_hat,
        se_se=se_se,
        sp_se=sp_se,
        z_se=z_se,
        z_sp=z_sp,
        r_hat=CorrelationMatrix(r),
        se_degenerate=se_degenerate,
        sp_degenerate=sp_degenerate,
        n1=n1,
        n0=n0,
        test_names=data.test_names,
    )
