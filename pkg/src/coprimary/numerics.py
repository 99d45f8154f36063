"""Probability and linear-algebra kernel.

Univariate and bivariate normal distribution functions, regularized
Cholesky factorization, multivariate normal sampling, Monte-Carlo
calibrated max-type quantiles and inverse-ECDF empirical quantiles.

Reproducibility contract: every stochastic routine takes an explicit
64-bit seed and uses the counter-based Philox generator
(``numpy.random.Philox``).  Identical seeds give bit-identical output on
any platform with the same numpy/BLAS stack.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr, ndtri


class SingularMatrixError(np.linalg.LinAlgError):
    """Correlation matrix could not be factored even after regularization."""


# ---------------------------------------------------------------------------
# RNG plumbing
# ---------------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for the given 64-bit seed."""
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(base_seed: int, *parts: int) -> int:
    """Derive a child seed from a base seed and integer context parts.

    Uses ``numpy.random.SeedSequence`` entropy mixing, so children are
    statistically independent and adding new parts never perturbs seeds
    derived from other parts.
    """
    entropy = [int(base_seed)] + [int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Univariate normal
# ---------------------------------------------------------------------------

def std_normal_cdf(x):
    """Standard normal CDF, accurate to double precision.

    Accepts scalars or arrays; scalars come back as ``float``.
    """
    out = ndtr(x)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def std_normal_quantile(p):
    """Inverse standard normal CDF for ``p`` in the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"quantile level must lie strictly in (0, 1), got {p}")
    out = ndtri(arr)
    return float(out) if np.ndim(p) == 0 else out


# ---------------------------------------------------------------------------
# Bivariate normal CDF (Drezner-Wesolowsky / Genz)
# ---------------------------------------------------------------------------

_GL_NODES = {n: leggauss(n) for n in (6, 12, 20)}


def _bvn_upper(h: float, k: float, r: float) -> float:
    """P(X > h, Y > k) for standard bivariate normal with correlation r.

    Drezner-Wesolowsky Gauss-Legendre integration with Genz's tail
    transformation for |r| >= 0.925; absolute accuracy ~1e-14, far below
    the 1e-7 contract of :func:`bivariate_normal_cdf`.
    """
    if abs(r) < 0.3:
        nodes, weights = _GL_NODES[6]
    elif abs(r) < 0.75:
        nodes, weights = _GL_NODES[12]
    else:
        nodes, weights = _GL_NODES[20]

    tp = 2.0 * math.pi
    hk = h * k
    bvn = 0.0

    if abs(r) < 0.925:
        if r != 0.0:
            hs = 0.5 * (h * h + k * k)
            asr = 0.5 * math.asin(r)
            sn = np.sin(asr * (1.0 + nodes))
            bvn = float(np.dot(weights, np.exp((sn * hk - hs) / (1.0 - sn * sn))))
            bvn *= asr / tp
        return bvn + float(ndtr(-h)) * float(ndtr(-k))

    if r < 0.0:
        k = -k
        hk = -hk
    if abs(r) < 1.0:
        ass = (1.0 - r) * (1.0 + r)
        a = math.sqrt(ass)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        asr = -0.5 * (bs / ass + hk)
        if asr > -100.0:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - ass) * (1.0 - d * bs) / 3.0 + c * d * ass * ass)
        if hk > -100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(tp) * float(ndtr(-b / a))
            bvn -= math.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        a *= 0.5
        xs = (a * (1.0 + nodes)) ** 2
        asr_v = -0.5 * (bs / xs + hk)
        live = asr_v > -100.0
        if np.any(live):
            xs = xs[live]
            rs = np.sqrt(1.0 - xs)
            sp_v = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
            ep = np.exp(-0.5 * hk * xs / (1.0 + rs) ** 2) / rs
            bvn = (a * float(np.dot(np.exp(asr_v[live]) * (sp_v - ep), weights[live])) - bvn) / tp
        else:
            bvn = -bvn / tp
    if r > 0.0:
        return bvn + float(ndtr(-max(h, k)))
    if h >= k:
        return -bvn
    if h < 0.0:
        lower = float(ndtr(k)) - float(ndtr(h))
    else:
        lower = float(ndtr(-h)) - float(ndtr(-k))
    return lower - bvn


def bivariate_normal_cdf(x: float, y: float, rho: float) -> float:
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 1.0:
        return float(ndtr(min(x, y)))
    if rho == -1.0:
        return max(0.0, float(ndtr(x)) + float(ndtr(y)) - 1.0)
    p = _bvn_upper(-x, -y, rho)
    return min(1.0, max(0.0, p))


# ---------------------------------------------------------------------------
# Correlation matrices and factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Square correlation matrix: symmetric, unit diagonal, entries in [-1, 1].

    Positive semi-definiteness is not required at construction; it is
    enforced downstream by :func:`regularize_and_factor`.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"correlation matrix must be square, got shape {arr.shape}")
        if not np.allclose(arr, arr.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(arr), 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        if np.any(np.abs(arr) > 1.0 + 1e-12):
            raise ValueError("correlation entries must lie in [-1, 1]")
        arr = np.clip(arr, -1.0, 1.0)
        np.fill_diagonal(arr, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "CorrelationMatrix":
        return cls(np.eye(dim))

    @classmethod
    def equicorrelated(cls, dim: int, rho: float) -> "CorrelationMatrix":
        arr = np.full((dim, dim), float(rho))
        np.fill_diagonal(arr, 1.0)
        return cls(arr)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor of a regularized correlation matrix."""

    lower: np.ndarray
    eps: float

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def regularize_and_factor(R: CorrelationMatrix, eps0: float = 1e-4) -> CholeskyFactor:
    """Cholesky factor of ``(1 - eps) R + eps I`` for the smallest workable eps.

    Candidate eps values are ``eps0, 10*eps0, ...`` capped at 0.1.  The eps
    actually used is recorded on the returned factor.

    Raises
    ------
    SingularMatrixError
        If no candidate eps <= 0.1 yields a positive-definite matrix.
    """
    if not 0.0 < eps0 <= 0.1:
        raise ValueError(f"eps0 must lie in (0, 0.1], got {eps0}")
    candidates = []
    eps = float(eps0)
    while eps < 0.1:
        candidates.append(eps)
        eps *= 10.0
    candidates.append(0.1)
    arr = R.entries
    eye = np.eye(R.dim)
    for eps in candidates:
        try:
            lower = np.linalg.cholesky((1.0 - eps) * arr + eps * eye)
        except np.linalg.LinAlgError:
            continue
        lower.flags.writeable = False
        return CholeskyFactor(lower=lower, eps=eps)
    raise SingularMatrixError(
        f"correlation matrix of dim {R.dim} not positive definite for any "
        f"regularization eps up to 0.1"
    )


def mvn_sample(factor: CholeskyFactor, n_draws: int, seed: int) -> np.ndarray:
    """Draw ``n_draws`` rows from N(0, L L^T) as ``Z @ L.T``; deterministic per seed."""
    if n_draws < 1:
        raise ValueError(f"n_draws must be positive, got {n_draws}")
    rng = make_rng(seed)
    z = rng.standard_normal((n_draws, factor.dim))
    return z @ factor.lower.T


# ---------------------------------------------------------------------------
# Calibrated quantiles
# ---------------------------------------------------------------------------

class StatisticKind(enum.Enum):
    """Max-type statistic evaluated on multivariate normal draws."""

    MAX_ALL = "max_all"
    MAX_MIN_PAIRS = "max_min_pairs"


@dataclass(frozen=True)
class QuantileRequest:
    """Monte-Carlo quantile request for a max-type statistic.

    ``MAX_MIN_PAIRS`` treats consecutive coordinates (2j, 2j+1) as the
    per-test pair and takes the max over tests of the pairwise minima; it
    requires an even dimension.
    """

    level: float
    statistic_kind: StatisticKind = StatisticKind.MAX_ALL
    mc_draws: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.mc_draws < 10_000:
            raise ValueError(f"mc_draws must be >= 10000, got {self.mc_draws}")


def max_type_statistics(draws: np.ndarray, kind: StatisticKind) -> np.ndarray:
    """Reduce MVN draws (n_draws x dim) to the requested max-type statistic."""
    if kind is StatisticKind.MAX_ALL:
        return draws.max(axis=1)
    n, dim = draws.shape
    if dim % 2 != 0:
        raise ValueError(f"MAX_MIN_PAIRS requires even dimension, got {dim}")
    return draws.reshape(n, dim // 2, 2).min(axis=2).max(axis=1)


def calibrated_quantile(R: CorrelationMatrix, req: QuantileRequest) -> float:
    """Monte-Carlo ``req.level`` quantile of a max-type statistic under N(0, R)."""
    factor = regularize_and_factor(R)
    draws = mvn_sample(factor, req.mc_draws, req.seed)
    stats = max_type_statistics(draws, req.statistic_kind)
    return empirical_quantile(stats, req.level)


def empirical_quantile(values, level: float) -> float:
    """Type-1 (inverse ECDF) empirical quantile.

    Sorts ascending and returns the order statistic at 1-based index
    ``ceil(level * n)``, clamped to [1, n].  Never interpolates.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    idx = min(max(math.ceil(level * arr.size), 1), arr.size)
    return float(np.sort(arr)[idx - 1])
