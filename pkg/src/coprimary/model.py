"""Domain types for diagnostic accuracy studies and hypothesis truth evaluation.

A study compares m candidate tests against a reference standard in two
independent groups.  ``q1``/``q0`` hold per-subject correctness indicators
(1 iff the test classified the subject correctly), so column means are the
empirical sensitivities and specificities.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class ValidationError(ValueError):
    """Study data or configuration violates its invariants."""


@dataclass(frozen=True)
class HypothesisSpec:
    """Minimal acceptance criteria and one-sided significance level.

    The null for test j is ``Se_j <= se0 or Sp_j <= sp0``; rejection claims
    both endpoints strictly exceed their thresholds.
    """

    se0: float
    sp0: float
    alpha: float = 0.025

    def __post_init__(self):
        if not 0.0 < self.se0 < 1.0:
            raise ValidationError(f"se0 must lie in (0, 1), got {self.se0}")
        if not 0.0 < self.sp0 < 1.0:
            raise ValidationError(f"sp0 must lie in (0, 1), got {self.sp0}")
        if not 0.0 < self.alpha < 0.5:
            raise ValidationError(f"alpha must lie in (0, 0.5), got {self.alpha}")


@dataclass(frozen=True)
class TruthSet:
    """True per-test sensitivities and specificities (generator ground truth)."""

    se_true: np.ndarray
    sp_true: np.ndarray

    def __post_init__(self):
        se = np.atleast_1d(np.asarray(self.se_true, dtype=float))
        sp = np.atleast_1d(np.asarray(self.sp_true, dtype=float))
        if se.shape != sp.shape or se.ndim != 1:
            raise ValidationError(
                f"se_true and sp_true must be equal-length vectors, got shapes "
                f"{se.shape} and {sp.shape}"
            )
        for name, vec in (("se_true", se), ("sp_true", sp)):
            if np.any(vec < 0.0) or np.any(vec > 1.0):
                raise ValidationError(f"{name} entries must lie in [0, 1]")
        se.flags.writeable = False
        sp.flags.writeable = False
        object.__setattr__(self, "se_true", se)
        object.__setattr__(self, "sp_true", sp)

    @property
    def m(self) -> int:
        return self.se_true.size


@dataclass(frozen=True)
class StudyData:
    """Binary correctness matrices for the diseased (q1) and non-diseased (q0) group.

    ``q1`` is n1 x m, ``q0`` is n0 x m; entry 1 means test j classified
    subject i correctly.  Matrices must be complete (within-subject design,
    no missing cells).
    """

    q1: np.ndarray
    q0: np.ndarray
    test_names: tuple = field(default=None)

    def __post_init__(self):
        q1 = np.atleast_2d(np.asarray(self.q1))
        q0 = np.atleast_2d(np.asarray(self.q0))
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q0", q0)
        if self.test_names is None and q1.ndim == 2:
            object.__setattr__(
                self, "test_names", tuple(f"test_{j + 1}" for j in range(q1.shape[1]))
            )
        elif self.test_names is not None:
            object.__setattr__(self, "test_names", tuple(str(t) for t in self.test_names))

    @property
    def n1(self) -> int:
        return self.q1.shape[0]

    @property
    def n0(self) -> int:
        return self.q0.shape[0]

    @property
    def m(self) -> int:
        return self.q1.shape[1]


def _check_binary(name: str, q: np.ndarray) -> list:
    bad = []
    arr = np.asarray(q)
    if not np.issubdtype(arr.dtype, np.number):
        raise ValidationError(f"{name} must be numeric, got dtype {arr.dtype}")
    mask = ~np.isin(arr, (0, 1))
    if np.any(mask):
        for i, j in zip(*np.nonzero(mask)):
            bad.append((name, int(i), int(j), arr[i, j]))
            if len(bad) >= 10:
                break
    return bad


def constant_columns(data: StudyData) -> tuple:
    """Indices of constant (all-0 or all-1) columns, per group: (q1 list, q0 list)."""
    const1 = [j for j in range(data.m) if np.all(data.q1[:, j] == data.q1[0, j])]
    const0 = [j for j in range(data.m) if np.all(data.q0[:, j] == data.q0[0, j])]
    return const1, const0


def validate_study(data: StudyData) -> StudyData:
    """Verify StudyData invariants; return the data with uint8 matrices.

    Constant columns are legal (degenerate tests occur by design in
    least-favorable configurations) and are reported through the module
    logger as diagnostics; use :func:`constant_columns` for programmatic
    access.

    Raises
    ------
    ValidationError
        Non-binary entries (offending positions listed), mismatched column
        counts, or empty groups.
    """
    q1 = np.atleast_2d(np.asarray(data.q1))
    q0 = np.atleast_2d(np.asarray(data.q0))
    if q1.ndim != 2 or q0.ndim != 2:
        raise ValidationError(
            f"correctness matrices must be 2-dimensional, got q1 ndim {q1.ndim}, q0 ndim {q0.ndim}"
        )
    if q1.shape[0] < 1 or q0.shape[0] < 1:
        raise ValidationError(f"both groups need >= 1 subjects, got n1={q1.shape[0]}, n0={q0.shape[0]}")
    if q1.shape[1] != q0.shape[1]:
        raise ValidationError(
            f"q1 and q0 must share the test count, got m={q1.shape[1]} vs m={q0.shape[1]}"
        )
    if q1.shape[1] < 1:
        raise ValidationError("at least one test column is required")
    bad = _check_binary("q1", q1) + _check_binary("q0", q0)
    if bad:
        spots = ", ".join(f"{g}[{i}, {j}]={v}" for g, i, j, v in bad)
        raise ValidationError(f"non-binary entries: {spots}")
    if data.test_names is not None and len(data.test_names) != q1.shape[1]:
        raise ValidationError(
            f"{len(data.test_names)} test names for {q1.shape[1]} test columns"
        )
    checked = StudyData(
        q1=q1.astype(np.uint8), q0=q0.astype(np.uint8), test_names=data.test_names
    )
    const1, const0 = constant_columns(checked)
    if const1 or const0:
        logger.info(
            "constant columns detected: q1 %s, q0 %s (degenerate coordinates)",
            const1, const0,
        )
    return checked


def null_is_true(truth: TruthSet, hyp: HypothesisSpec, j: int) -> bool:
    """Whether the combined null holds for test j (0-based index).

    The null is the union ``Se_j <= se0 or Sp_j <= sp0``; parameters exactly
    at a threshold belong to the null.
    """
    if not 0 <= j < truth.m:
        raise IndexError(f"test index {j} out of range for m={truth.m}")
    return bool(truth.se_true[j] <= hyp.se0 or truth.sp_true[j] <= hyp.sp0)


def null_truth_vector(truth: TruthSet, hyp: HypothesisSpec) -> np.ndarray:
    """Boolean vector: entry j is True iff the combined null holds for test j."""
    return (truth.se_true <= hyp.se0) | (truth.sp_true <= hyp.sp0)
