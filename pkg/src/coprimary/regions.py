"""One-sided comparison and confidence regions with region-of-interest decisions.

Regions are per-test rectangles ``(lower_se, 1] x (lower_sp, 1]`` with
``lower = estimate - c * SE``.  Comparison regions use the comparison
critical value and are exactly dual to the test decisions; confidence
regions use the larger confidence critical value and are more conservative.
Decisions are always evaluated on the z scale; the probability-scale bounds
(clamped to [0, 1]) are derived afterwards for reporting only.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np

from .estimation import AccuracySummary
from .model import HypothesisSpec
from .procedures import ProcedureResult


class RegionKind(enum.Enum):
    COMPARISON = "comparison"
    CONFIDENCE = "confidence"


@dataclass(frozen=True)
class RegionSet:
    """Per-test lower bounds plus the rejection decisions they encode.

    ``z_se``/``z_sp`` and the critical value ``c`` are retained so that
    containment checks run on the z scale, immune to probability-scale
    rounding and clamping.
    """

    kind: RegionKind
    lower_se: np.ndarray
    lower_sp: np.ndarray
    reject: np.ndarray
    hyp: HypothesisSpec
    c: float
    z_se: np.ndarray
    z_sp: np.ndarray
    method: str
    test_names: tuple

    @property
    def m(self) -> int:
        return self.lower_se.size


def build_regions(
    summary: AccuracySummary,
    result: ProcedureResult,
    hyp: HypothesisSpec,
    kind: RegionKind,
) -> RegionSet:
    """Regions from a procedure result: comparison or confidence rectangles.

    Comparison regions carry the procedure's rejection vector (exact
    duality); confidence-region decisions are recomputed by containment and
    are never less conservative.
    """
    c = result.c_comparison if kind is RegionKind.COMPARISON else result.c_confidence
    lower_se = np.clip(summary.se_hat - c * summary.se_se, 0.0, 1.0)
    lower_sp = np.clip(summary.sp_hat - c * summary.sp_se, 0.0, 1.0)
    if kind is RegionKind.COMPARISON:
        reject = result.reject.copy()
    else:
        reject = summary.min_z > c
    for arr in (lower_se, lower_sp, reject):
        arr.flags.writeable = False
    return RegionSet(
        kind=kind,
        lower_se=lower_se,
        lower_sp=lower_sp,
        reject=reject,
        hyp=hyp,
        c=float(c),
        z_se=summary.z_se,
        z_sp=summary.z_sp,
        method=result.method.label,
        test_names=summary.test_names,
    )


def region_contained(regions: RegionSet, j: int) -> bool:
    """Whether region j lies strictly inside the region of interest.

    True iff both lower bounds strictly exceed their thresholds, decided on
    the z scale as ``min(z_se, z_sp) > c`` to avoid floating-point ties on
    the probability scale.  Bounds exactly at a threshold do not qualify
    (the region of interest is open).
    """
    if not 0 <= j < regions.m:
        raise IndexError(f"test index {j} out of range for m={regions.m}")
    return bool(min(regions.z_se[j], regions.z_sp[j]) > regions.c)


def export_region_plot_data(regions: RegionSet, summary: AccuracySummary) -> list:
    """Plot-ready rows: one dict per test with estimates, bounds and decision."""
    rows = []
    for j in range(regions.m):
        rows.append(
            {
                "test": regions.test_names[j],
                "se_hat": float(summary.se_hat[j]),
                "sp_hat": float(summary.sp_hat[j]),
                "lower_se": float(regions.lower_se[j]),
                "lower_sp": float(regions.lower_sp[j]),
                "reject": bool(regions.reject[j]),
            }
        )
    return rows


def write_region_csv(regions: RegionSet, summary: AccuracySummary, fh) -> None:
    """Write the plot-data CSV with metadata header comments.

    Schema: ``test,se_hat,sp_hat,lower_se,lower_sp,reject`` after a comment
    line carrying the thresholds, alpha, method and region kind.
    """
    hyp = regions.hyp
    fh.write(
        f"# se0={hyp.se0:g}, sp0={hyp.sp0:g}, alpha={hyp.alpha:g}, "
        f"method={regions.method}, kind={regions.kind.value}\n"
    )
    fh.write("test,se_hat,sp_hat,lower_se,lower_sp,reject\n")
    for row in export_region_plot_data(regions, summary):
        fh.write(
            f"{row['test']},{row['se_hat']:.6f},{row['sp_hat']:.6f},"
            f"{row['lower_se']:.6f},{row['lower_sp']:.6f},{int(row['reject'])}\n"
        )


def region_csv_text(regions: RegionSet, summary: AccuracySummary) -> str:
    """The plot-data CSV as a string."""
    buf = io.StringIO()
    write_region_csv(regions, summary, buf)
    return buf.getvalue()
