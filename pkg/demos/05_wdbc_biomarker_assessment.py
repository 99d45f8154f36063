"""Breast-cancer biomarker assessment end to end.

Materializes the UCI WDBC file from scikit-learn's bundled copy, ingests
the three morphology features into 15 threshold-based candidate tests and
runs the pairs-bootstrap analysis against Se > 0.9, Sp > 0.7.  The maximal
cell-nucleus area thresholded at 700 is the only candidate whose comparison
region lies entirely inside the region of interest.

Requires scikit-learn (only to materialize the dataset offline).
"""

import csv
import tempfile
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer

from coprimary import (
    HypothesisSpec,
    MethodKind,
    MethodSpec,
    RegionKind,
    StudyData,
    build_regions,
    decide_pairs_bootstrap,
    summarize,
    validate_study,
)
from coprimary.cli import WdbcIngestSpec, ingest_wdbc, read_wdbc

# materialize the UCI wdbc.data layout (id, diagnosis, 30 features)
raw = load_breast_cancer()
work = Path(tempfile.mkdtemp())
wdbc_path = work / "wdbc.data"
with open(wdbc_path, "w", newline="") as fh:
    writer = csv.writer(fh)
    for i, (row, target) in enumerate(zip(raw.data, raw.target)):
        writer.writerow([842000 + i, "M" if target == 0 else "B"] + [repr(float(v)) for v in row])
print(f"wrote {wdbc_path}")

labels, matrix = read_wdbc(wdbc_path)
names, labels, predictions = ingest_wdbc(WdbcIngestSpec(), labels, matrix)
print(f"ingested {labels.size} subjects ({labels.sum()} cases) into {len(names)} candidates")

data = validate_study(
    StudyData(q1=predictions[labels == 1], q0=1 - predictions[labels == 0],
              test_names=tuple(names))
)
hyp = HypothesisSpec(se0=0.9, sp0=0.7, alpha=0.025)
summary = summarize(data, hyp)
result = decide_pairs_bootstrap(
    data, summary, hyp, MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=2000, seed=1729)
)
regions = build_regions(summary, result, hyp, RegionKind.COMPARISON)

print(f"\npairs bootstrap critical value: {result.c_comparison:.3f}\n")
print(f"{'candidate':28s} {'Se^':>7s} {'Sp^':>7s} {'lower Se':>9s} {'lower Sp':>9s}  decision")
for j in np.argsort(-summary.min_z):
    flag = "REJECT null" if result.reject[j] else ""
    print(
        f"{names[j]:28s} {summary.se_hat[j]:7.3f} {summary.sp_hat[j]:7.3f} "
        f"{regions.lower_se[j]:9.3f} {regions.lower_sp[j]:9.3f}  {flag}"
    )
