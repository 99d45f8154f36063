import csv

import numpy as np
import pytest

from coprimary import StudyData, make_rng, validate_study


def bernoulli_study(seed, n1, n0, p1, p0, m=None):
    """Independent Bernoulli correctness matrices, one success prob per column."""
    p1 = np.atleast_1d(np.asarray(p1, dtype=float))
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    if m is not None:
        p1 = np.resize(p1, m)
        p0 = np.resize(p0, m)
    rng = make_rng(seed)
    q1 = (rng.random((n1, p1.size)) < p1).astype(np.uint8)
    q0 = (rng.random((n0, p0.size)) < p0).astype(np.uint8)
    return validate_study(StudyData(q1=q1, q0=q0))


@pytest.fixture(scope="session")
def wdbc_file(tmp_path_factory):
    """UCI-layout wdbc.data file (id, diagnosis M/B, 30 features) from sklearn's copy."""
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    d = sklearn_datasets.load_breast_cancer()
    path = tmp_path_factory.mktemp("wdbc") / "wdbc.data"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, (row, target) in enumerate(zip(d.data, d.target)):
            diagnosis = "M" if target == 0 else "B"
            writer.writerow([842000 + i, diagnosis] + [repr(float(v)) for v in row])
    return path
