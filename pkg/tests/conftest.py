from pathlib import Path

import numpy as np
import pytest

from catstats import CategoricalSample, ContingencyTable

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

CHRONICITY_COUNTS = [
    [12, 9, 4],
    [37, 20, 29],
    [40, 58, 44],
    [53, 55, 66],
]


@pytest.fixture
def chronicity() -> ContingencyTable:
    return ContingencyTable.from_counts(CHRONICITY_COUNTS)


@pytest.fixture
def chronicity_csv() -> Path:
    return DATA_DIR / "chronicity.csv"


def sample_from_table(table: ContingencyTable, rng=None) -> CategoricalSample:
    """Expand a table into per-observation labels (optionally shuffled)."""
    xs, ys = [], []
    I, J = table.shape
    for i in range(I):
        for j in range(J):
            c = int(table.counts[i, j])
            xs.extend([i + 1] * c)
            ys.extend([j + 1] * c)
    x = np.asarray(xs, dtype=np.int64)
    y = np.asarray(ys, dtype=np.int64)
    if rng is not None:
        order = rng.permutation(len(x))
        x, y = x[order], y[order]
    return CategoricalSample(labels_x=x, labels_y=y, n=len(x))


def random_paired_sample(rng, max_n=60, max_levels=5) -> tuple[CategoricalSample, int, int]:
    n = int(rng.integers(1, max_n + 1))
    I = int(rng.integers(2, max_levels + 1))
    J = int(rng.integers(2, max_levels + 1))
    x = rng.integers(1, I + 1, size=n)
    y = rng.integers(1, J + 1, size=n)
    return CategoricalSample(labels_x=x, labels_y=y, n=n), I, J
