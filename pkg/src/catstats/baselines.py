"""Classical competitor tests and the fixed-marginals table sampler.

Pearson's chi-squared, the G-test (likelihood ratio), Fisher's exact test
for 2 x 2 tables with a Monte Carlo version for larger shapes, and
permutation tests driven by Patefield-style sampling of random tables
with the observed marginals (the conditional multivariate hypergeometric
null).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import InputError
from .quadform import chisq_upper_tail
from .tables import ContingencyTable, expected_counts

__all__ = [
    "RngStream",
    "TestOutcome",
    "pearson_independence_test",
    "g_test",
    "patefield_sample",
    "permutation_test",
    "fisher_exact_2x2",
    "fisher_mc",
]

# Relative slack when comparing table probabilities for two-sided Fisher
# rules, so mathematically tied tables are not split by rounding.
_TIE_SLACK = 1e-7


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream: same seed and algorithm, same draws."""

    seed: int
    algorithm: str = "pcg64"

    def generator(self) -> np.random.Generator:
        if self.algorithm != "pcg64":
            raise InputError(f"unknown RNG algorithm {self.algorithm!r}")
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def substream(self, *key: int) -> np.random.Generator:
        """Independent child stream derived from the seed and an index key."""
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(key))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class TestOutcome:
    """A test statistic, its p-value, and how the p-value was calibrated."""

    statistic: float
    p_value: float
    method: str
    df: int | None = None
    B: int | None = None
    seed: int | None = None
    mc_se: float | None = None


def _as_generator(rng) -> tuple[np.random.Generator, int | None]:
    """Normalise seed-like inputs; returns the generator and the seed if known."""
    if rng is None:
        return np.random.default_rng(), None
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, RngStream):
        return rng.generator(), rng.seed
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator(), int(rng)
    raise InputError(f"cannot interpret {rng!r} as a random source")


def pearson_independence_test(table: ContingencyTable) -> TestOutcome:
    """Pearson's chi-squared test with (I-1)(J-1) degrees of freedom."""
    I, J = table.shape
    if I < 2 or J < 2:
        raise InputError("independence testing requires at least a 2 x 2 table")
    expected = expected_counts(table)
    if expected.min() <= 0.0:
        raise InputError(
            "a zero expected cell count makes the chi-squared reference "
            "distribution invalid; use the permutation variant instead"
        )
    diff = table.counts - expected
    statistic = float((diff * diff / expected).sum())
    df = (I - 1) * (J - 1)
    return TestOutcome(statistic, chisq_upper_tail(df, statistic), "pearson", df=df)


def g_test(table: ContingencyTable) -> TestOutcome:
    """Likelihood-ratio (G) test; empty cells contribute zero (0 log 0 = 0)."""
    I, J = table.shape
    if I < 2 or J < 2:
        raise InputError("independence testing requires at least a 2 x 2 table")
    expected = expected_counts(table)
    observed = table.counts
    positive = observed > 0
    if (expected[positive] <= 0.0).any():
        # Impossible when the marginals are consistent; defensive.
        raise InputError("observed count in a cell with zero expected count")
    statistic = 2.0 * float(
        (observed[positive] * np.log(observed[positive] / expected[positive])).sum()
    )
    statistic = max(statistic, 0.0)
    df = (I - 1) * (J - 1)
    return TestOutcome(statistic, chisq_upper_tail(df, statistic), "g", df=df)


def _log_factorials(n: int) -> list[float]:
    """log(k!) for k = 0..n, as a plain list for fast scalar lookup."""
    return gammaln(np.arange(n + 1) + 1.0).tolist()


def _hypergeom_draw(
    population: int, successes: int, draws: int,
    gen: np.random.Generator, lf: list[float],
) -> int:
    """One hypergeometric variate via inverse-CDF scan from the lower end."""
    if draws == 0 or successes == 0:
        return 0
    if successes == population:
        return draws
    if draws == population:
        return successes
    k_min = draws + successes - population
    if k_min < 0:
        k_min = 0
    k_max = draws if draws < successes else successes
    if k_min == k_max:
        return k_min
    failures = population - successes
    log_p = (
        lf[successes] - lf[k_min] - lf[successes - k_min]
        + lf[failures] - lf[draws - k_min] - lf[failures - draws + k_min]
        - lf[population] + lf[draws] + lf[population - draws]
    )
    p = math.exp(log_p)
    u = gen.random()
    k = k_min
    cum = p
    while cum < u and k < k_max:
        p *= (successes - k) * (draws - k) / ((k + 1) * (failures - draws + k + 1))
        k += 1
        cum += p
    return k


def _patefield_counts(
    row_sums: list[int], col_sums: list[int],
    gen: np.random.Generator, lf: list[float],
) -> np.ndarray:
    """Fill a table cell by cell from the conditional hypergeometric laws."""
    I = len(row_sums)
    J = len(col_sums)
    table = np.zeros((I, J), dtype=np.int64)
    col_left = list(col_sums)
    total_left = sum(col_left)
    for i in range(I - 1):
        row_left = row_sums[i]
        pool = total_left
        for j in range(J - 1):
            cj = col_left[j]
            k = _hypergeom_draw(pool, cj, row_left, gen, lf)
            table[i, j] = k
            row_left -= k
            col_left[j] = cj - k
            pool -= cj  # columns before j+1 leave the pool for this row
        table[i, J - 1] = row_left
        col_left[J - 1] -= row_left
        total_left -= row_sums[i]
    for j in range(J):
        table[I - 1, j] = col_left[j]
    return table


def patefield_sample(row_sums, col_sums, rng) -> ContingencyTable:
    """Draw a random table with the given marginals.

    Cells are filled row by row, each drawn from its conditional
    hypergeometric distribution given everything already placed, so the
    output follows the conditional null distribution of tables with those
    marginals.  Probabilities use a precomputed log-factorial lookup of
    size n + 1.
    """
    rows = np.asarray(row_sums, dtype=np.int64)
    cols = np.asarray(col_sums, dtype=np.int64)
    if rows.ndim != 1 or cols.ndim != 1 or rows.size < 1 or cols.size < 1:
        raise InputError("marginals must be nonempty vectors")
    if rows.min() < 0 or cols.min() < 0:
        raise InputError("marginals must be nonnegative")
    n = int(rows.sum())
    if n != int(cols.sum()):
        raise InputError(
            f"row sums total {n} but column sums total {int(cols.sum())}"
        )
    if n < 1:
        raise InputError("at least one observation is required")
    gen, _ = _as_generator(rng)
    lf = _log_factorials(n)
    counts = _patefield_counts(rows.tolist(), cols.tolist(), gen, lf)
    return ContingencyTable.from_counts(counts)


def _check_resampling_marginals(table: ContingencyTable) -> None:
    if (table.row_sums > 0).sum() < 2 or (table.col_sums > 0).sum() < 2:
        raise InputError(
            "degenerate marginals: resampling needs at least two nonempty "
            "rows and columns"
        )


def _resample_statistic(table: ContingencyTable, statistic: str):
    """Statistic as a function of raw counts, with marginals held fixed.

    Cells whose expected count is zero under the fixed marginals are
    identically zero in every resample and contribute nothing.
    """
    expected = expected_counts(table)
    n2 = float(table.n) ** 2
    if statistic == "pearson":
        mask = expected > 0.0
        exp_pos = expected[mask]

        def stat(counts: np.ndarray) -> float:
            diff = counts[mask] - exp_pos
            return float((diff * diff / exp_pos).sum())

    elif statistic == "dcov_v":

        def stat(counts: np.ndarray) -> float:
            diff = counts - expected
            return float((diff * diff).sum()) / n2

    else:
        raise InputError(f"unknown permutation statistic {statistic!r}")
    return stat


def permutation_test(
    table: ContingencyTable, statistic: str = "pearson",
    B: int = 999, rng=None,
) -> TestOutcome:
    """Fixed-marginals permutation test with the add-one p-value convention."""
    if B < 1:
        raise InputError("B must be at least 1")
    _check_resampling_marginals(table)
    stat = _resample_statistic(table, statistic)
    observed = stat(table.counts)
    gen, seed = _as_generator(rng)
    lf = _log_factorials(table.n)
    rows = table.row_sums.tolist()
    cols = table.col_sums.tolist()
    hits = 0
    for _ in range(B):
        counts = _patefield_counts(rows, cols, gen, lf)
        if stat(counts) >= observed:
            hits += 1
    p_value = (1 + hits) / (B + 1)
    return TestOutcome(observed, p_value, f"{statistic}-perm", B=B, seed=seed)


def _table_log_prob(counts: np.ndarray, row_sums, col_sums, n: int,
                    lf_arr: np.ndarray) -> float:
    """Log conditional probability of a table given its marginals."""
    return float(
        lf_arr[row_sums].sum() + lf_arr[col_sums].sum()
        - lf_arr[n] - lf_arr[counts].sum()
    )


def fisher_exact_2x2(table: ContingencyTable) -> TestOutcome:
    """Two-sided Fisher exact test for 2 x 2 tables.

    Sums the hypergeometric probabilities of all tables with the observed
    marginals whose probability does not exceed the observed table's
    (with a small relative slack so floating-point ties stay ties).  The
    reported statistic is the observed table's conditional probability.
    """
    if table.shape != (2, 2):
        raise InputError("fisher_exact_2x2 requires a 2 x 2 table; use fisher_mc")
    r0 = int(table.row_sums[0])
    c0 = int(table.col_sums[0])
    n = table.n
    lf = _log_factorials(n)
    k_min = max(0, r0 + c0 - n)
    k_max = min(r0, c0)

    def log_prob(k: int) -> float:
        return (
            lf[r0] + lf[n - r0] + lf[c0] + lf[n - c0] - lf[n]
            - lf[k] - lf[r0 - k] - lf[c0 - k] - lf[n - r0 - c0 + k]
        )
    probs = np.exp([log_prob(k) for k in range(k_min, k_max + 1)])
    observed = math.exp(log_prob(int(table.counts[0, 0])))
    p_value = float(probs[probs <= observed * (1.0 + _TIE_SLACK)].sum())
    return TestOutcome(observed, min(p_value, 1.0), "fisher")


def fisher_mc(table: ContingencyTable, B: int = 99_999, rng=None) -> TestOutcome:
    """Monte Carlo Fisher-style test for general I x J tables.

    Resamples tables with the observed marginals and counts those whose
    conditional probability is at most the observed table's.  The
    statistic reported is the observed log-probability; ``mc_se`` is the
    binomial standard error of the p-value estimate.
    """
    if B < 1:
        raise InputError("B must be at least 1")
    _check_resampling_marginals(table)
    gen, seed = _as_generator(rng)
    n = table.n
    lf = _log_factorials(n)
    lf_arr = np.asarray(lf)
    rows = table.row_sums.tolist()
    cols = table.col_sums.tolist()
    observed = _table_log_prob(table.counts, table.row_sums, table.col_sums, n, lf_arr)
    # The marginal-dependent part of the log-probability is constant across
    # resamples, so "prob <= observed * (1 + slack)" reduces to a comparison
    # of the cell log-factorial sums.
    cell_threshold = float(lf_arr[table.counts].sum()) - _TIE_SLACK
    hits = 0
    for _ in range(B):
        counts = _patefield_counts(rows, cols, gen, lf)
        if float(lf_arr[counts].sum()) >= cell_threshold:
            hits += 1
    p_value = (1 + hits) / (B + 1)
    mc_se = math.sqrt(p_value * (1.0 - p_value) / B)
    return TestOutcome(observed, p_value, "fisher-mc", B=B, seed=seed, mc_se=mc_se)
