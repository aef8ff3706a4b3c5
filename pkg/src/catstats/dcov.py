"""Distance-covariance test of independence for two categorical variables.

Under the discrete metric the squared empirical distance covariance of a
paired categorical sample collapses to a simple function of the
contingency table,

    vhat = (1 / n**2) * sum_ij (observed_ij - expected_ij)**2,

and ``n * vhat`` is asymptotically distributed as a weighted sum of
chi-squared(1) variables whose weights are the pairwise products of the
eigenvalues of the two marginal multinomial covariance matrices.  This
module provides the statistic, the definitional (pairwise-distance)
evaluation used as an independent cross-check, the spectrum construction,
and the test itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CatstatsError, DegenerateTableError, InputError
from .quadform import WeightSpectrum, upper_tail
from .tables import CategoricalSample, ContingencyTable, ProbabilityVector, expected_counts

__all__ = [
    "MultinomialCov",
    "IndependenceTestOutcome",
    "vstat",
    "vstat_from_definition",
    "multinomial_cov",
    "eigen_spectrum",
    "dcov_independence_test",
]

# Eigenvalues this close to zero are rank-deficiency noise; the covariance
# matrices involved always have at least one exact zero eigenvalue.
_EIGEN_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class MultinomialCov:
    """Covariance matrix of one multinomial trial: p_i*delta_ij - p_i*p_j."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (self.dim, self.dim):
            raise InputError("matrix shape inconsistent with dim")
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class IndependenceTestOutcome:
    """Result of the distance-covariance independence test."""

    statistic: float  # n * vhat
    vhat: float
    p_value: float
    spectrum: WeightSpectrum
    method: str  # "asymptotic" | "permutation"
    B: int | None = None
    seed: int | None = None


def vstat(table: ContingencyTable) -> float:
    """Squared distance covariance of the table under the discrete metric."""
    diff = table.counts - expected_counts(table)
    return float((diff * diff).sum()) / float(table.n) ** 2


def vstat_from_definition(sample: CategoricalSample) -> float:
    """Definitional evaluation from pairwise discrete distances.

    Computes the three pairwise-sum terms of the squared distance
    covariance literally (O(n^2) indicator sums).  Agrees with
    :func:`vstat` of the cross-tabulated sample to floating-point
    accuracy; kept as an independent cross-check of the compact formula.
    """
    if not sample.paired:
        raise InputError("a paired sample is required")
    x = sample.labels_x
    y = sample.labels_y
    n = float(sample.n)
    dx = (x[:, None] != x[None, :]).astype(np.float64)
    dy = (y[:, None] != y[None, :]).astype(np.float64)
    t1 = float((dx * dy).sum()) / n**2
    t2 = float((dx.sum(axis=1) * dy.sum(axis=1)).sum()) / n**3
    t3 = float(dx.sum()) * float(dy.sum()) / n**4
    return t1 - 2.0 * t2 + t3


def multinomial_cov(p: ProbabilityVector) -> MultinomialCov:
    """Covariance matrix of a single multinomial draw with cell probabilities p."""
    probs = p.probs
    matrix = np.diag(probs) - np.outer(probs, probs)
    return MultinomialCov(dim=probs.size, matrix=matrix)


def eigen_spectrum(m: MultinomialCov) -> WeightSpectrum:
    """All eigenvalues of a multinomial covariance matrix, descending.

    Eigenvalues within 1e-12 of zero are snapped to exactly zero; the
    matrix is singular by construction (its rows sum to zero), so at
    least one zero is always present.
    """
    try:
        w = np.linalg.eigvalsh(m.matrix)
    except np.linalg.LinAlgError as exc:
        raise CatstatsError(f"eigenvalue computation failed: {exc}") from exc
    if w.min() < -_EIGEN_ZERO_TOL:
        raise InputError("matrix is not positive semidefinite")
    w = np.where(w < _EIGEN_ZERO_TOL, 0.0, w)
    return WeightSpectrum(np.sort(w)[::-1])


def dcov_independence_test(
    table: ContingencyTable,
    method: str = "asymptotic",
    B: int = 999,
    rng=None,
) -> IndependenceTestOutcome:
    """Distance-covariance independence test for an I x J contingency table.

    The asymptotic p-value evaluates the weighted chi-squared limit law
    with the empirical marginal frequencies plugged into the covariance
    matrices.  ``method="permutation"`` instead resamples tables with the
    observed marginals (B resamples, add-one p-value).
    """
    I, J = table.shape
    if I < 2 or J < 2:
        raise InputError("independence testing requires at least a 2 x 2 table")
    if table.n < 1:
        raise InputError("the table is empty")
    v = vstat(table)
    stat = table.n * v
    q_hat = ProbabilityVector(table.row_sums / float(table.n))
    r_hat = ProbabilityVector(table.col_sums / float(table.n))
    lam = eigen_spectrum(multinomial_cov(q_hat)).weights
    mu = eigen_spectrum(multinomial_cov(r_hat)).weights
    products = np.outer(lam, mu).ravel()
    products = products[products > 0.0]
    if products.size == 0:
        raise DegenerateTableError(
            "every eigenvalue product is zero: one margin is concentrated on a "
            "single category, so the table carries no evidence about dependence"
        )
    spectrum = WeightSpectrum(np.sort(products)[::-1])

    if method == "asymptotic":
        p_value = upper_tail(spectrum, stat).p
        return IndependenceTestOutcome(stat, v, p_value, spectrum, "asymptotic")
    if method == "permutation":
        from .baselines import permutation_test  # local import avoids a cycle

        outcome = permutation_test(table, statistic="dcov_v", B=B, rng=rng)
        return IndependenceTestOutcome(
            stat, v, outcome.p_value, spectrum, "permutation",
            B=B, seed=outcome.seed,
        )
    raise InputError(f"unknown method {method!r}")
