"""Simulation harness: decaying-marginals table model, calibration and power.

The model has independent geometric-like marginals, ``p_ij ~ 2**-(i+j)``
normalised over an I x J grid, optionally perturbed by +/- eps on the
four top-left cells in a pattern that cancels within rows and columns, so
the marginals stay fixed while the association grows with eps.

Studies are embarrassingly parallel over replicates; every replicate
draws from its own substream derived from (seed, replicate, method), so
reports are bit-identical for a given configuration and seed regardless
of evaluation order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    RngStream,
    fisher_exact_2x2,
    fisher_mc,
    g_test,
    permutation_test,
)
from .dcov import dcov_independence_test
from .errors import CatstatsError, InputError
from .quadform import chisq_upper_tail
from .tables import ContingencyTable, expected_counts

__all__ = [
    "DecayingModel",
    "ExperimentReport",
    "INDEPENDENCE_METHODS",
    "epsilon_max",
    "decaying_null",
    "perturbed",
    "sample_table",
    "run_calibration",
    "run_power",
    "time_per_test",
]


@dataclass(frozen=True)
class DecayingModel:
    """Cell probabilities for the decaying-marginals table model."""

    I: int
    J: int
    eps: float
    cell_probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.cell_probs, dtype=np.float64)
        if probs.shape != (self.I, self.J):
            raise InputError("cell_probs shape inconsistent with I, J")
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise InputError("cell probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InputError("cell probabilities must sum to 1")
        if not 0.0 <= self.eps <= epsilon_max(self.I, self.J):
            raise InputError("eps outside the admissible range for this shape")
        probs = np.array(probs)
        probs.setflags(write=False)
        object.__setattr__(self, "cell_probs", probs)


def _normalisation(I: int, J: int) -> float:
    return (1.0 - 2.0 ** -I) * (1.0 - 2.0 ** -J)


def epsilon_max(I: int, J: int) -> float:
    """Largest perturbation keeping all cell probabilities in [0, 1]."""
    if I < 2 or J < 2:
        raise InputError("the model needs I, J >= 2")
    c = _normalisation(I, J)
    return min(1.0 / (8.0 * c), 1.0 - 1.0 / (4.0 * c))


def decaying_null(I: int, J: int) -> DecayingModel:
    """Independence model with exponentially decaying marginals."""
    if I < 2 or J < 2:
        raise InputError("the model needs I, J >= 2")
    i = np.arange(1, I + 1)[:, None]
    j = np.arange(1, J + 1)[None, :]
    probs = 2.0 ** -(i + j) / _normalisation(I, J)
    return DecayingModel(I=I, J=J, eps=0.0, cell_probs=probs)


def perturbed(I: int, J: int, eps: float) -> DecayingModel:
    """Decaying model with an association perturbation of size eps.

    Adds eps to cells (1,1) and (2,2) and subtracts it from (1,2) and
    (2,1); the changes cancel within the first two rows and columns, so
    the marginals are exactly those of the null model.
    """
    if eps < 0.0 or eps > epsilon_max(I, J):
        raise InputError(
            f"eps={eps!r} outside [0, {epsilon_max(I, J)!r}] for a {I}x{J} table"
        )
    base = decaying_null(I, J)
    probs = np.array(base.cell_probs)
    probs[0, 0] += eps
    probs[1, 1] += eps
    probs[0, 1] -= eps
    probs[1, 0] -= eps
    return DecayingModel(I=I, J=J, eps=eps, cell_probs=probs)


def sample_table(model: DecayingModel, n: int, rng) -> ContingencyTable:
    """Multinomial realisation of the model with n observations."""
    from .baselines import _as_generator

    if n < 1:
        raise InputError("n must be at least 1")
    gen, _ = _as_generator(rng)
    counts = gen.multinomial(n, model.cell_probs.ravel()).reshape(model.I, model.J)
    return ContingencyTable.from_counts(counts)


def _pearson_pvalue_permissive(table: ContingencyTable) -> float:
    """Pearson p-value tolerating empty margins in simulated tables.

    Sampled sparse tables regularly have empty rows or columns; cells with
    zero expected count are also observed zero and contribute nothing,
    while the degrees of freedom stay at (I-1)(J-1) as a practitioner
    applying the textbook test to the full table shape would use.
    """
    expected = expected_counts(table)
    mask = expected > 0.0
    diff = table.counts[mask] - expected[mask]
    statistic = float((diff * diff / expected[mask]).sum())
    I, J = table.shape
    return chisq_upper_tail((I - 1) * (J - 1), statistic)


def _g_pvalue(table: ContingencyTable) -> float:
    return g_test(table).p_value


def _fisher_pvalue(table: ContingencyTable, B: int, rng) -> float:
    if table.shape == (2, 2):
        return fisher_exact_2x2(table).p_value
    return fisher_mc(table, B=B, rng=rng).p_value


INDEPENDENCE_METHODS = (
    "dcov",
    "dcov-perm",
    "usp-perm",
    "pearson",
    "pearson-perm",
    "g",
    "fisher",
    "fisher-mc",
)


def _method_pvalue(method: str, table: ContingencyTable, B: int, rng) -> float:
    if method == "dcov":
        return dcov_independence_test(table).p_value
    if method in ("dcov-perm", "usp-perm"):
        return permutation_test(table, statistic="dcov_v", B=B, rng=rng).p_value
    if method == "pearson":
        return _pearson_pvalue_permissive(table)
    if method == "pearson-perm":
        return permutation_test(table, statistic="pearson", B=B, rng=rng).p_value
    if method == "g":
        return _g_pvalue(table)
    if method == "fisher":
        return _fisher_pvalue(table, B, rng)
    if method == "fisher-mc":
        return fisher_mc(table, B=B, rng=rng).p_value
    raise InputError(f"unknown method {method!r}; choose from {INDEPENDENCE_METHODS}")


@dataclass(frozen=True)
class ExperimentReport:
    """Rejection rates with Monte Carlo standard errors for one study."""

    kind: str  # "calibration" | "power"
    methods: tuple[str, ...]
    I: int
    J: int
    n: int
    M: int
    B: int
    seed: int
    grid_name: str  # "alpha" | "eps"
    grid: tuple[float, ...]
    alpha: float | None
    rates: dict[str, tuple[float, ...]]
    ses: dict[str, tuple[float, ...]]
    timings: dict[str, float] | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        """JSON-ready representation; timings are volatile and kept out."""
        return {
            "kind": self.kind,
            "methods": list(self.methods),
            "I": self.I,
            "J": self.J,
            "n": self.n,
            "M": self.M,
            "B": self.B,
            "seed": self.seed,
            "grid_name": self.grid_name,
            "grid": list(self.grid),
            "alpha": self.alpha,
            "rates": {m: list(v) for m, v in self.rates.items()},
            "ses": {m: list(v) for m, v in self.ses.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            kind=d["kind"],
            methods=tuple(d["methods"]),
            I=d["I"],
            J=d["J"],
            n=d["n"],
            M=d["M"],
            B=d["B"],
            seed=d["seed"],
            grid_name=d["grid_name"],
            grid=tuple(d["grid"]),
            alpha=d["alpha"],
            rates={m: tuple(v) for m, v in d["rates"].items()},
            ses={m: tuple(v) for m, v in d["ses"].items()},
        )


def _binomial_se(rate: float, M: int) -> float:
    return float(np.sqrt(rate * (1.0 - rate) / M))


def _validate_methods(methods) -> tuple[str, ...]:
    methods = tuple(methods)
    if not methods:
        raise InputError("at least one method is required")
    for m in methods:
        if m not in INDEPENDENCE_METHODS:
            raise InputError(
                f"unknown method {m!r}; choose from {INDEPENDENCE_METHODS}"
            )
    return methods


def _replicate_pvalues(
    model: DecayingModel, methods, n: int, M: int, B: int, seed: int,
    collect_times: bool, grid_tag: int,
) -> tuple[np.ndarray, dict[str, float]]:
    """M x len(methods) p-values plus mean seconds per test for each method.

    A method that fails on a degenerate replicate (for example a sampled
    table with a single nonempty row) reports p = 1 for that replicate:
    no evidence, no rejection.
    """
    stream = RngStream(seed)
    pvals = np.ones((M, len(methods)))
    totals = dict.fromkeys(methods, 0.0)
    for k in range(M):
        table = sample_table(model, n, stream.substream(grid_tag, k))
        for mi, method in enumerate(methods):
            rng = stream.substream(grid_tag, k, mi + 1)
            start = time.perf_counter() if collect_times else 0.0
            try:
                pvals[k, mi] = _method_pvalue(method, table, B, rng)
            except CatstatsError:
                pvals[k, mi] = 1.0
            if collect_times:
                totals[method] += time.perf_counter() - start
    times = {m: totals[m] / M for m in methods} if collect_times else {}
    return pvals, times


def run_calibration(
    methods,
    I: int = 4,
    J: int = 8,
    n: int = 100,
    M: int = 2000,
    alphas=(0.01, 0.05, 0.10),
    B: int = 999,
    seed: int = 0,
    collect_times: bool = False,
) -> ExperimentReport:
    """Empirical type-I error of each method at each nominal level."""
    methods = _validate_methods(methods)
    if M < 1:
        raise InputError("M must be at least 1")
    alphas = tuple(float(a) for a in alphas)
    model = decaying_null(I, J)
    pvals, times = _replicate_pvalues(model, methods, n, M, B, seed,
                                      collect_times, grid_tag=0)
    rates = {}
    ses = {}
    for mi, method in enumerate(methods):
        rejected = [float((pvals[:, mi] <= a).mean()) for a in alphas]
        rates[method] = tuple(rejected)
        ses[method] = tuple(_binomial_se(r, M) for r in rejected)
    return ExperimentReport(
        kind="calibration", methods=methods, I=I, J=J, n=n, M=M, B=B, seed=seed,
        grid_name="alpha", grid=alphas, alpha=None, rates=rates, ses=ses,
        timings=times or None,
    )


def run_power(
    methods,
    eps_grid,
    I: int = 4,
    J: int = 8,
    n: int = 100,
    M: int = 1000,
    alpha: float = 0.05,
    B: int = 999,
    seed: int = 0,
    collect_times: bool = False,
) -> ExperimentReport:
    """Rejection rate of each method along a grid of perturbation sizes."""
    methods = _validate_methods(methods)
    if M < 1:
        raise InputError("M must be at least 1")
    eps_grid = tuple(float(e) for e in eps_grid)
    limit = epsilon_max(I, J)
    for e in eps_grid:
        if e < 0.0 or e > limit:
            raise InputError(f"eps={e!r} outside [0, {limit!r}]")
    rejections = {m: [] for m in methods}
    total_times = dict.fromkeys(methods, 0.0)
    for gi, eps in enumerate(eps_grid):
        model = perturbed(I, J, eps)
        pvals, times = _replicate_pvalues(model, methods, n, M, B, seed,
                                          collect_times, grid_tag=gi)
        for mi, method in enumerate(methods):
            rejections[method].append(float((pvals[:, mi] <= alpha).mean()))
            if collect_times:
                total_times[method] += times[method]
    rates = {m: tuple(v) for m, v in rejections.items()}
    ses = {m: tuple(_binomial_se(r, M) for r in v) for m, v in rates.items()}
    timings = (
        {m: total_times[m] / len(eps_grid) for m in methods}
        if collect_times else None
    )
    return ExperimentReport(
        kind="power", methods=methods, I=I, J=J, n=n, M=M, B=B, seed=seed,
        grid_name="eps", grid=eps_grid, alpha=alpha, rates=rates, ses=ses,
        timings=timings,
    )


def time_per_test(
    methods,
    I: int = 4,
    J: int = 8,
    n: int = 100,
    reps: int = 11,
    B: int = 999,
    seed: int = 0,
) -> dict[str, float]:
    """Median wall-clock seconds for a single test of each method."""
    methods = _validate_methods(methods)
    stream = RngStream(seed)
    model = decaying_null(I, J)
    tables = [sample_table(model, n, stream.substream(0, k)) for k in range(reps)]
    medians = {}
    for mi, method in enumerate(methods):
        elapsed = []
        for k, table in enumerate(tables):
            rng = stream.substream(1, k, mi)
            start = time.perf_counter()
            try:
                _method_pvalue(method, table, B, rng)
            except CatstatsError:
                pass
            elapsed.append(time.perf_counter() - start)
        medians[method] = float(np.median(elapsed))
    return medians
