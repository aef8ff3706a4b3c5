import numpy as np
import pytest

from catstats import (
    CategoricalSample,
    ContingencyTable,
    DegenerateTableError,
    ProbabilityVector,
    dcov_independence_test,
    eigen_spectrum,
    multinomial_cov,
    table_from_samples,
    vstat,
    vstat_from_definition,
)
from conftest import random_paired_sample


def table(rows) -> ContingencyTable:
    return ContingencyTable.from_counts(rows)


def test_vstat_exact_independence():
    assert vstat(table([[5, 5], [5, 5]])) == 0.0


def test_vstat_hand_evaluation():
    # four cells each off by 1 from expectation, n = 4
    assert vstat(table([[2, 0], [0, 2]])) == pytest.approx(0.25, abs=1e-15)


def test_vstat_from_definition_matches_hand_case():
    sample = CategoricalSample(labels_x=[1, 2, 1, 2], labels_y=[1, 2, 1, 2], n=4)
    assert vstat_from_definition(sample) == pytest.approx(0.25, abs=1e-12)
    assert vstat(table_from_samples(sample, 2, 2)) == pytest.approx(0.25, abs=1e-15)


def test_vstat_from_definition_constant_y():
    sample = CategoricalSample(labels_x=[1, 2, 2, 1, 3], labels_y=[1, 1, 1, 1, 1], n=5)
    assert vstat_from_definition(sample) == pytest.approx(0.0, abs=1e-15)


def test_definitional_oracle_equivalence_200_samples():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        sample, I, J = random_paired_sample(rng)
        direct = vstat_from_definition(sample)
        tabulated = vstat(table_from_samples(sample, I, J))
        assert abs(direct - tabulated) <= 1e-12


def test_multinomial_cov_half_half():
    cov = multinomial_cov(ProbabilityVector([0.5, 0.5]))
    assert np.allclose(cov.matrix, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)


def test_multinomial_cov_degenerate():
    cov = multinomial_cov(ProbabilityVector([1.0, 0.0]))
    assert np.allclose(cov.matrix, 0.0)


@pytest.mark.parametrize("k", [2, 3, 5, 10])
def test_multinomial_cov_uniform_trace(k):
    cov = multinomial_cov(ProbabilityVector.uniform(k))
    assert np.trace(cov.matrix) == pytest.approx(1 - 1 / k, abs=1e-12)
    # row sums vanish: rank at most k - 1
    assert np.allclose(cov.matrix.sum(axis=1), 0.0, atol=1e-15)


def test_eigen_spectrum_half_half():
    w = eigen_spectrum(multinomial_cov(ProbabilityVector([0.5, 0.5]))).weights
    assert np.allclose(w, [0.5, 0.0], atol=1e-12)


@pytest.mark.parametrize("k", [2, 4, 7])
def test_eigen_spectrum_uniform(k):
    w = eigen_spectrum(multinomial_cov(ProbabilityVector.uniform(k))).weights
    assert np.allclose(w[:-1], 1.0 / k, atol=1e-12)
    assert w[-1] == 0.0


def test_eigen_spectrum_degenerate_all_zero():
    w = eigen_spectrum(multinomial_cov(ProbabilityVector([1.0, 0.0, 0.0]))).weights
    assert np.allclose(w, 0.0)
    assert (w == 0.0).all()  # snapped exactly


def test_eigen_spectrum_descending_with_exact_zero():
    p = ProbabilityVector([0.6, 0.25, 0.1, 0.05])
    w = eigen_spectrum(multinomial_cov(p)).weights
    assert (np.diff(w) <= 0).all()
    assert w[-1] == 0.0
    assert w.min() >= 0.0


def test_dcov_trivial_table():
    out = dcov_independence_test(table([[5, 5], [5, 5]]))
    assert out.statistic == 0.0
    assert out.p_value == 1.0


def test_dcov_chronicity(chronicity):
    out = dcov_independence_test(chronicity)
    assert out.method == "asymptotic"
    assert out.p_value == pytest.approx(0.044, abs=0.005)
    assert out.statistic == pytest.approx(427 * out.vhat, rel=1e-12)


def test_dcov_spectrum_trace_identity(chronicity):
    out = dcov_independence_test(chronicity)
    q = chronicity.row_sums / chronicity.n
    r = chronicity.col_sums / chronicity.n
    expected_sum = (1 - (q**2).sum()) * (1 - (r**2).sum())
    assert out.spectrum.weights.sum() == pytest.approx(expected_sum, abs=1e-9)


def test_dcov_invariant_under_row_col_permutation(chronicity):
    rng = np.random.default_rng(5)
    base = dcov_independence_test(chronicity)
    for _ in range(5):
        perm_rows = rng.permutation(4)
        perm_cols = rng.permutation(3)
        shuffled = table(chronicity.counts[np.ix_(perm_rows, perm_cols)])
        out = dcov_independence_test(shuffled)
        assert out.vhat == pytest.approx(base.vhat, rel=1e-12)
        assert out.p_value == pytest.approx(base.p_value, abs=1e-10)


def test_dcov_degenerate_single_nonempty_row():
    with pytest.raises(DegenerateTableError):
        dcov_independence_test(table([[3, 2], [0, 0]]))


def test_dcov_permutation_mode(chronicity):
    out = dcov_independence_test(chronicity, method="permutation", B=999, rng=11)
    assert out.method == "permutation"
    assert out.B == 999
    assert 1 / 1000 <= out.p_value <= 1.0
    # asymptotic and permutation calibrations agree on this dense table
    assert out.p_value == pytest.approx(0.044, abs=0.03)
    again = dcov_independence_test(chronicity, method="permutation", B=999, rng=11)
    assert again.p_value == out.p_value


def test_monotone_evidence_in_eps():
    # Mean statistic grows with the perturbation size (checked with a
    # generous margin over Monte Carlo noise).
    from catstats import perturbed, sample_table, RngStream

    stream = RngStream(31)
    means = []
    for gi, eps in enumerate([0.0, 0.05, 0.1295]):
        model = perturbed(4, 8, eps)
        stats = [
            427 * vstat(sample_table(model, 427, stream.substream(gi, k)))
            for k in range(60)
        ]
        means.append(np.mean(stats))
    assert means[0] < means[1] < means[2]
