"""Distance-covariance and energy-distance tests for categorical data."""

__version__ = "0.1.0"

from .baselines import (
    RngStream,
    TestOutcome,
    fisher_exact_2x2,
    fisher_mc,
    g_test,
    patefield_sample,
    pearson_independence_test,
    permutation_test,
)
from .dcov import (
    IndependenceTestOutcome,
    MultinomialCov,
    dcov_independence_test,
    eigen_spectrum,
    multinomial_cov,
    vstat,
    vstat_from_definition,
)
from .energy_gof import (
    GofTestOutcome,
    energy_gof_test,
    estat,
    estat_from_definition,
    pearson_gof_test,
)
from .errors import (
    CatstatsError,
    ConvergenceError,
    DegenerateNullError,
    DegenerateTableError,
    EvaluationError,
    InputError,
    ParseError,
)
from .quadform import (
    TailResult,
    WeightSpectrum,
    chisq_upper_tail,
    upper_tail,
    upper_tail_farebrother,
    upper_tail_imhof,
)
from .simulate import (
    DecayingModel,
    ExperimentReport,
    decaying_null,
    epsilon_max,
    perturbed,
    run_calibration,
    run_power,
    sample_table,
    time_per_test,
)
from .tables import (
    CategoricalSample,
    ContingencyTable,
    ProbabilityVector,
    expected_counts,
    read_samples_csv,
    read_table_csv,
    table_from_samples,
)
