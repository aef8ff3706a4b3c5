"""Upper-tail probabilities of weighted sums of chi-squared(1) variables.

The null laws of both association tests in this package have the form
``Q = sum_k w_k Z_k**2`` with independent standard normal ``Z_k`` and
nonnegative weights.  Two classical evaluation schemes are provided:

* a Ruben-type expansion of ``P(Q <= x)`` into a series of central
  chi-squared distribution functions with a common scale (the approach
  popularised by Farebrother), and
* numerical inversion of the characteristic function (Imhof's integral).

The series is fast and carries a rigorous truncation bound but its length
grows with the spread of the weights; the inversion integral is slower
but robust, so :func:`upper_tail` tries the series first and falls back.
All functions are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.integrate import quad
from scipy.special import gammainc, gammaincc

from .errors import ConvergenceError, EvaluationError, InputError

__all__ = [
    "WeightSpectrum",
    "TailResult",
    "upper_tail_farebrother",
    "upper_tail_imhof",
    "upper_tail",
    "chisq_upper_tail",
    "MAX_TERMS",
]

# Series length cap; spectra needing more terms are routed to Imhof.
MAX_TERMS = 10_000

# Weights below this fraction of the largest one are numerically rank-deficient
# leftovers (the covariance matrices involved always have zero eigenvalues) and
# are dropped without changing the distribution.
_ZERO_REL = 1e-14


@dataclass(frozen=True)
class WeightSpectrum:
    """Nonnegative weights of independent chi-squared(1) terms."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise InputError("weights must form a nonempty vector")
        if w.min() < 0.0:
            raise InputError("weights must be nonnegative")
        w = np.array(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def positive_weights(self) -> np.ndarray:
        """Weights with numerical zeros removed."""
        w = self.weights
        wmax = float(w.max(initial=0.0))
        if wmax == 0.0:
            return w[:0]
        return w[w > _ZERO_REL * wmax]

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class TailResult:
    """An evaluated upper-tail probability with its accuracy bound."""

    p: float
    abs_error_bound: float
    method: str  # "farebrother" | "imhof"
    terms_or_nodes: int


def _checked_positive(spectrum: WeightSpectrum, x: float, tol: float) -> np.ndarray:
    if x < 0.0:
        raise InputError("quadratic-form threshold x must be nonnegative")
    if not 0.0 < tol <= 1e-2:
        raise InputError("tol must lie in (0, 1e-2]")
    lam = spectrum.positive_weights()
    if lam.size == 0:
        raise InputError("the spectrum has no positive weight")
    return lam


def chisq_upper_tail(df: int, x: float) -> float:
    """Chi-squared survival function, i.e. the regularised upper incomplete gamma."""
    if df < 1:
        raise InputError("degrees of freedom must be at least 1")
    if x < 0.0:
        raise InputError("x must be nonnegative")
    return float(gammaincc(0.5 * df, 0.5 * x))


@njit(cache=True)
def _ruben_loop(rho, arho, a0, total_abs, F0, log_t0, half_y, tol, max_terms):
    """Sum the Ruben series until its error bound drops below tol.

    Returns (partial CDF, bound, terms used, status) with status 0 on
    success, 1 when max_terms is exhausted, and 2 when accumulated
    roundoff alone exceeds tol (the alternating coefficients grew too
    large for double precision).  The running chi-squared CDF uses
    F_{nu+2}(y) = F_nu(y) - (y/2)^(nu/2) e^(-y/2) / Gamma(nu/2 + 1); the
    jump is tracked in log space because it can start far below the
    double-precision underflow threshold and peak mid-series.
    """
    eps = 2.220446049250313e-16
    m = rho.shape[0]
    h = np.empty(max_terms + 1)
    hbar = np.empty(max_terms + 1)
    a = np.empty(max_terms + 1)
    abar = np.empty(max_terms + 1)
    a[0] = a0
    abar[0] = a0
    pow_r = rho.copy()
    pow_a = arho.copy()
    log_half_y = math.log(half_y)
    F = F0
    log_t = log_t0
    t = math.exp(log_t) if log_t > -700.0 else 0.0
    cdf = a0 * F
    abs_cdf = a0 * F  # majorant of the summed magnitudes, drives roundoff
    abs_partial = a0
    half_m = 0.5 * m
    round_bound = 16.0 * eps
    bound = max(total_abs - abs_partial, 0.0) * max(F - t, 0.0) + round_bound
    k = 0
    while bound > tol:
        k += 1
        if k > max_terms:
            return cdf, bound, k - 1, 1
        sum_r = 0.0
        sum_a = 0.0
        for j in range(m):
            sum_r += pow_r[j]
            sum_a += pow_a[j]
            pow_r[j] *= rho[j]
            pow_a[j] *= arho[j]
        h[k] = 0.5 * sum_r
        hbar[k] = 0.5 * sum_a
        acc = 0.0
        acc_bar = 0.0
        for r in range(1, k + 1):
            acc += h[r] * a[k - r]
            acc_bar += hbar[r] * abar[k - r]
        a[k] = acc / k
        abar[k] = acc_bar / k
        F = max(F - t, 0.0)  # now F_{m+2k}
        log_t += log_half_y - math.log(half_m + k)
        t = math.exp(log_t) if log_t > -700.0 else 0.0
        cdf += a[k] * F
        abs_cdf += abar[k] * F
        abs_partial += abar[k]
        round_bound = 16.0 * eps * (1.0 + abs_cdf) * math.sqrt(k + 1.0)
        if round_bound > tol:
            return cdf, round_bound, k, 2
        bound = max(total_abs - abs_partial, 0.0) * max(F - t, 0.0) + round_bound
    return cdf, bound, k, 0


def upper_tail_farebrother(
    spectrum: WeightSpectrum, x: float, tol: float = 1e-9
) -> TailResult:
    """Ruben series evaluation of ``P(sum w_k Z_k^2 > x)``.

    ``P(Q <= x)`` is expanded as ``sum_k a_k F(m + 2k, x / beta)`` where F is
    the central chi-squared CDF and ``beta`` a mixing scale.  The coefficients
    follow the standard recursion.  The reported bound covers truncation
    (leftover mass of the absolute-coefficient majorant series times the next
    CDF factor) plus accumulated roundoff, which matters because the ``a_k``
    may alternate in sign and grow before decaying for the scale used here;
    series whose roundoff cannot meet tol are reported as non-convergent.
    """
    lam = _checked_positive(spectrum, x, tol)
    if x == 0.0:
        return TailResult(1.0, 0.0, "farebrother", 0)
    m = lam.size
    lmin = float(lam.min())
    lmax = float(lam.max())
    beta = 2.0 * lmin * lmax / (lmin + lmax)
    half_y = 0.5 * x / beta
    rho = np.ascontiguousarray(1.0 - beta / lam)  # each in (-1, 1) by choice of beta
    arho = np.abs(rho)

    log_a0 = 0.5 * float(np.log(beta / lam).sum())
    a0 = math.exp(log_a0)
    with np.errstate(divide="ignore"):
        log_total_abs = log_a0 - 0.5 * float(np.log1p(-arho).sum())
    if not math.isfinite(log_total_abs) or log_total_abs > 700.0:
        raise ConvergenceError(
            "absolute-coefficient series diverges for this weight spread"
        )
    total_abs = math.exp(log_total_abs)

    F0 = float(gammainc(0.5 * m, half_y))
    log_t0 = 0.5 * m * math.log(half_y) - half_y - math.lgamma(0.5 * m + 1.0)

    cdf, bound, terms, status = _ruben_loop(
        rho, arho, a0, total_abs, F0, log_t0, half_y, tol, MAX_TERMS
    )
    if status == 1:
        raise ConvergenceError(
            f"series did not reach tol={tol:g} within {MAX_TERMS} terms "
            f"(bound {bound:.3g})"
        )
    if status == 2:
        raise ConvergenceError(
            f"series coefficients grew too large for double precision; "
            f"roundoff bound {bound:.3g} exceeds tol={tol:g}"
        )
    p = min(max(1.0 - cdf, 0.0), 1.0)
    return TailResult(p, bound, "farebrother", int(terms))


def upper_tail_imhof(
    spectrum: WeightSpectrum, x: float, tol: float = 1e-8
) -> TailResult:
    """Characteristic-function inversion of ``P(sum w_k Z_k^2 > x)``.

    Evaluates ``1/2 + (1/pi) * int_0^inf sin(theta(u)) / (u rho(u)) du`` with
    ``theta(u) = (sum_k arctan(w_k u) - x u) / 2`` and
    ``rho(u) = prod_k (1 + w_k^2 u^2)^(1/4)``.  The head of the integral is
    handled by adaptive quadrature; the oscillatory tail is split into sine
    and cosine Fourier transforms of smooth decaying factors, which QUADPACK
    integrates to a controlled absolute error.
    """
    lam = _checked_positive(spectrum, x, tol)
    if x == 0.0:
        return TailResult(1.0, 0.0, "imhof", 0)
    omega = 0.5 * x
    sum_lam = float(lam.sum())

    def inv_urho(u: float) -> float:
        return math.exp(-0.25 * float(np.log1p((lam * u) ** 2).sum())) / u

    def alpha(u: float) -> float:
        return 0.5 * float(np.arctan(lam * u).sum())

    def integrand(u: float) -> float:
        if u == 0.0:
            return 0.5 * (sum_lam - x)
        return math.sin(alpha(u) - omega * u) * inv_urho(u)

    def f_cos(u: float) -> float:
        return math.sin(alpha(u)) * inv_urho(u)

    def f_sin(u: float) -> float:
        return math.cos(alpha(u)) * inv_urho(u)

    u0 = math.pi / omega
    piece_tol = tol * math.pi / 4.0
    head = quad(integrand, 0.0, u0, epsabs=piece_tol, epsrel=1e-12, limit=200,
                full_output=1)
    tail_c = quad(f_cos, u0, np.inf, weight="cos", wvar=omega,
                  epsabs=piece_tol, limlst=200, full_output=1)
    tail_s = quad(f_sin, u0, np.inf, weight="sin", wvar=omega,
                  epsabs=piece_tol, limlst=200, full_output=1)
    integral = head[0] + tail_c[0] - tail_s[0]
    abserr = (head[1] + tail_c[1] + tail_s[1]) / math.pi
    nodes = sum(int(piece[2].get("neval", 0)) for piece in (head, tail_c, tail_s))
    if not math.isfinite(integral) or abserr > tol:
        raise ConvergenceError(
            f"inversion integral reached error {abserr:.3g} > tol={tol:g}"
        )
    p = 0.5 + integral / math.pi
    return TailResult(min(max(p, 0.0), 1.0), abserr, "imhof", nodes)


def upper_tail(
    spectrum: WeightSpectrum,
    x: float,
    farebrother_tol: float = 1e-9,
    imhof_tol: float = 1e-8,
) -> TailResult:
    """Evaluate the upper tail, preferring the series and falling back to Imhof."""
    try:
        return upper_tail_farebrother(spectrum, x, farebrother_tol)
    except ConvergenceError as series_exc:
        try:
            return upper_tail_imhof(spectrum, x, imhof_tol)
        except ConvergenceError as imhof_exc:
            raise EvaluationError(
                "both evaluation methods failed: "
                f"farebrother: {series_exc}; imhof: {imhof_exc}"
            ) from imhof_exc
