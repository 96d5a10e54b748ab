"""
Sampling estimates of single Fourier coefficients from query access.

``fhat(alpha)`` is the mean of ``f(x) conj(chi_alpha(x))`` over uniform x,
so averaging k independent samples estimates it.  Hoeffding on the real
and imaginary parts (each with error ``delta/sqrt(2)`` and failure
``p/2``) gives ``k = ceil(4 sup^2 / delta^2 * ln(4/p))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_dft import FunctionTable
from .errors import PreconditionError


@dataclass(frozen=True)
class QueryFunction:
    """Query access to ``f: Z_n -> C`` with a known bound on ``|f|``.

    ``evaluator`` maps an integer array of points to complex values.  When
    the full table is at hand it is kept in ``table`` so callers can switch
    to exact computations.
    """

    n: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    known_sup: float
    table: FunctionTable | None = None

    @classmethod
    def from_table(cls, f: FunctionTable, known_sup: float | None = None) -> "QueryFunction":
        values = f.values
        sup = float(np.max(np.abs(values))) if known_sup is None else known_sup
        return cls(f.modulus, lambda x: values[x], sup, f)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64) % self.n
        y = np.asarray(self.evaluator(x), dtype=np.complex128)
        if np.any(np.abs(y) > self.known_sup * (1 + 1e-12)):
            raise PreconditionError(
                f"query returned |f(x)| = {np.abs(y).max():.6g} above known_sup={self.known_sup}"
            )
        return y

    def to_table(self) -> FunctionTable:
        if self.table is not None:
            return self.table
        return FunctionTable(self(np.arange(self.n)))


@dataclass(frozen=True)
class EstimateParams:
    delta: float
    failure_prob: float
    sample_count: int

    @classmethod
    def for_bound(cls, delta: float, failure_prob: float, sup_bound: float) -> "EstimateParams":
        return cls(delta, failure_prob, sample_count(delta, failure_prob, sup_bound))


def sample_count(delta: float, failure_prob: float, sup_bound: float) -> int:
    """Number of samples for error ``delta`` with probability ``1 - failure_prob``."""
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    if not 0 < failure_prob < 1:
        raise PreconditionError(f"failure_prob must lie in (0, 1), got {failure_prob}")
    if not sup_bound > 0:
        raise PreconditionError(f"sup_bound must be positive, got {sup_bound}")
    return math.ceil((4 * sup_bound**2 / delta**2) * math.log(4 / failure_prob))


def estimate_coeff(q: QueryFunction, alpha: int, params: EstimateParams, rng: np.random.Generator) -> complex:
    """Mean of ``q(x) conj(chi_alpha(x))`` over ``params.sample_count`` uniform points."""
    x = rng.integers(0, q.n, size=params.sample_count)
    return complex(_sample_mean(q, alpha, x))


def _sample_mean(q, alpha, x):
    phase = np.exp(-2j * np.pi * ((alpha * x) % q.n) / q.n)
    return np.mean(q(x) * phase)


@dataclass(frozen=True)
class HeavyDecision:
    """Outcome of a heaviness test.

    ``accept`` is reliable (with probability ``1 - p``) outside the gray
    zone ``tau/2 < |fhat|^2 < 2 tau``; inside it either answer may occur.
    ``margin`` is ``|estimate|^2 - tau``.
    """

    accept: bool
    estimate: complex
    sq_magnitude: float
    margin: float
    gray_zone: tuple


def heavy_delta(tau: float) -> float:
    """Estimation error separating ``|fhat|^2 >= 2 tau`` from ``|fhat|^2 <= tau/2`` at threshold ``tau``."""
    return (math.sqrt(2 * tau) - math.sqrt(tau)) / 2


def is_tau_heavy(q: QueryFunction, alpha: int, tau: float, failure_prob: float, rng: np.random.Generator) -> HeavyDecision:
    """Decide whether ``|fhat(alpha)|^2`` exceeds ``tau``.

    Estimates with ``delta = (sqrt(2 tau) - sqrt(tau)) / 2`` and accepts when
    the squared estimate reaches ``tau``.  Any error within ``delta`` keeps
    ``|fhat|^2 >= 2 tau`` above and ``|fhat|^2 <= tau/2`` below that cut.
    """
    if not tau > 0:
        raise PreconditionError(f"tau must be positive, got {tau}")
    if q.known_sup == 0:
        est = 0j
    else:
        params = EstimateParams.for_bound(heavy_delta(tau), failure_prob, q.known_sup)
        est = estimate_coeff(q, alpha, params, rng)
    sq = abs(est) ** 2
    return HeavyDecision(sq >= tau, est, sq, sq - tau, (tau / 2, 2 * tau))


def estimate_coeffs(q: QueryFunction, alphas, params: EstimateParams, rng: np.random.Generator) -> np.ndarray:
    """Estimates for several frequencies from one shared sample of points.

    The mean of ``q(x) conj(chi_alpha(x))`` over the sample equals the DFT of
    the per-point sums, so all frequencies cost one FFT.  Each estimate on its
    own meets the single-coefficient guarantee; they are not independent.
    """
    alphas = np.asarray(alphas, dtype=np.int64) % q.n
    x = rng.integers(0, q.n, size=params.sample_count)
    y = q(x)
    hist = np.bincount(x, weights=y.real, minlength=q.n) + 1j * np.bincount(x, weights=y.imag, minlength=q.n)
    return np.fft.fft(hist)[alphas] / params.sample_count


def heavy_decisions(q: QueryFunction, alphas, tau: float, failure_prob: float, rng: np.random.Generator) -> list:
    """``is_tau_heavy`` for each alpha, sharing one sample of points."""
    if not tau > 0:
        raise PreconditionError(f"tau must be positive, got {tau}")
    alphas = list(alphas)
    if q.known_sup == 0:
        ests = np.zeros(len(alphas), dtype=np.complex128)
    else:
        params = EstimateParams.for_bound(heavy_delta(tau), failure_prob, q.known_sup)
        ests = estimate_coeffs(q, alphas, params, rng)
    out = []
    for est in ests:
        sq = abs(est) ** 2
        out.append(HeavyDecision(bool(sq >= tau), complex(est), sq, sq - tau, (tau / 2, 2 * tau)))
    return out
