"""
Concentration sets and their images under a change of domain.

A set ``gamma`` in Z_n certifies concentration of ``f`` when the energy of
``f`` outside ``gamma`` is small.  The ``gamma_prime_*`` builders produce a
set in Z_m that does the same for ``tilde(f, m)``: a union of intervals of
half-width ``r + 1`` around each ``(m/n) alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core_dft import (
    TOLERANCE,
    FunctionTable,
    IndexSet,
    Spectrum,
    circ_dist,
    dft,
    scaled_frequency,
    tail_energy,
)
from .domain_shift import nearest_image, tilde
from .errors import PreconditionError
from .testfuncs import bit_spectrum_closed_form


@dataclass(frozen=True)
class ConcentrationCertificate:
    gamma: IndexSet
    epsilon: float
    tail: float
    size_bound: int

    def __post_init__(self):
        if not self.tail < self.epsilon:
            raise PreconditionError(f"tail {self.tail} is not below epsilon {self.epsilon}")
        if len(self.gamma) > self.size_bound:
            raise PreconditionError(f"|gamma|={len(self.gamma)} exceeds size bound {self.size_bound}")


def _positive(name, value):
    if not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")


def _exact(x) -> Fraction:
    """Decimal reading of a float, so that ``0.1`` means ``1/10`` at interval edges."""
    return x if isinstance(x, Fraction) else Fraction(repr(float(x)))


def _image_intervals(gamma, n, m, radius) -> IndexSet:
    radius = Fraction(radius)
    out = IndexSet(m)
    for alpha in gamma:
        out = out.union(IndexSet.interval(m, scaled_frequency(alpha, n, m), radius + 1))
    return out


def gamma_prime_single(alpha: int, n: int, m: int, epsilon: float) -> IndexSet:
    """Interval in Z_m holding all but ``epsilon`` of ``tilde(chi_alpha, m)``'s energy."""
    _positive("epsilon", epsilon)
    r = 1 / (2 * _exact(epsilon))
    return _image_intervals([alpha], n, m, r)


def sparse_radius(gamma_size: int, normsq: float, epsilon: float) -> Fraction:
    """Half-width parameter ``r = |gamma| * normsq / (2 epsilon)``."""
    _positive("epsilon", epsilon)
    return gamma_size * _exact(normsq) / (2 * _exact(epsilon))


def gamma_prime_sparse(gamma: IndexSet, n: int, m: int, epsilon: float, normsq: float) -> IndexSet:
    """Image set for a function whose spectrum is supported on ``gamma``.

    ``normsq`` is the squared norm of that function.
    """
    if gamma.modulus != n:
        raise PreconditionError(f"gamma lives in Z_{gamma.modulus}, expected Z_{n}")
    if normsq < 0:
        raise PreconditionError("normsq must be non-negative")
    r = sparse_radius(len(gamma), normsq, epsilon)
    return _image_intervals(gamma, n, m, r)


def general_tail_bound(t: float, epsilon: float, eps_prime: float) -> float:
    """``t*eps + eps' + 2 sqrt(t*eps*eps')``, i.e. ``(sqrt(t*eps) + sqrt(eps'))^2``."""
    return t * epsilon + eps_prime + 2 * math.sqrt(t * epsilon * eps_prime)


def gamma_prime_general(gamma, n, m, eps_prime, normsq, source_tail):
    """Image set for an arbitrary ``f`` with ``tail_energy(dft(f), gamma) = source_tail``.

    Returns ``(gamma_prime, bound)``: the energy of ``tilde(f, m)`` outside
    ``gamma_prime`` is at most ``bound``.
    """
    if source_tail < 0:
        raise PreconditionError("source_tail must be non-negative")
    gamma_prime = gamma_prime_sparse(gamma, n, m, eps_prime, normsq)
    return gamma_prime, general_tail_bound(n / m, source_tail, eps_prime)


def gamma_prime_size_bound(gamma_size: int, r) -> int:
    """``ceil(|gamma| (2r + 3))``: each interval holds at most ``2r + 3`` residues."""
    if r < 0:
        raise PreconditionError("r must be non-negative")
    return math.ceil(gamma_size * (2 * Fraction(r) + 3))


def greedy_order(s: Spectrum) -> np.ndarray:
    """Frequencies by decreasing magnitude, ties broken by smaller residue."""
    mags = s.sq_magnitudes
    return np.lexsort((np.arange(s.modulus), -mags))


def top_coefficients(s: Spectrum, max_tail: float, strict: bool = True) -> IndexSet:
    """Smallest greedy prefix whose tail is below (or at most) ``max_tail``."""
    order = greedy_order(s)
    mags = s.sq_magnitudes[order]
    # tails[j] = energy outside the first j entries
    tails = np.concatenate([np.cumsum(mags[::-1])[::-1], [0.0]])
    ok = tails < max_tail if strict else tails <= max_tail
    j = int(np.argmax(ok)) if ok.any() else len(order)
    return IndexSet(s.modulus, tuple(order[:j].tolist()))


def check_concentration(f: FunctionTable, epsilon: float, budget: int) -> Optional[ConcentrationCertificate]:
    """Certificate that ``f`` has tail below ``epsilon`` on at most ``budget`` frequencies.

    Keeping the largest coefficients minimises the tail for any fixed set
    size, so the greedy choice decides existence exactly.
    """
    _positive("epsilon", epsilon)
    if budget < 0:
        raise PreconditionError("budget must be non-negative")
    s = dft(f)
    gamma = top_coefficients(s, epsilon)
    if len(gamma) > budget:
        return None
    tail = tail_energy(s, gamma)
    if not tail < epsilon:
        return None
    return ConcentrationCertificate(gamma, epsilon, tail, budget)


@dataclass(frozen=True)
class SpreadParams:
    """Constants for the spread-apart lower bound.

    ``r_spread = 20 C (ln(|gamma|/2) + 1)`` is the required separation.
    """

    L: float
    C: float
    tau: float
    r_spread: float

    @classmethod
    def for_gamma(cls, L: float, C: float, tau: float, gamma_size: int) -> "SpreadParams":
        if gamma_size < 1:
            raise PreconditionError("gamma must be non-empty")
        return cls(L, C, tau, 20 * C * (math.log(gamma_size / 2) + 1))

    @staticmethod
    def tau_limit(L: float, n: int) -> float:
        return (L / 20) / (3 + 2 * math.log(n))


def transported_peaks(f: FunctionTable, gamma: IndexSet, m: int) -> dict:
    """``|dft(tilde(f, m))[nearest_image(alpha)]|`` for each alpha in ``gamma``."""
    g = dft(tilde(f, m))
    n = f.modulus
    return {alpha: float(abs(g[nearest_image(alpha, n, m)])) for alpha in gamma}


def spread_lower_bound_check(f: FunctionTable, gamma: IndexSet, params: SpreadParams, m: int) -> bool:
    """Check that every spread-out large coefficient survives transport at ``L/5``.

    Raises ``PreconditionError`` naming the first violated hypothesis.
    """
    n = f.modulus
    tol = TOLERANCE
    if gamma.modulus != n:
        raise PreconditionError(f"gamma lives in Z_{gamma.modulus}, f in Z_{n}")
    if not n <= m <= 2 * n:
        raise PreconditionError(f"need n <= m <= 2n, got n={n}, m={m}")
    if not len(gamma):
        raise PreconditionError("gamma must be non-empty")
    if not (params.L > 0 and params.C > 1 and params.tau > 0):
        raise PreconditionError(f"need L > 0, C > 1, tau > 0, got {params}")
    expected_r = 20 * params.C * (math.log(len(gamma) / 2) + 1)
    if not math.isclose(params.r_spread, expected_r, rel_tol=1e-12):
        raise PreconditionError(f"r_spread={params.r_spread} but |gamma| requires {expected_r}")
    limit = SpreadParams.tau_limit(params.L, n)
    if not params.tau < limit:
        raise PreconditionError(f"tau={params.tau} must be below {limit} for n={n}")
    members = list(gamma)
    for a_idx, a in enumerate(members):
        for b in members[a_idx + 1:]:
            if not circ_dist(a - b, n) > params.r_spread:
                raise PreconditionError(
                    f"separation: |{a} - {b}|_{n} = {circ_dist(a - b, n)} <= r_spread={params.r_spread}"
                )
    mags = np.abs(dft(f).coeffs)
    on = gamma.mask()
    low, high = params.L * (1 - tol), params.C * params.L * (1 + tol)
    bad_on = [int(a) for a in np.flatnonzero(on & ((mags < low) | (mags > high)))]
    if bad_on:
        raise PreconditionError(f"magnitude window: |fhat| outside [L, CL] at {bad_on[:5]}")
    bad_off = np.flatnonzero(~on & (mags > params.tau + tol))
    if bad_off.size:
        raise PreconditionError(
            f"off-gamma bound: |fhat| > tau at {bad_off[:5].tolist()} (max {mags[bad_off].max():.3g})"
        )
    peaks = transported_peaks(f, gamma, m)
    return all(v >= params.L / 5 for v in peaks.values())


def bit_concentration_set(i: int, n: int, epsilon: float) -> IndexSet:
    """A small set in Z_n carrying all but ``epsilon`` of ``bit_i``'s energy.

    With ``2^{k-1} < n <= 2^k`` the set is built on Z_{2^k}, where the
    spectrum is known in closed form, and carried over to Z_n by the
    interval construction with ``epsilon/6`` for both the source tail and
    the interval slack.  Since ``2^k / n < 2`` the combined bound stays
    below ``epsilon``.
    """
    _positive("epsilon", epsilon)
    if not (i >= 0 and n > 2**i):
        raise PreconditionError(f"bit_concentration_set needs n > 2^i, got i={i}, n={n}")
    k = max(1, math.ceil(math.log2(n)))
    N = 2**k
    source = bit_spectrum_closed_form(i, k)
    if N == n:
        return top_coefficients(source, epsilon)
    part = epsilon / 6
    gamma = top_coefficients(source, part, strict=False)
    gamma_prime, _ = gamma_prime_general(gamma, N, n, part, 1.0, tail_energy(source, gamma))
    return gamma_prime
