"""
Recovering the tau-heavy Fourier coefficients of f on an arbitrary Z_n.

The function is zero-padded onto the next power of two ``m``, a heavy-hitter
backend finds the ``tau'``-heavy frequencies ``beta`` of ``tilde(f, m)``, and
each ``beta`` is pulled back to a short interval around ``(n/m) beta`` in
Z_n where the candidates are tested directly.  Two countermeasures against
cancellation are available: subtracting what has been found and iterating,
and permuting the spectrum by a random unit first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .concentration import gamma_prime_size_bound
from .core_dft import (
    FunctionTable,
    IndexSet,
    Spectrum,
    character,
    circ_dist,
    dft,
    norm2_sq,
)
from .domain_shift import tilde
from .errors import PreconditionError
from .estimator import QueryFunction, heavy_decisions

EPS_PRIME_GRID = 40


def next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length()


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class RecoveryParams:
    """Derived quantities for one recovery run.

    ``tau_prime`` is the backend threshold guaranteed to catch at least one
    frequency whenever a tau-heavy coefficient exists.  ``radius`` is the
    search half-width around ``(n/m) beta`` in Z_n.
    """

    n: int
    m: int
    tau: float
    normsq: float
    eps_prime: float
    tau_prime: float
    radius: float
    gamma_bound: int
    tau_prime_literal: float

    @property
    def t(self) -> float:
        return self.n / self.m

    @property
    def max_heavy(self) -> int:
        return math.floor(self.normsq / self.tau)


def _tau_prime(t, tau, normsq, eps_prime):
    heavy = normsq / tau
    denom = heavy * (heavy * normsq / eps_prime + 3)
    sound = (t * tau - eps_prime - 2 * math.sqrt(t * (normsq - tau) * eps_prime)) / denom
    literal = (tau - eps_prime - 2 * math.sqrt(max(0.0, 1 - tau) * eps_prime)) / denom
    return sound, literal


def derive_params(n: int, tau: float, normsq: float) -> RecoveryParams:
    """Pick ``m``, ``eps'`` and the thresholds for recovering tau-heavy coefficients.

    ``eps'`` maximises ``tau'`` over ``tau * 2^-j``, ``j = 1..40``.  The
    numerator uses ``t * tau - eps' - 2 sqrt(t (normsq - tau) eps')`` with
    ``t = n/m``: the energy ``tilde(f)`` must keep on ``gamma'`` once the
    ``n/m`` shrinkage of the padded norm is accounted for.
    """
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    if not 0 < tau < normsq:
        raise PreconditionError(f"need 0 < tau < normsq, got tau={tau}, normsq={normsq}")
    m = next_power_of_two(n)
    t = n / m
    best = None
    for j in range(1, EPS_PRIME_GRID + 1):
        eps_prime = tau * 2.0**-j
        sound, literal = _tau_prime(t, tau, normsq, eps_prime)
        if best is None or sound > best[1]:
            best = (eps_prime, sound, literal)
    eps_prime, tau_prime, literal = best
    if not tau_prime > 0:
        raise PreconditionError(
            f"threshold tau={tau} too small relative to normsq={normsq}: no eps' gives tau' > 0"
        )
    heavy = normsq / tau
    radius = heavy * normsq / (2 * eps_prime) + 1
    max_heavy = math.floor(heavy)
    gamma_bound = gamma_prime_size_bound(max_heavy, Fraction(max_heavy) * Fraction(normsq) / (2 * Fraction(eps_prime)))
    return RecoveryParams(n, m, tau, normsq, eps_prime, tau_prime, radius, gamma_bound, literal)


def scale_permute(f: FunctionTable, c: int) -> FunctionTable:
    """``h(x) = f(c x mod n)``; then ``hhat(alpha) = fhat(c^{-1} alpha)``."""
    n = f.modulus
    if math.gcd(c, n) != 1:
        raise PreconditionError(f"c={c} is not a unit mod {n}")
    x = np.arange(n, dtype=np.int64)
    return FunctionTable(f.values[(c * x) % n])


def random_unit(n: int, rng: np.random.Generator) -> int:
    while True:
        c = int(rng.integers(1, n)) if n > 1 else 0
        if math.gcd(c, n) == 1:
            return c


HeavyHitterBackend = Callable[[FunctionTable, float], IndexSet]


def backend_exact_fft(g: FunctionTable, tau_prime: float) -> IndexSet:
    """Reference backend: full transform, keep ``|ghat(beta)|^2 > tau'``."""
    if not is_power_of_two(g.modulus):
        raise PreconditionError(f"backend needs a power-of-two modulus, got {g.modulus}")
    sq = dft(g).sq_magnitudes
    return IndexSet(g.modulus, tuple(np.flatnonzero(sq > tau_prime).tolist()))


@dataclass(frozen=True)
class HeavyCoeff:
    frequency: int
    estimated_value: complex
    provenance: tuple = ()

    @property
    def estimated_sq_magnitude(self) -> float:
        return abs(self.estimated_value) ** 2


def residual_subtract(f: FunctionTable, found) -> FunctionTable:
    """``f - sum estimated_value * chi_frequency`` over ``found``."""
    found = list(found)
    freqs = [c.frequency for c in found]
    if len(set(freqs)) != len(freqs):
        raise PreconditionError("found frequencies must be distinct")
    values = f.values.copy()
    for c in found:
        values = values - c.estimated_value * character(c.frequency, f.modulus).values
    return FunctionTable(values)


def isolate_interval_peaks(gamma_prime: IndexSet, spectrum_access, window: int) -> IndexSet:
    """Keep each ``beta`` whose magnitude is largest among members within ``window``.

    ``spectrum_access`` is a ``Spectrum`` or a callable ``beta -> complex``.
    Ties go to the smaller ``beta``.
    """
    if window < 1:
        raise PreconditionError("window must be >= 1")
    m = gamma_prime.modulus
    access = spectrum_access.__getitem__ if isinstance(spectrum_access, Spectrum) else spectrum_access
    mags = {b: abs(access(b)) for b in gamma_prime}
    members = list(gamma_prime)
    keep = []
    for b in members:
        rivals = [c for c in members if c != b and circ_dist(b - c, m) <= window]
        if all(mags[b] > mags[c] or (mags[b] == mags[c] and b < c) for c in rivals):
            keep.append(b)
    return IndexSet(m, tuple(keep))


def candidate_preimages(beta: int, n: int, m: int) -> tuple:
    """``floor((n/m) beta)`` and ``ceil((n/m) beta)`` in Z_n."""
    x = Fraction(n * beta, m)
    return tuple(sorted({math.floor(x) % n, math.ceil(x) % n}))


def pullback_mask(betas, n: int, m: int, radius: float) -> np.ndarray:
    """Mask of ``alpha`` in Z_n with ``|alpha - (n/m) beta|_n <= radius`` for some beta."""
    mask = np.zeros(n, dtype=bool)
    radius = Fraction(radius)
    if 2 * radius + 1 >= n and len(betas):
        mask[:] = True
        return mask
    for beta in betas:
        center = Fraction(n * beta, m)
        lo, hi = math.ceil(center - radius), math.floor(center + radius)
        mask[np.arange(lo, hi + 1) % n] = True
    return mask


@dataclass
class RecoveryConfig:
    """Options for ``recover_heavy``.

    ``estimation`` is ``"exact"`` (transform of the full table) or
    ``"sampling"``.  ``max_iters`` defaults to ``ceil(normsq/tau) + 1``.
    """

    residual: bool = True
    scaling: bool = False
    max_iters: Optional[int] = None
    estimation: str = "exact"
    failure_prob: float = 0.01
    seed: int = 0
    peak_window: int = 2
    backend: HeavyHitterBackend = field(default=backend_exact_fft, repr=False)


@dataclass(frozen=True)
class RecoveryResult:
    coeffs: tuple
    params: RecoveryParams
    iterations: int
    converged: bool
    scaling_unit: int

    @property
    def frequencies(self) -> set:
        return {c.frequency for c in self.coeffs}


def recover_heavy(q, tau: float, config: RecoveryConfig | None = None) -> RecoveryResult:
    """Find the frequencies ``alpha`` with ``|fhat(alpha)|^2 > tau``.

    ``q`` is a ``QueryFunction`` or a ``FunctionTable``.  With the exact
    backend and exact estimation the output is exactly the tau-heavy set:
    every round that leaves a heavy coefficient unfound still exposes a
    ``tau'``-heavy ``beta`` whose pullback interval contains one.
    """
    config = config or RecoveryConfig()
    if isinstance(q, FunctionTable):
        q = QueryFunction.from_table(q)
    if config.estimation not in ("exact", "sampling"):
        raise PreconditionError(f"unknown estimation mode {config.estimation!r}")
    f = q.to_table()
    n = f.modulus
    normsq = norm2_sq(f)
    params = derive_params(n, tau, normsq)
    rng = np.random.default_rng(config.seed)

    c = random_unit(n, rng) if config.scaling and n > 2 else 1
    h = scale_permute(f, c) if c != 1 else f
    max_iters = config.max_iters or math.ceil(normsq / tau) + 1
    rounds = max_iters if config.residual else 1

    found: dict[int, HeavyCoeff] = {}
    current = h
    converged = False
    iterations = 0
    for it in range(rounds):
        iterations = it + 1
        g = tilde(current, params.m)
        betas = config.backend(g, params.tau_prime)
        sources = _candidates(betas, g, params, config)
        for alpha in list(sources):
            if alpha in found:
                del sources[alpha]
        new = _test_candidates(current, sources, tau, it, config, rng)
        if not new:
            converged = True
            break
        found.update({hc.frequency: hc for hc in new})
        current = residual_subtract(current, new)
    else:
        converged = not config.residual

    cinv = pow(c, -1, n) if n > 1 else 0
    coeffs = tuple(
        sorted(
            (HeavyCoeff((cinv * hc.frequency) % n, hc.estimated_value, hc.provenance) for hc in found.values()),
            key=lambda hc: hc.frequency,
        )
    )
    return RecoveryResult(coeffs, params, iterations, converged, c)


def _candidates(betas: IndexSet, g: FunctionTable, params: RecoveryParams, config) -> dict:
    """Map each candidate ``alpha`` to the ``beta`` that nominated it."""
    n, m = params.n, params.m
    out: dict[int, int] = {}
    if config.scaling:
        peaks = isolate_interval_peaks(betas, dft(g), config.peak_window)
        for beta in peaks:
            for alpha in candidate_preimages(beta, n, m):
                out.setdefault(alpha, beta)
        return out
    if not len(betas):
        return out
    mask = pullback_mask(betas.members, n, m, params.radius)
    anchor = np.array([Fraction(n * b, m) for b in betas.members], dtype=float)
    for alpha in np.flatnonzero(mask).tolist():
        d = np.abs((alpha - anchor + n / 2) % n - n / 2)
        out[alpha] = int(betas.members[int(np.argmin(d))])
    return out


def _test_candidates(current, sources, tau, iteration, config, rng):
    if not sources:
        return []
    alphas = sorted(sources)
    new = []
    if config.estimation == "exact":
        spec = dft(current)
        for alpha in alphas:
            value = complex(spec[alpha])
            if abs(value) ** 2 > tau:
                new.append(HeavyCoeff(alpha, value, (sources[alpha], iteration)))
        return new
    q = QueryFunction.from_table(current)
    for alpha, decision in zip(alphas, heavy_decisions(q, alphas, tau, config.failure_prob, rng)):
        if decision.accept:
            new.append(HeavyCoeff(alpha, decision.estimate, (sources[alpha], iteration)))
    return new
