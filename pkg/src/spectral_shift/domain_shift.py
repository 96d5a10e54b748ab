"""
Moving a function between Z_n and Z_m by zero-padding or truncation.

``tilde(f, m)`` keeps ``f(x)`` for ``0 <= x < min(n, m)`` and is zero
elsewhere.  Its spectrum is a weighted sum of the source spectrum::

    ghat(beta) = sum_alpha fhat(alpha) * w(alpha, beta)
    w(alpha, beta) = (1/m) sum_{x < l} exp(2 pi i ((m/n) alpha - beta) x / m)

where ``l = min(n, m)``.  The exponent is handled as the exact integer
``m*alpha - n*beta`` over ``n*m`` so the integral case is detected exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core_dft import FunctionTable, Spectrum, circ_dist, nearest_int, scaled_frequency
from .errors import PreconditionError

# Below this many terms the kernel is summed directly.
DIRECT_SUM_MAX_TERMS = 64
_SIN_FLOOR = 1e-12


def tilde(f: FunctionTable, m: int) -> FunctionTable:
    """Zero-pad (m > n) or truncate (m < n) ``f`` onto Z_m."""
    if m < 1:
        raise PreconditionError(f"target modulus must be >= 1, got {m}")
    ell = min(f.modulus, m)
    out = np.zeros(m, dtype=np.complex128)
    out[:ell] = f.values[:ell]
    return FunctionTable(out)


def geometric_sum_closed_form(x, N: int) -> complex:
    """``sum_{k=0}^{N} e(x k)`` with ``e(t) = exp(2 pi i t)``.

    Uses ``e(xN/2) sin(pi x (N+1)) / sin(pi x)`` for non-integral ``x``.
    """
    if N < 0:
        raise PreconditionError(f"N must be non-negative, got {N}")
    if Fraction(x).denominator == 1:
        return complex(N + 1)
    x = float(x)
    phase = np.exp(1j * np.pi * x * N)
    return complex(phase * math.sin(math.pi * x * (N + 1)) / math.sin(math.pi * x))


def inv_sin_bound(x, k: int) -> float:
    """Upper bound ``k / (2 |x|_k)`` on ``1/|sin(pi x / k)|``."""
    d = circ_dist(x, k)
    if d == 0:
        raise PreconditionError(f"x={x} is a multiple of k={k}; 1/sin is unbounded there")
    return float(k / (2 * d))


def is_exact_image(alpha: int, n: int, beta: int, m: int) -> bool:
    """True iff ``beta == (m/n) alpha`` in Z_m, decided in integers."""
    return (m * alpha - n * beta) % (n * m) == 0


def _kernel(p: np.ndarray, n: int, m: int) -> np.ndarray:
    """Weights for integer exponent numerators ``p`` (reduced mod n*m)."""
    ell = min(n, m)
    nm = n * m
    p = np.asarray(p, dtype=np.int64) % nm
    out = np.empty(p.shape, dtype=np.complex128)
    exact = p == 0
    out[exact] = ell / m

    rest = ~exact
    if ell <= DIRECT_SUM_MAX_TERMS:
        direct = rest
    else:
        pr = p[rest]
        sin_den = np.sin(np.pi * pr / nm)
        direct = np.zeros(p.shape, dtype=bool)
        small = np.abs(sin_den) < _SIN_FLOOR
        idx = np.flatnonzero(rest)
        direct.flat[idx[small]] = True
        keep = ~small
        pr, sin_den = pr[keep], sin_den[keep]
        phase = np.exp(1j * np.pi * ((pr * (ell - 1)) % (2 * nm)) / nm)
        sin_num = np.sin(np.pi * ((pr * ell) % (2 * nm)) / nm)
        out.flat[idx[keep]] = phase * sin_num / sin_den / m

    if np.any(direct):
        pd = p[direct]
        x = np.arange(ell, dtype=np.int64)
        terms = np.exp(2j * np.pi * ((pd[:, None] * x[None, :]) % nm) / nm)
        out[direct] = terms.sum(axis=1) / m
    return out


def weight(alpha: int, n: int, beta: int, m: int) -> complex:
    """The transport weight ``<tilde(chi_{alpha,n}), chi_{beta,m}>``."""
    p = np.array([m * (alpha % n) - n * (beta % m)])
    return complex(_kernel(p, n, m)[0])


def weight_direct(alpha: int, n: int, beta: int, m: int) -> complex:
    """Plain l-term sum of the transport weight (no closed form)."""
    ell = min(n, m)
    p = (m * alpha - n * beta) % (n * m)
    x = np.arange(ell, dtype=np.int64)
    return complex(np.exp(2j * np.pi * ((p * x) % (n * m)) / (n * m)).sum() / m)


@dataclass(frozen=True)
class TransportKernel:
    """Weights carrying spectra on Z_source_modulus to Z_target_modulus."""

    source_modulus: int
    target_modulus: int

    def __post_init__(self):
        if self.source_modulus < 1 or self.target_modulus < 1:
            raise PreconditionError("moduli must be positive")

    @property
    def ell(self) -> int:
        return min(self.source_modulus, self.target_modulus)

    def weight(self, alpha: int, beta: int) -> complex:
        return weight(alpha, self.source_modulus, beta, self.target_modulus)

    def matrix(self) -> np.ndarray:
        """Dense ``(n, m)`` array with ``W[alpha, beta]``."""
        n, m = self.source_modulus, self.target_modulus
        a = np.arange(n, dtype=np.int64)[:, None]
        b = np.arange(m, dtype=np.int64)[None, :]
        return _kernel(m * a - n * b, n, m)


def transport_spectrum(s: Spectrum, m: int) -> Spectrum:
    """Spectrum of ``tilde(idft(s), m)`` computed from the weights alone."""
    kernel = TransportKernel(s.modulus, m)
    return Spectrum(s.coeffs @ kernel.matrix())


def coeff_upper_bound(alpha: int, n: int, beta: int, m: int) -> float:
    """``min(l/m, 1 / (2 |(m/n) alpha - beta|_m))`` for a non-image ``beta``.

    Bounds ``|weight(alpha, n, beta, m)|``.  At the exact image the weight
    magnitude is ``l/m`` and no bound is returned.
    """
    if is_exact_image(alpha, n, beta, m):
        raise PreconditionError(
            f"beta={beta} is the exact image of alpha={alpha}; |weight| = l/m there"
        )
    ell = min(n, m)
    d = circ_dist(scaled_frequency(alpha, n, m) - beta, m)
    return min(ell / m, float(1 / (2 * d)))


def coeff_lower_bound(alpha: int, n: int, m: int) -> float:
    """Lower bound on ``|weight(alpha, n, nearest_image(alpha, n, m), m)|``."""
    if n < 1 or m < 1:
        raise PreconditionError("moduli must be positive")
    ell = min(n, m)
    c = scaled_frequency(alpha, n, m)
    r = float(circ_dist(c - nearest_int(c), m))
    radicand = max(0.0, 1.0 - (math.pi**2 * ell**2 / (3 * m**2)) * r**2)
    return max(2 * ell / (math.pi * m), (ell / m) * math.sqrt(radicand))


def nearest_image(alpha: int, n: int, m: int) -> int:
    """Residue of the closest integer to (m/n) alpha in Z_m."""
    return nearest_int(scaled_frequency(alpha, n, m)) % m
