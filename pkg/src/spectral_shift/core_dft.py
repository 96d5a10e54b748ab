"""
Reference DFT on the cyclic group Z_n.

Conventions
-----------
The forward transform carries the 1/n factor::

    fhat(alpha) = <f, chi_alpha> = (1/n) * sum_x f(x) * conj(chi_alpha(x))
    f(x)        = sum_alpha fhat(alpha) * chi_alpha(x)

with ``chi_alpha(x) = exp(2 pi i alpha x / n)``.  Under this convention
Parseval reads ``(1/n) sum |f(x)|^2 == sum |fhat(alpha)|^2``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import PreconditionError

TOLERANCE = float(os.environ.get("SPECTRAL_SHIFT_TOLERANCE", "1e-9"))


def close(a, b, tol=None):
    """Shared comparison: absolute below magnitude 1, relative above."""
    tol = TOLERANCE if tol is None else tol
    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return bool(np.all(np.abs(a - b) <= tol * scale))


class _ComplexVector:
    """Immutable 1-D complex array indexed by Z_n."""

    _field = "values"

    def _freeze(self, data):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise PreconditionError(
                f"{type(self).__name__} needs a non-empty 1-D sequence, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise PreconditionError(f"{type(self).__name__} entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, self._field, arr)

    @property
    def modulus(self) -> int:
        return int(getattr(self, self._field).size)

    def __len__(self):
        return self.modulus

    def __getitem__(self, idx):
        return getattr(self, self._field)[idx]


@dataclass(frozen=True, eq=False)
class FunctionTable(_ComplexVector):
    """A function f: Z_n -> C stored densely; ``values[x] = f(x)``."""

    values: np.ndarray

    def __post_init__(self):
        self._freeze(self.values)

    def __add__(self, other):
        _same_modulus(self, other)
        return FunctionTable(self.values + other.values)

    def __sub__(self, other):
        _same_modulus(self, other)
        return FunctionTable(self.values - other.values)

    def __mul__(self, scalar):
        return FunctionTable(self.values * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum(_ComplexVector):
    """Fourier coefficients of a function on Z_n; ``coeffs[alpha] = fhat(alpha)``."""

    _field = "coeffs"
    coeffs: np.ndarray

    def __post_init__(self):
        self._freeze(self.coeffs)

    @property
    def sq_magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2


def _same_modulus(a, b):
    if a.modulus != b.modulus:
        raise PreconditionError(f"modulus mismatch: {a.modulus} vs {b.modulus}")


@dataclass(frozen=True)
class IndexSet:
    """A subset of Z_modulus, kept as a sorted tuple of residues."""

    modulus: int
    members: tuple = ()

    def __post_init__(self):
        if self.modulus < 1:
            raise PreconditionError(f"modulus must be positive, got {self.modulus}")
        members = tuple(sorted({int(a) for a in self.members}))
        if members and (members[0] < 0 or members[-1] >= self.modulus):
            raise PreconditionError(
                f"IndexSet members must lie in [0, {self.modulus}), got {members}"
            )
        object.__setattr__(self, "members", members)

    @classmethod
    def from_residues(cls, modulus: int, residues: Iterable[int]) -> "IndexSet":
        return cls(modulus, tuple(int(a) % modulus for a in residues))

    @classmethod
    def full(cls, modulus: int) -> "IndexSet":
        return cls(modulus, tuple(range(modulus)))

    @classmethod
    def interval(cls, modulus: int, center, radius) -> "IndexSet":
        """All residues b with ``circ_dist(center - b, modulus) <= radius``.

        ``center`` and ``radius`` are converted to exact fractions, so edge
        membership is decided without rounding.
        """
        center = Fraction(center)
        radius = Fraction(radius)
        if radius < 0:
            return cls(modulus)
        lo = math.ceil(center - radius)
        hi = math.floor(center + radius)
        if hi - lo + 1 >= modulus:
            return cls.full(modulus)
        return cls.from_residues(modulus, range(lo, hi + 1))

    def union(self, *others: "IndexSet") -> "IndexSet":
        members = set(self.members)
        for other in others:
            if other.modulus != self.modulus:
                raise PreconditionError("cannot union IndexSets over different moduli")
            members.update(other.members)
        return IndexSet(self.modulus, tuple(members))

    def as_array(self) -> np.ndarray:
        return np.array(self.members, dtype=np.int64)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.modulus, dtype=bool)
        out[list(self.members)] = True
        return out

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return int(item) in set(self.members)


def character(alpha: int, n: int) -> FunctionTable:
    """The additive character x -> exp(2 pi i alpha x / n)."""
    x = np.arange(n, dtype=np.int64)
    return FunctionTable(np.exp(2j * np.pi * ((alpha * x) % n) / n))


def dft_direct(f: FunctionTable) -> Spectrum:
    """O(n^2) reference transform, exponents reduced mod n before scaling."""
    n = f.modulus
    idx = np.arange(n, dtype=np.int64)
    phase = np.outer(idx, idx) % n
    kernel = np.exp(-2j * np.pi * phase / n)
    return Spectrum(kernel @ f.values / n)


def dft(f: FunctionTable) -> Spectrum:
    """Forward transform with the 1/n factor (FFT path, checked against ``dft_direct``)."""
    return Spectrum(np.fft.fft(f.values) / f.modulus)


def idft(s: Spectrum) -> FunctionTable:
    """Inverse transform: ``values[x] = sum_alpha coeffs[alpha] chi_alpha(x)``."""
    return FunctionTable(np.fft.ifft(s.coeffs) * s.modulus)


def norm2_sq(f: FunctionTable) -> float:
    """Squared norm ``(1/n) sum |f(x)|^2``."""
    return float(np.mean(np.abs(f.values) ** 2))


def inner(f: FunctionTable, g: FunctionTable) -> complex:
    """Normalized inner product ``(1/n) sum f(x) conj(g(x))``."""
    _same_modulus(f, g)
    return complex(np.mean(f.values * np.conj(g.values)))


def project(s: Spectrum, gamma: IndexSet) -> Spectrum:
    """Keep the coefficients indexed by ``gamma``, zero the rest."""
    _check_gamma(s, gamma)
    return Spectrum(np.where(gamma.mask(), s.coeffs, 0))


def tail_energy(s: Spectrum, gamma: IndexSet) -> float:
    """Energy outside ``gamma``; equals ``norm2_sq(f - f|gamma)`` by Parseval."""
    _check_gamma(s, gamma)
    return float(np.sum(s.sq_magnitudes[~gamma.mask()]))


def _check_gamma(s, gamma):
    if gamma.modulus != s.modulus:
        raise PreconditionError(
            f"IndexSet modulus {gamma.modulus} does not match spectrum modulus {s.modulus}"
        )


def circ_dist(x, k):
    """Distance from ``x`` to the nearest integer multiple of ``k``.

    Exact for ``int`` and ``Fraction`` input; the result lies in ``[0, k/2]``.
    """
    if k < 1:
        raise PreconditionError(f"circ_dist needs k >= 1, got {k}")
    d = abs(x) % k
    return min(d, k - d)


def nearest_int(x) -> int:
    """Closest integer to ``x``, ties to even (Python ``round`` semantics)."""
    return int(round(x))


def scaled_frequency(alpha: int, n: int, m: int) -> Fraction:
    """The exact rational (m/n) * alpha."""
    return Fraction(m * alpha, n)
