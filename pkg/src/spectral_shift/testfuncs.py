"""
Generators for the function families used throughout the test corpus.

Every generator is deterministic given its arguments; random families take
an explicit integer ``seed`` and draw from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .core_dft import FunctionTable, Spectrum, character, circ_dist, idft
from .errors import ConfigError, PreconditionError

KINDS = (
    "character",
    "noisy_character",
    "bit",
    "msb",
    "alternating_sign",
    "switch_down",
    "tightness_random_sign",
    "planted_sparse",
    "flat_spectrum",
    "explicit_table",
)


@dataclass(frozen=True)
class FunctionSpec:
    """Flat description of one member of a function family.

    Only the fields relevant to ``kind`` are consulted; see ``make``.
    """

    kind: str
    n: int | None = None
    alpha: int | None = None
    i: int | None = None
    seed: int | None = None
    k: int | None = None
    noise_bound: float | None = None
    magnitudes: tuple | None = None
    frequencies: tuple | None = None
    noise: float | None = None
    values: tuple | None = field(default=None, repr=False)

    def to_text(self) -> str:
        """Canonical ``key=value`` document, one key per line, fixed order."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = " ".join(repr(complex(x)) if f.name == "values" else repr(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FunctionSpec":
        """Parse a ``key=value`` document (newline or comma separated)."""
        raw = {}
        for chunk in text.replace(",", "\n").splitlines():
            chunk = chunk.strip()
            if not chunk or chunk.startswith("#"):
                continue
            if "=" not in chunk:
                raise ConfigError(f"expected key=value, got {chunk!r}")
            key, _, value = chunk.partition("=")
            raw[key.strip()] = value.strip()
        if "kind" not in raw:
            raise ConfigError("function spec needs a 'kind'")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown spec keys: {sorted(unknown)}")
        kwargs = {"kind": raw.pop("kind")}
        try:
            for key, value in raw.items():
                if key in ("n", "alpha", "i", "seed", "k"):
                    kwargs[key] = int(value)
                elif key in ("noise_bound", "noise"):
                    kwargs[key] = float(value)
                elif key == "magnitudes":
                    kwargs[key] = tuple(float(v) for v in value.split())
                elif key == "frequencies":
                    kwargs[key] = tuple(int(v) for v in value.split())
                elif key == "values":
                    kwargs[key] = tuple(complex(v) for v in value.split())
        except ValueError as exc:
            raise ConfigError(f"bad value in function spec: {exc}") from exc
        return cls(**kwargs)


def _require(cond, message):
    if not cond:
        raise PreconditionError(message)


def _need(spec, *names):
    missing = [name for name in names if getattr(spec, name) is None]
    if missing:
        raise PreconditionError(f"{spec.kind} needs parameters {missing}")


def make(spec: FunctionSpec) -> FunctionTable:
    """Build the table described by ``spec``."""
    kind = spec.kind
    if kind not in KINDS:
        raise PreconditionError(f"unknown function kind {kind!r}; expected one of {KINDS}")
    if kind == "explicit_table":
        _need(spec, "values")
        if spec.n is not None:
            _require(spec.n == len(spec.values), "explicit_table: n disagrees with len(values)")
        return FunctionTable(np.array(spec.values))
    _need(spec, "n")
    n = spec.n
    _require(n >= 1, f"{kind}: n must be positive, got {n}")
    if kind == "character":
        _need(spec, "alpha")
        return character(spec.alpha, n)
    if kind == "noisy_character":
        _need(spec, "alpha")
        return noisy_character(spec.alpha, n, spec.noise_bound or 0.0, spec.seed or 0)
    if kind == "bit":
        _need(spec, "i")
        return bit_function(spec.i, n)
    if kind == "msb":
        return msb(n)
    if kind == "alternating_sign":
        return alternating_sign(n)
    if kind == "switch_down":
        _need(spec, "alpha")
        return switch_down(n, spec.alpha)
    if kind == "tightness_random_sign":
        _need(spec, "alpha", "seed")
        return tightness_pair(n, spec.alpha, spec.seed)[0]
    if kind == "planted_sparse":
        _need(spec, "seed")
        return idft(planted_spectrum(spec))
    if kind == "flat_spectrum":
        _need(spec, "alpha")
        return idft(flat_spectrum(spec.alpha, n))
    raise AssertionError(kind)  # pragma: no cover


def bit_table(i: int, k: int) -> FunctionTable:
    """``bit_i(x) = (-1)^{x_i}`` on Z_{2^k}."""
    _require(0 <= i < k, f"bit_table needs 0 <= i < k, got i={i}, k={k}")
    return bit_function(i, 2**k)


def bit_function(i: int, n: int) -> FunctionTable:
    """``bit_i`` evaluated on Z_n (needs n > 2^i)."""
    _require(i >= 0 and n > 2**i, f"bit function needs n > 2^i, got i={i}, n={n}")
    x = np.arange(n, dtype=np.int64)
    return FunctionTable(1.0 - 2.0 * ((x >> i) & 1))


def bit_spectrum_closed_form(i: int, k: int) -> Spectrum:
    """Spectrum of ``bit_table(i, k)`` from its product factorisation.

    Writing ``x = y + 2^i b + 2^{i+1} z`` splits the transform into a
    partial geometric sum over ``y``, the factor ``1 - w^{-2^i alpha}`` and
    a full root-of-unity sum over ``z``.
    """
    _require(0 <= i < k, f"need 0 <= i < k, got i={i}, k={k}")
    N = 2**k
    alpha = np.arange(N, dtype=np.int64)
    y = np.arange(2**i, dtype=np.int64)
    first = np.exp(-2j * np.pi * ((alpha[:, None] * y[None, :]) % N) / N).sum(axis=1)
    middle = 1 - np.exp(-2j * np.pi * ((alpha * 2**i) % N) / N)
    period = 2 ** (k - i - 1)
    third = np.where(alpha % period == 0, period, 0)
    return Spectrum(first * middle * third / N)


def bit_spectrum_support_and_bound(i: int, k: int, alpha: int):
    """Whether ``bit_i`` has a nonzero coefficient at ``alpha``, and a bound on it.

    The support is the odd multiples of ``2^{k-i-1}``; on it the magnitude
    is at most ``2^{k-i} / |alpha|_{2^k}``.  Off the support the bound is 0.
    """
    _require(0 <= i < k, f"need 0 <= i < k, got i={i}, k={k}")
    N = 2**k
    alpha %= N
    step = 2 ** (k - i - 1)
    nonzero = alpha % step == 0 and (alpha // step) % 2 == 1
    if not nonzero:
        return False, 0.0
    return True, 2 ** (k - i) / circ_dist(alpha, N)


def msb(n: int) -> FunctionTable:
    """Most significant bit on Z_n: 0 below 2^k, 1 from 2^k on, with 2^k < n <= 2^{k+1}."""
    _require(n >= 2, f"msb needs n >= 2, got {n}")
    half = 2 ** (math.ceil(math.log2(n)) - 1)
    return FunctionTable((np.arange(n) >= half).astype(float))


def alternating_sign(n: int) -> FunctionTable:
    """``+1`` on even x, ``-1`` on odd x; defined for odd n."""
    _require(n % 2 == 1, f"alternating_sign needs odd n, got {n}")
    return FunctionTable(1.0 - 2.0 * (np.arange(n) % 2))


def alternating_target_modulus(n: int, k: int = 0) -> int:
    """Target modulus ``n + 1 + 2k`` for the alternating-sign cancellation example.

    The interesting scales are ``k = 0`` and ``k = floor(sqrt(n))``.
    """
    _require(k >= 0, "k must be non-negative")
    return n + 1 + 2 * k


def switch_down(n: int, alpha: int) -> FunctionTable:
    """Zero on ``[0, n/2)``, ``chi_{alpha,n}`` on ``[n/2, n)``."""
    _require(n % 2 == 0, f"switch_down needs even n, got {n}")
    values = character(alpha, n).values.copy()
    values[: n // 2] = 0
    return FunctionTable(values)


def noisy_character(alpha: int, n: int, noise_bound: float, seed: int) -> FunctionTable:
    """``w_n^{alpha x + e(x)}`` with ``e(x)`` uniform on ``[-noise_bound, noise_bound]``."""
    _require(noise_bound >= 0, "noise_bound must be non-negative")
    rng = np.random.default_rng(seed)
    x = np.arange(n, dtype=np.int64)
    e = rng.uniform(-noise_bound, noise_bound, size=n) if noise_bound > 0 else np.zeros(n)
    return FunctionTable(np.exp(2j * np.pi * (((alpha * x) % n) + e) / n))


def flat_spectrum(alpha: int, n: int) -> Spectrum:
    """Coefficient 1 at ``alpha`` and ``1/sqrt(n)`` everywhere else."""
    coeffs = np.full(n, 1 / math.sqrt(n), dtype=np.complex128)
    coeffs[alpha % n] = 1.0
    return Spectrum(coeffs)


def planted_spectrum(spec: FunctionSpec) -> Spectrum:
    """Spectrum of a ``planted_sparse`` spec.

    ``k`` frequencies (or the explicit ``frequencies``) carry the given
    ``magnitudes`` (default 1) with uniform random phases.  With ``noise``
    set, every other coefficient gets magnitude uniform on ``[0, noise]``.
    """
    n = spec.n
    rng = np.random.default_rng(spec.seed)
    if spec.frequencies is not None:
        freqs = np.array([a % n for a in spec.frequencies], dtype=np.int64)
        _require(len(set(freqs.tolist())) == len(freqs), "planted frequencies must be distinct")
    else:
        _need(spec, "k")
        _require(0 <= spec.k <= n, f"planted_sparse needs 0 <= k <= n, got k={spec.k}")
        freqs = rng.choice(n, size=spec.k, replace=False)
    mags = np.ones(len(freqs)) if spec.magnitudes is None else np.array(spec.magnitudes, float)
    _require(len(mags) == len(freqs), "need one magnitude per planted frequency")
    coeffs = np.zeros(n, dtype=np.complex128)
    if spec.noise:
        noise = rng.uniform(0, spec.noise, n) * np.exp(2j * np.pi * rng.uniform(size=n))
        coeffs += noise
    coeffs[freqs] = mags * np.exp(2j * np.pi * rng.uniform(size=len(freqs)))
    return Spectrum(coeffs)


def planted_sparse(n: int, k: int, seed: int, magnitudes=None, noise=None) -> FunctionTable:
    spec = FunctionSpec(
        "planted_sparse",
        n=n,
        k=k,
        seed=seed,
        magnitudes=None if magnitudes is None else tuple(magnitudes),
        noise=noise,
    )
    return make(spec)


TIGHTNESS_OFFSETS = ((0, 0.5), (1, 0.318), (-1, 0.318), (3, 0.106), (-3, 0.106), (5, 0.063), (-5, 0.063))


def tightness_pair(n: int, alpha: int, seed: int):
    """Random signs on ``[0, n/2)`` followed by ``chi_{alpha,n}`` on ``[n/2, n)``.

    Returns the table and a list of ``(offset, lower_bound)`` pairs: the
    coefficient at ``alpha + offset`` is expected (with high probability,
    not surely) to exceed ``lower_bound``.
    """
    _require(n % 2 == 0 and n >= 2, f"tightness_pair needs even n, got {n}")
    m = n // 2
    signs = np.random.default_rng(seed).integers(0, 2, size=m) * 2 - 1
    values = character(alpha, n).values.copy()
    values[:m] = signs
    slack = 1 / math.sqrt(2 * n)
    expected = [(offset, level - slack) for offset, level in TIGHTNESS_OFFSETS]
    return FunctionTable(values), expected


def spread_instance(n: int, seed: int, max_size: int = 4):
    """Random ``(f, gamma, (L, C, tau))`` meeting the spread-apart hypotheses on Z_n.

    ``gamma`` is pairwise separated by more than ``20 C (ln(|gamma|/2) + 1)``,
    magnitudes on ``gamma`` lie in ``[L, C L]`` and every other coefficient
    stays below ``0.9`` times the admissible ``tau``.
    """
    rng = np.random.default_rng(seed)
    C = float(rng.uniform(1.05, 2.0))
    L = float(rng.uniform(0.1, 1.0))
    size = int(rng.integers(1, max_size + 1))
    while True:
        r_spread = 20 * C * (math.log(size / 2) + 1)
        gamma = _separated_sample(rng, n, size, r_spread)
        if gamma is not None:
            break
        size -= 1
        _require(size >= 1, f"cannot place a spread set in Z_{n}")
    tau = 0.9 * (L / 20) / (3 + 2 * math.log(n))
    coeffs = rng.uniform(0, tau, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    mags = rng.uniform(L, C * L, size)
    coeffs[gamma] = mags * np.exp(2j * np.pi * rng.uniform(size=size))
    return idft(Spectrum(coeffs)), tuple(int(a) for a in gamma), (L, C, tau)


def _separated_sample(rng, n, size, r_spread, tries=2000):
    for _ in range(tries):
        pts = rng.choice(n, size=size, replace=False)
        diffs = np.abs(pts[:, None] - pts[None, :]) % n
        dist = np.minimum(diffs, n - diffs)
        np.fill_diagonal(dist, n)
        if np.all(dist > r_spread):
            return np.sort(pts)
    return None
