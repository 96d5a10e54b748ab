import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_shift.core_dft import FunctionTable, IndexSet, Spectrum, character, dft, norm2_sq, tail_energy
from spectral_shift.domain_shift import tilde
from spectral_shift.errors import PreconditionError
from spectral_shift.estimator import QueryFunction
from spectral_shift.recovery import (
    EPS_PRIME_GRID,
    _tau_prime,
    HeavyCoeff,
    RecoveryConfig,
    backend_exact_fft,
    candidate_preimages,
    derive_params,
    isolate_interval_peaks,
    is_power_of_two,
    next_power_of_two,
    pullback_mask,
    random_unit,
    recover_heavy,
    residual_subtract,
    scale_permute,
)
from spectral_shift.testfuncs import FunctionSpec, alternating_sign, make


def _truth(f, tau):
    return set(np.flatnonzero(dft(f).sq_magnitudes > tau).tolist())


# -- parameters -------------------------------------------------------------------


def test_power_of_two_helpers():
    assert next_power_of_two(48) == 64 and next_power_of_two(64) == 64 and next_power_of_two(1) == 1
    assert is_power_of_two(32) and not is_power_of_two(48)


def test_params_power_of_two_n():
    p = derive_params(64, 0.3, 1.0)
    assert p.m == 64 and p.t == 1


def test_params_n48():
    p = derive_params(48, 0.3, 1.0)
    assert p.m == 64 and p.tau_prime > 0
    # at least tau' of the energy survives: the sound numerator is positive at the chosen eps'
    t = p.t
    assert t * 0.3 - p.eps_prime - 2 * math.sqrt(t * (1 - 0.3) * p.eps_prime) > 0
    # chosen eps' maximises tau' over the grid
    grid = [_tau_prime(t, 0.3, 1.0, 0.3 * 2.0**-j)[0] for j in range(1, EPS_PRIME_GRID + 1)]
    assert p.tau_prime == max(grid)
    assert p.radius == pytest.approx((1 / 0.3) * 1 / (2 * p.eps_prime) + 1)


def test_params_reject_bad_tau():
    with pytest.raises(PreconditionError):
        derive_params(10, 0, 1.0)
    with pytest.raises(PreconditionError):
        derive_params(10, 2.0, 1.0)


@given(st.integers(2, 2000), st.floats(0.01, 0.9))
def test_tau_prime_guarantee(n, frac):
    # a single tau-heavy character always leaves a tau'-heavy beta in the padded spectrum
    tau = frac
    p = derive_params(n, tau, 1.0)
    alpha = n // 3
    g = tilde(character(alpha, n), p.m)
    assert len(backend_exact_fft(g, p.tau_prime)) >= 1


# -- scaling ------------------------------------------------------------------------


def test_scale_identity_and_rejection():
    f = FunctionTable(np.arange(6.0))
    assert np.array_equal(scale_permute(f, 1).values, f.values)
    with pytest.raises(PreconditionError):
        scale_permute(f, 4)


@pytest.mark.parametrize("n", range(2, 33))
def test_scaling_permutes_spectrum(n):
    rng = np.random.default_rng(n)
    f = FunctionTable(rng.normal(size=n) + 1j * rng.normal(size=n))
    s = dft(f).coeffs
    for c in range(1, n):
        if math.gcd(c, n) != 1:
            continue
        h = dft(scale_permute(f, c)).coeffs
        cinv = pow(c, -1, n)
        # hhat(beta) = fhat(c^{-1} beta)
        assert np.allclose(h, s[(cinv * np.arange(n)) % n], atol=1e-9)
        # a character at alpha moves to c alpha
        delta = dft(scale_permute(character(1, n), c)).coeffs
        assert abs(delta[c % n]) == pytest.approx(1)


def test_random_unit_is_unit():
    rng = np.random.default_rng(0)
    for n in (3, 10, 48, 97):
        assert all(math.gcd(random_unit(n, rng), n) == 1 for _ in range(20))


# -- backend ----------------------------------------------------------------------------


def test_backend_examples():
    assert backend_exact_fft(character(5, 16), 0.5).members == (5,)
    assert len(backend_exact_fft(FunctionTable(np.zeros(16)), 0.5)) == 0
    g = tilde(alternating_sign(63), 64)
    assert backend_exact_fft(g, 1 / 64**2 + 1e-9).members == (32,)
    with pytest.raises(PreconditionError):
        backend_exact_fft(FunctionTable(np.ones(12)), 0.1)


# -- residuals and candidates -------------------------------------------------------------


def test_residual_examples():
    f = FunctionTable(np.random.default_rng(0).normal(size=10))
    assert np.array_equal(residual_subtract(f, []).values, f.values)
    assert np.allclose(residual_subtract(character(3, 10), [HeavyCoeff(3, 1.0)]).values, 0)
    with pytest.raises(PreconditionError):
        residual_subtract(f, [HeavyCoeff(1, 1.0), HeavyCoeff(1, 2.0)])


def test_residual_removes_exactly_one_coefficient():
    f = make(FunctionSpec("planted_sparse", n=40, k=3, seed=2, noise=0.05))
    s = dft(f)
    top = int(np.argmax(s.sq_magnitudes))
    before = norm2_sq(f)
    after = norm2_sq(residual_subtract(f, [HeavyCoeff(top, complex(s[top]))]))
    assert before - after == pytest.approx(float(s.sq_magnitudes[top]))
    assert tail_energy(s, IndexSet(40, (top,))) == pytest.approx(after)


def test_isolate_peaks_examples():
    single = IndexSet(32, (7,))
    assert isolate_interval_peaks(single, lambda b: 0.1, 2) == single
    spec = np.zeros(32, dtype=complex)
    spec[[10, 11, 12]] = (0.3, 0.9, 0.4)
    got = isolate_interval_peaks(IndexSet(32, (10, 11, 12)), Spectrum(spec), 2)
    assert got.members == (11,)
    with pytest.raises(PreconditionError):
        isolate_interval_peaks(single, lambda b: 0, 0)


def test_isolate_peaks_planted_pair():
    f = make(FunctionSpec("planted_sparse", n=100, frequencies=(10, 60), magnitudes=(1.0, 0.9), seed=0))
    p = derive_params(100, 0.5, norm2_sq(f))
    g = tilde(f, p.m)
    betas = backend_exact_fft(g, 0.05)
    assert len(isolate_interval_peaks(betas, dft(g), 2)) == 2


def test_candidate_preimages_and_mask():
    assert candidate_preimages(13, 100, 128) == (10, 11)
    assert candidate_preimages(64, 48, 64) == (48 % 48,)
    mask = pullback_mask([32], 48, 64, 2)
    assert set(np.flatnonzero(mask)) == {22, 23, 24, 25, 26}
    assert pullback_mask([1], 10, 16, 100).all()


# -- end to end ---------------------------------------------------------------------------


def test_recover_single_character():
    for alpha in (0, 7, 31, 47):
        result = recover_heavy(character(alpha, 48), 0.5)
        assert result.frequencies == {alpha} and result.converged


@pytest.mark.parametrize("seed", range(100))
def test_recover_two_planted(seed):
    rng = np.random.default_rng(seed)
    a1, a2 = (int(a) for a in rng.choice(100, 2, replace=False))
    f = character(a1, 100) * 0.9 + character(a2, 100) * 0.8
    assert recover_heavy(f, 0.5).frequencies == {a1, a2}


def test_recover_alternating_cancellation():
    f = alternating_sign(63)
    tau = 0.3
    truth = _truth(f, tau)
    assert len(truth) == 2
    result = recover_heavy(f, tau)
    assert result.frequencies == truth and result.converged


@pytest.mark.parametrize("seed", range(5))
def test_recover_with_scaling(seed):
    f = make(FunctionSpec("planted_sparse", n=90, k=3, seed=seed))
    result = recover_heavy(f, 0.5, RecoveryConfig(scaling=True, seed=seed))
    assert result.frequencies == _truth(f, 0.5)


@pytest.mark.parametrize("seed", range(5))
def test_recover_with_sampling(seed):
    f = make(FunctionSpec("planted_sparse", n=120, k=2, seed=seed, magnitudes=(1.0, 0.8)))
    result = recover_heavy(QueryFunction.from_table(f), 0.2, RecoveryConfig(estimation="sampling", seed=seed))
    assert result.frequencies == _truth(f, 0.2)


def test_recover_deterministic():
    f = make(FunctionSpec("planted_sparse", n=77, k=3, seed=1))
    cfg = RecoveryConfig(estimation="sampling", scaling=True, seed=5)
    assert recover_heavy(f, 0.3, cfg) == recover_heavy(f, 0.3, cfg)


def test_recover_iteration_cap_reports_not_converged():
    f = alternating_sign(63)
    result = recover_heavy(f, 0.3, RecoveryConfig(max_iters=1))
    assert not result.converged and result.iterations == 1


def test_recover_rejects_unknown_mode():
    with pytest.raises(PreconditionError):
        recover_heavy(character(1, 8), 0.5, RecoveryConfig(estimation="magic"))
