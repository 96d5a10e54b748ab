import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_shift.core_dft import FunctionTable, character, dft, idft
from spectral_shift.errors import PreconditionError
from spectral_shift.estimator import (
    EstimateParams,
    QueryFunction,
    estimate_coeff,
    estimate_coeffs,
    heavy_decisions,
    heavy_delta,
    is_tau_heavy,
    sample_count,
)
from spectral_shift.testfuncs import flat_spectrum


def test_sample_count_examples():
    assert sample_count(1, 4 / math.e**4, 1) == 16
    assert sample_count(0.1, 0.01, 1) == math.ceil(400 * math.log(400)) == 2397


@given(st.floats(0.01, 1), st.floats(0.001, 0.5), st.floats(0.1, 5))
def test_sample_count_scaling(delta, p, sup):
    exact = 4 * sup**2 / delta**2 * math.log(4 / p)
    assert sample_count(delta, p, sup) == math.ceil(exact)
    halved = 4 * sup**2 / (delta / 2) ** 2 * math.log(4 / p)
    assert halved == pytest.approx(4 * exact)


@pytest.mark.parametrize("args", [(0, 0.1, 1), (0.1, 0, 1), (0.1, 1, 1), (0.1, 0.1, 0)])
def test_sample_count_rejects(args):
    with pytest.raises(PreconditionError):
        sample_count(*args)


def test_query_function_enforces_known_sup():
    q = QueryFunction(4, lambda x: np.full(len(x), 2.0), known_sup=1.0)
    with pytest.raises(PreconditionError):
        q(np.arange(3))
    q = QueryFunction.from_table(FunctionTable([1, -1, 1]))
    assert np.allclose(q([3, 4]), [1, -1])
    assert q.known_sup == 1


def test_estimate_constant_and_character_exact():
    rng = np.random.default_rng(0)
    params = EstimateParams.for_bound(0.2, 0.1, 1.0)
    q = QueryFunction.from_table(FunctionTable(np.full(16, 0.7 + 0.1j)))
    assert estimate_coeff(q, 0, params, rng) == pytest.approx(0.7 + 0.1j, abs=1e-12)
    q = QueryFunction.from_table(character(5, 16))
    assert estimate_coeff(q, 5, params, rng) == pytest.approx(1, abs=1e-12)


def test_estimator_failure_rate_random_signs():
    n, alpha = 256, 13
    f = FunctionTable(np.random.default_rng(1).integers(0, 2, n) * 2.0 - 1)
    truth = dft(f)[alpha]
    q = QueryFunction.from_table(f)
    params = EstimateParams.for_bound(0.05, 0.01, 1.0)
    rng = np.random.default_rng(2)
    fails = sum(abs(estimate_coeff(q, alpha, params, rng) - truth) > 0.05 for _ in range(1000))
    assert fails / 1000 < 0.01


def test_estimates_are_deterministic_under_seed():
    q = QueryFunction.from_table(FunctionTable(np.random.default_rng(3).normal(size=50)))
    params = EstimateParams.for_bound(0.1, 0.1, q.known_sup)
    a = estimate_coeff(q, 7, params, np.random.default_rng(42))
    b = estimate_coeff(q, 7, params, np.random.default_rng(42))
    assert a == b


def test_shared_sample_estimates_match_per_frequency_means():
    n = 40
    f = FunctionTable(np.random.default_rng(4).normal(size=n) + 0j)
    q = QueryFunction.from_table(f)
    params = EstimateParams(0.1, 0.1, 500)
    alphas = [0, 3, 17, 39]
    got = estimate_coeffs(q, alphas, params, np.random.default_rng(9))
    x = np.random.default_rng(9).integers(0, n, size=500)
    for a, value in zip(alphas, got):
        direct = np.mean(f.values[x] * np.exp(-2j * np.pi * a * x / n))
        assert value == pytest.approx(direct, abs=1e-12)


def test_heavy_examples():
    rng = np.random.default_rng(0)
    q = QueryFunction.from_table(character(3, 20))
    assert is_tau_heavy(q, 3, 0.5, 0.01, rng).accept
    zero = QueryFunction.from_table(FunctionTable(np.zeros(20)))
    for a in range(20):
        assert not is_tau_heavy(zero, a, 0.5, 0.01, rng).accept
    with pytest.raises(PreconditionError):
        is_tau_heavy(q, 3, 0, 0.01, rng)


def test_heavy_flat_spectrum_accepts_only_unit_coefficient():
    n = 64
    q = QueryFunction.from_table(idft(flat_spectrum(9, n)))
    decisions = heavy_decisions(q, range(n), 0.5, 0.01, np.random.default_rng(5))
    assert [a for a, d in enumerate(decisions) if d.accept] == [9]


def test_heavy_delta_separates_gray_zone():
    tau = 0.3
    d = heavy_delta(tau)
    assert (math.sqrt(2 * tau) - d) ** 2 >= tau
    assert (math.sqrt(tau / 2) + d) ** 2 < tau
    decision = is_tau_heavy(QueryFunction.from_table(character(1, 8)), 1, tau, 0.1, np.random.default_rng(0))
    assert decision.gray_zone == (tau / 2, 2 * tau)
    assert decision.margin == pytest.approx(decision.sq_magnitude - tau)
