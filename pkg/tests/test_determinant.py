import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbverify import special_functions as sf
from mbverify.determinant import (
    IllConditionedFitError,
    asymptotic_leading,
    at_nu,
    cross_factor,
    determinant_with_error,
    extract_residue,
    q_entry_integrand,
    q_kernel,
    q_matrix,
    r_via_determinant,
    residue_prediction_closed_form,
    residue_prediction_reduced,
    t_hat,
    vandermonde,
)
from mbverify.mb_model import MBParameterSet, build_integrand, closed_form_rhs, default_shift, tail_exponents
from mbverify.quadrature import ContourSpec, integrate_line, integrate_tensor
from mbverify.verification import random_params

import oracles
from conftest import rel, random_r


def test_q_kernel_at_origin():
    p = MBParameterSet("RPlus", 1, [0.4, 0.6], [0.5], 2.0)
    want = complex(mpmath.gamma(0.4) * mpmath.gamma(0.6) * mpmath.gamma(0.5) / mpmath.gamma(2))
    assert rel(q_kernel(p, 0), want) < 1e-14


def test_q_kernel_matches_oracle(rng):
    p = random_r(rng, 2)
    for _ in range(5):
        z = 0.1 + 1j * rng.uniform(-6, 6)
        al, be = [oracles.c(x) for x in p.alphas], [oracles.c(x) for x in p.betas]
        zz = oracles.c(z)
        want = mpmath.exp(1j * mpmath.pi * zz) * mpmath.rgamma(oracles.c(p.a) - zz)
        for x in al:
            want *= mpmath.gamma(x - zz)
        for b in be:
            want *= mpmath.gamma(zz + b)
        assert rel(q_kernel(p, z), complex(want)) < 1e-12


def test_q_kernel_signs_conjugate_for_real_parameters():
    p = MBParameterSet("RPlus", 1, [0.4, 0.6], [0.5], 2.0)
    for y in (0.3, 1.7, 4.0):
        assert abs(q_kernel(p, -1j * y, -1) - q_kernel(p, 1j * y, +1).conjugate()) < 1e-14


def test_q_kernel_pole():
    p = MBParameterSet("RPlus", 1, [0.4, 0.6], [0.5], 2.0)
    with pytest.raises(sf.PoleError):
        q_kernel(p, 0.4)


def test_n1_entry_is_r():
    p = random_params("RPlus", 1, 3, 0)
    q = q_matrix(p)
    assert q.entries.shape == (1, 1)
    assert rel(q.entries[0, 0], closed_form_rhs(p)) < 1e-9
    val, err = r_via_determinant(p)
    assert val == q.entries[0, 0]


@pytest.mark.parametrize("family", ["RPlus", "RMinus"])
def test_determinant_vs_tensor_quadrature_n2(family):
    p = random_params(family, 2, 3, 1)
    val, err = r_via_determinant(p)
    tens = integrate_tensor(build_integrand(p), ContourSpec.default(2, default_shift(p)), 2, tail_exponents=tail_exponents(p))
    assert abs(val - tens.value) <= err + tens.error_estimate
    assert rel(val, closed_form_rhs(p)) < 1e-7


@pytest.mark.parametrize("family", ["RPlus", "RMinus"])
def test_determinant_n3(family):
    p = random_params(family, 3, 3, 0)
    val, err = r_via_determinant(p)
    exact = closed_form_rhs(p)
    assert rel(val, exact) < 1e-6
    assert abs(val - exact) <= err


def test_real_parameters_give_conjugate_matrices():
    p = MBParameterSet("RPlus", 2, [0.5, 0.7, 0.9], [0.4, 0.65], 3.6)
    qp, qm = q_matrix(p, +1), q_matrix(p, -1)
    assert np.max(np.abs(qp.entries - qm.entries.conj())) < 1e-10


def test_q_matrix_rejects_divergent():
    p = MBParameterSet("RPlus", 1, [0.5, 0.5], [0.5], 1.2)
    with pytest.raises(ValueError, match="converge only if"):
        q_matrix(p)


def test_determinant_error_propagation():
    m = np.array([[2.0, 1.0], [1.0, 3.0]], dtype=complex)
    e = np.full((2, 2), 1e-3)
    det, err = determinant_with_error(m, e)
    assert det == pytest.approx(5)
    assert err == pytest.approx(1e-3 * (3 + 1 + 1 + 2))
    # bound holds for a random perturbation within the entry errors
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = rng.uniform(-1, 1, (2, 2)) * e
        assert abs(np.linalg.det(m + d) - det) <= err * 1.01


def test_vandermonde_factorization(rng):
    for N in (2, 3, 4):
        for _ in range(20):
            z = rng.uniform(-0.45, 0.45, N) + 1j * rng.uniform(-0.8, 0.8, N)
            t = sf.tan_pi(z)
            lhs = cross_factor(z)
            rhs = (-1) ** (N * (N - 1) // 2) * np.linalg.det(vandermonde(z)) * np.linalg.det(vandermonde(t))
            assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


@pytest.mark.parametrize("sign", [1, -1])
def test_t_hat_reduction(rng, sign):
    for N in (2, 3, 4):
        for _ in range(20):
            t = rng.normal(size=N - 1) + 1j * rng.normal(size=N - 1)
            lhs = np.linalg.det(t_hat(t, sign))
            rhs = (-1) ** (N - 1) * np.prod(t + sign * 1j) * np.linalg.det(vandermonde(t))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@pytest.mark.parametrize("sign", [1, -1])
def test_kernel_identity(rng, sign):
    z = rng.uniform(-0.45, 0.45, 200) + 1j * rng.uniform(-3, 3, 200)
    t = sf.tan_pi(z)
    rhs = sign * 1j * np.exp(-sign * 1j * np.pi * z) / np.cos(np.pi * z)
    # t ± i cancels where t ≈ ∓i, so compare on the scale of t itself
    assert np.max(np.abs(t + sign * 1j - rhs) / (1 + np.abs(t))) < 1e-12


def test_asymptotic_ratio_improves():
    p = random_params("RPlus", 2, 42, 0)
    for s in (1, -1):
        for m in (1, 2):
            for k in (1, 2):
                f = q_entry_integrand(p, m, k, s)
                dev = [abs(complex(f(-s * 1j * u)) / asymptotic_leading(p, s, m, k, u) - 1) for u in (20, 40, 400)]
                assert dev[1] <= 0.6 * dev[0]
                assert dev[2] < 0.05


def test_asymptotic_last_column_exponent():
    rng = np.random.default_rng(2)
    p = at_nu(random_r(rng, 3), 0.0)
    a1 = asymptotic_leading(p, +1, 1, 3, 10.0)
    a2 = asymptotic_leading(p, +1, 1, 3, 20.0)
    assert abs(a1 / a2) == pytest.approx(2.0, rel=1e-13)


def test_asymptotic_row_shift_by_two_flips_sign():
    p = random_params("RMinus", 3, 1, 0)
    assert asymptotic_leading(p, -1, 3, 2, 7.0) == pytest.approx(-asymptotic_leading(p, -1, 1, 2, 7.0), rel=1e-14)


def test_asymptotic_rejects_nonpositive_u():
    with pytest.raises(ValueError):
        asymptotic_leading(random_params("RPlus", 1, 1, 0), 1, 1, 1, 0.0)


def test_last_column_residue(rng):
    """ν (Q±)_{mN} → π^{N-1} e^{∓iπB} (∓i)^{m+N-2} as ν → 0."""
    p = random_r(rng, 2)
    B = sum(p.betas)
    for s in (1, -1):
        for m in (1, 2):
            vals = []
            eps = (0.1, 0.05, 0.025)
            for e in eps:
                q = at_nu(p, e)
                f = q_entry_integrand(q, m, 2, s)
                c = ContourSpec.default(1, default_shift(q))
                res = integrate_line(f, c, tail_exponents=[-1 - e])
                vals.append(e * res.value)
            # quadratic extrapolation to ε = 0
            coef = np.polyfit(eps, vals, 2)
            want = math.pi * cmath.exp(-s * 1j * math.pi * B) * (-s * 1j) ** m
            assert rel(coef[-1], want) < 1e-3


def test_residue_predictions_agree():
    for fam in ("RPlus", "RMinus"):
        for N in (1, 2, 3):
            p = random_params(fam, N, 8, 0)
            assert rel(residue_prediction_reduced(p), residue_prediction_closed_form(p)) < 1e-12


def test_residue_n1_zero_dimensional_convention():
    p = random_params("RMinus", 1, 8, 2)
    b = p.betas[0]
    want = cmath.exp(1j * math.pi * b)
    assert residue_prediction_reduced(p) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("N", [2, 3])
def test_extract_residue(N):
    p = random_params("RPlus", N, 12, 0)
    r = extract_residue(p)
    assert r.model == "log" and r.epsilons == (0.2, 0.1, 0.05)
    assert rel(r.residue, residue_prediction_reduced(p)) < 5e-3
    assert r.condition < 1e4


def test_extract_residue_laurent_model_on_exact_values():
    p = random_params("RMinus", 1, 12, 0)
    r = extract_residue(p, route="closed-form", model="laurent")
    assert rel(r.residue, residue_prediction_closed_form(p)) < 5e-2


def test_log_model_smaller_bias_than_laurent():
    worse = 0
    for i in range(10):
        p = random_params("RPlus", 2, 99, i)
        want = residue_prediction_closed_form(p)
        a = rel(extract_residue(p, route="closed-form").residue, want)
        b = rel(extract_residue(p, route="closed-form", model="laurent").residue, want)
        worse += a > b
    assert worse <= 2


def test_extract_residue_input_checks():
    p = random_params("RPlus", 1, 1, 0)
    with pytest.raises(ValueError):
        extract_residue(p, [0.1, 0.05])
    with pytest.raises(ValueError):
        extract_residue(p, [0.1, -0.05, 0.2])
    with pytest.raises(ValueError):
        extract_residue(random_params("GustafsonFirst", 1, 1, 0))
    with pytest.raises(ValueError):
        extract_residue(p, model="cubic", route="closed-form")
    with pytest.raises(IllConditionedFitError):
        extract_residue(p, [1e-6, 1.0000001e-6, 1.0000002e-6], route="closed-form")
