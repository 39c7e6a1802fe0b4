import math
from fractions import Fraction

import numpy as np
import pytest

from bohrsommerfeld import (ActionSeries, BirkhoffNormalForm, DegreeTooLow, LinearSymplectic,
                            NonElliptic, NotSymplectic, PolySymbol, SmoothHamiltonian,
                            birkhoff_series, energy_of_action, find_fixed_point,
                            normalize_quadratic, solve_action)
from bohrsommerfeld.analysis import fit_slope
from bohrsommerfeld.polysym import taylor_from_callable

X, P, HBAR = PolySymbol.var("x"), PolySymbol.var("p"), PolySymbol.var("hbar")
I = PolySymbol.action()


# normalize_quadratic

def test_normalize_identity_case():
    S, Pn = normalize_quadratic(I)
    assert S == LinearSymplectic.identity()
    assert Pn == I


def test_normalize_anisotropic():
    S, Pn = normalize_quadratic(P * P / 2 + 2 * X * X)
    assert Pn == 2 * I
    assert abs(float(S.det) - 1) < 1e-12
    # x -> x/sqrt2, p -> sqrt2 p
    assert np.allclose(S.array, [[1 / math.sqrt(2), 0], [0, math.sqrt(2)]])


def test_normalize_indefinite_rejected():
    with pytest.raises(NonElliptic):
        normalize_quadratic(X * P)


@pytest.mark.parametrize("sym", [X * X, -I, PolySymbol.zero()], ids=["singular", "negative", "zero"])
def test_normalize_rejects_non_elliptic(sym):
    with pytest.raises(NonElliptic):
        normalize_quadratic(sym)


def test_normalize_rejects_linear_part():
    with pytest.raises(ValueError):
        normalize_quadratic(I + X)


def test_normalize_general_quadratic_with_cross_term():
    Q = X * X * Fraction(3, 2) + X * P / 2 + P * P
    S, Pn = normalize_quadratic(Q + X ** 3)
    a1 = math.sqrt(3 * 2 - Fraction(1, 4))
    assert abs(float(S.det) - 1) < 1e-12
    assert float(Pn.coeff(2, 0)) == pytest.approx(a1 / 2, rel=1e-12)
    assert Pn.coeff(2, 0) == Pn.coeff(0, 2)
    assert Pn.coeff(1, 1) == 0
    # the cubic part is carried along by the same map
    direct = (Q + X ** 3).compose_linear(S.matrix).homogeneous_part(3)
    assert Pn.homogeneous_part(3) == direct


def test_linear_symplectic_rejects_det_not_one():
    with pytest.raises(NotSymplectic):
        LinearSymplectic(((2, 0), (0, 1)))


def test_linear_symplectic_group_operations():
    rng = np.random.default_rng(0)
    S = LinearSymplectic.random(rng)
    assert abs(float(S.det) - 1) < 1e-12
    assert np.allclose((S @ S.inverse()).array, np.eye(2), atol=1e-12)


# birkhoff_series

def test_already_normal():
    assert birkhoff_series(I + I * I, 2).coefficients == (1, 1)


def test_quartic_perturbation_second_coefficient():
    eps = Fraction(1, 10)
    series = birkhoff_series(I + eps * X ** 4, 2)
    assert series.coefficients == (1, Fraction(3, 2) * eps)
    assert series[2] == Fraction(3, 20)


def test_cubic_perturbation_against_orbit_frequency():
    # 1/2 d2E/dA2 = 1/2 d(omega)/dA, differenced in the action at A = 1e-3
    eps = Fraction(1, 10)
    sym = P * P / 2 + X * X / 2 + eps * X ** 3
    series = birkhoff_series(sym, 4)
    assert series[2] == Fraction(-15, 4) * eps ** 2
    H = SmoothHamiltonian.from_polysymbol(sym)
    fp = find_fixed_point(H, (0.0, 0.0))
    A, h = 1e-3, 1e-4
    w_plus = solve_action(H, fp, A + h).frequency
    w_minus = solve_action(H, fp, A - h).frequency
    numeric = 0.5 * (w_plus - w_minus) / (2 * h)
    expected = 0.5 * series(A, derivative=2)
    assert abs(numeric - expected) < 1e-6 * abs(expected)
    # a2 itself is the A -> 0 limit
    assert abs(numeric - float(series[2])) < 5e-3 * abs(float(series[2]))


def test_polynomial_in_action_is_reproduced():
    sym = 3 * I - I ** 2 / 2 + Fraction(2, 7) * I ** 3
    assert birkhoff_series(sym, 3).coefficients == (3, Fraction(-1, 2), Fraction(2, 7))


def test_scaling_covariance():
    sym = I + X ** 4 / 10 + X ** 3 * P / 3
    lam = Fraction(7, 3)
    base = birkhoff_series(sym, 3).coefficients
    scaled = birkhoff_series(sym * lam, 3).coefficients
    assert scaled == tuple(lam * a for a in base)


def test_invariant_under_exact_symplectic_map():
    sym = I + X ** 4 / 10
    S = LinearSymplectic(((2, 1), (1, 1)))
    # irrational normalizing map, so equal only to rounding
    mapped = birkhoff_series(sym.compose_linear(S.matrix), 2).as_floats()
    assert mapped == pytest.approx(birkhoff_series(sym, 2).as_floats(), rel=1e-12)


def test_hbar_terms_ignored():
    assert birkhoff_series(I + I * I - HBAR ** 2 * I, 2).coefficients == (1, 1)


def test_degree_too_low():
    H = SmoothHamiltonian(value=lambda x, p: 0.5 * p * p + 0.5 * (1 - math.exp(-x)) ** 2)
    T = taylor_from_callable(H, (0.0, 0.0), 3, drop_constant=True)
    with pytest.raises(DegreeTooLow):
        birkhoff_series(T, 2, known_degree=3)


def test_order_must_be_positive():
    with pytest.raises(ValueError):
        birkhoff_series(I, 0)


def test_non_elliptic_surfaces():
    with pytest.raises(NonElliptic):
        birkhoff_series(X * P + X ** 4, 2)


@pytest.mark.parametrize("sym", [
    I + X ** 4 / 10,
    P * P / 2 + X * X / 2 + X ** 3 / 10,
    P * P / 2 + 2 * X * X + X ** 4 / 5,
    I + I * I / 4,
], ids=["quartic", "cubic", "anisotropic", "action_poly"])
def test_agreement_with_dynamics(sym):
    order = 2
    series = birkhoff_series(sym, order)
    H = SmoothHamiltonian.from_polysymbol(sym)
    fp = find_fixed_point(H, (0.0, 0.0))
    As = (1e-2, 1e-3, 1e-4)
    errs = [abs(series(A) - energy_of_action(H, fp, A)) for A in As]
    if max(errs) < 1e-15:
        return
    assert fit_slope(As, errs) >= order + 1 - 0.5


def test_action_series_evaluation():
    s = ActionSeries((Fraction(1), Fraction(3, 20)))
    assert s(2.0) == pytest.approx(2.6)
    assert s(2.0, derivative=1) == pytest.approx(1.6)
    assert s(2.0, derivative=2) == pytest.approx(0.3)
    assert s[1] == 1
    with pytest.raises(IndexError):
        s[3]


def test_estimator_wrapper():
    est = BirkhoffNormalForm(order=2).fit(I + X ** 4 / 10)
    assert est.coefficients_ == (1, Fraction(3, 20))
    assert est.predict([0.0, 1.0]) == pytest.approx([0.0, 1.15])
