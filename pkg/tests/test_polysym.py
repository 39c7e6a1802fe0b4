import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bohrsommerfeld import GaussianRational, PolySymbol, SmoothHamiltonian, star
from bohrsommerfeld.polysym import fd_partial, taylor_from_callable
from strategies import symbols

X, P, HBAR = PolySymbol.var("x"), PolySymbol.var("p"), PolySymbol.var("hbar")
I = PolySymbol.action()


# derive

def test_derive_power_rule():
    assert (X * X * P).derive("x") == 2 * X * P


def test_derive_action_in_p():
    assert I.derive("p") == P


def test_derive_leaves_hbar_inert():
    assert (HBAR ** 2 * X ** 3).derive("x") == 3 * HBAR ** 2 * X ** 2


def test_derive_preserves_hbar_grading():
    S = HBAR ** 2 * X ** 3 + HBAR * P ** 2
    assert S.derive("x").hbar_order == 2
    assert S.derive("p").hbar_order == 1


# eval

def test_eval_action():
    assert I.eval(1.0, 1.0, 0.3) == 1.0


def test_eval_constant_term():
    assert (I * I - HBAR ** 2 / 4).eval(0.0, 0.0, 1.0) == -0.25


def test_eval_star_product_output():
    assert star(X, P).eval(2.0, 3.0, 1.0) == complex(6.0, 0.5)


def test_eval_real_coefficients_give_exact_zero_imaginary_part():
    S = I ** 3 - HBAR * X * P / 7
    v = S.eval(0.37, -1.3, 0.2)
    assert v.imag == 0.0


def test_eval_vectorized_matches_scalar():
    S = I ** 2 + X ** 3 * P
    xs, ps = np.linspace(-1, 1, 5), np.linspace(2, -2, 5)
    vec = S.eval(xs, ps, 0.5)
    for x, p, v in zip(xs, ps, vec):
        assert v == S.eval(float(x), float(p), 0.5)


# taylor_from_callable

def test_taylor_harmonic():
    H = SmoothHamiltonian(value=lambda x, p: 0.5 * (x * x + p * p))
    T = taylor_from_callable(H, (0.0, 0.0), 2)
    for (i, j, k), c in T.items():
        assert k == 0
    assert float(T.coeff(2, 0)) == pytest.approx(0.5, abs=1e-7)
    assert float(T.coeff(0, 2)) == pytest.approx(0.5, abs=1e-7)
    assert abs(float(T.coeff(1, 1))) < 1e-7


def test_taylor_polynomial_input_is_exact_with_analytic_derivatives():
    sym = P * P / 2 + X * X / 2 + X ** 4
    H = SmoothHamiltonian.from_polysymbol(sym)
    assert taylor_from_callable(H, (0.0, 0.0), 4) == sym


def test_taylor_morse_by_finite_differences():
    H = SmoothHamiltonian(value=lambda x, p: 0.5 * p * p + 0.5 * (1 - math.exp(-x)) ** 2)
    T = taylor_from_callable(H, (0.0, 0.0), 3)
    expected = X * X / 2 - X ** 3 / 2 + P * P / 2
    for i in range(4):
        for j in range(4 - i):
            assert abs(float(T.coeff(i, j)) - float(expected.coeff(i, j))) < 1e-7, (i, j)


def test_taylor_about_a_shifted_center_drops_constant():
    sym = P * P / 2 + (X - 1) ** 2 / 2 + 3
    H = SmoothHamiltonian.from_polysymbol(sym)
    T = taylor_from_callable(H, (1.0, 0.0), 2, drop_constant=True)
    assert T == I


@pytest.mark.parametrize("degree", [0, 1])
def test_taylor_rejects_low_degree(degree):
    with pytest.raises(ValueError):
        taylor_from_callable(lambda x, p: x * x, (0.0, 0.0), degree)


def test_fd_partial_mixed_derivative():
    f = lambda x, p: math.sin(x) * math.exp(p)
    assert fd_partial(f, 0.3, 0.2, 1, 1) == pytest.approx(math.cos(0.3) * math.exp(0.2), abs=1e-8)


# representation invariants

def test_zero_coefficients_are_not_stored():
    S = PolySymbol({(1, 0, 0): 1, (0, 1, 0): 0})
    assert len(S) == 1
    assert not (X - X)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        PolySymbol({(-1, 0, 0): 1})


def test_coefficients_are_exact():
    S = X / 3 + X / 3 + X / 3
    assert S == X
    assert S.coeff(1, 0) == Fraction(1)


def test_complex_part_only_when_needed():
    assert I.is_real
    assert not star(X, P).is_real
    assert star(X, P).coeff(0, 0, 1) == GaussianRational(0, Fraction(1, 2))


def test_action_polynomial():
    assert (I ** 3 - HBAR ** 2 * I).action_polynomial() == (0, 0, 0, 1)
    assert (I * 2 + I * I).action_polynomial() == (0, 2, 1)
    assert (I + X ** 4).action_polynomial() is None


# properties

@settings(max_examples=60, deadline=None)
@given(symbols(complex_coeffs=True), symbols(complex_coeffs=True), symbols(complex_coeffs=True))
def test_ring_axioms(A, B, C):
    assert (A + B) + C == A + (B + C)
    assert A + B == B + A
    assert (A * B) * C == A * (B * C)
    assert A * B == B * A
    assert A * (B + C) == A * B + A * C
    assert A - A == PolySymbol.zero()


@settings(max_examples=60, deadline=None)
@given(symbols(), symbols())
def test_product_hbar_order_adds(A, B):
    if A and B:
        assert (A * B).hbar_order == A.hbar_order + B.hbar_order


@settings(max_examples=60, deadline=None)
@given(symbols(complex_coeffs=True))
def test_mixed_partials_commute(A):
    assert A.derive("x").derive("p") == A.derive("p").derive("x")


@settings(max_examples=60, deadline=None)
@given(symbols(complex_coeffs=True), symbols(complex_coeffs=True),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1))
def test_eval_is_additive(A, B, x, p, h):
    total = (A + B).eval(x, p, h)
    parts = A.eval(x, p, h) + B.eval(x, p, h)
    scale = 1.0 + abs(A.eval(x, p, h)) + abs(B.eval(x, p, h))
    assert abs(total - parts) <= 1e-13 * scale


@settings(max_examples=60, deadline=None)
@given(symbols(complex_coeffs=True))
def test_text_round_trip(A):
    text = A.to_text()
    assert PolySymbol.from_text(text) == A
    assert PolySymbol.from_text(text).to_text() == text


def test_text_is_sorted_and_deterministic():
    S = P ** 2 + X * HBAR + 3
    lines = S.to_text().splitlines()
    keys = [tuple(int(v) for v in line.split()[:3]) for line in lines]
    assert keys == sorted(keys)
    assert S.to_text() == PolySymbol(dict(reversed(list(S.terms.items())))).to_text()


def test_text_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        PolySymbol.from_text("1 0 0 1\n1 0 0 2\n")


def test_text_rejects_malformed_line():
    with pytest.raises(ValueError, match="line 1"):
        PolySymbol.from_text("1 0 1/2\n")
