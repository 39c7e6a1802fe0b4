import json
import math
from fractions import Fraction

import numpy as np
import pytest

from bohrsommerfeld import (BohrSommerfeld, NonElliptic, NonGeneric, OutOfWindow, PolySymbol,
                            SmoothHamiltonian, bs_eigenvalue, bs_spectrum, correction_profile,
                            find_fixed_point, fock_spectrum, get_builtin, grid_spectrum)
from bohrsommerfeld.analysis import compare

X, P, HBAR = PolySymbol.var("x"), PolySymbol.var("p"), PolySymbol.var("hbar")
I = PolySymbol.action()


def smooth(sym):
    return SmoothHamiltonian.from_polysymbol(sym)


# correction_profile

@pytest.mark.parametrize("A", [0.2, 1.0, 3.0])
def test_harmonic_profile_constant(A):
    H = get_builtin("harmonic").hamiltonian
    fp = find_fixed_point(H, (0.0, 0.0))
    assert correction_profile(H, fp, A) == pytest.approx(2.0, rel=1e-10)


@pytest.mark.parametrize("A", [0.5, 1.5])
def test_action_squared_profile(A):
    H = smooth(I * I)
    fp = find_fixed_point(H, (0.0, 0.0))
    assert correction_profile(H, fp, A) == pytest.approx(12 * A, rel=1e-9)


def test_kinetic_potential_profile():
    # c(A) = (2/m) <V''> / omega; for the quartic V'' = 1 + 1.2 x**2
    from bohrsommerfeld import orbit_average, solve_action
    b = get_builtin("perturbed_quartic")
    fp = find_fixed_point(b.hamiltonian, (0.0, 0.0))
    orbit = solve_action(b.hamiltonian, fp, 1.0)
    expected = 2 * orbit_average(orbit, lambda x, p: 1 + 1.2 * x * x) / orbit.frequency
    assert correction_profile(b.hamiltonian, fp, 1.0) == pytest.approx(expected, rel=1e-10)


# bs_eigenvalue / bs_spectrum

def test_harmonic_levels():
    b = get_builtin("harmonic")
    res = bs_spectrum(b.hamiltonian, None, range(6), 1.0)
    for lv in res.levels:
        assert lv.E2 == pytest.approx(lv.n + 0.5, abs=1e-10)
        assert abs(lv.correction) < 1e-10
    assert bs_eigenvalue(b.hamiltonian, None, 3, 1.0) == pytest.approx(3.5, abs=1e-10)


def test_harmonic_ten_levels():
    b = get_builtin("harmonic")
    res = bs_spectrum(b.hamiltonian, None, range(10), 1.0)
    assert [lv.n for lv in res.levels] == list(range(10))
    assert res.eigenvalues == pytest.approx(np.arange(10) + 0.5, abs=1e-10)


def test_action_squared_ground_state_matches_fock():
    b = get_builtin("symbol_I2")
    E2 = bs_eigenvalue(b.hamiltonian, None, 0, 1.0)
    assert E2 == pytest.approx(0.5, abs=1e-9)
    assert E2 == pytest.approx(fock_spectrum(b.symbol, 1.0, k_levels=2).eigenvalues[0], abs=1e-9)


def test_action_cubed_cancellation():
    b = get_builtin("symbol_I3")
    assert bs_eigenvalue(b.hamiltonian, None, 1, 1.0) == pytest.approx(3.375, abs=1e-9)


def test_slowly_varying_symbol_is_used_as_given():
    # dropping the hbar**2 term of the I**3 symbol shifts E2 by (5/4) hbar**2 A
    plain = bs_eigenvalue(smooth(I ** 3), None, 1, 1.0)
    assert plain == pytest.approx(3.375 + 1.25 * 1.5, abs=1e-9)


def test_f_of_action_levels_exact():
    sym = I + I * I / 3 - I ** 3 / 50
    # Weyl symbol of the operator f(I^) by the star-power expansion
    operator = sym - HBAR ** 2 / 12 - HBAR ** 2 * I * Fraction(-1, 50) * Fraction(5, 4)
    res = bs_spectrum(smooth(operator), None, range(4), 0.5)
    for lv in res.levels:
        A = (lv.n + 0.5) * 0.5
        assert lv.E2 == pytest.approx(A + A * A / 3 - A ** 3 / 50, abs=1e-9)


def test_quartic_correction_improves_every_level():
    b = get_builtin("perturbed_quartic")
    hbar = 0.1
    res = bs_spectrum(b.hamiltonian, None, range(11), hbar)
    oracle = grid_spectrum(b.potential, 1.0, hbar, k_levels=11)
    comp = compare(res, oracle)
    assert len(comp.levels) == 11
    for lv in comp.levels:
        assert abs(lv.residual2) < abs(lv.residual0)


def test_ceiling_skips_levels():
    b = get_builtin("morse")
    res = bs_spectrum(b.hamiltonian, None, range(10), 0.1, energy_ceiling=b.energy_ceiling)
    computed = [lv.n for lv in res.levels]
    skipped = [n for n, _ in res.skipped]
    assert computed and skipped
    assert computed + skipped == list(range(10))
    assert min(skipped) > max(computed)
    with pytest.raises(OutOfWindow):
        bs_eigenvalue(b.hamiltonian, None, 9, 0.1, energy_ceiling=b.energy_ceiling)


def test_morse_levels_against_closed_form():
    b = get_builtin("morse")
    res = bs_spectrum(b.hamiltonian, None, range(4), 0.1, energy_ceiling=b.energy_ceiling)
    for lv in res.levels:
        assert lv.E2 == pytest.approx(b.exact(lv.n, 0.1), abs=1e-9)


def test_differencing_identity_reported():
    b = get_builtin("perturbed_quartic")
    res = bs_spectrum(b.hamiltonian, None, range(3), 0.25)
    for lv in res.levels:
        assert lv.E2 - lv.E0 == pytest.approx(lv.correction, abs=1e-15)
        assert lv.step > 0
        assert lv.err_est < 1e-8


def test_order_zero():
    b = get_builtin("perturbed_quartic")
    res = bs_spectrum(b.hamiltonian, None, range(3), 0.25, order=0)
    for lv in res.levels:
        assert lv.E2 == lv.E0
        assert lv.correction == 0


def test_order_validation():
    b = get_builtin("harmonic")
    with pytest.raises(ValueError):
        bs_spectrum(b.hamiltonian, None, range(3), 1.0, order=1)
    with pytest.raises(ValueError):
        bs_spectrum(smooth(I + HBAR * X * X), None, range(3), 1.0, order=2)


def test_non_generic_and_saddle_rejected():
    with pytest.raises(NonGeneric, match="rank 1"):
        bs_spectrum(get_builtin("pure_quartic").hamiltonian, None, range(2), 1.0)
    with pytest.raises(NonElliptic):
        bs_spectrum(smooth(X * P), None, range(2), 1.0)


def test_maximum_is_negated():
    b = get_builtin("inverted_harmonic")
    res = bs_spectrum(b.hamiltonian, None, range(4), 1.0)
    assert res.negated
    assert res.classification == "GenericMaximum"
    assert res.eigenvalues == pytest.approx(-(np.arange(4) + 0.5), abs=1e-10)


def test_symplectic_invariance():
    from bohrsommerfeld import LinearSymplectic, apply_linear_symplectic
    b = get_builtin("perturbed_quartic")
    base = bs_spectrum(b.hamiltonian, None, range(4), 0.25).eigenvalues
    rng = np.random.default_rng(3)
    for _ in range(3):
        S = LinearSymplectic.random(rng)
        E = bs_spectrum(smooth(apply_linear_symplectic(b.symbol, S)), None, range(4), 0.25).eigenvalues
        assert np.max(np.abs(E - base)) < 1e-8


def test_shifted_fixed_point_spectrum():
    b = get_builtin("shifted_harmonic")
    res = bs_spectrum(b.hamiltonian, None, range(3), 0.5)
    assert res.eigenvalues == pytest.approx([0.25, 0.75, 1.25], abs=1e-10)


def test_invalid_inputs():
    b = get_builtin("harmonic")
    with pytest.raises(ValueError):
        bs_spectrum(b.hamiltonian, None, range(3), 0.0)
    with pytest.raises(ValueError):
        bs_spectrum(b.hamiltonian, None, [-1], 1.0)


# serialization

def test_csv_and_json_are_deterministic():
    b = get_builtin("perturbed_quartic")
    r1 = bs_spectrum(b.hamiltonian, None, range(3), 0.25)
    r2 = bs_spectrum(b.hamiltonian, None, [2, 0, 1], 0.25)
    assert r1.to_csv() == r2.to_csv()
    assert r1.to_json() == r2.to_json()
    header = r1.to_csv().splitlines()[0]
    assert header == "n,A,E0,E2,corr,err_est"
    doc = json.loads(r1.to_json())
    assert [lv["n"] for lv in doc["levels"]] == [0, 1, 2]


def test_csv_round_trips_floats():
    b = get_builtin("perturbed_quartic")
    res = bs_spectrum(b.hamiltonian, None, range(2), 0.25)
    rows = [line.split(",") for line in res.to_csv().splitlines()[1:]]
    for row, lv in zip(rows, res.levels):
        assert float(row[3]) == lv.E2


# estimator

def test_estimator_predict():
    est = BohrSommerfeld(hbar=0.5).fit(get_builtin("harmonic").symbol)
    assert est.predict([0, 2]) == pytest.approx([0.25, 1.25], abs=1e-10)


def test_estimator_marks_skipped_levels_nan():
    b = get_builtin("morse")
    est = BohrSommerfeld(hbar=0.1, energy_ceiling=b.energy_ceiling, guess=b.guess).fit(b.hamiltonian)
    out = est.predict([0, 9])
    assert np.isfinite(out[0]) and math.isnan(out[1])
