import json
import math
from fractions import Fraction

import numpy as np
import pytest

from bohrsommerfeld import (FockOracle, GridOracle, OracleDiverged, PolySymbol, Unbounded,
                            fock_spectrum, get_builtin, grid_spectrum)
from bohrsommerfeld import eigen
from bohrsommerfeld.oracle import weyl_matrix

X, P, HBAR = PolySymbol.var("x"), PolySymbol.var("p"), PolySymbol.var("hbar")
I = PolySymbol.action()


def quartic_potential(x):
    return 0.5 * x * x + 0.1 * x ** 4


# grid_spectrum

def test_grid_harmonic():
    res = grid_spectrum(lambda x: 0.5 * x * x, 1.0, 1.0, k_levels=3)
    assert res.eigenvalues == pytest.approx([0.5, 1.5, 2.5], abs=1e-8)
    assert res.method == "grid"
    assert np.all(res.convergence < 1e-10)


def test_grid_quartic_ground_state_above_harmonic():
    res = grid_spectrum(quartic_potential, 1.0, 1.0, k_levels=1)
    assert res.eigenvalues[0] > 0.5


def test_grid_small_hbar_reference():
    res = grid_spectrum(quartic_potential, 1.0, 0.125, k_levels=11)
    assert len(res.eigenvalues) == 11
    assert np.all(np.diff(res.eigenvalues) > 0)
    assert np.all(res.convergence < 1e-10)


def test_grid_mass_scaling():
    # p**2/2m + m w**2 x**2/2 with m = 2, w = 1.5
    res = grid_spectrum(lambda x: 0.5 * 2.0 * 1.5 ** 2 * x * x, 2.0, 1.0, k_levels=4)
    assert res.eigenvalues == pytest.approx(1.5 * (np.arange(4) + 0.5), abs=1e-8)


def test_grid_explicit_resolution():
    res = grid_spectrum(lambda x: 0.5 * x * x, 1.0, 1.0, domain=(-10.0, 10.0), N=64, k_levels=3)
    assert res.resolution["N"] >= 128
    assert res.eigenvalues == pytest.approx([0.5, 1.5, 2.5], abs=1e-8)


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        grid_spectrum(lambda x: 0.5 * x * x, N=100)


def test_grid_divergence():
    # a box far too small never converges
    with pytest.raises(OracleDiverged):
        grid_spectrum(lambda x: 0.5 * x * x, 1.0, 1.0, domain=(-0.5, 0.5), N=8, k_levels=3)


def test_grid_unbounded_potential():
    with pytest.raises(Unbounded):
        grid_spectrum(lambda x: -x * x, 1.0, 1.0, k_levels=2)


# fock_spectrum

def test_fock_harmonic():
    res = fock_spectrum(I, 0.7, k_levels=8)
    assert res.eigenvalues == pytest.approx(0.7 * (np.arange(8) + 0.5), abs=1e-12)
    assert res.method == "fock"


def test_fock_action_squared():
    res = fock_spectrum(I * I, 1.0, k_levels=6)
    assert res.eigenvalues == pytest.approx((np.arange(6) + 0.5) ** 2 + 0.25, abs=1e-9)


def test_fock_action_cubed():
    res = fock_spectrum(I ** 3 - HBAR ** 2 * I * Fraction(5, 4), 1.0, k_levels=6)
    assert res.eigenvalues == pytest.approx((np.arange(6) + 0.5) ** 3, abs=1e-9)


def test_fock_complex_ordering_symbol():
    # x p is Hermitian under Weyl ordering; I + x p/2 is elliptic
    sym = I + X * P / 2
    res = fock_spectrum(sym, 1.0, k_levels=4)
    w = math.sqrt(1 - 0.25)
    assert res.eigenvalues == pytest.approx(w * (np.arange(4) + 0.5), abs=1e-9)


def test_weyl_matrix_of_x_p_is_antisymmetric_imaginary():
    M = weyl_matrix(X * P, 1.0, 6)
    assert M.shape == (12, 12)
    vals = np.sort(eigen.eigvalsh(M))
    assert vals == pytest.approx(np.sort(np.linalg.eigvalsh(M)), abs=1e-12)


@pytest.mark.parametrize("sym", [X ** 3 + I, -I, I - X ** 4, PolySymbol.constant(2)],
                         ids=["odd", "negative", "negative_quartic", "constant"])
def test_fock_unbounded(sym):
    with pytest.raises(Unbounded):
        fock_spectrum(sym, 1.0, k_levels=2)


def test_fock_keeps_levels_out_of_truncation_edge():
    with pytest.raises(ValueError):
        fock_spectrum(I, 1.0, N=16, k_levels=14)


def test_fock_rejects_complex_symbol():
    from bohrsommerfeld import star
    with pytest.raises(ValueError):
        fock_spectrum(star(X, P) + I, 1.0, k_levels=2)


# properties

def test_cross_oracle_agreement():
    sym = get_builtin("perturbed_quartic").symbol
    grid = grid_spectrum(quartic_potential, 1.0, 1.0, k_levels=8)
    fock = fock_spectrum(sym, 1.0, k_levels=8)
    assert np.max(np.abs(grid.eigenvalues - fock.eigenvalues)) < 1e-8


def test_convergence_history_shrinks():
    for res in (grid_spectrum(quartic_potential, 1.0, 0.5, k_levels=6),
                fock_spectrum(get_builtin("perturbed_quartic").symbol, 0.5, k_levels=6)):
        changes = [c for _, c in res.history]
        assert len(changes) >= 1
        assert all(b < a for a, b in zip(changes, changes[1:]))
        assert changes[-1] < 1e-10


def test_eigensolver_self_check_residual():
    for res in (grid_spectrum(quartic_potential, 1.0, 1.0, k_levels=8, check_residual=True),
                fock_spectrum(get_builtin("perturbed_quartic").symbol, 1.0, k_levels=8,
                              check_residual=True)):
        assert res.residual < 1e-10


def test_sorted_ascending():
    res = fock_spectrum(I * I + X ** 4 / 3, 0.4, k_levels=10)
    assert np.all(np.diff(res.eigenvalues) > 0)


def test_export():
    res = fock_spectrum(I, 1.0, k_levels=3)
    lines = res.to_csv().splitlines()
    assert lines[0] == "n,E,err_est"
    assert len(lines) == 4
    doc = json.loads(res.to_json())
    assert doc["method"] == "fock"
    assert len(doc["eigenvalues"]) == len(doc["err_est"]) == 3
    assert res.to_json() == fock_spectrum(I, 1.0, k_levels=3).to_json()


# eigensolver

@pytest.mark.parametrize("n", [1, 2, 5, 40])
def test_eigh_against_numpy(n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(n, n))
    A = A + A.T
    w, V = eigen.eigh(A)
    assert w == pytest.approx(np.linalg.eigvalsh(A), abs=1e-12)
    assert np.allclose(A @ V, V * w, atol=1e-11)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)


def test_eigvalsh_degenerate_and_diagonal():
    A = np.diag([3.0, 1.0, 1.0, -2.0])
    assert eigen.eigvalsh(A) == pytest.approx([-2.0, 1.0, 1.0, 3.0])


def test_tridiagonal_eigen_direct():
    d = np.array([2.0, 2.0, 2.0])
    e = np.array([0.0, -1.0, -1.0])
    w = eigen.tridiagonal_eigen(d, e)[0]
    assert np.sort(w) == pytest.approx([2 - math.sqrt(2), 2.0, 2 + math.sqrt(2)], abs=1e-14)


# estimators

def test_oracle_estimators():
    g = GridOracle(hbar=1.0, k_levels=3).fit(lambda x: 0.5 * x * x)
    assert g.predict([0, 2]) == pytest.approx([0.5, 2.5], abs=1e-8)
    f = FockOracle(hbar=1.0, k_levels=3).fit(I)
    assert f.predict([1]) == pytest.approx([1.5], abs=1e-12)
    with pytest.raises(ValueError):
        f.predict([5])
