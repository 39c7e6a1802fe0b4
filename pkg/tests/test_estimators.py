import doctest

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bohrsommerfeld import (BirkhoffNormalForm, BohrSommerfeld, FockOracle, GridOracle,
                            PolySymbol, get_builtin)
from bohrsommerfeld.estimators import check_hamiltonian, check_hbar, check_levels, check_order

I = PolySymbol.action()


@pytest.mark.parametrize("est", [BohrSommerfeld(hbar=0.3, order=0), BirkhoffNormalForm(order=3),
                                 GridOracle(hbar=0.2, k_levels=4), FockOracle(N=32)],
                         ids=lambda e: type(e).__name__)
def test_params_round_trip(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    assert twin is not est
    twin.set_params(**params)
    assert twin.get_params() == params


def test_set_params_changes_result():
    est = BohrSommerfeld(hbar=1.0).fit(I)
    assert est.predict([0])[0] == pytest.approx(0.5, abs=1e-10)
    est.set_params(hbar=0.5)
    assert est.predict([0])[0] == pytest.approx(0.25, abs=1e-10)


def test_unfitted_estimators_raise():
    with pytest.raises(NotFittedError):
        BohrSommerfeld().predict([0])
    with pytest.raises(NotFittedError):
        BirkhoffNormalForm().predict([0.1])
    with pytest.raises(NotFittedError):
        FockOracle().predict([0])


def test_fit_validates_hyper_parameters():
    with pytest.raises(ValueError):
        BohrSommerfeld(hbar=-1).fit(I)
    with pytest.raises(TypeError):
        BohrSommerfeld(hbar="1").fit(I)
    with pytest.raises(ValueError):
        BohrSommerfeld(order=4).fit(I)
    with pytest.raises(TypeError):
        BirkhoffNormalForm().fit(lambda x, p: x)
    with pytest.raises(TypeError):
        GridOracle().fit(3)


def test_check_helpers():
    assert check_hbar(2) == 2.0
    assert list(check_levels([0, 2.0])) == [0, 2]
    with pytest.raises(ValueError):
        check_levels([1.5])
    with pytest.raises(ValueError):
        check_levels([-1])
    assert check_order(2) == 2
    with pytest.raises(TypeError):
        check_hamiltonian(3)


def test_estimator_agrees_with_oracles():
    b = get_builtin("perturbed_quartic")
    bs = BohrSommerfeld(hbar=0.25).fit(b.symbol).predict(range(4))
    grid = GridOracle(hbar=0.25, k_levels=4).fit(b.potential).predict(range(4))
    fock = FockOracle(hbar=0.25, k_levels=4).fit(b.symbol).predict(range(4))
    assert np.max(np.abs(grid - fock)) < 1e-8
    assert np.max(np.abs(bs - grid)) < 1e-4


def test_callable_hamiltonian():
    est = BohrSommerfeld(hbar=0.5, guess=(0.2, 0.1)).fit(lambda x, p: 0.5 * (x * x + p * p))
    assert est.predict([1])[0] == pytest.approx(0.75, abs=1e-8)


@pytest.mark.parametrize("module", ["estimators", "polysym"])
def test_docstring_examples(module):
    import importlib
    mod = importlib.import_module(f"bohrsommerfeld.{module}")
    result = doctest.testmod(mod)
    assert result.attempted > 0 and result.failed == 0
