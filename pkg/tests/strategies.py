"""Hypothesis strategies for random polynomial symbols."""

from hypothesis import strategies as st

from bohrsommerfeld import GaussianRational, PolySymbol

exponents = st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 2))
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def symbols(draw, max_terms=5, hbar=True, complex_coeffs=False):
    keys = draw(st.lists(exponents, max_size=max_terms, unique=True))
    terms = {}
    for i, j, k in keys:
        c = draw(rationals)
        if complex_coeffs:
            c = GaussianRational(c, draw(rationals)) if draw(st.booleans()) else c
        terms[(i, j, k if hbar else 0)] = c
    return PolySymbol(terms)

