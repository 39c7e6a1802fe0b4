"""Bohr-Sommerfeld quantization with the hbar**2 correction.

Exact Moyal algebra on polynomial symbols, a classical orbit engine, the
Birkhoff normal form, and two independent matrix oracles for checking the
semiclassical levels.
"""

from .catalog import Builtin, builtin_names, get_builtin
from .dynamics import (Classification, FixedPointReport, Orbit, SmoothHamiltonian,
                       action_and_frequency, apply_linear_symplectic, energy_of_action,
                       find_fixed_point, orbit_average, solve_action, trace_orbit)
from .estimators import BirkhoffNormalForm, BohrSommerfeld, FockOracle, GridOracle
from .exceptions import (BohrSommerfeldError, DegreeTooLow, NoFixedPoint, NonElliptic,
                         NonGeneric, NotSymplectic, OracleDiverged, OrbitNotClosed,
                         OutOfWindow, Unbounded)
from .moyal import (chain_diagram, hessian_bracket, moyal_bracket, poisson_bracket, star,
                    star_commutator, star_power, star_series, symbol_of_function)
from .normalform import ActionSeries, LinearSymplectic, birkhoff_series, normalize_quadratic
from .oracle import OracleSpectrum, fock_spectrum, grid_spectrum
from .polysym import GaussianRational, PolySymbol
from .spectrum import (LevelResult, SpectrumResult, bs_eigenvalue, bs_spectrum,
                       correction_profile)

__version__ = "0.1.0"

__all__ = [
    "PolySymbol", "GaussianRational",
    "moyal_bracket", "poisson_bracket", "star", "star_series", "star_power",
    "star_commutator", "hessian_bracket", "chain_diagram", "symbol_of_function",
    "LinearSymplectic", "ActionSeries", "normalize_quadratic", "birkhoff_series",
    "SmoothHamiltonian", "Classification", "FixedPointReport", "Orbit",
    "find_fixed_point", "trace_orbit", "action_and_frequency", "orbit_average",
    "solve_action", "energy_of_action", "apply_linear_symplectic",
    "LevelResult", "SpectrumResult", "correction_profile", "bs_eigenvalue", "bs_spectrum",
    "OracleSpectrum", "grid_spectrum", "fock_spectrum",
    "Builtin", "get_builtin", "builtin_names",
    "BohrSommerfeld", "BirkhoffNormalForm", "GridOracle", "FockOracle",
    "BohrSommerfeldError", "NonElliptic", "DegreeTooLow", "NoFixedPoint", "NonGeneric",
    "OrbitNotClosed", "OutOfWindow", "NotSymplectic", "OracleDiverged", "Unbounded",
]
