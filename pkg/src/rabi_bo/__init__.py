"""Quantum Rabi model by two successive diagonalizations.

The two-level block is diagonalized analytically at each oscillator position;
the oscillator on the resulting adiabatic surface is then diagonalized in a
truncated Fock basis. An exact-diagonalization solver provides the reference.
"""

from .analysis import (
    Classification,
    DistributionFit,
    PhotonPopulation,
    classify_population,
    fit_distribution,
    population_from_bo,
    population_from_ed,
    sweep_coupling,
)
from .bo import BOSpectrum, WavefunctionGrid, build_bo_matrix, solve_bo, wavefunctions_on_grid
from .ed import EDParams, EDSpectrum, build_ed_matrix, photon_number_ed, solve_ed
from .kernels import BACKEND
from .linalg import EigenDecomposition, EigenSolverError, eigh
from .model import (
    Branch,
    ModelParams,
    adiabatic_eigenvector,
    adiabatic_energy,
    critical_coupling,
    effective_potential,
    mixing_angle_gamma,
    potential_minima,
    quartic_expansion,
)
from .quadrature import (
    FockBasisSpec,
    QuadratureRule,
    gauss_hermite_rule,
    hermite_function,
    potential_matrix,
)

__version__ = "0.1.0"
