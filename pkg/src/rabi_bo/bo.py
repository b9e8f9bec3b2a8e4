"""Second diagonalization: the adiabatic-branch oscillator in a Fock basis.

After the two-level block is diagonalized at each position, the slow
coordinate obeys ``(H0 + eps_branch(xi)) psi = E psi`` with
``H0 = (-d2/dxi2 + xi**2) / 2``. In the oscillator basis ``H0`` is
``diag(n + 1/2)`` and ``eps_branch`` is assembled by quadrature.
"""

from dataclasses import dataclass, field

import numpy as np

from . import model
from .linalg import eigh, symmetrize
from .model import Branch, ModelParams
from .quadrature import (
    FockBasisSpec,
    QuadratureRule,
    default_order,
    gauss_hermite_rule,
    hermite_functions,
    potential_matrix,
)

EVEN, ODD = "even", "odd"
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class BOSpectrum:
    """Lowest eigenpairs of the branch Hamiltonian.

    ``coeffs[n, k] = <n|psi_k>``; ``fock_parity[k]`` is ``"even"`` or
    ``"odd"`` according to which Fock indices carry the state.
    """

    params: ModelParams
    branch: Branch
    n_max: int
    energies: np.ndarray
    coeffs: np.ndarray
    fock_parity: tuple
    quad_order: int = field(default=0)

    @property
    def n_levels(self) -> int:
        return self.energies.size

    def state(self, k):
        if not 0 <= k < self.n_levels:
            raise IndexError(f"state index {k} out of range (have {self.n_levels})")
        return self.coeffs[:, k]


@dataclass(frozen=True)
class WavefunctionGrid:
    """Wavefunctions on a position grid.

    ``psi[k, i] = psi_k(xi[i])`` and ``components[k, i, s]`` is the
    two-component state ``phi_branch(xi)[s] * psi_k(xi)`` with ``s = 0`` for
    spin up and ``s = 1`` for spin down (sigma_z basis).
    """

    xi: np.ndarray
    psi: np.ndarray
    components: np.ndarray


def build_bo_matrix(params: ModelParams, branch, basis: FockBasisSpec, rule: QuadratureRule = None):
    """``M[n, m] = (n + 1/2) delta_nm + <n|eps_branch|m>``."""
    branch = Branch.parse(branch)
    if rule is None:
        rule = gauss_hermite_rule(default_order(basis.n_max))
    eps = model.adiabatic_energy(params, branch, rule.nodes)
    m = potential_matrix(eps, basis, rule)
    m[np.diag_indices_from(m)] += np.arange(basis.n_max) + 0.5
    return symmetrize(m)


def _fock_parity(c):
    even = float(np.sum(c[0::2] ** 2))
    odd = float(np.sum(c[1::2] ** 2))
    return EVEN if even >= odd else ODD


def solve_bo(params: ModelParams, branch=Branch.MINUS, n_max=200, n_levels=10,
             quad_order=None, method="blocks") -> BOSpectrum:
    """Lowest ``n_levels`` eigenpairs of the branch Hamiltonian.

    Parameters
    ----------
    method : {"blocks", "full"}
        ``"blocks"`` diagonalizes the even-n and odd-n sub-matrices
        separately, which is exact for the even potentials ``eps_branch``
        and keeps near-degenerate parity doublets from mixing. ``"full"``
        diagonalizes the whole matrix.
    """
    branch = Branch.parse(branch)
    basis = FockBasisSpec(n_max)
    if not 1 <= n_levels <= basis.n_max:
        raise ValueError(f"n_levels must be in [1, {basis.n_max}], got {n_levels}")
    order = default_order(basis.n_max) if quad_order is None else int(quad_order)
    rule = gauss_hermite_rule(order)
    mat = build_bo_matrix(params, branch, basis, rule)

    if method == "full":
        dec = eigh(mat)
        energies = dec.values[:n_levels]
        coeffs = dec.vectors[:, :n_levels]
    elif method == "blocks":
        energies, coeffs = _solve_blocks(mat, n_levels)
    else:
        raise ValueError(f"unknown method {method!r}")

    parity = tuple(_fock_parity(coeffs[:, k]) for k in range(n_levels))
    energies = np.array(energies)
    coeffs = np.ascontiguousarray(coeffs)
    energies.setflags(write=False)
    coeffs.setflags(write=False)
    return BOSpectrum(params, branch, basis.n_max, energies, coeffs, parity, order)


def _solve_blocks(mat, n_levels):
    n = mat.shape[0]
    values, vectors = [], []
    for start in (0, 1):
        idx = np.arange(start, n, 2)
        if idx.size == 0:
            continue
        dec = eigh(np.ascontiguousarray(mat[np.ix_(idx, idx)]))
        full = np.zeros((n, idx.size))
        full[idx, :] = dec.vectors
        values.append(dec.values)
        vectors.append(full)
    values = np.concatenate(values)
    vectors = np.concatenate(vectors, axis=1)
    order = np.argsort(values, kind="stable")[:n_levels]
    return values[order], vectors[:, order]


def bo_spectrum_blocks(params: ModelParams, branch=Branch.MINUS, n_max=200, quad_order=None):
    """Full spectrum from the two parity sub-blocks, merged and sorted."""
    basis = FockBasisSpec(n_max)
    order = default_order(n_max) if quad_order is None else quad_order
    mat = build_bo_matrix(params, branch, basis, gauss_hermite_rule(order))
    return _solve_blocks(mat, n_max)[0]


def wavefunctions_on_grid(spec: BOSpectrum, xi_grid) -> WavefunctionGrid:
    """Evaluate ``psi_k`` and the two-component states on ``xi_grid``."""
    xi = np.asarray(xi_grid, dtype=float).ravel()
    if xi.size > 1 and not np.all(np.diff(xi) > 0):
        raise ValueError("xi_grid must be strictly increasing")
    table = hermite_functions(spec.n_max, xi)
    psi = (table @ spec.coeffs).T
    phi = model.adiabatic_eigenvector(spec.params, spec.branch, xi)
    components = psi[:, :, None] * phi[None, :, :]
    return WavefunctionGrid(xi, psi, components)


def default_grid(xi_min=-8.0, xi_max=8.0, points=801):
    return np.linspace(xi_min, xi_max, points)
