"""Exact diagonalization of the full Rabi Hamiltonian.

Basis ordering is ``|n> (x) |s>`` with flat index ``2n + s``; ``s = 0`` is
sigma_z = +1 (up), ``s = 1`` is sigma_z = -1 (down). The oscillator diagonal
carries the zero-point ``n + 1/2`` so energies share the BO solver's origin.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import eigh, fix_signs
from .model import ModelParams
from .quadrature import FockBasisSpec

PARITY_TOL = 1e-8


@dataclass(frozen=True)
class EDParams:
    """Parameters for the full model; unlike :class:`ModelParams`, allows ``delta = 0``."""

    delta: float
    g: float

    def __post_init__(self):
        delta, g = float(self.delta), float(self.g)
        if not np.isfinite(delta) or delta < 0.0:
            raise ValueError(f"delta must be finite and >= 0, got {self.delta!r}")
        if not np.isfinite(g) or g < 0.0:
            raise ValueError(f"g must be finite and >= 0, got {self.g!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "g", g)


def _as_params(params):
    if isinstance(params, (ModelParams, EDParams)):
        return params
    delta, g = params
    return EDParams(delta, g)


@dataclass(frozen=True)
class EDSpectrum:
    """Lowest eigenpairs of the full model.

    ``states[2n + s, k]`` is the amplitude of ``|n, s>`` in state ``k`` and
    ``parity[k]`` the eigenvalue (+1 or -1) of ``sigma_x (-1)**(a^dag a)``.
    """

    params: object
    n_max: int
    energies: np.ndarray
    states: np.ndarray
    parity: tuple

    @property
    def n_levels(self) -> int:
        return self.energies.size

    def state(self, k):
        if not 0 <= k < self.n_levels:
            raise IndexError(f"state index {k} out of range (have {self.n_levels})")
        return self.states[:, k]

    def amplitudes(self, k):
        """State ``k`` reshaped to ``(n_max, 2)``: rows n, columns (up, down)."""
        return self.state(k).reshape(self.n_max, 2)


def build_ed_matrix(params, basis: FockBasisSpec):
    """Dense ``2N x 2N`` Hamiltonian ``a^dag a + 1/2 + (delta/2) sx + g sz (a + a^dag)``.

    ``params`` may be a :class:`ModelParams`, an :class:`EDParams` or a
    ``(delta, g)`` pair.
    """
    params = _as_params(params)
    if not isinstance(basis, FockBasisSpec):
        basis = FockBasisSpec(basis)
    n_max = basis.n_max
    dim = 2 * n_max
    h = np.zeros((dim, dim))
    n = np.arange(n_max)
    up, down = 2 * n, 2 * n + 1
    h[up, up] = n + 0.5
    h[down, down] = n + 0.5
    h[up, down] = h[down, up] = 0.5 * params.delta
    hop = params.g * np.sqrt(n[1:])
    h[up[:-1], up[1:]] = h[up[1:], up[:-1]] = hop
    h[down[:-1], down[1:]] = h[down[1:], down[:-1]] = -hop
    return h


def parity_operator(n_max):
    """Matrix of ``sigma_x (-1)**(a^dag a)`` in the ED basis."""
    dim = 2 * n_max
    p = np.zeros((dim, dim))
    n = np.arange(n_max)
    sign = np.where(n % 2, -1.0, 1.0)
    p[2 * n, 2 * n + 1] = sign
    p[2 * n + 1, 2 * n] = sign
    return p


def parity_expectation(vec):
    amp = np.asarray(vec).reshape(-1, 2)
    sign = np.where(np.arange(amp.shape[0]) % 2, -1.0, 1.0)
    return float(2.0 * np.sum(sign * amp[:, 0] * amp[:, 1]))


def solve_ed(params, n_max=200, n_levels=10) -> EDSpectrum:
    """Lowest ``n_levels`` eigenpairs of the full Hamiltonian.

    Raises
    ------
    ValueError
        ``n_levels`` outside ``[1, 2 n_max]``.
    EigenSolverError
        From the eigensolver, or if a returned state has no definite parity.
    """
    params = _as_params(params)
    basis = FockBasisSpec(n_max)
    if not 1 <= n_levels <= 2 * basis.n_max:
        raise ValueError(f"n_levels must be in [1, {2 * basis.n_max}], got {n_levels}")
    dec = eigh(build_ed_matrix(params, basis))
    energies = dec.values[:n_levels].copy()
    states = np.ascontiguousarray(dec.vectors[:, :n_levels])
    parity = []
    for k in range(n_levels):
        p = parity_expectation(states[:, k])
        if abs(abs(p) - 1.0) > PARITY_TOL:
            # exact degeneracy across parity sectors; resolve by sector
            return _solve_ed_sectors(params, basis, n_levels)
        parity.append(1 if p > 0 else -1)
    energies.setflags(write=False)
    states.setflags(write=False)
    return EDSpectrum(params, basis.n_max, energies, states, tuple(parity))


def parity_sector_basis(n_max, sign):
    """Orthonormal columns spanning the ``sigma_x (-1)**n = sign`` sector.

    Column ``n`` is ``|n> (x) |sigma_x = sign (-1)**n>``.
    """
    u = np.zeros((2 * n_max, n_max))
    n = np.arange(n_max)
    sx = sign * np.where(n % 2, -1.0, 1.0)
    u[2 * n, n] = 1.0 / np.sqrt(2.0)
    u[2 * n + 1, n] = sx / np.sqrt(2.0)
    return u


def _solve_ed_sectors(params, basis, n_levels):
    h = build_ed_matrix(params, basis)
    vals, vecs, labels = [], [], []
    for sign in (-1, 1):
        u = parity_sector_basis(basis.n_max, sign)
        block = u.T @ h @ u
        dec = eigh(0.5 * (block + block.T))
        vals.append(dec.values)
        vecs.append(u @ dec.vectors)
        labels += [sign] * dec.values.size
    vals = np.concatenate(vals)
    vecs = np.concatenate(vecs, axis=1)
    order = np.argsort(vals, kind="stable")[:n_levels]
    states = fix_signs(np.ascontiguousarray(vecs[:, order]))
    energies = vals[order]
    energies.setflags(write=False)
    states.setflags(write=False)
    return EDSpectrum(params, basis.n_max, energies, states, tuple(labels[i] for i in order))


def photon_number_ed(state) -> float:
    """``<a^dag a>`` of a normalized ED state vector."""
    amp = np.asarray(state).reshape(-1, 2)
    n = np.arange(amp.shape[0])
    return float(np.sum(n * np.sum(amp * amp, axis=1)))
