"""Closed-form quantities of the adiabatically diagonalized two-level sector.

Energies are in units of the mode quantum and positions are the dimensionless
oscillator coordinate ``xi``, with ``a = (xi + d/dxi) / sqrt(2)``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np


class Branch(enum.Enum):
    """Lower (``MINUS``) or upper (``PLUS``) adiabatic surface."""

    MINUS = -1
    PLUS = 1

    @property
    def sign(self) -> int:
        return self.value

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("minus", "-", "lower", "-1"):
            return cls.MINUS
        if key in ("plus", "+", "upper", "1", "+1"):
            return cls.PLUS
        raise ValueError(f"unknown branch {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless Rabi-model parameters.

    Parameters
    ----------
    delta : float
        Two-level splitting, strictly positive.
    g : float
        Coupling strength, non-negative.
    """

    delta: float
    g: float

    def __post_init__(self):
        delta, g = float(self.delta), float(self.g)
        if not math.isfinite(delta) or delta <= 0.0:
            raise ValueError(f"delta must be finite and > 0, got {self.delta!r}")
        if not math.isfinite(g) or g < 0.0:
            raise ValueError(f"g must be finite and >= 0, got {self.g!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "g", g)

    @property
    def beta(self) -> float:
        return 2.0 * math.sqrt(2.0) * self.g / self.delta

    @property
    def g_c(self) -> float:
        return critical_coupling(self)

    @property
    def g_over_gc(self) -> float:
        return self.g / self.g_c

    @classmethod
    def from_ratio(cls, delta, g_over_gc):
        """Build parameters from a coupling given in units of ``g_c``."""
        return cls(delta, float(g_over_gc) * critical_coupling_of(delta))


def critical_coupling_of(delta) -> float:
    """``g_c = sqrt(1 + sqrt(1 + delta**2 / 16))`` for a bare splitting.

    ``delta = 0`` is accepted here and returns the limit ``sqrt(2)``.
    """
    delta = float(delta)
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    return math.sqrt(1.0 + math.sqrt(1.0 + delta * delta / 16.0))


def critical_coupling(params: ModelParams) -> float:
    return critical_coupling_of(params.delta)


def adiabatic_energy(params: ModelParams, branch, xi):
    """Eigenvalue ``±(delta/2) sqrt(1 + beta**2 xi**2)`` of the two-level block."""
    branch = Branch.parse(branch)
    xi = np.asarray(xi, dtype=float)
    b = params.beta
    out = branch.sign * 0.5 * params.delta * np.sqrt(1.0 + (b * xi) ** 2)
    return out[()] if out.ndim == 0 else out


def mixing_angle_gamma(params: ModelParams, xi):
    """``gamma(xi) = beta xi / sqrt(1 + beta**2 xi**2)``, in (-1, 1)."""
    xi = np.asarray(xi, dtype=float)
    bx = params.beta * xi
    out = bx / np.sqrt(1.0 + bx * bx)
    return out[()] if out.ndim == 0 else out


def two_level_matrix(params: ModelParams, xi):
    """The 2x2 matrix ``(1/2)[[2 sqrt2 g xi, delta], [delta, -2 sqrt2 g xi]]``.

    Rows and columns are ordered (spin up, spin down) in the sigma_z basis.
    Vectorized over ``xi``; the matrix axes are the last two.
    """
    xi = np.asarray(xi, dtype=float)
    z = math.sqrt(2.0) * params.g * xi
    half = 0.5 * params.delta * np.ones_like(xi)
    return np.stack([np.stack([z, half], -1), np.stack([half, -z], -1)], -2)


def adiabatic_eigenvector(params: ModelParams, branch, xi):
    """Unit eigenvector of the two-level block on the chosen branch.

    Returns an array with a trailing axis of length 2 holding the
    (spin up, spin down) components. The sign convention is fixed as
    ``phi_plus = (+sqrt(1+gamma), sqrt(1-gamma)) / sqrt2`` and
    ``phi_minus = (-sqrt(1-gamma), sqrt(1+gamma)) / sqrt2``, so the spin-down
    component is never negative.
    """
    branch = Branch.parse(branch)
    gam = np.asarray(mixing_angle_gamma(params, xi), dtype=float)
    s = branch.sign
    # 1 - |gamma| cancels badly for large beta*xi; use 1/(c(c+|bx|)) there.
    bx = params.beta * np.asarray(xi, dtype=float)
    c = np.sqrt(1.0 + bx * bx)
    small = 1.0 / (c * (c + np.abs(bx)))
    one_plus = np.where(gam >= 0, 1.0 + gam, small)
    one_minus = np.where(gam >= 0, small, 1.0 - gam)
    up = s * np.sqrt(0.5 * (one_plus if s > 0 else one_minus))
    down = np.sqrt(0.5 * (one_minus if s > 0 else one_plus))
    return np.stack([up, down], -1)


def effective_potential(params: ModelParams, branch, xi):
    """``V(xi) = xi**2 / 2 + eps_branch(xi)``."""
    xi = np.asarray(xi, dtype=float)
    out = 0.5 * xi * xi + adiabatic_energy(params, branch, xi)
    return out[()] if np.ndim(out) == 0 else out


def effective_potential_derivatives(params: ModelParams, xi, branch=Branch.MINUS):
    """First and second derivative of the effective potential at ``xi``."""
    branch = Branch.parse(branch)
    xi = np.asarray(xi, dtype=float)
    b2 = params.beta**2
    c = np.sqrt(1.0 + b2 * xi * xi)
    k = branch.sign * 0.5 * params.delta * b2
    d1 = xi + k * xi / c
    d2 = 1.0 + k / c**3
    return d1, d2


def quartic_expansion(params: ModelParams):
    """Landau-form coefficients ``(c0, c2, c4)`` of the lower potential.

    ``V_minus(xi) ~ c0 + c2 xi**2 + c4 xi**4`` for small ``xi``.
    """
    d, b2 = params.delta, params.beta**2
    return (-0.5 * d, 0.5 - 0.25 * b2 * d, b2 * b2 * d / 16.0)


def landau_c2_negative(params: ModelParams) -> bool:
    """Sign diagnostic from the truncated expansion (``c2 < 0``)."""
    return quartic_expansion(params)[1] < 0.0


def has_double_well(params: ModelParams) -> bool:
    """Exact onset test for the lower potential: ``delta beta**2 / 2 > 1``."""
    return 0.5 * params.delta * params.beta**2 > 1.0


def potential_minima(params: ModelParams):
    """Minimizers of the lower effective potential, ascending.

    Returns ``[0.0]`` in the single-well regime and ``[-xi_star, xi_star]``
    once the double well has formed.
    """
    if not has_double_well(params):
        return [0.0]
    b2 = params.beta**2
    r = 0.5 * params.delta * b2
    xi_star = math.sqrt((r * r - 1.0) / b2)
    return [-xi_star, xi_star]
