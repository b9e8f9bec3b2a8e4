"""Gauss-Hermite rules and normalized oscillator eigenfunctions.

Matrix elements ``<n|f|m>`` of a potential are assembled as
``sum_q W_q h_n(x_q) f(x_q) h_m(x_q)`` where ``W_q = w_q exp(x_q**2)`` is the
weight with the Gaussian absorbed. Neither ``w_q`` (which underflows for
large rules) nor ``exp(x**2)`` is ever needed on the assembly path.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import eigvalsh

MIN_ORDER = 201


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight ``exp(-x**2)``.

    Attributes
    ----------
    nodes : ndarray
        Ascending abscissae, symmetric about zero.
    weights : ndarray
        Gaussian weights ``w_q``; the smallest ones may underflow to zero.
    scaled_weights : ndarray
        ``w_q * exp(nodes**2)``, always finite and positive.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    def integrate(self, f):
        """``int f(x) exp(-x**2) dx`` for a vectorized ``f``."""
        return float(np.dot(self.weights, f(self.nodes)))

    def integrate_plain(self, f):
        """``int f(x) dx`` for ``f`` decaying like ``exp(-x**2)``."""
        return float(np.dot(self.scaled_weights, f(self.nodes)))


@dataclass(frozen=True)
class FockBasisSpec:
    """Truncated oscillator basis ``|0>, ..., |n_max - 1>``."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))


def default_order(n_max: int) -> int:
    return max(MIN_ORDER, 2 * int(n_max) + 1)


@functools.lru_cache(maxsize=32)
def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Nodes and weights of the ``order``-point Gauss-Hermite rule.

    Nodes are the eigenvalues of the Jacobi matrix with off-diagonals
    ``sqrt(k/2)`` (Golub-Welsch). Weights come from the Christoffel identity
    ``w_q exp(x_q**2) = 1 / sum_k h_k(x_q)**2``, which is the Golub-Welsch
    weight formula rewritten so that tail weights keep full relative accuracy.
    """
    if int(order) != order or order < 1:
        raise ValueError(f"quadrature order must be an integer >= 1, got {order!r}")
    order = int(order)
    if order == 1:
        x = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, order) / 2.0)
        jac = np.diag(off, 1)
        jac = jac + jac.T
        x = eigvalsh(jac)
        x = 0.5 * (x - x[::-1])
        if order % 2:
            x[order // 2] = 0.0
    table = kernels.hermite_table(order, x)
    scaled = 1.0 / np.einsum("qn,qn->q", table, table)
    scaled = 0.5 * (scaled + scaled[::-1])
    with np.errstate(under="ignore"):
        weights = scaled * np.exp(-x * x)
    for arr in (x, weights, scaled):
        arr.setflags(write=False)
    return QuadratureRule(x, weights, scaled)


def hermite_function(n, xi):
    """Normalized oscillator eigenfunction ``h_n(xi)``.

    ``h_n = (2**n n! sqrt(pi))**(-1/2) H_n(xi) exp(-xi**2/2)``, evaluated by
    the normalized three-term recurrence.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    xi_arr = np.asarray(xi, dtype=float)
    out = kernels.hermite_table(int(n) + 1, xi_arr.ravel())[:, -1].reshape(xi_arr.shape)
    return out[()] if out.ndim == 0 else out


def hermite_functions(n_max, xi):
    """Table ``T[i, n] = h_n(xi[i])`` for ``n < n_max``."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    return kernels.hermite_table(int(n_max), np.asarray(xi, dtype=float).ravel())


@functools.lru_cache(maxsize=8)
def _node_table(order, n_max):
    rule = gauss_hermite_rule(order)
    table = kernels.hermite_table(n_max, rule.nodes)
    table.setflags(write=False)
    return table


def basis_at_nodes(basis: FockBasisSpec, rule: QuadratureRule):
    """``h_n`` at the rule's nodes, shape ``(Q, N)``; cached for standard rules."""
    if rule is gauss_hermite_rule(rule.order):
        return _node_table(rule.order, basis.n_max)
    return kernels.hermite_table(basis.n_max, rule.nodes)


def check_order(basis: FockBasisSpec, rule: QuadratureRule):
    if rule.order < 2 * basis.n_max + 1:
        raise ValueError(
            f"quadrature order {rule.order} too small for n_max={basis.n_max}; "
            f"need at least {2 * basis.n_max + 1}"
        )


def potential_matrix(f, basis: FockBasisSpec, rule: QuadratureRule = None):
    """Fock-basis matrix ``M[n, m] = <n|f|m>`` of a multiplicative potential.

    Parameters
    ----------
    f : callable or array_like
        Vectorized potential, or its values at ``rule.nodes``.
    basis : FockBasisSpec
    rule : QuadratureRule, optional
        Defaults to ``gauss_hermite_rule(default_order(basis.n_max))``.
    """
    if rule is None:
        rule = gauss_hermite_rule(default_order(basis.n_max))
    check_order(basis, rule)
    fx = f(rule.nodes) if callable(f) else np.asarray(f, dtype=float)
    fx = np.broadcast_to(np.asarray(fx, dtype=float), rule.nodes.shape)
    table = basis_at_nodes(basis, rule)
    # Fold onto x > 0: h_n(-x) = (-1)**n h_n(x) bitwise, so the n+m odd block
    # only sees the odd part of f and vanishes exactly for even f.
    q = rule.order
    pos = np.arange(q - q // 2, q)
    mirror = q - 1 - pos
    w = rule.scaled_weights[pos]
    f_even = 0.5 * (fx[pos] + fx[mirror])
    f_odd = 0.5 * (fx[pos] - fx[mirror])
    tp = table[pos]
    m_even = 2.0 * (tp.T @ (tp * (w * f_even)[:, None]))
    if q % 2:
        t0 = table[q // 2]
        m_even += rule.scaled_weights[q // 2] * fx[q // 2] * np.outer(t0, t0)
    if np.any(f_odd):
        m_odd = 2.0 * (tp.T @ (tp * (w * f_odd)[:, None]))
    else:
        m_odd = np.zeros_like(m_even)
    n = np.arange(basis.n_max)
    m = np.where(np.add.outer(n, n) % 2 == 0, m_even, m_odd)
    return 0.5 * (m + m.T)


def gaussian_moment(k: int) -> float:
    """``int x**k exp(-x**2) dx``."""
    if k % 2:
        return 0.0
    return math.gamma((k + 1) / 2.0)
