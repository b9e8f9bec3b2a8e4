"""Photon populations, distribution fits and coupling sweeps."""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels, model
from .bo import BOSpectrum, solve_bo
from .ed import EDParams, EDSpectrum, photon_number_ed, solve_ed
from .model import Branch, ModelParams, critical_coupling_of
from .quadrature import QuadratureRule, basis_at_nodes, default_order, gauss_hermite_rule, FockBasisSpec

PROJECTED, COEFFICIENTS = "projected", "coefficients"
FAMILIES = ("Poisson", "GUE", "GOE")
# tie-break order when rss values coincide
FAMILY_PRIORITY = ("Poisson", "GOE", "GUE")
_CODES = {"Poisson": kernels.POISSON, "GUE": kernels.GUE, "GOE": kernels.GOE}

POP_FLOOR = 1e-12
MIN_POINTS = 4
MAX_ITER = 5000
SIMPLEX_TOL = 1e-12
TIE_TOL = 1e-12
MAX_RESTARTS = 20
RESTART_GAIN = 1e-13
_POS_FLOOR = 1e-12


@dataclass(frozen=True)
class PhotonPopulation:
    """Probability mass over Fock indices.

    ``deficit`` is the mass lost before renormalization (nonzero only for
    projected BO populations, where the state leaks past the basis cut).
    """

    p: np.ndarray
    source: str
    deficit: float = 0.0

    @property
    def n(self):
        return np.arange(self.p.size)

    @property
    def even_part(self):
        return self.p[0::2]

    @property
    def odd_part(self):
        return self.p[1::2]

    @property
    def mean_n(self) -> float:
        return float(np.dot(self.n, self.p))

    @property
    def even_mass(self) -> float:
        return float(self.even_part.sum())

    @property
    def odd_mass(self) -> float:
        return float(self.odd_part.sum())


@dataclass(frozen=True)
class DistributionFit:
    """Least-squares fit ``P(n) ~ A f((n - n0) / w)`` for one family."""

    family: str
    amplitude: float
    scale: float
    shift: float
    rss: float
    points_used: int
    subset: str = "all"
    pinned_shift: bool = False
    n_fit: np.ndarray = field(default=None, repr=False, compare=False)
    p_fit: np.ndarray = field(default=None, repr=False, compare=False)

    def curve(self, n):
        s = (np.asarray(n, dtype=float) - self.shift) / self.scale
        return self.amplitude * family_shape(self.family, s)

    def recompute_rss(self):
        r = self.p_fit - self.curve(self.n_fit)
        return float(r @ r)

    def as_dict(self):
        return {
            "family": self.family,
            "amplitude": self.amplitude,
            "scale": self.scale,
            "shift": self.shift,
            "rss": self.rss,
            "points_used": self.points_used,
            "subset": self.subset,
            "pinned_shift": self.pinned_shift,
        }


def family_shape(family, s):
    """Closed-form density of ``family`` at ``s``; zero for ``s < 0``.

    Poisson ``exp(-s)``, GUE ``(32/pi**2) s**2 exp(-4 s**2 / pi)``,
    GOE ``(pi/2) s exp(-pi s**2 / 4)``.
    """
    s = np.asarray(s, dtype=float)
    return kernels.shape_values(_code(family), s).reshape(s.shape)


def _code(family):
    try:
        return _CODES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}") from None


# --- populations ---------------------------------------------------------


def _normalize(p, source):
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    total = float(p.sum())
    if total <= 0.0:
        raise ValueError("population has zero mass")
    out = p / total
    out.setflags(write=False)
    return PhotonPopulation(out, source, deficit=max(0.0, 1.0 - total))


def population_from_bo(spec: BOSpectrum, state_index=0, mode=PROJECTED, rule: QuadratureRule = None):
    """Photon population of a BO eigenstate.

    ``mode="coefficients"`` uses ``P(n) = c_k(n)**2``. ``mode="projected"``
    projects both spin components of ``phi_branch(xi) psi_k(xi)`` onto
    ``|n>`` by quadrature and sums their squares; the result is renormalized
    and the lost mass kept in ``deficit``.
    """
    c = spec.state(state_index)
    if mode == COEFFICIENTS:
        return _normalize(c * c, "bo-coefficients")
    if mode != PROJECTED:
        raise ValueError(f"unknown population mode {mode!r}")
    if rule is None:
        rule = gauss_hermite_rule(spec.quad_order or default_order(spec.n_max))
    table = basis_at_nodes(FockBasisSpec(spec.n_max), rule)
    psi = table @ c
    phi = model.adiabatic_eigenvector(spec.params, spec.branch, rule.nodes)
    weighted = (rule.scaled_weights * psi)[:, None] * phi
    overlaps = table.T @ weighted
    return _normalize(np.sum(overlaps * overlaps, axis=1), "bo-projected")


def population_from_ed(spec: EDSpectrum, state_index=0):
    """``P(n) = sum_s d_k(n, s)**2``."""
    amp = spec.amplitudes(state_index)
    return _normalize(np.sum(amp * amp, axis=1), "ed")


def photon_number_bo(spec: BOSpectrum, state_index=0, mode=PROJECTED):
    return population_from_bo(spec, state_index, mode).mean_n


def total_variation(p, q):
    p, q = np.asarray(p), np.asarray(q)
    m = max(p.size, q.size)
    p = np.pad(p, (0, m - p.size))
    q = np.pad(q, (0, m - q.size))
    return 0.5 * float(np.abs(p - q).sum())


# --- fits ----------------------------------------------------------------


def select_points(pop: PhotonPopulation, subset="all"):
    """Fock indices and populations used in a fit.

    Bins below ``POP_FLOOR`` times the total mass are dropped; for a
    normalized population that is an absolute ``1e-12`` floor.
    """
    n, p = pop.n, pop.p
    if subset == "even":
        keep = n % 2 == 0
    elif subset == "odd":
        keep = n % 2 == 1
    elif subset == "all":
        keep = np.ones(n.size, bool)
    else:
        raise ValueError(f"unknown subset {subset!r}")
    keep &= p >= POP_FLOOR * float(p.sum())
    return n[keep].astype(float), p[keep].astype(float)


def start_grid(n, p, n_max, pin_shift=False):
    """Deterministic 3x3x3 multi-start grid over (A, w, n0)."""
    pmax = float(p.max())
    peak = float(n[np.argmax(p)])
    amps = (pmax, pmax / 2.0, 2.0 * pmax)
    scales = (n_max / 10.0, n_max / 4.0, n_max / 2.0)
    shifts = (0.0,) if pin_shift else (0.0, peak / 2.0, peak)
    return list(itertools.product(amps, scales, shifts))


def fit_distribution(pop: PhotonPopulation, family, subset="all", pin_shift=False) -> DistributionFit:
    """Fit ``A f((n - n0) / w)`` to the chosen part of ``pop`` by least squares.

    Nelder-Mead runs from every point of :func:`start_grid` (27 starts, or 9
    with ``n0`` pinned to zero) and the lowest residual wins. Data are divided
    by their maximum before fitting and ``A``/``rss`` rescaled afterwards, so
    the fitted ``w`` and ``n0`` do not depend on an overall factor.
    """
    code = _code(family)
    n, p = select_points(pop, subset)
    if n.size < MIN_POINTS:
        raise ValueError(f"only {n.size} usable points in subset {subset!r}; need {MIN_POINTS}")
    n = np.ascontiguousarray(n)
    scale_p = float(p.max())
    q = np.ascontiguousarray(p / scale_p)
    rss = kernels.family_rss

    if pin_shift:
        def objective(t):
            return rss(code, n, q, t[0], t[1], 0.0)
        bounds = [(_POS_FLOOR, None), (_POS_FLOOR, None)]
    else:
        def objective(t):
            return rss(code, n, q, t[0], t[1], t[2])
        bounds = [(_POS_FLOOR, None), (_POS_FLOOR, None), (0.0, None)]

    opts = {"maxiter": MAX_ITER, "maxfev": 4 * MAX_ITER, "xatol": SIMPLEX_TOL, "fatol": SIMPLEX_TOL}

    snap = code == kernels.POISSON and not pin_shift

    def run(x0):
        res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds, options=opts)
        x = np.array(res.x, dtype=float)
        if snap:
            x[0], x[2] = _snap_poisson_shift(n, x[0], x[1], x[2])
        return x, float(objective(x))

    def polish(x0):
        if snap:
            # objective kinks where n0 crosses an abscissa; settle (A, w) first
            n0 = x0[2]
            res = minimize(lambda t: rss(code, n, q, t[0], t[1], n0), x0[:2],
                           method="Nelder-Mead", bounds=bounds[:2], options=opts)
            x0 = np.array([res.x[0], res.x[1], n0])
            f0 = float(objective(x0))
            x, f = run(x0)
            return (x, f) if f < f0 else (x0, f0)
        return run(x0)

    best_x, best_f = None, math.inf
    for a0, w0, s0 in start_grid(n, q, pop.p.size, pin_shift):
        x, f = run([a0, w0] if pin_shift else [a0, w0, s0])
        if f < best_f:
            best_x, best_f = x, f
    # restart from the winner until the simplex stops finding improvements
    for _ in range(MAX_RESTARTS):
        x, f = polish(best_x)
        if not f < best_f - RESTART_GAIN * max(best_f, 1e-300):
            if f <= best_f:
                best_x, best_f = x, f
            break
        best_x, best_f = x, f

    best_x, best_f = _refine(code, n, q, best_x, best_f, pin_shift or snap)
    if pin_shift:
        best_x = best_x[:2]

    amp = float(best_x[0]) * scale_p
    shift = 0.0 if pin_shift else float(best_x[2])
    fit = DistributionFit(family, amp, float(best_x[1]), shift, 0.0, int(n.size), subset,
                          bool(pin_shift), n, p)
    # rss in the caller's units, evaluated the same way recompute_rss does
    object.__setattr__(fit, "rss", fit.recompute_rss())
    return fit


def _shape_slope(code, s):
    """``d f / d s`` of the clipped shapes (zero for ``s < 0``)."""
    on = s >= 0.0
    if code == kernels.POISSON:
        d = -np.exp(-s)
    elif code == kernels.GUE:
        d = (32.0 / math.pi**2) * (2.0 * s - 8.0 * s**3 / math.pi) * np.exp(-4.0 * s * s / math.pi)
    else:
        d = 0.5 * math.pi * (1.0 - 0.5 * math.pi * s * s) * np.exp(-0.25 * math.pi * s * s)
    return np.where(on, d, 0.0)


def _refine(code, n, q, x, f, fix_shift, max_steps=50):
    """Gauss-Newton finish from the simplex optimum.

    The simplex stops once its size drops below tolerance, and near a
    shallow minimum the residual is flat to rounding over a parameter range
    of order ``sqrt(eps)``, so where it stops depends on its path. Newton
    steps on the normal equations converge to the stationary point itself.
    A step is taken only if it does not raise the residual by more than
    rounding.
    """
    x = np.array(x, dtype=float)
    if x.size == 2:
        x = np.append(x, 0.0)
    free = [0, 1] if fix_shift else [0, 1, 2]
    lo = np.array([_POS_FLOOR, _POS_FLOOR, 0.0])

    def resid(t):
        return t[0] * kernels.shape_values(code, (n - t[2]) / t[1]) - q

    for _ in range(max_steps):
        s = (n - x[2]) / x[1]
        d = x[0] * _shape_slope(code, s)
        jac = np.column_stack([kernels.shape_values(code, s), -d * s / x[1], -d / x[1]])[:, free]
        step = np.linalg.lstsq(jac, -resid(x), rcond=None)[0]
        cand = x.copy()
        cand[free] += step
        cand = np.maximum(cand, lo)
        fc = float(kernels.family_rss(code, n, q, cand[0], cand[1], cand[2]))
        if not fc <= f + 64.0 * np.finfo(float).eps * max(f, 1e-300):
            break
        moved = np.abs(cand - x).max()
        x, f = cand, fc
        if moved <= 4.0 * np.finfo(float).eps * (1.0 + np.abs(x).max()):
            break
    return x, f


def _snap_poisson_shift(n, amp, scale, shift):
    """Canonical representative of a Poisson fit.

    ``A exp(-(n - n0) / w)`` only depends on ``A exp(n0 / w)`` while ``n0``
    stays between the same two abscissae, so the optimum is a flat segment.
    Move ``n0`` to the first abscissa at or above it and compensate ``A``.
    """
    above = n[n >= shift]
    if above.size == 0:
        return amp, shift
    target = float(above[0])
    return amp * math.exp(-(target - shift) / scale), target


@dataclass(frozen=True)
class Classification:
    family: str
    fits: dict
    subset: str
    tie_rule: str = "ties within 1e-12 rss go to Poisson, then GOE, then GUE"

    def as_dict(self):
        return {
            "selected": self.family,
            "subset": self.subset,
            "tie_rule": self.tie_rule,
            "fits": [self.fits[f].as_dict() for f in FAMILIES],
        }


def classify_population(pop: PhotonPopulation, subset="all", pin_shift=False) -> Classification:
    """Fit all three families and pick the one with the smallest rss."""
    fits = {f: fit_distribution(pop, f, subset, pin_shift) for f in FAMILIES}
    best = min(fits[f].rss for f in FAMILIES)
    for family in FAMILY_PRIORITY:
        if fits[family].rss <= best + TIE_TOL:
            return Classification(family, fits, subset)
    raise AssertionError("unreachable")


# --- sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    g: float
    g_over_gc: float
    energies_bo: np.ndarray = None
    parity_bo: tuple = None
    photons_bo: np.ndarray = None
    energies_ed: np.ndarray = None
    parity_ed: tuple = None
    photons_ed: np.ndarray = None


def _sweep_point(delta, g, n_levels, solver, n_max, photon_states, branch, quad_order):
    # ED alone also accepts delta = 0 (displaced-oscillator limit)
    params = EDParams(delta, g) if solver == "ed" else ModelParams(delta, g)
    out = {"g": params.g, "g_over_gc": params.g / critical_coupling_of(params.delta)}
    if solver in ("bo", "both"):
        spec = solve_bo(params, branch, n_max, n_levels, quad_order)
        out["energies_bo"] = spec.energies
        out["parity_bo"] = spec.fock_parity
        out["photons_bo"] = np.array([photon_number_bo(spec, k) for k in range(photon_states)])
    if solver in ("ed", "both"):
        spec = solve_ed(params, n_max, n_levels)
        out["energies_ed"] = spec.energies
        out["parity_ed"] = spec.parity
        out["photons_ed"] = np.array([photon_number_ed(spec.state(k)) for k in range(photon_states)])
    return SweepPoint(**out)


def sweep_coupling(delta, g_grid, n_levels=10, solver="both", n_max=200, photon_states=None,
                   branch=Branch.MINUS, quad_order=None, workers=1):
    """Solve every coupling in ``g_grid`` and collect energies and photon numbers.

    Parameters
    ----------
    g_grid : sequence of float
        Ascending, non-negative couplings (absolute, not in units of g_c).
    photon_states : int, optional
        Number of lowest states whose mean photon number is recorded;
        defaults to ``min(n_levels, 4)``.
    workers : int
        Process count; results are returned in grid order regardless.
    """
    g_grid = [float(g) for g in g_grid]
    if any(g < 0 for g in g_grid) or any(b < a for a, b in zip(g_grid, g_grid[1:])):
        raise ValueError("g_grid must be ascending and non-negative")
    if solver not in ("bo", "ed", "both"):
        raise ValueError(f"unknown solver {solver!r}")
    if photon_states is None:
        photon_states = min(n_levels, 4)
    branch = Branch.parse(branch)
    args = [(delta, g, n_levels, solver, n_max, photon_states, branch, quad_order) for g in g_grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, *zip(*args)))
    return [_sweep_point(*a) for a in args]
