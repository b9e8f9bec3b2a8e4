import numpy as np
import pytest

from rabi_bo.ed import (
    EDParams,
    build_ed_matrix,
    parity_operator,
    photon_number_ed,
    solve_ed,
)
from rabi_bo.model import ModelParams, potential_minima
from rabi_bo.quadrature import FockBasisSpec


def test_single_fock_state_matrix():
    h = build_ed_matrix(ModelParams(10, 3.0), FockBasisSpec(1))
    assert np.array_equal(h, [[0.5, 5.0], [5.0, 0.5]])


def test_matrix_structure():
    h = build_ed_matrix(ModelParams(4, 0.7), FockBasisSpec(5))
    assert np.array_equal(h, h.T)
    # <n=1, up| H |n=2, up> = +g sqrt(2); spin down carries the opposite sign
    assert h[2, 4] == pytest.approx(0.7 * np.sqrt(2))
    assert h[3, 5] == pytest.approx(-0.7 * np.sqrt(2))
    assert h[0, 1] == 2.0


def test_rejects_bad_basis():
    with pytest.raises(ValueError):
        build_ed_matrix(ModelParams(1, 1), 0)
    with pytest.raises(ValueError):
        solve_ed(ModelParams(1, 1), n_max=3, n_levels=7)
    with pytest.raises(ValueError):
        EDParams(-1, 0)


def test_decoupled_eigenvalues():
    e = solve_ed(ModelParams(10, 0), n_max=30, n_levels=60)
    n = np.arange(30)
    ref = np.sort(np.concatenate([n + 0.5 - 5, n + 0.5 + 5]))
    assert np.abs(e.energies - ref).max() < 1e-10
    assert np.allclose(solve_ed(ModelParams(10, 0), 30, 2).energies, [-4.5, -3.5], atol=1e-12)


def test_displaced_oscillator():
    e = solve_ed(EDParams(0, 1), n_max=60, n_levels=6)
    ref = np.repeat(np.arange(3) + 0.5 - 1.0, 2)
    assert np.abs(e.energies - ref).max() < 1e-8
    assert sorted(e.parity[:2]) == [-1, 1]


def test_parity_commutes():
    for n in (10, 200):
        h = build_ed_matrix(ModelParams.from_ratio(10, 1.5), FockBasisSpec(n))
        p = parity_operator(n)
        assert np.abs(h @ p - p @ h).max() < 1e-12


def test_state_invariants(spectra):
    for ratio, (_, ed) in spectra.items():
        assert np.all(np.diff(ed.energies) >= 0)
        assert np.allclose(np.sum(ed.states**2, axis=0), 1.0, atol=1e-10)
        p = parity_operator(ed.n_max)
        for k in range(ed.n_levels):
            v = ed.state(k)
            assert v @ p @ v == pytest.approx(ed.parity[k], abs=1e-8)


def test_ground_parity_constant_across_sweep():
    labels = {solve_ed(ModelParams.from_ratio(10, r), 120, 1).parity[0]
              for r in np.linspace(0, 1.5, 16)}
    assert labels == {-1}


def test_self_convergence_and_variational():
    p = ModelParams.from_ratio(10, 1.5)
    e = {n: solve_ed(p, n, 1).energies[0] for n in (50, 100, 200, 250)}
    assert abs(e[250] - e[200]) < 1e-8
    assert e[100] <= e[50] + 1e-12 and e[200] <= e[100] + 1e-12 and e[250] <= e[200] + 1e-12


def test_photon_numbers(spectra):
    assert photon_number_ed(solve_ed(ModelParams(10, 0), 20, 1).state(0)) == pytest.approx(0, abs=1e-20)
    assert photon_number_ed(spectra[0.5][1].state(0)) < 0.1
    ed = spectra[1.5][1]
    xi_star = potential_minima(ed.params)[1]
    assert photon_number_ed(ed.state(0)) == pytest.approx(xi_star**2 / 2, rel=0.15)


def test_deterministic():
    p = ModelParams.from_ratio(10, 1.0)
    a, b = solve_ed(p, 60, 4), solve_ed(p, 60, 4)
    assert np.array_equal(a.states, b.states)
