import numpy as np
import pytest

from rabi_bo import analysis as an
from rabi_bo.analysis import PhotonPopulation, classify_population, fit_distribution
from rabi_bo.bo import solve_bo
from rabi_bo.ed import photon_number_ed, solve_ed
from rabi_bo.model import ModelParams


def synthetic(family, amp, scale, shift=0.0, n_points=41):
    n = np.arange(n_points, dtype=float)
    return PhotonPopulation(amp * an.family_shape(family, (n - shift) / scale), "synthetic")


# --- populations -----------------------------------------------------------


def test_decoupled_populations():
    p = ModelParams(10, 0)
    bo, ed = solve_bo(p, n_max=20, n_levels=1), solve_ed(p, 20, 1)
    for pop in (an.population_from_bo(bo, 0, "coefficients"),
                an.population_from_bo(bo, 0, "projected"),
                an.population_from_ed(ed, 0)):
        assert pop.p[0] == pytest.approx(1.0, abs=1e-12)
        assert np.abs(pop.p[1:]).max() < 1e-12
        assert pop.mean_n == pytest.approx(0.0, abs=1e-12)


def test_population_invariants(spectra):
    for ratio, (bo, ed) in spectra.items():
        for k in range(4):
            for pop in (an.population_from_bo(bo, k, "coefficients"),
                        an.population_from_bo(bo, k, "projected"),
                        an.population_from_ed(ed, k)):
                assert np.all(pop.p >= 0)
                assert pop.p.sum() == pytest.approx(1.0, abs=1e-8)
                assert pop.even_mass + pop.odd_mass == pytest.approx(1.0, abs=1e-10)
                assert pop.mean_n == pytest.approx(float(np.dot(np.arange(pop.p.size), pop.p)))
                assert pop.deficit < 1e-6


def test_coefficient_mode_support(spectra):
    bo, _ = spectra[1.5]
    pop = an.population_from_bo(bo, 0, "coefficients")
    assert bo.fock_parity[0] == "even"
    assert np.abs(pop.odd_part).max() < 1e-10


def test_projected_mean_matches_ed(spectra):
    bo, ed = spectra[1.5]
    pop = an.population_from_bo(bo, 0, "projected")
    ref = photon_number_ed(ed.state(0))
    assert pop.mean_n == pytest.approx(ref, rel=0.05)


def test_ed_population_examples(spectra):
    # converged value is 0.98621; the stated P(0) > 0.99 threshold is checked
    # in the acceptance suite
    assert an.population_from_ed(spectra[0.5][1], 0).p[0] == pytest.approx(0.98621, abs=1e-5)
    pop = an.population_from_ed(spectra[1.0][1], 0)
    assert pop.even_mass > pop.odd_mass


@pytest.mark.parametrize("ratio", [0.5, 1.0, 1.5])
def test_bo_ed_total_variation(spectra, ratio):
    bo, ed = spectra[ratio]
    tv = an.total_variation(an.population_from_bo(bo, 0).p, an.population_from_ed(ed, 0).p)
    assert tv < 0.05


def test_bad_indices_and_modes(spectra):
    bo, ed = spectra[0.5]
    with pytest.raises(IndexError):
        an.population_from_bo(bo, 99)
    with pytest.raises(IndexError):
        an.population_from_ed(ed, 99)
    with pytest.raises(ValueError):
        an.population_from_bo(bo, 0, "sideways")


# --- fits --------------------------------------------------------------------


def test_gue_recovery_example():
    fit = fit_distribution(synthetic("GUE", 0.3, 5.0), "GUE")
    assert fit.amplitude == pytest.approx(0.3, rel=1e-4)
    assert fit.scale == pytest.approx(5.0, rel=1e-4)
    assert fit.shift == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("family", an.FAMILIES)
@pytest.mark.parametrize("amp,scale", [(0.3, 5.0), (0.12, 9.0), (1.0, 2.5)])
def test_recovery_and_self_classification(family, amp, scale):
    pop = synthetic(family, amp, scale)
    c = classify_population(pop)
    fit = c.fits[family]
    assert fit.amplitude == pytest.approx(amp, rel=1e-4)
    assert fit.scale == pytest.approx(scale, rel=1e-4)
    assert c.family == family


@pytest.mark.parametrize("family", ["GUE", "GOE"])
def test_recovery_with_shift(family):
    fit = fit_distribution(synthetic(family, 0.2, 4.0, shift=3.0), family)
    assert fit.scale == pytest.approx(4.0, rel=1e-4)
    assert fit.shift == pytest.approx(3.0, abs=1e-3)


def test_pinned_shift():
    fit = fit_distribution(synthetic("GOE", 0.2, 4.0), "GOE", pin_shift=True)
    assert fit.shift == 0.0 and fit.pinned_shift
    assert fit.scale == pytest.approx(4.0, rel=1e-4)


def test_fit_rejects_degenerate_data():
    pop = PhotonPopulation(np.array([0.7, 0.3, 0.0, 0.0, 0.0, 0.0]), "synthetic")
    with pytest.raises(ValueError):
        fit_distribution(pop, "Poisson")
    with pytest.raises(ValueError):
        fit_distribution(synthetic("GUE", 0.3, 5.0), "Wigner")
    with pytest.raises(ValueError):
        fit_distribution(synthetic("GUE", 0.3, 5.0), "GUE", subset="prime")


def test_start_grid_is_fixed():
    n = np.arange(10.0)
    p = np.linspace(0.0, 1.0, 10)
    grid = an.start_grid(n, p, 40)
    assert len(grid) == 27
    assert {g[1] for g in grid} == {4.0, 10.0, 20.0}
    assert {g[2] for g in grid} == {0.0, 4.5, 9.0}
    assert len(an.start_grid(n, p, 40, pin_shift=True)) == 9


@pytest.fixture(scope="module")
def ground_fits(spectra):
    pop = an.population_from_bo(spectra[1.5][0], 0)
    return pop, classify_population(pop)


def test_fit_record_invariants(ground_fits):
    pop, c = ground_fits
    for fit in c.fits.values():
        assert fit.rss >= 0 and fit.amplitude > 0 and fit.scale > 0 and fit.shift >= 0
        assert fit.recompute_rss() == pytest.approx(fit.rss, abs=1e-10)
        assert fit.points_used == int(np.sum(pop.p >= an.POP_FLOOR))


def test_fit_local_optimality(ground_fits):
    pop, c = ground_fits
    for fit in c.fits.values():
        n, p = fit.n_fit, fit.p_fit
        base = np.array([fit.amplitude, fit.scale, fit.shift])
        for i in range(3):
            for sign in (-1, 1):
                t = base.copy()
                t[i] *= 1 + sign * 0.01
                r = p - t[0] * an.family_shape(fit.family, (n - t[2]) / t[1])
                assert float(r @ r) >= fit.rss - 1e-12


def test_classification_rescaling(ground_fits):
    pop, c = ground_fits
    scaled = PhotonPopulation(pop.p * 3.7, pop.source)
    c2 = classify_population(scaled)
    assert c2.family == c.family
    for f in an.FAMILIES:
        a, b = c.fits[f], c2.fits[f]
        assert b.amplitude == pytest.approx(3.7 * a.amplitude, rel=1e-8)
        assert b.scale == pytest.approx(a.scale, abs=1e-8)
        assert b.shift == pytest.approx(a.shift, abs=1e-8)


def test_ground_state_even_subset_is_gue(spectra):
    pop = an.population_from_bo(spectra[1.5][0], 0)
    assert classify_population(pop, "even").family == "GUE"


def test_tie_goes_to_poisson():
    # every family fits a flat 1e-7 floor to within rss ~ 4e-14
    pop = PhotonPopulation(np.full(4, 1e-7), "synthetic")
    c = classify_population(pop)
    rss = [c.fits[f].rss for f in an.FAMILIES]
    assert max(rss) - min(rss) <= an.TIE_TOL
    assert c.family == "Poisson"


# --- sweeps ------------------------------------------------------------------


def test_sweep_zero_coupling_exact():
    (pt,) = an.sweep_coupling(10.0, [0.0], n_levels=10, n_max=60)
    assert np.abs(pt.energies_bo - pt.energies_ed).max() < 1e-10
    assert len(pt.photons_bo) == 4 and len(pt.photons_ed) == 4


def test_sweep_validation():
    with pytest.raises(ValueError):
        an.sweep_coupling(10.0, [1.0, 0.5])
    with pytest.raises(ValueError):
        an.sweep_coupling(10.0, [-1.0])
    with pytest.raises(ValueError):
        an.sweep_coupling(10.0, [1.0], solver="dmrg")


def test_sweep_parallel_matches_serial():
    grid = [0.0, 1.0, 2.0]
    a = an.sweep_coupling(10.0, grid, n_levels=3, n_max=40)
    b = an.sweep_coupling(10.0, grid, n_levels=3, n_max=40, workers=2)
    for x, y in zip(a, b):
        assert np.array_equal(x.energies_bo, y.energies_bo)
        assert np.array_equal(x.photons_ed, y.photons_ed)
        assert x.parity_bo == y.parity_bo


def test_pinned_shift_classifications(spectra):
    # the n0 = 0 reading of the s -> n mapping; the fitted-shift default differs
    # for the second and third excited states at 1.5 g_c
    fams = [classify_population(an.population_from_bo(spectra[1.5][0], k), "all", True).family
            for k in range(4)]
    assert fams == ["GUE", "GUE", "GOE", "GOE"]
    assert classify_population(an.population_from_bo(spectra[1.0][0], 0), "all", True).family == "Poisson"
