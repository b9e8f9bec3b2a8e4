import pytest

from rabi_bo import ModelParams, solve_bo, solve_ed

DELTA = 10.0
N_MAX = 200


@pytest.fixture(scope="session")
def spectra():
    """BO and ED spectra at delta=10 for g/g_c in {0.5, 1.0, 1.5}, 6 levels."""
    out = {}
    for ratio in (0.5, 1.0, 1.5):
        params = ModelParams.from_ratio(DELTA, ratio)
        out[ratio] = (
            solve_bo(params, n_max=N_MAX, n_levels=6),
            solve_ed(params, n_max=N_MAX, n_levels=6),
        )
    return out
