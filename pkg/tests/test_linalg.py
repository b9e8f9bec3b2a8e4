import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabi_bo.linalg import EigenSolverError, eigh, fix_signs, symmetrize


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    return symmetrize(rng.normal(size=(n, n)))


def test_diagonal():
    d = eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.array_equal(d.values, [1.0, 2.0, 3.0])
    assert np.allclose(np.abs(d.vectors), np.eye(3)[:, [1, 2, 0]])


def test_pauli_x():
    d = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(d.values, [-1, 1], atol=1e-15)
    s = 1 / np.sqrt(2)
    # sign convention: largest component positive, ties to the lowest index
    assert np.allclose(d.vectors[:, 0], [s, -s])
    assert np.allclose(d.vectors[:, 1], [s, s])


def test_reconstruction_50():
    a = random_symmetric(50, 0)
    d = eigh(a)
    assert np.abs(d.vectors @ np.diag(d.values) @ d.vectors.T - a).max() <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**31), st.floats(-100, 100))
def test_contract(n, seed, shift):
    a = random_symmetric(n, seed)
    d = eigh(a)
    assert np.all(np.diff(d.values) >= 0)
    fro = max(1.0, np.linalg.norm(a))
    assert np.linalg.norm(a @ d.vectors - d.vectors * d.values, axis=0).max() <= 1e-10 * fro
    assert np.abs(d.vectors.T @ d.vectors - np.eye(n)).max() <= 1e-10
    assert abs(d.values.sum() - np.trace(a)) <= 1e-9 * max(1, abs(np.trace(a)))
    shifted = eigh(a + shift * np.eye(n))
    assert np.abs(shifted.values - (d.values + shift)).max() <= 1e-10 * max(1, abs(shift))
    idx = np.argmax(np.abs(d.vectors), axis=0)
    assert np.all(d.vectors[idx, np.arange(n)] > 0)


def test_deterministic():
    a = random_symmetric(80, 7)
    d1, d2 = eigh(a), eigh(a.copy())
    assert np.array_equal(d1.values, d2.values) and np.array_equal(d1.vectors, d2.vectors)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        eigh(np.array([[1.0, np.nan], [np.nan, 1.0]]))
    with pytest.raises(ValueError):
        eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eigh(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        eigh(np.zeros((0, 0)))


def test_reports_nonconvergence(monkeypatch):
    def boom(a):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(EigenSolverError):
        eigh(np.eye(3))


def test_reports_bad_residual(monkeypatch):
    monkeypatch.setattr(np.linalg, "eigh", lambda a: (np.zeros(2), np.eye(2)))
    with pytest.raises(EigenSolverError):
        eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_fix_signs_tie_goes_to_lowest_index():
    v = np.array([[-0.5], [0.5], [0.1]])
    assert np.allclose(fix_signs(v.copy())[:, 0], [0.5, -0.5, -0.1])
