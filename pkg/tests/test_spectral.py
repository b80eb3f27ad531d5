import math

import numpy as np
import pytest

from lmg_geometry.spectral import (EigensolverError, StateSelector, density_of_states,
                                   diagonalize, select_state, spectrum_at)
from lmg_geometry.spin import ModelParams, build_hamiltonian, build_spin_operators


def test_jz_spectrum():
    s = diagonalize(build_spin_operators(1)["Jz"])
    assert np.allclose(s.eigenvalues, [-1, 0, 1])
    assert np.allclose(s.eigenvectors, np.eye(3))


@pytest.mark.parametrize("ox", [0.0, 0.5, 3.0])
def test_linear_hamiltonian_is_rotated_jz(ox):
    j = 6
    s = spectrum_at(j, ModelParams(ox, 0.0))
    assert np.allclose(s.eigenvalues, np.arange(-j, j + 1) * math.sqrt(1 + ox * ox), atol=1e-10)


def test_top_level_near_classical_maximum():
    ox = 0.2 * math.sqrt(15)
    s = spectrum_at(256, ModelParams(ox, 2.0))
    e4 = (1 + ox * ox) / 8 + 2
    assert abs(s.eigenvalues[-1] / 256 - e4) < 2 / 256


@pytest.mark.parametrize("j", [0.5, 1, 32, 256])
def test_residual_and_orthonormality(j, rng):
    p = ModelParams(*rng.uniform([-3, 0], [3, 3]))
    h = build_hamiltonian(j, p)
    s = diagonalize(h)
    v, w = s.eigenvectors, s.eigenvalues
    norm = np.linalg.norm(h, 2)
    assert np.linalg.norm(h @ v - v * w, axis=0).max() <= 1e-10 * norm
    assert np.abs(v.T @ v - np.eye(len(w))).max() < 1e-12
    assert np.all(np.diff(w) >= 0)


def test_sign_convention():
    s = spectrum_at(8, ModelParams(1.1, 1.7))
    v = s.eigenvectors
    piv = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    assert np.all(piv > 0)


def test_spectrum_symmetric_in_omega_x():
    a = spectrum_at(20, ModelParams(1.7, 2.3)).eigenvalues
    b = spectrum_at(20, ModelParams(-1.7, 2.3)).eigenvalues
    assert np.abs(a - b).max() < 1e-10


def test_eigensolver_failure_reported():
    with pytest.raises(EigensolverError):
        diagonalize(np.array([[np.nan, 0], [0, 1.0]]))


def test_select_state():
    s = spectrum_at(1, ModelParams(0.3, 0.2))
    assert select_state(s, "ground") == 0
    assert select_state(s, "highest") == 2
    assert select_state(s, StateSelector("index", 1)) == 1
    assert select_state(s, "index:1") == 1
    with pytest.raises(IndexError):
        select_state(s, 3)


@pytest.mark.parametrize("text", ["lowest", "index:-1", "x"])
def test_bad_selector(text):
    with pytest.raises(ValueError):
        StateSelector.parse(text)


def test_dos_esqpt_peak():
    ox = 0.2 * math.sqrt(15)
    h = density_of_states(spectrum_at(256, ModelParams(ox, 2.0)), 40)
    k = int(np.argmax(h.counts))
    width = h.bin_edges[1] - h.bin_edges[0]
    e1 = math.sqrt(1 + ox * ox)
    assert h.bin_edges[k] - width <= e1 <= h.bin_edges[k + 1] + width


def test_dos_counts_conserved():
    h = density_of_states(spectrum_at(4, ModelParams(0.3, 1.0)), 3)
    assert h.counts.sum() == 9
    assert len(h.bin_edges) == 4


def test_dos_flat_for_linear_spectrum():
    h = density_of_states(spectrum_at(200, ModelParams(0.4, 0.0)), 20)
    inner = h.counts[1:-1]
    assert inner.max() / inner.min() <= 1.5


def test_dos_needs_two_bins():
    with pytest.raises(ValueError):
        density_of_states(spectrum_at(2, ModelParams(0, 0)), 1)
