import math

import numpy as np
import pytest

from lmg_geometry.coherent import (BranchUndefined, angle_qgt, branch_angles,
                                   coherent_broken_det, coherent_curvature,
                                   coherent_qgt_closed_form, coherent_qgt_numeric,
                                   coherent_vector)
from lmg_geometry.holstein_primakoff import hp_broken_metric, hp_symmetric_metric
from lmg_geometry.qgt import qgt_perturbative
from lmg_geometry.semiclassical import coherent_expectations, spin_direction
from lmg_geometry.spin import ModelParams


def test_vector_examples():
    c = coherent_vector(3, 0.0, 0.0).coefficients
    assert c[0] == 1 and np.all(c[1:] == 0)
    c = coherent_vector(3, math.pi, 0.3).coefficients
    assert abs(c[-1]) == pytest.approx(1) and np.abs(c[:-1]).max() < 1e-12
    c = coherent_vector(0.5, math.pi / 2, 0.0).coefficients
    assert np.allclose(c, [1 / math.sqrt(2)] * 2)


@pytest.mark.parametrize("j", [0.5, 7, 100, 512])
def test_normalization_and_direction(j, rng):
    for _ in range(5):
        th, ph = rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)
        c = coherent_vector(j, th, ph).coefficients
        assert abs(np.linalg.norm(c) - 1) <= 1e-12
    o = coherent_expectations(j, 1.2, -0.4)
    assert np.allclose((o.jx, o.jy, o.jz), spin_direction(1.2, -0.4), atol=1e-12)


def test_angle_qgt_is_round_sphere():
    # Fubini-Study metric of spin-j coherent states: (j/2)(dth^2 + sin^2 th dph^2)
    q = angle_qgt(10, 1.1, 0.4)
    assert q[0, 0].real == pytest.approx(5)
    assert q[1, 1].real == pytest.approx(5 * math.sin(1.1) ** 2)
    assert abs(q[0, 1].real) < 1e-12
    assert abs(2 * q[0, 1].imag) == pytest.approx(10 * math.sin(1.1), rel=1e-9)


def test_numeric_matches_closed_form(rng):
    for _ in range(50):
        j = float(rng.choice([1, 8, 96, 512]))
        ox = rng.uniform(-4, 4)
        xi = rng.uniform(math.sqrt(1 + ox * ox) / 2 + 0.05, 4)
        p = ModelParams(ox, xi)
        a = coherent_qgt_numeric(j, p, "broken")
        b = coherent_qgt_closed_form(j, p, "broken")
        for k in ("g11", "g12", "g22", "f12"):
            assert getattr(a, k) == pytest.approx(getattr(b, k), rel=1e-6, abs=1e-9 * j)


@pytest.mark.parametrize("ox", [0.0, 0.7, -2.0])
def test_symmetric_branch(ox):
    p = ModelParams(ox, 0.2)
    a = coherent_qgt_numeric(6, p, "symmetric")
    assert a.g11 == pytest.approx(3 / (1 + ox * ox) ** 2, rel=1e-6)
    assert abs(a.g12) < 1e-6 and abs(a.g22) < 1e-6 and abs(a.det_g) < 1e-6
    assert a.degenerate
    b = coherent_qgt_closed_form(6, p, "symmetric")
    assert b.degenerate and b.det_g == 0


def test_spin_half_symmetric_branch_is_exact():
    for ox in (0.0, 1.3):
        p = ModelParams(ox, 0.1)
        a = coherent_qgt_numeric(0.5, p, "symmetric")
        assert a.g11 == pytest.approx(qgt_perturbative(0.5, p, "highest").g11, rel=1e-6)
        assert a.g11 == pytest.approx(1 / (4 * (1 + ox * ox) ** 2), rel=1e-6)


def test_branch_errors():
    with pytest.raises(BranchUndefined):
        branch_angles(ModelParams(0, 0.2), "broken")
    with pytest.raises(BranchUndefined):
        branch_angles(ModelParams(0, 2.0), "symmetric")
    with pytest.raises(BranchUndefined):
        coherent_qgt_closed_form(4, ModelParams(0.75, 0.625), "broken")
    with pytest.raises(ValueError):
        coherent_qgt_closed_form(4, ModelParams(0, 2), "other")


def test_closed_form_examples(rng):
    assert coherent_qgt_closed_form(10, ModelParams(0, 2.0)).g11 == pytest.approx(10 / 32)
    for _ in range(20):
        ox = rng.uniform(-3, 3)
        p = ModelParams(ox, rng.uniform(math.sqrt(1 + ox * ox) / 2 + 0.01, 4))
        q = coherent_qgt_closed_form(12, p)
        assert coherent_broken_det(12, p) == pytest.approx(q.g11 * q.g22 - q.g12 ** 2, rel=1e-12)


@pytest.mark.parametrize("j", [8, 96, 512])
def test_curvature_four_over_j(j):
    for p in (ModelParams(0.0, 2.3), ModelParams(1.5, 1.4), ModelParams(-3.0, 3.0)):
        assert coherent_curvature(j, p) == pytest.approx(4 / j, abs=1e-6)
    # same value at a second step size
    assert coherent_curvature(j, ModelParams(0.5, 2.0), h=2e-4) == pytest.approx(4 / j, abs=1e-6)


@pytest.mark.parametrize("ox", [0.0, 0.5, 1.0, 1.5])
def test_three_descriptions_agree_away_from_separatrix(ox):
    p = ModelParams(ox, 2.3)
    n = qgt_perturbative(96, p, "highest", doublet="resolved")
    h = hp_broken_metric(96, p)
    c = coherent_qgt_closed_form(96, p)
    for k in ("g11", "g22"):
        ref = getattr(n, k)
        assert getattr(h, k) == pytest.approx(ref, rel=0.1)
        assert getattr(c, k) == pytest.approx(ref, rel=0.1)


def test_symmetric_side_g11_agrees():
    p = ModelParams(6.5, 2.3)
    n = qgt_perturbative(96, p, "highest")
    assert hp_symmetric_metric(96, p).g11 == pytest.approx(n.g11, rel=0.1)
    # the unsqueezed coherent state misses the factor sqrt(s/(s - 2 xi))
    s = math.sqrt(1 + 6.5 ** 2)
    c = coherent_qgt_closed_form(96, p, "symmetric").g11
    assert c * math.sqrt(s / (s - 4.6)) == pytest.approx(n.g11, rel=0.1)
