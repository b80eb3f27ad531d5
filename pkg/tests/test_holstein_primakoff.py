import math

import numpy as np
import pytest

from lmg_geometry.coherent import coherent_qgt_closed_form
from lmg_geometry.geometry import scalar_curvature_at
from lmg_geometry.holstein_primakoff import (OutsidePhase, SingularAt, broken_frame, e_max,
                                             hp_broken_berry, hp_broken_metric,
                                             hp_broken_quadratic, hp_gaussian_qgt,
                                             hp_ground_metric, hp_symmetric_metric,
                                             quadratic_frequency)
from lmg_geometry.qgt import qgt_perturbative
from lmg_geometry.spin import ModelParams

OXC = math.sqrt(4 * 2.3 ** 2 - 1)


def test_ground_examples():
    g = hp_ground_metric(10, ModelParams(0, 0))
    assert (g.g11, g.g12, g.g22) == pytest.approx((5, 0, 1 / 8))
    assert hp_ground_metric(7, ModelParams(0, 2.3)).g22 == pytest.approx(1 / (8 * 5.6 ** 2), rel=1e-14)


def test_singularities():
    with pytest.raises(SingularAt):
        hp_ground_metric(4, ModelParams(0, -0.5))
    with pytest.raises(SingularAt):
        hp_symmetric_metric(4, ModelParams(0.75, 0.625))
    with pytest.raises(OutsidePhase):
        hp_broken_quadratic(4, ModelParams(5.0, 2.3))
    with pytest.raises(OutsidePhase):
        hp_broken_metric(4, ModelParams(5.0, 2.3))
    with pytest.raises(SingularAt):
        hp_broken_berry(4, ModelParams(0.75, 0.625))


def metric_fn(fn, j):
    def m(ox, xi):
        g = fn(j, ModelParams(ox, xi))
        return g.g11, g.g12, g.g22
    return m


def test_constant_curvature(rng):
    for _ in range(50):
        j = float(rng.choice([2, 50, 300]))
        ox = rng.uniform(-6, 6)
        s = math.sqrt(1 + ox * ox)
        xg = (ox, rng.uniform(0, 3))
        f = rng.uniform(0, 0.95)
        xs = (ox, f * s / 2)
        hs = 5e-4 * (1 - f)  # curvature of the metric grows toward the separatrix
        assert scalar_curvature_at(metric_fn(hp_ground_metric, j), xg, 5e-4) == pytest.approx(-4, abs=1e-4)
        assert scalar_curvature_at(metric_fn(hp_symmetric_metric, j), xs, hs) == pytest.approx(-4, abs=1e-4)


def test_determinants(rng):
    for _ in range(20):
        ox, j = rng.uniform(-5, 5), float(rng.integers(1, 500))
        for fn, xi in ((hp_ground_metric, rng.uniform(0, 3)),
                       (hp_symmetric_metric, rng.uniform(0, 0.9) * math.sqrt(1 + ox * ox) / 2)):
            g = fn(j, ModelParams(ox, xi))
            assert g.det_g == pytest.approx(g.g11 * g.g22 - g.g12 ** 2, rel=1e-12)


def test_symmetric_equals_ground_at_zero_coupling():
    for ox in (0.0, 1.2, -3.0):
        a = hp_ground_metric(12, ModelParams(ox, 0))
        b = hp_symmetric_metric(12, ModelParams(ox, 0))
        assert (a.g11, a.g12, a.g22, a.det_g) == (b.g11, b.g12, b.g22, b.det_g)


def test_symmetric_side_positive_definite():
    g = hp_symmetric_metric(96, ModelParams(6.0, 2.3))
    assert all(math.isfinite(v) for v in (g.g11, g.g12, g.g22)) and g.g11 > 0 and g.det_g > 0


def test_symmetric_g22_divergence():
    for d in (1e-1, 1e-2, 1e-3):
        ox = OXC + d
        g = hp_symmetric_metric(96, ModelParams(ox, 2.3))
        assert g.g22 == pytest.approx(1 / (8 * (math.sqrt(1 + ox * ox) - 4.6) ** 2), rel=1e-12)


def test_quadratic():
    assert hp_broken_quadratic(1, ModelParams(0, 1)).frequency == pytest.approx(math.sqrt(3))
    assert hp_broken_quadratic(1, ModelParams(0.75, 0.625)).frequency == 0
    q = hp_broken_quadratic(256, ModelParams(0, 2))
    assert q.constant / 256 == pytest.approx(2.125)
    for ox, xi in ((0.0, 1.0), (1.5, 2.3), (3.9, 2.1)):
        q = hp_broken_quadratic(64, ModelParams(ox, xi))
        assert quadratic_frequency(q) == pytest.approx(q.frequency, rel=1e-12)


def test_frame_points_at_x4():
    from lmg_geometry.semiclassical import stationary_points
    p = ModelParams(1.7, 2.3)
    x4 = next(s for s in stationary_points(p) if s.label == "x4").point.direction
    r = broken_frame(p)
    assert np.allclose(r.T @ r, np.eye(3))
    assert np.allclose(r[:, 2], x4) or np.allclose(r[:, 2] * [1, -1, 1], x4)


@pytest.mark.parametrize("ox", [0.0, 1.0, 2.0, 3.0])
def test_gaussian_routes_agree(ox):
    p = ModelParams(ox, 2.3)
    a = hp_broken_metric(96, p)
    b = hp_gaussian_qgt(96, p)
    for k in ("g11", "g12", "g22"):
        assert getattr(a, k) == pytest.approx(b[k], rel=1e-8, abs=1e-8)


def test_broken_metric_matches_numerics():
    p = ModelParams(2.0, 2.3)
    a = hp_broken_metric(96, p)
    n = qgt_perturbative(96, p, "highest", doublet="resolved")
    for k in ("g11", "g12", "g22"):
        assert getattr(a, k) == pytest.approx(getattr(n, k), rel=0.05)


def test_broken_metric_symmetry_and_divergence():
    assert abs(hp_broken_metric(96, ModelParams(0, 2.3)).g12) < 1e-8
    g = [hp_broken_metric(96, ModelParams(OXC - d, 2.3)).g22 for d in (0.5, 0.1, 0.01)]
    assert g[0] < g[1] < g[2]


def test_divergence_exponents_match():
    ds = np.array([1e-3, 5e-4])
    gb = [hp_gaussian_qgt(96, ModelParams(OXC - d, 2.3))["g22"] for d in ds]
    gs = [hp_symmetric_metric(96, ModelParams(OXC + d, 2.3)).g22 for d in ds]
    eb = np.polyfit(np.log(ds), np.log(gb), 1)[0]
    es = np.polyfit(np.log(ds), np.log(gs), 1)[0]
    assert abs(eb - es) < 0.1


def test_berry_formula():
    assert hp_broken_berry(1, ModelParams(0, 1)) == pytest.approx(
        -3 / (4 * math.sqrt(3)) + 17 / 48, rel=1e-14)
    f = [abs(hp_broken_berry(96, ModelParams(OXC - d, 2.3))) for d in (0.1, 0.01, 0.001)]
    assert f[0] < f[1] < f[2]


def test_gaussian_berry_curvature_is_coherent_value():
    # the Gaussian state carries the classical-displacement Berry curvature;
    # the zero-point terms of the closed formula differ at O(1)
    for ox in (0.0, 2.0):
        p = ModelParams(ox, 2.3)
        f = hp_gaussian_qgt(96, p)["f12"]
        assert f == pytest.approx(coherent_qgt_closed_form(96, p).f12, rel=1e-9)
        assert abs(f - hp_broken_berry(96, p)) < 0.05


def test_e_max():
    assert e_max(ModelParams(OXC, 2.3)) == pytest.approx(4.6)
    assert e_max(ModelParams(OXC - 1e-12, 2.3)) == pytest.approx(4.6)
    h = 1e-4
    f = lambda x: e_max(ModelParams(x, 2.3))
    left = (f(OXC - h) - f(OXC - 2 * h)) / h
    right = (f(OXC + 2 * h) - f(OXC + h)) / h
    assert abs(left - right) < 1e-3
    d2l = (f(OXC - h) - 2 * f(OXC - 2 * h) + f(OXC - 3 * h)) / h ** 2
    d2r = (f(OXC + 3 * h) - 2 * f(OXC + 2 * h) + f(OXC + h)) / h ** 2
    assert abs(d2l - d2r) > 0.01
    assert e_max(ModelParams(-1.0, 2.3)) == e_max(ModelParams(1.0, 2.3))
