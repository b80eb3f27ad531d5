import math

import numpy as np
import pytest

from lmg_geometry.coherent import coherent_qgt_closed_form
from lmg_geometry.geometry import (CurvatureField, NonUniformGrid, SingularMetric,
                                   gaussian_curvature, metric_checks, scalar_curvature_at,
                                   scalar_curvature_field)
from lmg_geometry.holstein_primakoff import hp_ground_metric
from lmg_geometry.qgt import QgtField
from lmg_geometry.spin import ModelParams


def sphere(x1, x2):
    return 1.0, 0.0, math.sin(x1) ** 2


def tabulate(metric, ox, xi):
    g = np.array([[metric(a, b) for a in ox] for b in xi])
    return QgtField.from_arrays(ox, xi, g[..., 0], g[..., 1], g[..., 2])


def christoffel_curvature(metric, x, h=1e-3):
    """R = 2 R_1212 / det g from Christoffel symbols, for cross-checking."""
    def G(p):
        a, b, c = metric(*p)
        return np.array([[a, b], [b, c]])

    def dG(p):
        out = np.empty((2, 2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            out[k] = (G(p + e) - G(p - e)) / (2 * h)
        return out

    def gamma(p):
        gi = np.linalg.inv(G(p))
        d = dG(p)  # d[k, i, j] = d_k g_ij
        t = np.empty((2, 2, 2))
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    t[a, b, c] = 0.5 * sum(gi[a, l] * (d[b, l, c] + d[c, l, b] - d[l, b, c])
                                           for l in range(2))
        return t

    x = np.asarray(x, float)
    g0 = gamma(x)
    dgam = np.empty((2, 2, 2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        dgam[k] = (gamma(x + e) - gamma(x - e)) / (2 * h)
    # R^a_{bcd} = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    a, b, c, d = 0, 1, 0, 1
    gmat = G(x)
    # lower the first index: R_{1212} = g_{1a} R^a_{212}
    ra = np.empty(2)
    for aa in range(2):
        ra[aa] = (dgam[c][aa, d, b] - dgam[d][aa, c, b]
                  + sum(g0[aa, c, e] * g0[e, d, b] - g0[aa, d, e] * g0[e, c, b] for e in range(2)))
    r1212 = gmat[0] @ ra
    return 2 * r1212 / np.linalg.det(gmat)


def test_sphere_function_mode():
    assert scalar_curvature_at(sphere, (1.0, 0.3), 1e-3) == pytest.approx(2, abs=1e-5)


def test_flat_metric():
    assert abs(scalar_curvature_at(lambda a, b: (1.0, 0.0, 1.0), (0.2, -3.0))) < 1e-10


def ground(j):
    def m(ox, xi):
        g = hp_ground_metric(j, ModelParams(ox, xi))
        return g.g11, g.g12, g.g22
    return m


def test_ground_closed_form_is_hyperbolic(rng):
    for _ in range(50):
        j = float(rng.choice([1, 10, 120, 512]))
        ox, xi = rng.uniform(-6, 6), rng.uniform(0, 3)
        assert scalar_curvature_at(ground(j), (ox, xi), 5e-4) == pytest.approx(-4, abs=1e-4)


def test_christoffel_cross_check(rng):
    for _ in range(5):
        x = (rng.uniform(-3, 3), rng.uniform(0.2, 2))
        a = scalar_curvature_at(ground(30), x, 5e-4)
        b = christoffel_curvature(ground(30), x, 5e-4)
        assert a == pytest.approx(b, abs=1e-4)
    assert christoffel_curvature(sphere, (1.0, 0.3)) == pytest.approx(2, abs=1e-5)


def test_sphere_field():
    ox = np.linspace(1.0, 1.4, 21)
    xi = np.linspace(0.0, 0.4, 21)
    c = scalar_curvature_field(tabulate(sphere, ox, xi))
    inner = c.R[2:-2, 2:-2]
    assert np.all(c.status[2:-2, 2:-2] == "ok")
    assert np.abs(inner - 2).max() < 1e-3
    assert np.all(c.status[:2] == "boundary") and np.all(c.status[:, -2:] == "boundary")
    assert np.all(np.isnan(c.R[:2]))


def test_ground_closed_form_field():
    # the error of the central-difference stencil falls 4x per halving of
    # the spacing; 1e-2 everywhere needs about 4x the 61 x 26 mesh
    errs = []
    for nx, ny in ((61, 26), (121, 51), (241, 101)):
        c = scalar_curvature_field(tabulate(ground(120), np.linspace(-6, 6, nx),
                                            np.linspace(0.5, 3, ny)))
        errs.append(np.abs(c.R[2:-2, 2:-2] + 4))
    assert errs[0].max() < 0.2 and np.median(errs[0]) < 0.03
    assert errs[2].max() < 1.5e-2 and np.median(errs[2]) < 2e-3
    assert errs[0].max() / errs[1].max() > 3


def test_coherent_broken_field():
    j = 96

    def m(ox, xi):
        q = coherent_qgt_closed_form(j, ModelParams(ox, xi), "broken")
        return q.g11, q.g12, q.g22
    c = scalar_curvature_field(tabulate(m, np.linspace(0, 1, 21), np.linspace(2, 3, 21)))
    assert np.abs(c.R[2:-2, 2:-2] - 4 / j).max() < 1e-3


def test_coordinate_invariance():
    def stretched(y1, y2):
        # x1 = 2 y1 pulls back g11 by a factor 4
        return 4.0, 0.0, math.sin(2 * y1) ** 2
    assert scalar_curvature_at(stretched, (0.5, 0.3), 5e-4) == pytest.approx(2, abs=1e-4)


def test_second_order_convergence():
    errs = [abs(scalar_curvature_at(sphere, (1.0, 0.3), h) - 2) for h in (4e-3, 2e-3, 1e-3)]
    assert 3 < errs[0] / errs[1] < 5 and 3 < errs[1] / errs[2] < 5


def test_gaussian_curvature():
    assert gaussian_curvature(-4.0) == -2.0
    c = CurvatureField(np.zeros(1), np.zeros(1), np.array([[3.0]]), np.array([["ok"]], object))
    assert c.K[0, 0] == 1.5


def test_singular_metric():
    with pytest.raises(SingularMetric):
        scalar_curvature_at(lambda a, b: (1.0, 1.0, 1.0), (0, 0))
    ox = np.linspace(0, 1, 5)
    f = tabulate(lambda a, b: (1.0, 1.0, 1.0), ox, ox)
    assert scalar_curvature_field(f).status[2, 2] == "singular"


def test_failed_nodes_propagate():
    ox = np.linspace(1.0, 1.4, 9)
    f = tabulate(sphere, ox, ox - 1.0)
    f.status[3, 3] = "failed: test"
    c = scalar_curvature_field(f)
    assert c.status[3, 3] == "failed" and c.status[3, 4] == "failed" and math.isnan(c.R[3, 3])
    assert c.status[2, 6] == "ok" and c.status[6, 6] == "ok"


def test_grid_errors():
    with pytest.raises(NonUniformGrid):
        scalar_curvature_field(tabulate(sphere, [1, 1.1, 1.2, 1.4, 1.5], np.linspace(0, 1, 5)))
    with pytest.raises(ValueError):
        scalar_curvature_field(tabulate(sphere, np.linspace(1, 2, 4), np.linspace(0, 1, 5)))


def test_metric_checks():
    a = metric_checks(1, 0, 1)
    assert a["det"] == 1 and a["positive_definite"]
    b = metric_checks(1, 1, 1)
    assert b["det"] == 0 and not b["positive_definite"]
    g = hp_ground_metric(120, ModelParams(0.0, 2.3))
    d = metric_checks(g.g11, g.g12, g.g22)["det"]
    assert d == pytest.approx(120 / (16 * 5.6 ** 2.5), rel=1e-12)
