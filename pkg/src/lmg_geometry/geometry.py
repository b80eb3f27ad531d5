"""Scalar curvature of a two-dimensional Riemannian metric.

With g = det(g_ij) and d_k = d/dx^k, the scalar curvature is
    R = (A + B) / sqrt(g),
    A = d_1( g12/(g11 sqrt g) d_2 g11 - d_1 g22/sqrt g ),
    B = d_2( 2 d_1 g12/sqrt g - d_2 g11/sqrt g - g12/(g11 sqrt g) d_1 g11 ).
Both the inner and the outer derivatives are central differences.
"""
from dataclasses import dataclass

import numpy as np


class SingularMetric(ArithmeticError):
    pass


class NonUniformGrid(ValueError):
    pass


DET_FLOOR = 1e-14


@dataclass
class CurvatureField:
    """R on a mesh, shape (len(xi_y), len(omega_x)); undefined nodes are NaN.

    status per node: 'ok', 'boundary', 'singular' or 'failed'.
    """
    omega_x: np.ndarray
    xi_y: np.ndarray
    R: np.ndarray
    status: np.ndarray

    @property
    def K(self):
        return gaussian_curvature(self.R)


def gaussian_curvature(R):
    """Gaussian curvature K = R/2."""
    return np.asarray(R) / 2 if np.ndim(R) else R / 2


def _inner(g11, g12, g22, d1, d2):
    """The two bracketed quantities of A and B at one point."""
    sg = np.sqrt(g11 * g22 - g12 ** 2)
    a = g12 / (g11 * sg) * d2[0] - d1[2] / sg
    b = 2 * d1[1] / sg - d2[0] / sg - g12 / (g11 * sg) * d1[0]
    return a, b


def _singular(vals, det_floor):
    g = np.asarray(vals)
    scale = np.max(np.abs(g))
    det = g[:, 0] * g[:, 2] - g[:, 1] ** 2
    return not np.all(det > det_floor * scale ** 2)


def scalar_curvature_at(metric, x, h=1e-3, det_floor=DET_FLOOR):
    """Scalar curvature of a metric function at one point.

    Args:
        metric: callable (x1, x2) -> (g11, g12, g22).
        x: point (x1, x2).
        h: finite-difference step; the stencil spans x +- 2h.
        det_floor: relative determinant floor, scaled by max|g|^2.

    Returns:
        R as a float.

    Raises:
        SingularMetric when det g is at or below the floor on the stencil.
    """
    x1, x2 = float(x[0]), float(x[1])
    cache = {}

    def G(i, k):
        if (i, k) not in cache:
            cache[(i, k)] = np.array(metric(x1 + i * h, x2 + k * h), float)
        return cache[(i, k)]

    def inner_at(i, k):
        d1 = (G(i + 1, k) - G(i - 1, k)) / (2 * h)
        d2 = (G(i, k + 1) - G(i, k - 1)) / (2 * h)
        return _inner(*G(i, k), d1, d2)

    with np.errstate(all="ignore"):
        a_p, a_m = inner_at(1, 0)[0], inner_at(-1, 0)[0]
        b_p, b_m = inner_at(0, 1)[1], inner_at(0, -1)[1]
    if _singular(list(cache.values()) + [G(0, 0)], det_floor):
        raise SingularMetric(f"det g at or below floor near {x}")
    A = (a_p - a_m) / (2 * h)
    B = (b_p - b_m) / (2 * h)
    g11, g12, g22 = G(0, 0)
    return float((A + B) / np.sqrt(g11 * g22 - g12 ** 2))


def _spacing(v, name):
    v = np.asarray(v, float)
    if v.size < 5:
        raise ValueError(f"{name} needs at least 5 nodes, got {v.size}")
    d = np.diff(v)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise NonUniformGrid(f"{name} grid is not uniform")
    return float(d[0])


def scalar_curvature_field(f, det_floor=DET_FLOOR):
    """Scalar curvature on the interior of a tabulated metric.

    Args:
        f: QgtField (or any object with omega_x, xi_y, g11, g12, g22 and an
            optional status array). Arrays have shape (ny, nx).
        det_floor: relative determinant floor.

    Returns:
        CurvatureField; the two outermost rings of nodes are 'boundary'.
    """
    x, y = np.asarray(f.omega_x, float), np.asarray(f.xi_y, float)
    hx, hy = _spacing(x, "omega_x"), _spacing(y, "xi_y")
    g = np.stack([np.asarray(f.g11, float), np.asarray(f.g12, float),
                  np.asarray(f.g22, float)])
    ny, nx = g.shape[1:]
    status_in = getattr(f, "status", None)
    bad = ~np.all(np.isfinite(g), axis=0)
    if status_in is not None:
        bad |= np.vectorize(lambda s: s != "ok")(np.asarray(status_in, object))

    # inner derivatives on nodes 1..n-2 of each axis
    d1 = np.full_like(g, np.nan)
    d2 = np.full_like(g, np.nan)
    d1[:, :, 1:-1] = (g[:, :, 2:] - g[:, :, :-2]) / (2 * hx)
    d2[:, 1:-1, :] = (g[:, 2:, :] - g[:, :-2, :]) / (2 * hy)
    with np.errstate(all="ignore"):
        a, b = _inner(g[0], g[1], g[2], d1, d2)
        A = np.full((ny, nx), np.nan)
        B = np.full((ny, nx), np.nan)
        A[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2 * hx)
        B[1:-1, :] = (b[2:, :] - b[:-2, :]) / (2 * hy)
        R = (A + B) / np.sqrt(g[0] * g[2] - g[1] ** 2)

    status = np.full((ny, nx), "boundary", dtype=object)
    out = np.full((ny, nx), np.nan)
    offsets = [(0, 0), (0, 1), (0, -1), (0, 2), (0, -2), (1, 0), (-1, 0), (2, 0), (-2, 0),
               (1, 1), (1, -1), (-1, 1), (-1, -1)]
    for iy in range(2, ny - 2):
        for ix in range(2, nx - 2):
            pts = [(iy + dy, ix + dx) for dy, dx in offsets]
            if any(bad[p] for p in pts):
                status[iy, ix] = "failed"
                continue
            if _singular([g[:, py, px] for py, px in pts], det_floor):
                status[iy, ix] = "singular"
                continue
            status[iy, ix] = "ok"
            out[iy, ix] = R[iy, ix]
    return CurvatureField(x, y, out, status)


def metric_checks(g11, g12, g22):
    """Determinant, eigenvalues and definiteness of a 2x2 metric.

    Returns:
        dict with det, eigenvalues (ascending) and positive_definite.
    """
    m = np.array([[g11, g12], [g12, g22]], float)
    ev = np.linalg.eigvalsh(m)
    det = float(g11 * g22 - g12 ** 2)
    scale = max(abs(g11), abs(g22), abs(g12), np.finfo(float).tiny)
    return {"det": det, "eigenvalues": ev,
            "positive_definite": bool(ev[0] > 0 and det > DET_FLOOR * scale ** 2)}
