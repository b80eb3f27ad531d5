"""Bloch coherent states and their quantum geometric tensor.

c_m = C(2j, j+m)^(1/2) sin^(j+m)(th/2) cos^(j-m)(th/2) exp(-i (j+m) ph),
for m = -j..j, so th = 0 is |j,-j>. Binomials are taken in log space so
j = 512 does not overflow.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln, xlogy

from .geometry import scalar_curvature_at
from .qgt import QgtPoint
from .semiclassical import stationary_points
from .spectral import StateSelector
from .spin import ModelParams, check_spin, spin_dim


class BranchUndefined(ValueError):
    pass


BRANCHES = ("broken", "symmetric")


@dataclass(frozen=True)
class CoherentState:
    j: float
    theta: float
    phi: float
    coefficients: np.ndarray


def _log_binom(j):
    n = int(round(2 * j))
    k = np.arange(n + 1)
    return n, k, gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _amplitude(j, theta, dk=0, dl=0):
    """sqrt(C(2j,k)) sin^(k+dk)(th/2) cos^(2j-k+dl)(th/2), zero where the power is negative."""
    n, k, lb = _log_binom(j)
    s, c = abs(math.sin(theta / 2)), abs(math.cos(theta / 2))
    ps, pc = k + dk, n - k + dl
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(0.5 * lb + xlogy(ps, s) + xlogy(pc, c))
    out[(ps < 0) | (pc < 0)] = 0.0
    sign = (math.copysign(1, math.sin(theta / 2)) ** ps) * (math.copysign(1, math.cos(theta / 2)) ** pc)
    return out * sign


def coherent_vector(j, theta, phi):
    """Coefficients of the Bloch coherent state in the m = -j..j basis."""
    j = check_spin(j)
    k = np.arange(spin_dim(j))
    c = _amplitude(j, theta) * np.exp(-1j * k * phi)
    return CoherentState(j, float(theta), float(phi), c / np.linalg.norm(c))


def _angle_derivatives(j, theta, phi):
    """(dc/dtheta, dc/dphi) of the coefficient vector."""
    n = int(round(2 * j))
    k = np.arange(n + 1)
    ph = np.exp(-1j * k * phi)
    d_th = 0.5 * (k * _amplitude(j, theta, -1, 1) - (n - k) * _amplitude(j, theta, 1, -1)) * ph
    d_ph = -1j * k * _amplitude(j, theta) * ph
    return d_th, d_ph


def angle_qgt(j, theta, phi):
    """QGT of the coherent state in the (theta, phi) chart, a 2x2 Hermitian array."""
    j = check_spin(j)
    c = coherent_vector(j, theta, phi).coefficients
    d = _angle_derivatives(j, theta, phi)
    q = np.empty((2, 2), complex)
    for a in range(2):
        for b in range(2):
            q[a, b] = np.vdot(d[a], d[b]) - np.vdot(d[a], c) * np.vdot(c, d[b])
    return q


def branch_angles(p, branch):
    """(theta, phi) of the classical point carrying the extremal state.

    'broken' uses x4 (xi > s/2), 'symmetric' uses x1 (xi < s/2).
    """
    s = math.sqrt(1 + p.omega_x ** 2)
    if branch == "broken":
        if not p.xi_y > s / 2:
            raise BranchUndefined(f"broken branch needs xi_y > {s / 2:.6g}")
        label = "x4"
    elif branch == "symmetric":
        if not p.xi_y < s / 2:
            raise BranchUndefined(f"symmetric branch needs xi_y < {s / 2:.6g}")
        label = "x1"
    else:
        raise ValueError(f"branch must be one of {BRANCHES}")
    pt = next(sp for sp in stationary_points(p) if sp.label == label)
    return pt.point.theta, pt.point.phi


def _unwrap(a, ref):
    return a + 2 * math.pi * round((ref - a) / (2 * math.pi))


def _vector_qgt(j, p, branch, delta):
    """QGT from gauge-aligned central differences of the coefficient vector.

    Used where the (theta, phi) chart is singular (the poles).
    """
    def vec(d1, d2):
        return coherent_vector(j, *branch_angles(p.shifted(d1, d2), branch)).coefficients

    c0 = vec(0.0, 0.0)

    def aligned(d1, d2):
        v = vec(d1, d2)
        ov = np.vdot(v, c0)
        return v * (ov / abs(ov))

    d = [(aligned(delta, 0) - aligned(-delta, 0)) / (2 * delta),
         (aligned(0, delta) - aligned(0, -delta)) / (2 * delta)]
    q = np.empty((2, 2), complex)
    for a in range(2):
        for b in range(2):
            q[a, b] = np.vdot(d[a], d[b]) - np.vdot(d[a], c0) * np.vdot(c0, d[b])
    return q


def coherent_qgt_numeric(j, p, branch="broken", delta=1e-6):
    """QGT of the classical-point coherent state by chain rule.

    dc/d(theta, phi) is analytic; d(theta, phi)/d(omega_x, xi_y) uses
    central differences with step delta. At a pole of the Bloch sphere the
    angle chart breaks down and the coefficient vector is differenced
    directly.
    """
    j = check_spin(j)
    th0, ph0 = branch_angles(p, branch)
    if math.sin(th0) < 1e-6:
        q = _vector_qgt(j, p, branch, delta)
    else:
        jac = np.empty((2, 2))
        for i, (d1, d2) in enumerate(((delta, 0.0), (0.0, delta))):
            tp, pp = branch_angles(p.shifted(d1, d2), branch)
            tm, pm = branch_angles(p.shifted(-d1, -d2), branch)
            jac[0, i] = (tp - tm) / (2 * delta)
            jac[1, i] = (_unwrap(pp, ph0) - _unwrap(pm, ph0)) / (2 * delta)
        q = jac.T @ angle_qgt(j, th0, ph0) @ jac
    degenerate = branch == "symmetric"
    return QgtPoint(p, StateSelector("highest"), float(q[0, 0].real), float(q[0, 1].real),
                    float(q[1, 1].real), float(-2 * q[0, 1].imag), math.nan,
                    "coherent-numeric", 0, degenerate)


def _broken_d(p):
    d = 4 * p.xi_y ** 2 - p.omega_x ** 2 - 1
    if d <= 0:
        raise BranchUndefined("on or below the separatrix the broken-phase forms are singular")
    return d


def coherent_qgt_closed_form(j, p, branch="broken"):
    """Closed-form coherent-state metric and Berry curvature.

    broken:  g11 = (j/2)(4xi^2-1)/(4xi^2 D), g12 = -(j/2) wx/(xi D),
             g22 = (j/2)(wx^2+1)/(xi^2 D), F12 = -(j/2)/(xi^2 sqrt D),
             with D = 4xi^2 - wx^2 - 1.
    symmetric: g11 = (j/2)/(1+wx^2)^2, all else zero (degenerate metric).
    """
    j = check_spin(j)
    wx, xi = p.omega_x, p.xi_y
    if branch == "broken":
        d = _broken_d(p)
        g11 = 0.5 * j * (4 * xi * xi - 1) / (4 * xi * xi * d)
        g12 = -0.5 * j * wx / (xi * d)
        g22 = 0.5 * j * (wx * wx + 1) / (xi * xi * d)
        f12 = -0.5 * j / (xi * xi * math.sqrt(d))
        return QgtPoint(p, StateSelector("highest"), g11, g12, g22, f12, math.nan,
                        "coherent-closed", 0, False)
    if branch == "symmetric":
        if not xi < math.sqrt(1 + wx * wx) / 2:
            raise BranchUndefined("symmetric branch needs xi_y below the separatrix")
        return QgtPoint(p, StateSelector("highest"), 0.5 * j / (1 + wx * wx) ** 2, 0.0, 0.0,
                        0.0, math.nan, "coherent-closed", 0, True)
    raise ValueError(f"branch must be one of {BRANCHES}")


def coherent_broken_det(j, p):
    """det g = j^2/(16 xi^4 D) in the broken phase."""
    return check_spin(j) ** 2 / (16 * p.xi_y ** 4 * _broken_d(p))


def coherent_curvature(j, p, h=1e-4):
    """Scalar curvature of the broken-phase closed-form metric at p."""
    def metric(wx, xi):
        q = coherent_qgt_closed_form(j, ModelParams(wx, xi, p.omega), "broken")
        return q.g11, q.g12, q.g22
    return scalar_curvature_at(metric, (p.omega_x, p.xi_y), h)
