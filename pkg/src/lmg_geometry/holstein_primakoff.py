"""Leading-order Holstein-Primakoff layer.

Closed-form metrics for the ground state and for the highest state below
the separatrix, the broken-phase quadratic Hamiltonian, a Gaussian-state
metric for the broken phase, and the broken-phase Berry curvature formula.

Throughout, s = sqrt(1 + wx^2) and D = 4 xi^2 - wx^2 - 1.
"""
from dataclasses import dataclass
import math

import numpy as np

from .qgt import overlap_metric
from .spin import check_spin


class SingularAt(ArithmeticError):
    pass


class OutsidePhase(ValueError):
    pass


@dataclass(frozen=True)
class HpMetricPoint:
    g11: float
    g12: float
    g22: float
    det_g: float
    j: float
    phase: str
    frequency: float


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """constant + cPP P^2 + cQQ Q^2 + cQP (QP + PQ)."""
    constant: float
    cPP: float
    cQQ: float
    cQP: float
    frequency: float


def _closed_form(j, p, sign, phase):
    j = check_spin(j)
    wx, xi = p.omega_x, p.xi_y
    w2 = 1 + wx * wx
    s = math.sqrt(w2)
    a = s + sign * 2 * xi
    if a <= 0:
        raise SingularAt(f"{phase} metric is singular at xi_y = {-sign * s / 2:.6g} (and beyond)")
    g11 = j / (2 * w2 ** 1.75 * math.sqrt(a)) + xi * xi * wx * wx / (8 * w2 ** 2 * a * a)
    g12 = -xi * wx / (8 * w2 * a * a)
    g22 = 1 / (8 * a * a)
    det = j / (16 * w2 ** 1.75 * a ** 2.5)
    return HpMetricPoint(g11, g12, g22, det, j, phase, math.sqrt(s * a))


def hp_ground_metric(j, p):
    """Ground-state metric with A = s + 2 xi:

    g11 = j/(2 s^(7/2) sqrt A) + xi^2 wx^2/(8 s^4 A^2)
    g12 = -xi wx/(8 s^2 A^2),  g22 = 1/(8 A^2),
    det = j/(16 s^(7/2) A^(5/2)),  frequency sqrt(s A).
    """
    return _closed_form(j, p, +1, "ground")


def hp_symmetric_metric(j, p):
    """Highest-state metric below the separatrix; same forms with A = s - 2 xi."""
    return _closed_form(j, p, -1, "symmetric_highest")


def _check_broken(p):
    d = 4 * p.xi_y ** 2 - p.omega_x ** 2 - 1
    if d < 0:
        raise OutsidePhase("point lies below the separatrix, not in the broken phase")
    return d


def hp_broken_quadratic(j, p):
    """Quadratic Hamiltonian around x4 in the broken phase.

    constant = j (4xi^2 + wx^2 + 1)/(4xi)
    cPP = -xi D/(4xi^2 - 1)
    cQQ = -(16xi^4 - 8xi^2 + wx^2 + 1)/(4xi (4xi^2 - 1))
    cQP = wx sqrt(D)/(2(4xi^2 - 1))
    frequency sqrt(D).
    """
    j = check_spin(j)
    d = _check_broken(p)
    wx, xi = p.omega_x, p.xi_y
    k = 4 * xi * xi - 1
    return QuadraticHamiltonian(
        j * (4 * xi * xi + wx * wx + 1) / (4 * xi),
        -xi * d / k,
        -(16 * xi ** 4 - 8 * xi * xi + wx * wx + 1) / (4 * xi * k),
        wx * math.sqrt(d) / (2 * k),
        math.sqrt(d))


def quadratic_frequency(q):
    """Oscillator frequency 2 sqrt(cPP cQQ - cQP^2) of a quadratic form."""
    return 2 * math.sqrt(max(0.0, q.cPP * q.cQQ - q.cQP ** 2))


def broken_frame(p):
    """Rotation R = Rz(phi4) Ry(theta4) whose third column is the x4 spin direction.

    theta4 = arccos(1/(2 xi)), phi4 = -arccos(-wx/sqrt(4xi^2 - 1)); with this
    choice the expansion J'z = j - a^dag a reproduces hp_broken_quadratic.
    """
    _check_broken(p)
    wx, xi = p.omega_x, p.xi_y
    th = math.acos(1 / (2 * xi))
    ph = -math.acos(max(-1.0, min(1.0, -wx / math.sqrt(4 * xi * xi - 1))))
    rz = np.array([[math.cos(ph), -math.sin(ph), 0], [math.sin(ph), math.cos(ph), 0], [0, 0, 1]])
    ry = np.array([[math.cos(th), 0, -math.sin(th)], [0, 1, 0], [math.sin(th), 0, math.cos(th)]])
    return rz @ ry


_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _expansion(j, p, frame):
    """Linear vector L and quadratic matrix M of H ~ L.z + z.M.z/2, z = (Q, P).

    Spin operators are expanded around the third axis of a fixed frame with
    J'x = sqrt(j) Q, J'y = sqrt(j) P, J'z = j - (Q^2 + P^2 - 1)/2.
    """
    u = frame.T @ np.array([p.omega_x, 0.0, p.omega])
    w = frame.T @ np.array([0.0, 1.0, 0.0])
    xi = p.xi_y
    lin = math.sqrt(j) * (u[:2] + 2 * xi * w[2] * w[:2])
    quad = 2 * (xi * np.outer(w[:2], w[:2]) - (u[2] / 2 + xi * w[2] ** 2) * np.eye(2))
    return lin, quad


def _gaussian_state(j, p, frame):
    """Mean and covariance of the highest Gaussian state of the expansion."""
    lin, quad = _expansion(j, p, frame)
    m = -quad  # highest state = ground state of -H
    det = np.linalg.det(m)
    if not (det > 0 and m[0, 0] > 0):
        raise SingularAt(f"quadratic form not definite at {p}")
    mean = -np.linalg.solve(quad, lin)
    cov = _J.T @ m @ _J / (2 * math.sqrt(det))
    return mean, cov


def gaussian_infidelity(state_a, state_b):
    """1 - |<a|b>| for two pure single-mode Gaussian states (mean, covariance)."""
    (da, va), (db, vb) = state_a, state_b
    x = np.linalg.solve(2 * va, vb - va)
    # det(va + vb) = det(2 va) det(1 + x) and det(2 va) = 1 for pure states
    log_det = math.log1p(np.trace(x) + np.linalg.det(x))
    dd = db - da
    expo = 0.25 * dd @ np.linalg.solve(va + vb, dd)
    return -math.expm1(-0.25 * log_det - expo)


def hp_broken_metric(j, p, delta=1e-3, richardson=True):
    """Metric of the extremal Gaussian state in the broken phase.

    The frame is frozen at the x4 direction of p. Moving the parameters then
    displaces the Gaussian (the j-proportional part from the motion of the
    classical point) and reshapes its covariance (the squeezing fixed by the
    quadratic form). The metric follows from the fidelity of this family
    with symmetric steps delta and one Richardson step.
    """
    j = check_spin(j)
    d = _check_broken(p)
    if d == 0:
        raise SingularAt("the Gaussian metric diverges on the separatrix")
    frame = broken_frame(p)
    ref = _gaussian_state(j, p, frame)

    def decay(d1, d2):
        return gaussian_infidelity(ref, _gaussian_state(j, p.shifted(d1, d2), frame))

    g11, g12, g22 = overlap_metric(decay, delta, richardson)
    return HpMetricPoint(g11, g12, g22, g11 * g22 - g12 ** 2, j, "broken_highest", math.sqrt(d))


def _fock(n):
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    return (a + a.T) / math.sqrt(2), 1j * (a.T - a) / math.sqrt(2)


def hp_gaussian_qgt(j, p, nmax=10):
    """Full QGT (metric and Berry curvature) of the broken-phase Gaussian state.

    Uses the sum over oscillator excitations of the normal mode; only the
    one- and two-quantum states couple to the vacuum.

    Returns:
        dict with g11, g12, g22, f12 and frequency.
    """
    j = check_spin(j)
    d = _check_broken(p)
    frame = broken_frame(p)
    _, quad = _expansion(j, p, frame)
    m = -quad
    om = math.sqrt(np.linalg.det(m))
    s = np.linalg.cholesky(_J.T @ m @ _J / om)
    q, pp = _fock(nmax)
    z = [s[0, 0] * q + s[0, 1] * pp, s[1, 0] * q + s[1, 1] * pp]
    c = frame.T @ np.array([1.0, 0.0, 0.0])
    w = frame.T @ np.array([0.0, 1.0, 0.0])
    n2 = z[0] @ z[0] + z[1] @ z[1]
    wz = w[0] * z[0] + w[1] * z[1]
    ops = [math.sqrt(j) * (c[0] * z[0] + c[1] * z[1]) - c[2] / 2 * n2,
           wz @ wz + 2 * w[2] * math.sqrt(j) * wz - w[2] ** 2 * n2]
    qt = np.zeros((2, 2), complex)
    for k in (1, 2):
        v = np.array([ops[0][k, 0], ops[1][k, 0]])
        qt += np.outer(v.conj(), v) / (k * om) ** 2
    return {"g11": float(qt[0, 0].real), "g12": float(qt[0, 1].real),
            "g22": float(qt[1, 1].real), "f12": float(-2 * qt[0, 1].imag),
            "frequency": math.sqrt(d)}


def hp_broken_berry(j, p):
    """F12 = -(2j+1)/(4 xi^2 sqrt D) + (16 xi^2 - wx^2 + 1)/(16 xi^3 D)."""
    j = check_spin(j)
    d = _check_broken(p)
    if d == 0:
        raise SingularAt("the Berry curvature diverges on the separatrix")
    wx, xi = p.omega_x, p.xi_y
    return (-(2 * j + 1) / (4 * xi * xi * math.sqrt(d))
            + (16 * xi * xi - wx * wx + 1) / (16 * xi ** 3 * d))


def e_max(p):
    """Largest classical energy per spin.

    (1 + wx^2 + 4xi^2)/(4xi) for |wx| < omega_xc = sqrt(4xi^2 - 1), else s.
    """
    wx, xi = abs(p.omega_x), p.xi_y
    if xi >= 0.5 and wx < math.sqrt(4 * xi * xi - 1):
        return (1 + wx * wx + 4 * xi * xi) / (4 * xi)
    return math.sqrt(1 + wx * wx)
