"""Classical limit of the extended LMG model.

Canonical coordinates on the Bloch sphere:
    Q = sqrt(2(1 - cos th)) cos ph,  P = -sqrt(2(1 - cos th)) sin ph,
with spin direction n = (sin th cos ph, sin th sin ph, -cos th), so th = 0
is the lowest-weight state |j,-j>. Energies are per spin, in units of omega.
"""
from dataclasses import dataclass
import math

import numpy as np

from .spin import ModelParams, build_spin_operators, build_hamiltonian, check_spin


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    Q: float
    P: float
    theta: float
    phi: float

    @classmethod
    def from_canonical(cls, Q, P):
        th, ph = canonical_to_angles(Q, P)
        return cls(float(Q), float(P), th, ph)

    @property
    def direction(self):
        return spin_direction(self.theta, self.phi)


@dataclass(frozen=True)
class StationaryPoint:
    label: str
    point: PhasePoint
    energy: float
    stability: str
    lyapunov: float


@dataclass(frozen=True)
class Observables:
    jx: float
    jy: float
    jz: float
    jy2: float
    energy: float


def canonical_to_angles(Q, P):
    r2 = Q * Q + P * P
    if r2 > 4 + 1e-12:
        raise DomainError(f"Q^2 + P^2 = {r2} exceeds 4")
    cos_t = min(1.0, max(-1.0, 1 - r2 / 2))
    return math.acos(cos_t), math.atan2(-P, Q) if r2 > 0 else 0.0


def angles_to_canonical(theta, phi):
    r = math.sqrt(max(0.0, 2 * (1 - math.cos(theta))))
    return r * math.cos(phi), -r * math.sin(phi)


def spin_direction(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                     -math.cos(theta)])


def _check_domain(Q, P, strict=False):
    r2 = np.asarray(Q) ** 2 + np.asarray(P) ** 2
    if np.any(r2 > 4 + 1e-12) or (strict and np.any(r2 >= 4)):
        raise DomainError("point outside the canonical disc Q^2 + P^2 < 4")
    return r2


def classical_energy(p, Q, P):
    """h(Q, P) = (Q^2+P^2)/2 - 1 + wx Q sqrt(1 - r2/4) + xi P^2 (1 - r2/4).

    Energies in units of omega; the omega_x and xi_y terms scale with
    omega_x/omega and xi_y/omega when omega differs from 1.
    """
    r2 = _check_domain(Q, P)
    root = np.sqrt(np.clip(1 - r2 / 4, 0, None))
    w = p.omega
    return w * (r2 / 2 - 1) + p.omega_x * Q * root + p.xi_y * P ** 2 * (1 - r2 / 4)


def angular_energy(p, theta, phi):
    """h in Bloch angles: -w cos th + wx sin th cos ph + xi sin^2 th sin^2 ph."""
    return (-p.omega * np.cos(theta) + p.omega_x * np.sin(theta) * np.cos(phi)
            + p.xi_y * np.sin(theta) ** 2 * np.sin(phi) ** 2)


def equations_of_motion(p, Q, P):
    """Hamilton's equations (dQ/dt, dP/dt) = (dh/dP, -dh/dQ)."""
    r2 = _check_domain(Q, P, strict=True)
    s = np.sqrt(1 - r2 / 4)
    w, wx, xi = p.omega, p.omega_x, p.xi_y
    dh_dq = w * Q + wx * (s - Q * Q / (4 * s)) - xi * P ** 2 * Q / 2
    dh_dp = w * P - wx * Q * P / (4 * s) + 2 * xi * P * (1 - r2 / 4) - xi * P ** 3 / 2
    return dh_dp, -dh_dq


def energy_hessian(p, Q, P):
    """Analytic Hessian of h at (Q, P) inside the disc."""
    r2 = _check_domain(Q, P, strict=True)
    wx, xi, w = p.omega_x, p.xi_y, p.omega
    s = math.sqrt(1 - r2 / 4)
    # derivatives of Q*s
    qs_qq = -3 * Q / (4 * s) - Q ** 3 / (16 * s ** 3)
    qs_pp = -Q / (4 * s) - Q * P * P / (16 * s ** 3)
    qs_qp = -P / (4 * s) - Q * Q * P / (16 * s ** 3)
    # derivatives of P^2 (1 - r2/4)
    t_qq = -P * P / 2
    t_pp = 2 - 3 * P * P - Q * Q / 2
    t_qp = -Q * P
    return np.array([[w + wx * qs_qq + xi * t_qq, wx * qs_qp + xi * t_qp],
                     [wx * qs_qp + xi * t_qp, w + wx * qs_pp + xi * t_pp]])


def lyapunov_exponent(p):
    """lambda = sqrt(s (2 xi - s)), s = sqrt(1 + wx^2), above the separatrix; else 0.

    Couplings are measured in units of omega (omega > 0) and lambda is
    returned in the same units.
    """
    if p.omega <= 0:
        raise ValueError("omega must be positive")
    wx, xi = p.omega_x / p.omega, p.xi_y / p.omega
    s = math.sqrt(1 + wx * wx)
    if 2 * xi <= s:
        return 0.0
    return p.omega * math.sqrt(s * (2 * xi - s))


def critical_lines(p):
    """omega_xc(xi), separatrix xi(omega_x) and the ESQPT energy per spin.

    omega_xc is None when xi_y < 1/2.
    """
    xi = p.xi_y
    oxc = math.sqrt(4 * xi * xi - 1) if xi >= 0.5 else None
    return {"omega_xc": oxc, "separatrix_xi": math.sqrt(1 + p.omega_x ** 2) / 2,
            "esqpt_energy": math.sqrt(1 + p.omega_x ** 2)}


def omega_xc(xi_y):
    if xi_y < 0.5:
        raise DomainError("omega_xc needs xi_y >= 1/2")
    return math.sqrt(4 * xi_y * xi_y - 1)


def stationary_points(p):
    """Fixed points of the classical flow with energies and stability.

    x1 and x2 always exist. x4/x4' (energy maxima) exist for
    xi >= s/2 and x3/x3' (minima) for xi <= -s/2, s = sqrt(1 + wx^2).
    The sign of Q1 and Q2 follows the sign of omega_x so that the points
    remain stationary for negative omega_x. Angles come from (Q, P).

    Only omega = 1 is supported here.
    """
    if p.omega != 1:
        raise ValueError("stationary_points assumes omega = 1")
    wx, xi = p.omega_x, p.xi_y
    s = math.sqrt(1 + wx * wx)
    sg = 1.0 if wx >= 0 else -1.0
    lam1 = math.sqrt(s * (2 * xi - s)) if 2 * xi > s else 0.0
    lam2 = math.sqrt(s * (-2 * xi - s)) if -2 * xi > s else 0.0
    # half angles of x1 from closed forms; arccos loses digits near the pole
    th1 = 2 * math.atan2(math.sqrt((s + 1) / (2 * s)), abs(wx) / math.sqrt(2 * s * (s + 1)))
    x1 = PhasePoint(sg * math.sqrt(2 + 2 / s), 0.0, th1, 0.0 if wx >= 0 else math.pi)
    pts = [
        StationaryPoint("x1", x1, s,
                        "hyperbolic" if lam1 > 0 else "unstable_center", lam1),
        StationaryPoint("x2", PhasePoint.from_canonical(-sg * math.sqrt(2 - 2 / s), 0.0), -s,
                        "hyperbolic" if lam2 > 0 else "stable_center", lam2),
    ]
    e34 = (1 + wx * wx) / (4 * xi) + xi if xi != 0 else math.nan
    if xi <= -s / 2 or xi >= s / 2:
        den = math.sqrt(xi * (2 * xi - 1))
        pq = math.sqrt(max(0.0, 4 * xi * xi - wx * wx - 1)) / den
        q = wx / den
        if xi < 0:
            labels, q, kind = ("x3", "x3'"), -q, "stable_center"
        else:
            labels, kind = ("x4", "x4'"), "unstable_center"
        for lab, sp in zip(labels, (-1.0, 1.0)):
            pts.append(StationaryPoint(lab, PhasePoint.from_canonical(q, sp * pq), e34, kind, 0.0))
    return pts


def coherent_expectations(j, theta, phi, p=None):
    """Per-spin expectation values on the Bloch coherent state |theta, phi>.

    Args:
        j: spin magnitude.
        theta, phi: Bloch angles.
        p: ModelParams for the energy; defaults to H = Jz.

    Returns:
        Observables with jx, jy, jz = <J>/j, jy2 = <Jy^2>/j^2 (exact, so it
        carries the 1/(2j) correction) and energy = <H>/j.
    """
    from .coherent import coherent_vector
    j = check_spin(j)
    p = p if p is not None else ModelParams(0.0, 0.0)
    c = coherent_vector(j, theta, phi).coefficients
    ops = build_spin_operators(j)

    def ev(op):
        return float(np.vdot(c, op @ c).real)

    return Observables(ev(ops["Jx"]) / j, ev(ops["Jy"]) / j, ev(ops["Jz"]) / j,
                       ev(ops["Jy2"]) / j ** 2, ev(build_hamiltonian(j, p)) / j)
