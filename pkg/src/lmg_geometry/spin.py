"""Collective spin operators and the extended LMG Hamiltonian.

Basis order is m = -j, ..., +j, so row/column 0 is |j,-j>.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np


class InvalidSpin(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Point x = (omega_x, xi_y) of the parameter manifold.

    The Hamiltonian is H = omega*Jz + omega_x*Jx + (xi_y/j)*Jy^2.
    """
    omega_x: float
    xi_y: float
    omega: float = 1.0

    def __post_init__(self):
        for name in ("omega_x", "xi_y", "omega"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))

    def shifted(self, d_omega_x=0.0, d_xi_y=0.0):
        return ModelParams(self.omega_x + d_omega_x, self.xi_y + d_xi_y, self.omega)


def check_spin(j):
    """Validate a spin magnitude and return it as a float.

    Args:
        j: positive integer or half-integer.

    Returns:
        float j.
    """
    try:
        two_j = 2 * float(j)
    except (TypeError, ValueError):
        raise InvalidSpin(f"spin must be a number, got {j!r}")
    if not math.isfinite(two_j) or two_j < 1 or abs(two_j - round(two_j)) > 1e-9:
        raise InvalidSpin(f"spin must be a positive half-integer, got {j!r}")
    return round(two_j) / 2.0


def spin_dim(j):
    return int(round(2 * check_spin(j))) + 1


def magnetic_numbers(j):
    j = check_spin(j)
    return np.arange(spin_dim(j)) - j


def _frozen(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def _operators(j):
    m = magnetic_numbers(j)
    dim = m.size
    # <m+1|J+|m> sits at [k+1, k]
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.zeros((dim, dim))
    jp[np.arange(1, dim), np.arange(dim - 1)] = ladder
    jm = jp.T.copy()
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m.astype(float))
    jy2 = (jy @ jy).real
    return {name: _frozen(op) for name, op in
            dict(Jx=jx, Jy=jy, Jz=jz, Jplus=jp, Jminus=jm, Jy2=jy2).items()}


def build_spin_operators(j):
    """Return the dense collective spin operators for spin j.

    Args:
        j: spin magnitude (half-integer).

    Returns:
        dict with read-only arrays Jx, Jy, Jz, Jplus, Jminus, Jy2. Jy is
        complex, the others are real.
    """
    return _operators(check_spin(j))


def build_hamiltonian(j, p):
    """H = omega*Jz + omega_x*Jx + (xi_y/j)*Jy^2 as a real symmetric array."""
    j = check_spin(j)
    ops = _operators(j)
    return p.omega * ops["Jz"] + p.omega_x * ops["Jx"] + (p.xi_y / j) * ops["Jy2"]


def build_parameter_derivatives(j):
    """Derivatives of H with respect to (omega_x, xi_y).

    Returns:
        dict with dH_dOmegaX = Jx and dH_dXiY = Jy^2/j.
    """
    j = check_spin(j)
    ops = _operators(j)
    return {"dH_dOmegaX": ops["Jx"], "dH_dXiY": _frozen(ops["Jy2"] / j)}

