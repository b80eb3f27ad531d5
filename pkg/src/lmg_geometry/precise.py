"""Extended-precision refinement of quasi-degenerate eigenvalue clusters.

In the broken phase the extremal states form doublets whose splitting
decays exponentially with j and drops below double precision already at
moderate sizes. The QGT term coupling the two members of such a doublet
stays finite (numerator and gap vanish together), so it can only be
evaluated once the doublet is resolved. This module does that with block
inverse iteration on the exact pentadiagonal Hamiltonian in mpmath
arithmetic, followed by a Rayleigh-Ritz step inside the cluster.
"""
from dataclasses import dataclass
import math
import threading

import mpmath
import numpy as np

from .spin import check_spin, magnetic_numbers


# mpmath keeps its working precision in a global context
_MP_LOCK = threading.Lock()


class RefinementFailed(RuntimeError):
    pass


@dataclass
class RefinedCluster:
    """Result of refine_cluster.

    Attributes:
        dps: decimal digits used in the final pass.
        gaps: {m: E_m - E_n} for every other cluster member, as floats
            (may underflow to 0.0 for splittings below 1e-308).
        ratios: {m: (<m|dH/dOmegaX|n>/(E_m-E_n), <m|dH/dXiY|n>/(E_m-E_n))}.
        vector: refined |n> rounded to double precision.
        log10_gap: log10 of the smallest |E_m - E_n| in the cluster.
    """
    dps: int
    gaps: dict
    ratios: dict
    vector: np.ndarray
    log10_gap: float


def _bands(j, p):
    """Closed-form bands of H, dH/dOmegaX and dH/dXiY at current mp precision."""
    jj = mpmath.mpf(j)
    ms = [mpmath.mpf(float(m)) for m in magnetic_numbers(j)]
    cas = jj * (jj + 1)
    c = [mpmath.sqrt(cas - m * (m + 1)) for m in ms[:-1]]
    xi = mpmath.mpf(p.xi_y)
    y2d = [(cas - m * m) / 2 for m in ms]
    y2b = [-c[k] * c[k + 1] / 4 for k in range(len(c) - 1)]
    x1 = [ck / 2 for ck in c]
    h = ([mpmath.mpf(p.omega) * m + xi / jj * d for m, d in zip(ms, y2d)],
         [mpmath.mpf(p.omega_x) * v for v in x1],
         [xi / jj * v for v in y2b])
    dx = ([mpmath.mpf(0)] * len(ms), x1, [mpmath.mpf(0)] * len(y2b))
    dxi = ([d / jj for d in y2d], [mpmath.mpf(0)] * len(x1), [v / jj for v in y2b])
    return h, dx, dxi


def _matvec(b, x):
    d, e1, e2 = b
    n = len(d)
    y = [d[i] * x[i] for i in range(n)]
    for i in range(n - 1):
        y[i] += e1[i] * x[i + 1]
        y[i + 1] += e1[i] * x[i]
    for i in range(n - 2):
        y[i] += e2[i] * x[i + 2]
        y[i + 2] += e2[i] * x[i]
    return y


def _dot(x, y):
    return mpmath.fsum(a * b for a, b in zip(x, y))


def _ldl(b, sigma):
    """LDL^T of the pentadiagonal matrix b - sigma*I without pivoting."""
    d, e1, e2 = b
    n = len(d)
    D = [None] * n
    l1 = [mpmath.mpf(0)] * n
    l2 = [mpmath.mpf(0)] * n
    for i in range(n):
        if i >= 2:
            l2[i] = e2[i - 2] / D[i - 2]
        if i >= 1:
            t = e1[i - 1]
            if i >= 2:
                t -= l2[i] * D[i - 2] * l1[i - 1]
            l1[i] = t / D[i - 1]
        D[i] = d[i] - sigma - l1[i] ** 2 * (D[i - 1] if i >= 1 else 0) \
            - l2[i] ** 2 * (D[i - 2] if i >= 2 else 0)
        if D[i] == 0:
            raise ZeroDivisionError
    return D, l1, l2


def _ldl_solve(f, x):
    D, l1, l2 = f
    n = len(D)
    y = list(x)
    for i in range(1, n):
        y[i] -= l1[i] * y[i - 1]
        if i >= 2:
            y[i] -= l2[i] * y[i - 2]
    z = [y[i] / D[i] for i in range(n)]
    for i in range(n - 2, -1, -1):
        z[i] -= l1[i + 1] * z[i + 1]
        if i + 2 < n:
            z[i] -= l2[i + 2] * z[i + 2]
    return z


def _orthonormalize(cols):
    out = []
    for v in cols:
        v = list(v)
        for _ in range(2):
            for u in out:
                s = _dot(u, v)
                v = [a - s * b for a, b in zip(v, u)]
        nrm = mpmath.sqrt(_dot(v, v))
        out.append([a / nrm for a in v])
    return out


def _rayleigh_ritz(hb, cols):
    k = len(cols)
    hcols = [_matvec(hb, c) for c in cols]
    A = mpmath.matrix(k, k)
    for a in range(k):
        for b in range(a, k):
            A[a, b] = A[b, a] = (_dot(cols[a], hcols[b]) + _dot(cols[b], hcols[a])) / 2
    theta, U = mpmath.eigsy(A)
    order = sorted(range(k), key=lambda i: theta[i])
    theta = [theta[i] for i in order]
    z = [[mpmath.fsum(U[a, i] * cols[a][r] for a in range(k)) for r in range(len(cols[0]))]
         for i in order]
    hz = [[mpmath.fsum(U[a, i] * hcols[a][r] for a in range(k)) for r in range(len(cols[0]))]
          for i in order]
    res = max(mpmath.sqrt(mpmath.fsum((hv - t * zv) ** 2 for hv, zv in zip(hzi, zi)))
              for t, zi, hzi in zip(theta, z, hz))
    return theta, z, res


def refine_cluster(j, p, n, cluster, energies, vectors, *, dps_start=50,
                   dps_max=2000, max_iter=400):
    """Resolve a quasi-degenerate cluster around eigenstate n.

    Args:
        j: spin magnitude.
        p: ModelParams.
        n: index of the target state in the double-precision spectrum.
        cluster: indices of the other levels quasi-degenerate with n.
        energies, vectors: double-precision eigenpairs (ascending).
        dps_start: initial working precision in decimal digits.
        dps_max: precision cap; beyond it the cluster counts as degenerate.

    Returns:
        RefinedCluster.

    Raises:
        RefinementFailed if the splitting is not resolved at dps_max.
    """
    with _MP_LOCK:
        return _refine(j, p, n, cluster, energies, vectors, dps_start, dps_max, max_iter)


def _refine(j, p, n, cluster, energies, vectors, dps_start, dps_max, max_iter):
    j = check_spin(j)
    energies = np.asarray(energies)
    dim = len(energies)
    K = sorted(set(cluster) | {n})
    rank = K.index(n)
    others = [i for i in range(dim) if i not in K]
    scale = float(max(abs(energies[0]), abs(energies[-1]), energies[-1] - energies[0], 1e-300))
    e_lo, e_hi = float(energies[K[0]]), float(energies[K[-1]])
    if others:
        d_out = min(abs(float(energies[i]) - (e_lo if energies[i] < e_lo else e_hi)) for i in others)
    else:
        d_out = scale
    spread = e_hi - e_lo
    eta = max(1e-6 * d_out, 4 * spread, 1e-13 * scale)
    # shift outside the spectrum for extremal clusters keeps H - sigma definite
    if K[-1] == dim - 1:
        sigma_f = e_hi + eta
    elif K[0] == 0:
        sigma_f = e_lo - eta
    else:
        sigma_f = 0.5 * (e_lo + e_hi) + eta

    dps = int(dps_start)
    cols = None
    while True:
        with mpmath.workdps(dps):
            hb, dxb, dxib = _bands(j, p)
            if cols is None:
                cols = [[mpmath.mpf(float(v)) for v in vectors[:, i]] for i in K]
            else:
                cols = [[mpmath.mpf(v) for v in c] for c in cols]
            sigma = mpmath.mpf(sigma_f)
            for bump in range(8):
                try:
                    fac = _ldl(hb, sigma)
                    break
                except ZeroDivisionError:
                    sigma += mpmath.mpf(eta) * (bump + 1) * mpmath.mpf("0.37")
            else:
                raise RefinementFailed("shifted factorization broke down")
            tol = mpmath.mpf(10) ** (-(dps - 12)) * scale
            theta = z = None
            for _ in range(max_iter):
                cols = _orthonormalize([_ldl_solve(fac, c) for c in cols])
                theta, z, res = _rayleigh_ritz(hb, cols)
                cols = z
                if res <= tol:
                    break
            else:
                raise RefinementFailed(f"inverse iteration did not converge at {dps} digits")
            gaps = [abs(theta[a] - theta[rank]) for a in range(len(K)) if a != rank]
            gmin = min(gaps)
            need = (-float(mpmath.log10(gmin / scale)) + 40) if gmin > 0 else 2 * dps
            if need <= dps:
                out_gaps, ratios = {}, {}
                zn = z[rank]
                dxn, dxin = _matvec(dxb, zn), _matvec(dxib, zn)
                for a, m in enumerate(K):
                    if a == rank:
                        continue
                    dE = theta[a] - theta[rank]
                    out_gaps[m] = float(dE)
                    ratios[m] = (float(_dot(z[a], dxn) / dE), float(_dot(z[a], dxin) / dE))
                vec = np.array([float(v) for v in zn])
                vec /= np.linalg.norm(vec)
                vec *= np.sign(vec[np.argmax(np.abs(vec))])
                return RefinedCluster(dps, out_gaps, ratios, vec,
                                      float(mpmath.log10(gmin)))
        if dps >= dps_max:
            raise RefinementFailed(f"splitting unresolved at {dps} digits")
        dps = min(dps_max, max(int(math.ceil(need)), dps + 20))
