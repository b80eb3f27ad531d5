"""Quantum geometric tensor of LMG eigenstates.

Two independent routes:
    qgt_perturbative: sum over states,
        Q_ij = sum_{m != n} <n|d_i H|m><m|d_j H|n> / (E_m - E_n)^2,
        with g = Re Q and F12 = -2 Im Q12.
    qgt_overlap_oracle: metric from the decay of |<n(x)|n(x + delta v)>|.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .spectral import StateSelector, select_state, spectrum_at
from .spin import ModelParams, build_parameter_derivatives, check_spin
from . import precise


class DegenerateState(ArithmeticError):
    pass


class StateTrackingLost(RuntimeError):
    pass


@dataclass(frozen=True)
class QgtPoint:
    """QGT components of one eigenstate at one parameter point.

    condition_flag is the smallest |E_m - E_n| used. precision_digits is 0
    for a pure double-precision result and the mpmath digit count when a
    quasi-degenerate partner had to be refined. degenerate marks metrics
    that are singular by construction.
    """
    params: ModelParams
    state: StateSelector
    g11: float
    g12: float
    g22: float
    f12: float
    condition_flag: float
    method: str = "perturbative"
    precision_digits: int = 0
    degenerate: bool = False

    @property
    def det_g(self):
        return self.g11 * self.g22 - self.g12 ** 2

    @property
    def metric(self):
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])


DOUBLET_POLICIES = ("exact", "resolved")


def _compensated(terms):
    terms = np.asarray(terms)
    if np.iscomplexobj(terms):
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return math.fsum(terms)


def _partner_mask(gaps, kappa):
    """Mask of the single quasi-degenerate partner to drop in 'resolved' mode."""
    a = np.abs(gaps)
    order = np.argsort(a)
    mask = np.zeros(a.size, bool)
    if a.size >= 2 and a[order[0]] < kappa * a[order[1]]:
        mask[order[0]] = True
    return mask


def qgt_perturbative(j, p, sel="ground", *, doublet="exact", eps_deg=1e-12,
                     refine_tol=1e-8, kappa=1e-3, refine=True):
    """QGT of a selected eigenstate by the sum over states.

    Args:
        j: spin magnitude.
        p: ModelParams.
        sel: StateSelector, 'ground', 'highest' or an integer index.
        doublet: 'exact' keeps every term. A partner closer than
            refine_tol*width is re-resolved in extended precision.
            'resolved' drops a partner whose gap is below kappa times the
            next gap, which gives the metric of the localized states of a
            tunnelling doublet.
        eps_deg: degeneracy guard relative to the spectral width, used
            when refinement is off.
        refine: allow the extended-precision pass.

    Returns:
        QgtPoint.

    Raises:
        DegenerateState if the level is degenerate within the guard.
    """
    if doublet not in DOUBLET_POLICIES:
        raise ValueError(f"doublet policy must be one of {DOUBLET_POLICIES}")
    j = check_spin(j)
    sel = StateSelector.parse(sel)
    s = spectrum_at(j, p)
    n = select_state(s, sel)
    E, V = s.eigenvalues, s.eigenvectors
    width = max(s.width, np.finfo(float).tiny)
    d = build_parameter_derivatives(j)
    vn = V[:, n]
    gaps = E - E[n]
    keep = np.ones(E.size, bool)
    keep[n] = False
    digits = 0
    partner_ratios = {}

    if doublet == "resolved":
        others = np.flatnonzero(keep)
        keep[others[_partner_mask(gaps[others], kappa)]] = False
    close = [m for m in np.flatnonzero(keep) if abs(gaps[m]) < refine_tol * width]
    if close:
        if not refine:
            if min(abs(gaps[m]) for m in close) < eps_deg * width:
                raise DegenerateState(
                    f"state {n} degenerate within {eps_deg:g} of the spectral width at {p}")
        else:
            try:
                rc = precise.refine_cluster(j, p, n, close, E, V)
            except precise.RefinementFailed as exc:
                raise DegenerateState(f"state {n} degenerate at {p}: {exc}") from exc
            digits = rc.dps
            vn = rc.vector
            partner_ratios = rc.ratios
            for m in close:
                keep[m] = False
    idx = np.flatnonzero(keep)
    a = V[:, idx].conj().T @ (d["dH_dOmegaX"] @ vn)
    b = V[:, idx].conj().T @ (d["dH_dXiY"] @ vn)
    den = gaps[idx]
    ra, rb = a / den, b / den
    if partner_ratios:
        ra = np.concatenate([ra, [r[0] for r in partner_ratios.values()]])
        rb = np.concatenate([rb, [r[1] for r in partner_ratios.values()]])
        cond = min([float(np.abs(den).min()) if den.size else math.inf]
                   + [abs(g) for g in rc.gaps.values()])
    else:
        cond = float(np.abs(den).min())
    q11 = _compensated(np.abs(ra) ** 2)
    q22 = _compensated(np.abs(rb) ** 2)
    q12 = _compensated(np.conj(ra) * rb)
    return QgtPoint(p, sel, float(q11), float(np.real(q12)), float(q22),
                    float(-2 * np.imag(q12)), float(cond), "perturbative", digits)


def _one_minus_overlap(u, v):
    """1 - |<u|v>| for unit vectors, free of cancellation."""
    ov = np.vdot(v, u)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    w = u - ph * v
    return 0.5 * float(np.vdot(w, w).real), abs(ov)


def _tracked(j, p, ref):
    s = spectrum_at(j, p)
    ov = np.abs(s.eigenvectors.conj().T @ ref)
    k = int(np.argmax(ov))
    if ov[k] < 0.5:
        raise StateTrackingLost(f"max overlap {ov[k]:.3f} < 0.5 at {p}")
    return s.eigenvectors[:, k]


def overlap_metric(state_at, delta, richardson=True):
    """Metric of a state family from symmetric fidelity decay.

    Args:
        state_at: function (d1, d2) -> 1 - |<psi(0)|psi(d)>| for a
            displacement d in parameter space.
        delta: step size.
        richardson: combine delta and delta/2 to cancel the O(delta^2) error.

    Returns:
        (g11, g12, g22).
    """
    def g_dir(v, h):
        dp = state_at(h * v[0], h * v[1])
        dm = state_at(-h * v[0], -h * v[1])
        return (dp + dm) / h ** 2

    def g_all(h):
        g11 = g_dir((1, 0), h)
        g22 = g_dir((0, 1), h)
        gd = g_dir((1, 1), h)
        return np.array([g11, 0.5 * (gd - g11 - g22), g22])

    g = g_all(delta)
    if richardson:
        g = (4 * g_all(delta / 2) - g) / 3
    return tuple(float(x) for x in g)


def qgt_overlap_oracle(j, p, sel="ground", delta=1e-4, richardson=True):
    """Metric from 1 - |<n(x)|n(x + delta v)>| along axis and diagonal steps.

    The neighbouring eigenvector is chosen by maximal overlap, not index.
    f12 is not recoverable from fidelities and is returned as NaN.

    Raises:
        StateTrackingLost when the best overlap drops below 0.5.
    """
    j = check_spin(j)
    sel = StateSelector.parse(sel)
    s = spectrum_at(j, p)
    n = select_state(s, sel)
    ref = s.eigenvectors[:, n]

    def decay(d1, d2):
        v = _tracked(j, p.shifted(d1, d2), ref)
        return _one_minus_overlap(ref, v)[0]

    g11, g12, g22 = overlap_metric(decay, delta, richardson)
    gaps = np.abs(np.delete(s.eigenvalues - s.eigenvalues[n], n))
    return QgtPoint(p, sel, g11, g12, g22, float("nan"), float(gaps.min()), "overlap")


@dataclass
class QgtField:
    """QGT on a rectangular mesh; arrays have shape (len(xi_y), len(omega_x)).

    Node k = iy*len(omega_x) + ix, so omega_x runs fastest. Failed nodes
    hold NaN and a status string starting with 'failed'.
    """
    omega_x: np.ndarray
    xi_y: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    f12: np.ndarray
    min_gap: np.ndarray
    status: np.ndarray
    j: float = None
    state: StateSelector = None
    omega: float = 1.0
    digits: np.ndarray = field(default=None, repr=False)

    @property
    def det_g(self):
        return self.g11 * self.g22 - self.g12 ** 2

    @property
    def shape(self):
        return (len(self.xi_y), len(self.omega_x))

    @classmethod
    def from_arrays(cls, omega_x, xi_y, g11, g12, g22, f12=None, **kw):
        g11 = np.asarray(g11, float)
        shape = g11.shape
        f12 = np.zeros(shape) if f12 is None else np.asarray(f12, float)
        status = np.full(shape, "ok", dtype=object)
        status[~np.isfinite(g11)] = "failed"
        return cls(np.asarray(omega_x, float), np.asarray(xi_y, float), g11,
                   np.asarray(g12, float), np.asarray(g22, float), f12,
                   np.full(shape, np.nan), status, **kw)

    @property
    def points(self):
        """QgtPoint per node (None for failed nodes), omega_x fastest."""
        out = []
        for iy, xi in enumerate(self.xi_y):
            for ix, ox in enumerate(self.omega_x):
                if self.status[iy, ix] != "ok":
                    out.append(None)
                    continue
                out.append(QgtPoint(ModelParams(ox, xi, self.omega), self.state,
                                    float(self.g11[iy, ix]), float(self.g12[iy, ix]),
                                    float(self.g22[iy, ix]), float(self.f12[iy, ix]),
                                    float(self.min_gap[iy, ix])))
        return out


def _check_axis(v, name):
    v = np.asarray(v, float).ravel()
    if v.size < 1 or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} grid must be finite and non-empty")
    if v.size > 1 and not (np.all(np.diff(v) > 0) or np.all(np.diff(v) < 0)):
        raise ValueError(f"{name} grid must be strictly monotone")
    return v


def qgt_mesh(j, omega_x, xi_y, sel="ground", method="perturbative", *,
             threads=1, omega=1.0, **kw):
    """QGT on the mesh omega_x x xi_y.

    Nodes are independent; each result lands in its own pre-indexed slot so
    the field does not depend on scheduling. Errors are recorded per node.

    Args:
        j: spin magnitude.
        omega_x, xi_y: 1D strictly monotone grids.
        sel: state selector.
        method: 'perturbative' or 'overlap'.
        threads: worker count.
        **kw: forwarded to the point routine.

    Returns:
        QgtField.
    """
    j = check_spin(j)
    sel = StateSelector.parse(sel)
    ox = _check_axis(omega_x, "omega_x")
    xi = _check_axis(xi_y, "xi_y")
    if method == "perturbative":
        fn = qgt_perturbative
    elif method == "overlap":
        fn = qgt_overlap_oracle
    else:
        raise ValueError(f"unknown method {method!r}")
    nodes = [(iy, ix) for iy in range(xi.size) for ix in range(ox.size)]

    def work(node):
        iy, ix = node
        try:
            return fn(j, ModelParams(ox[ix], xi[iy], omega), sel, **kw), None
        except Exception as exc:  # recorded per node, sweep continues
            return None, f"failed: {type(exc).__name__}: {exc}"

    if int(threads) < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1:
        results = [work(nd) for nd in nodes]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            results = list(ex.map(work, nodes))
    shape = (xi.size, ox.size)
    arrs = {k: np.full(shape, np.nan) for k in ("g11", "g12", "g22", "f12", "min_gap")}
    status = np.full(shape, "ok", dtype=object)
    digits = np.zeros(shape, int)
    for (iy, ix), (pt, err) in zip(nodes, results):
        if pt is None:
            status[iy, ix] = err
            continue
        for k in ("g11", "g12", "g22", "f12"):
            arrs[k][iy, ix] = getattr(pt, k)
        arrs["min_gap"][iy, ix] = pt.condition_flag
        digits[iy, ix] = pt.precision_digits
    return QgtField(ox, xi, status=status, j=j, state=sel, omega=omega, digits=digits, **arrs)
