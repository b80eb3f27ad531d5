"""Peak extraction along parameter cuts and least-squares scaling fits."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .geometry import scalar_curvature_at
from .qgt import qgt_mesh, qgt_perturbative
from .spin import ModelParams, check_spin


class ExtremumOnBoundary(ValueError):
    pass


@dataclass
class Curve:
    abscissa: np.ndarray
    ordinate: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, float)
        self.ordinate = np.asarray(self.ordinate, float)
        if self.abscissa.shape != self.ordinate.shape or self.abscissa.size < 3:
            raise ValueError("curve needs matching abscissa/ordinate with >= 3 points")
        d = np.diff(self.abscissa)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("abscissa must be strictly monotone")


@dataclass
class FitResult:
    model_name: str
    parameters: np.ndarray
    residual_rms: float
    converged: bool
    iterations: int = 0
    message: str = ""


def extract_extremum(c, kind="max"):
    """Location and value of the extremum, refined by a 3-point parabola.

    Args:
        c: Curve.
        kind: 'max' or 'min'.

    Returns:
        (location, value).

    Raises:
        ExtremumOnBoundary when the discrete extremum is an endpoint.
    """
    if kind not in ("max", "min"):
        raise ValueError("kind must be 'max' or 'min'")
    x, y = c.abscissa, c.ordinate
    ok = np.isfinite(y)
    if ok.sum() < 3:
        raise ValueError("fewer than 3 finite points")
    yy = np.where(ok, y, -np.inf if kind == "max" else np.inf)
    k = int(np.argmax(yy) if kind == "max" else np.argmin(yy))
    if k == 0 or k == x.size - 1 or not (ok[k - 1] and ok[k + 1]):
        raise ExtremumOnBoundary(f"discrete {kind} at the edge (x = {x[k]:.6g})")
    x0, x1, x2 = x[k - 1:k + 2]
    y0, y1, y2 = y[k - 1:k + 2]
    # Lagrange parabola through the three points
    d0 = y0 / ((x0 - x1) * (x0 - x2))
    d1 = y1 / ((x1 - x0) * (x1 - x2))
    d2 = y2 / ((x2 - x0) * (x2 - x1))
    a = d0 + d1 + d2
    b = -(d0 * (x1 + x2) + d1 * (x0 + x2) + d2 * (x0 + x1))
    cc = d0 * x1 * x2 + d1 * x0 * x2 + d2 * x0 * x1
    if a == 0:
        return float(x1), float(y1)
    xv = -b / (2 * a)
    return float(xv), float(cc - b * b / (4 * a))


# model families: f(x, p) and analytic jacobian, or None for finite differences
def _pole(x, p):
    return p[0] + p[1] / (x - p[2]) ** 2


def _pole_jac(x, p):
    u = x - p[2]
    return np.stack([np.ones_like(x), 1 / u ** 2, 2 * p[1] / u ** 3], axis=1)


def _exp(x, p):
    return p[0] + p[1] * np.exp(p[2] * x)


def _exp_jac(x, p):
    e = np.exp(p[2] * x)
    return np.stack([np.ones_like(x), e, p[1] * x * e], axis=1)


def _loglin(x, p):
    return p[0] + p[1] * np.log(x)


def _loglin_jac(x, p):
    return np.stack([np.ones_like(x), np.log(x)], axis=1)


def _offset_power(k):
    def f(x, p):
        return p[0] + p[1] / (x ** k - p[2]) ** p[3]

    def jac(x, p):
        u = x ** k - p[2]
        t = u ** -p[3]
        return np.stack([np.ones_like(x), t, p[1] * p[3] * t / u, -p[1] * t * np.log(u)], axis=1)
    return f, jac


_OP1, _OP1J = _offset_power(1)
_OP2, _OP2J = _offset_power(2)


@dataclass(frozen=True)
class Model:
    name: str
    func: object
    jac: object
    nparams: int
    log_data: bool = False
    seed: tuple = ()


MODELS = {
    # a + b/(x - c)^2, peak values against omega_x
    "pole": Model("pole", _pole, _pole_jac, 3, seed=(0.582, 2.051, 4.490)),
    # a + b exp(c x)
    "exp_offset": Model("exp_offset", _exp, _exp_jac, 3, seed=(-0.083, 2.470, -0.356)),
    # log y = a + b log x
    "loglog": Model("loglog", _loglin, _loglin_jac, 2, log_data=True, seed=(-2.702, 1.394)),
    # a + b/(x - c)^d
    "offset_power": Model("offset_power", _OP1, _OP1J, 4, seed=(0.418, 1.563, 0.913, 0.680)),
    # a + b/(x^2 - c)^d
    "offset_power_sq": Model("offset_power_sq", _OP2, _OP2J, 4,
                             seed=(-2.183, 3.430, 6.206, 0.284)),
    # a + b/x^c
    "power_tail": Model("power_tail", lambda x, p: p[0] + p[1] * x ** -p[2], None, 3,
                        seed=(1.0, 1.0, 1.0)),
    # 1/(a + b x)
    "inverse_linear": Model("inverse_linear", lambda x, p: 1 / (p[0] + p[1] * x), None, 2,
                            seed=(0.131, 0.238)),
    # (a + b x)^2
    "square_linear": Model("square_linear", lambda x, p: (p[0] + p[1] * x) ** 2, None, 2,
                           seed=(-0.013, 0.976)),
    "linear": Model("linear", lambda x, p: p[0] + p[1] * x, None, 2, seed=(0.005, 0.005)),
}


def _fd_jac(f, x, p):
    cols = []
    for i in range(p.size):
        h = 1e-7 * max(1.0, abs(p[i]))
        pp, pm = p.copy(), p.copy()
        pp[i] += h
        pm[i] -= h
        cols.append((f(x, pp) - f(x, pm)) / (2 * h))
    return np.stack(cols, axis=1)


def fit_model(data, model, initial=None, *, max_iter=2000, xtol=1e-10):
    """Damped least squares (Levenberg-Marquardt) fit of a named model.

    Args:
        data: Curve.
        model: key of MODELS or a Model.
        initial: starting parameters; defaults to the model seed.
        max_iter: iteration cap.
        xtol: convergence when the relative parameter change of a step
            falls below this.

    Returns:
        FitResult; on non-convergence the best parameters found so far.
    """
    m = MODELS[model] if isinstance(model, str) else model
    x = np.asarray(data.abscissa, float)
    y = np.asarray(data.ordinate, float)
    if m.log_data:
        if np.any(y <= 0) or np.any(x <= 0):
            raise ValueError("log-log model needs positive data")
        y = np.log(y)
    if x.size < m.nparams + 1:
        raise ValueError(f"{m.name} needs at least {m.nparams + 1} points")
    p = np.array(initial if initial is not None else m.seed, float)
    if p.size != m.nparams:
        raise ValueError(f"{m.name} takes {m.nparams} parameters")

    def resid(q):
        with np.errstate(all="ignore"):
            r = y - m.func(x, q)
        return r if np.all(np.isfinite(r)) else None

    def jac(q):
        with np.errstate(all="ignore"):
            return m.jac(x, q) if m.jac is not None else _fd_jac(m.func, x, q)

    r = resid(p)
    if r is None:
        raise ValueError("model undefined at the initial parameters")
    cost = float(r @ r)
    lam = None
    converged, msg, it = False, "iteration limit reached", 0
    for it in range(1, max_iter + 1):
        J = jac(p)
        A = J.T @ J
        g = J.T @ r
        dg = np.diag(A).copy()
        dg[dg == 0] = 1.0
        if lam is None:
            lam = 1e-3 * float(dg.max())
        accepted = False
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(dg), g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            small = np.linalg.norm(step) <= xtol * (np.linalg.norm(p) + xtol)
            rn = resid(p + step)
            with np.errstate(over="ignore"):
                cn = float(rn @ rn) if rn is not None else math.inf
            if cn <= cost:
                p, r, cost = p + step, rn, cn
                lam = max(lam / 3, 1e-300)
                accepted = True
                break
            if small or lam > 1e300:
                break
            lam *= 2
        if small:
            converged, msg = True, "relative parameter change below tolerance"
            break
        if not accepted:
            msg = "no descent step found"
            break
        if cost == 0.0:
            converged, msg = True, "exact fit"
            break
    return FitResult(m.name, p, math.sqrt(cost / x.size), converged, it, msg)


@dataclass(frozen=True)
class CutSpec:
    """Where to look for a peak.

    kind 'omega_x': scan omega_x over a uniform grid at fixed xi_y.
    kind 'point': evaluate at the fixed point (omega_x, xi_y).
    omega_x: grid, callable j -> grid, or the fixed value for points.
    extremum: 'max' or 'min' (ignored for points).
    h: curvature stencil step; None picks 0.08 j^(-2/3).
    zoom: number of refinement passes, each on a 4x finer grid of 9 nodes
        centred on the current discrete extremum.
    richardson: extrapolate curvatures from steps h and h/2.
    """
    kind: str
    xi_y: float
    omega_x: object = 0.0
    extremum: str = "max"
    h: float = None
    state: str = "highest"
    zoom: int = 0
    richardson: bool = True


QUANTITIES = ("g11", "g12", "g22", "R")


def default_step(j):
    """Curvature stencil step; features near the separatrix shrink like j^(-2/3)."""
    return 0.08 * check_spin(j) ** (-2.0 / 3.0)


def separatrix_window(xi_y, scale=14.0, nodes=9):
    """Grid factory j -> omega_x nodes on [oxc - scale j^(-0.7), oxc].

    Finite-size peaks of the highest state approach oxc = sqrt(4 xi^2 - 1)
    from below at a distance shrinking roughly like j^(-0.7).
    """
    oxc = math.sqrt(4 * xi_y * xi_y - 1)

    def grid(j):
        return np.linspace(oxc - scale * check_spin(j) ** -0.7, oxc, nodes)
    return grid


def cut_values(j, ox, xi_y, quantity, state="highest", h=None, richardson=True,
               omega=1.0, **kw):
    """Quantity of the selected state along omega_x at fixed xi_y.

    Args:
        j: spin size.
        ox: omega_x nodes.
        xi_y: fixed coupling.
        quantity: 'g11', 'g12', 'g22' or 'R'.
        h, richardson: curvature stencil options, see point_value. Each R
            node gets its own stencil so the cut spacing can stay coarse.

    Returns:
        array of values on ox.
    """
    ox = np.asarray(ox, float)
    if quantity == "R":
        return np.array([point_value(j, ModelParams(x, xi_y, omega), "R", state, h,
                                     richardson, **kw) for x in ox])
    f = qgt_mesh(j, ox, [xi_y], state, omega=omega, **kw)
    return getattr(f, quantity)[0]


def point_value(j, p, quantity, state="highest", h=None, richardson=True, **kw):
    """g_ij or R of the selected state at one point.

    R uses the 13-node stencil of step h (default 0.08 j^(-2/3)) and, unless
    disabled, one Richardson step with h/2.
    """
    if quantity != "R":
        return float(getattr(qgt_perturbative(j, p, state, **kw), quantity))
    h = default_step(j) if h is None else h

    def metric(ox, xi):
        q = qgt_perturbative(j, ModelParams(ox, xi, p.omega), state, **kw)
        return q.g11, q.g12, q.g22

    x = (p.omega_x, p.xi_y)
    r = scalar_curvature_at(metric, x, h)
    return (4 * scalar_curvature_at(metric, x, h / 2) - r) / 3 if richardson else r


def scaling_study(j_list, cut_spec, quantity, *, threads=1, **kw):
    """One (j, peak location, peak value) row per j.

    Args:
        j_list: spin sizes.
        cut_spec: CutSpec.
        quantity: 'g11', 'g12', 'g22' or 'R'.
        threads: workers over j values.

    Returns:
        list of (j, location, value) tuples, in the order of j_list.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}")
    spec = cut_spec

    def row(j):
        j = check_spin(j)
        if spec.kind == "point":
            p = ModelParams(float(spec.omega_x), spec.xi_y)
            return (j, p.omega_x, point_value(j, p, quantity, spec.state, spec.h,
                                              spec.richardson, **kw))
        if spec.kind != "omega_x":
            raise ValueError(f"unknown cut kind {spec.kind!r}")
        ox = np.asarray(spec.omega_x(j) if callable(spec.omega_x) else spec.omega_x, float)
        for stage in range(spec.zoom + 1):
            vals = cut_values(j, ox, spec.xi_y, quantity, spec.state, spec.h,
                              spec.richardson, **kw)
            curve = Curve(ox, vals, {"j": j, "xi_y": spec.xi_y, "quantity": quantity})
            loc, val = extract_extremum(curve, spec.extremum)
            if stage < spec.zoom:
                k = int(np.nanargmax(vals) if spec.extremum == "max" else np.nanargmin(vals))
                step = (ox[1] - ox[0]) / 4
                ox = ox[k] + step * np.arange(-4, 5)
        return (j, loc, val)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            return list(ex.map(row, j_list))
    return [row(j) for j in j_list]
