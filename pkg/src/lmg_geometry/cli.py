"""Command-line interface.

Exit status: 0 on success, 2 on a usage error, 1 on a computation error.
Ranges use start:stop:count with inclusive endpoints.
"""
import argparse
import math
import sys

import numpy as np

from . import analysis, coherent, geometry, holstein_primakoff as hp, io, qgt, semiclassical
from .spectral import StateSelector, density_of_states, spectrum_at
from .spin import InvalidSpin, ModelParams, check_spin


class ComputationError(RuntimeError):
    pass


def grid(text):
    """Parse start:stop:count into an inclusive linspace."""
    parts = text.split(":")
    if len(parts) == 1:
        try:
            return np.array([float(parts[0])])
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number or range: {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if n < 1 or a > b or (n == 1 and a != b):
        raise argparse.ArgumentTypeError(f"range needs count >= 1 and start <= stop, got {text!r}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise argparse.ArgumentTypeError(f"range endpoints must be finite, got {text!r}")
    return np.linspace(a, b, n)


def spin(text):
    try:
        return check_spin(float(text))
    except (ValueError, InvalidSpin) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text!r}")
    return v


def state(text):
    try:
        return StateSelector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def spin_list(text):
    return [spin(t) for t in text.split(",") if t.strip()]


def float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(args, columns, rows):
    fmt = args.format or (io.guess_format(args.out) if args.out else "csv")
    if args.out:
        io.write_table(args.out, columns, rows, fmt)
    else:
        sys.stdout.write(io.format_table(columns, rows, fmt))


def _emit_pairs(args, pairs):
    """key = value lines, or a one-row table when --out/--format is given."""
    if args.out or args.format:
        _emit(args, [k for k, _ in pairs], [[v for _, v in pairs]])
    else:
        for k, v in pairs:
            print(f"{k} = {io.format_value(v)}")


def _params(args):
    return ModelParams(args.omega_x, args.xi_y, args.omega)


# subcommands

def cmd_spectrum(args):
    s = spectrum_at(args.j, _params(args))
    rows = [[k, e, e / args.j] for k, e in enumerate(s.eigenvalues)]
    _emit(args, ["index", "energy", "energy_per_j"], rows)


def cmd_dos(args):
    h = density_of_states(spectrum_at(args.j, _params(args)), args.bins, args.j)
    _emit(args, io.DOS_COLUMNS, io.dos_rows(h))


def _qgt_kw(args):
    kw = {}
    if args.method == "perturbative":
        kw["doublet"] = args.doublet
    return kw


def cmd_qgt(args):
    p = _params(args)
    if args.method == "perturbative":
        pt = qgt.qgt_perturbative(args.j, p, args.state, **_qgt_kw(args))
    else:
        pt = qgt.qgt_overlap_oracle(args.j, p, args.state)
    _emit_pairs(args, [("g11", pt.g11), ("g12", pt.g12), ("g22", pt.g22), ("f12", pt.f12),
                       ("det_g", pt.det_g), ("min_gap", pt.condition_flag)])


def cmd_mesh(args):
    f = qgt.qgt_mesh(args.j, args.omega_x, args.xi_y, args.state, args.method,
                     threads=args.threads, omega=args.omega, **_qgt_kw(args))
    fmt = args.format or (io.guess_format(args.out) if args.out else "csv")
    rows = io.field_rows(f)
    if args.out:
        io.write_table(args.out, io.FIELD_COLUMNS, rows, fmt)
    else:
        sys.stdout.write(io.format_table(io.FIELD_COLUMNS, rows, fmt))
    failed = [(r[0], r[1], r[8]) for r in rows if r[8] != "ok"]
    if failed:
        for ox, xi, st in failed[:10]:
            print(f"node omega_x={ox:.17g} xi_y={xi:.17g}: {st}", file=sys.stderr)
        raise ComputationError(f"{len(failed)} of {len(rows)} nodes failed")


def cmd_curvature(args):
    f = io.read_field(args.input)
    c = geometry.scalar_curvature_field(f, args.det_floor)
    _emit(args, io.CURVATURE_COLUMNS, io.curvature_rows(c))


def cmd_classical(args):
    p = _params(args)
    if args.what == "points":
        rows = [[s.label, s.point.Q, s.point.P, s.point.theta, s.point.phi, s.energy,
                 s.stability, s.lyapunov] for s in semiclassical.stationary_points(p)]
        _emit(args, ["label", "Q", "P", "theta", "phi", "energy", "stability", "lyapunov"], rows)
    elif args.what == "lyapunov":
        _emit_pairs(args, [("lyapunov", semiclassical.lyapunov_exponent(p))])
    elif args.what == "critical":
        c = semiclassical.critical_lines(p)
        oxc = c["omega_xc"] if c["omega_xc"] is not None else math.nan
        _emit_pairs(args, [("omega_xc", oxc), ("separatrix_xi", c["separatrix_xi"]),
                           ("esqpt_energy", c["esqpt_energy"])])
    elif args.what == "surface":
        rows = []
        for P in args.p:
            for Q in args.q:
                e = (float(semiclassical.classical_energy(p, Q, P))
                     if Q * Q + P * P <= 4 else math.nan)
                rows.append([Q, P, e])
        _emit(args, ["Q", "P", "energy"], rows)
    else:
        o = semiclassical.coherent_expectations(args.j, args.theta, args.phi, p)
        _emit_pairs(args, [("jx", o.jx), ("jy", o.jy), ("jz", o.jz), ("jy2", o.jy2),
                           ("energy", o.energy)])


def _hp_pairs(m):
    return [("g11", m.g11), ("g12", m.g12), ("g22", m.g22), ("det_g", m.det_g),
            ("frequency", m.frequency)]


def cmd_hp(args):
    p = _params(args)
    if args.what == "ground":
        _emit_pairs(args, _hp_pairs(hp.hp_ground_metric(args.j, p)))
    elif args.what == "symmetric":
        _emit_pairs(args, _hp_pairs(hp.hp_symmetric_metric(args.j, p)))
    elif args.what == "broken":
        _emit_pairs(args, _hp_pairs(hp.hp_broken_metric(args.j, p)))
    elif args.what == "quadratic":
        q = hp.hp_broken_quadratic(args.j, p)
        _emit_pairs(args, [("constant", q.constant), ("cPP", q.cPP), ("cQQ", q.cQQ),
                           ("cQP", q.cQP), ("frequency", q.frequency)])
    elif args.what == "berry":
        _emit_pairs(args, [("f12", hp.hp_broken_berry(args.j, p))])
    else:
        _emit_pairs(args, [("e_max", hp.e_max(p))])


def cmd_coherent(args):
    p = _params(args)
    if args.what == "state":
        c = coherent.coherent_vector(args.j, args.theta, args.phi).coefficients
        m = np.arange(c.size) - args.j
        _emit(args, ["m", "re", "im"], [[mm, v.real, v.imag] for mm, v in zip(m, c)])
    elif args.what == "qgt":
        fn = coherent.coherent_qgt_numeric if args.numeric else coherent.coherent_qgt_closed_form
        pt = fn(args.j, p, args.branch)
        _emit_pairs(args, [("g11", pt.g11), ("g12", pt.g12), ("g22", pt.g22), ("f12", pt.f12),
                           ("det_g", pt.det_g)])
    else:
        _emit_pairs(args, [("R", coherent.coherent_curvature(args.j, p))])


def _cut_spec(args):
    if args.at is not None:
        return analysis.CutSpec("point", args.xi_y, args.at, state=args.state, h=args.h)
    ox = args.omega_x if args.omega_x is not None else analysis.separatrix_window(args.xi_y)
    return analysis.CutSpec("omega_x", args.xi_y, ox, args.extremum, args.h, args.state,
                            args.zoom)


def cmd_peaks(args):
    rows = analysis.scaling_study(args.j_list, _cut_spec(args), args.quantity,
                                  threads=args.threads)
    _emit(args, ["j", "location", "value"], [list(r) for r in rows])


def cmd_fit(args):
    fmt = io.guess_format(args.input)
    with open(args.input) as fh:
        header = fh.readline().strip() if fmt == "csv" else None
    cols = tuple(header.split(",")) if header else None
    if cols is None:
        import json
        with open(args.input) as fh:
            cols = tuple(json.load(fh)["columns"])
    for c in (args.x, args.y):
        if c not in cols:
            raise io.SchemaError(f"missing column {c!r}")
    rows = io.read_table(args.input, cols, fmt)
    x = [float(r[cols.index(args.x)]) for r in rows]
    y = [float(r[cols.index(args.y)]) for r in rows]
    res = analysis.fit_model(analysis.Curve(x, y), args.model, args.initial)
    pairs = [("model", res.model_name)]
    pairs += [(f"p{k}", v) for k, v in enumerate(res.parameters)]
    pairs += [("residual_rms", res.residual_rms), ("converged", res.converged),
              ("iterations", res.iterations)]
    _emit_pairs(args, pairs)
    if not res.converged:
        raise ComputationError(f"fit did not converge: {res.message}")


def _safe(fn):
    try:
        m = fn()
        return m.g11, m.g12, m.g22
    except (hp.SingularAt, hp.OutsidePhase, coherent.BranchUndefined):
        return math.nan, math.nan, math.nan


def cmd_compare(args):
    rows = []
    st = args.state
    for xi in args.xi_y:
        for ox in args.omega_x:
            p = ModelParams(ox, xi, args.omega)
            n = qgt.qgt_perturbative(args.j, p, st, doublet=args.doublet)
            broken = 4 * xi * xi - ox * ox - 1 > 0
            if st.kind == "ground":
                a = _safe(lambda: hp.hp_ground_metric(args.j, p))
                c = (math.nan,) * 3
            elif broken:
                a = _safe(lambda: hp.hp_broken_metric(args.j, p))
                c = _safe(lambda: coherent.coherent_qgt_closed_form(args.j, p, "broken"))
            else:
                a = _safe(lambda: hp.hp_symmetric_metric(args.j, p))
                c = _safe(lambda: coherent.coherent_qgt_closed_form(args.j, p, "symmetric"))
            rows.append([ox, xi, n.g11, n.g12, n.g22, *a, *c])
    cols = ["omega_x", "xi_y", "num_g11", "num_g12", "num_g22", "hp_g11", "hp_g12", "hp_g22",
            "coh_g11", "coh_g12", "coh_g22"]
    _emit(args, cols, rows)


def build_parser():
    ap = argparse.ArgumentParser(prog="lmg-geometry",
                                 description="Quantum geometry of the extended LMG model.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, point=True, out=True):
        if point:
            sp.add_argument("--omega-x", type=float, default=0.0)
            sp.add_argument("--xi-y", type=float, default=0.0)
        sp.add_argument("--omega", type=float, default=1.0)
        if out:
            sp.add_argument("--out", help="output path (default stdout)")
            sp.add_argument("--format", choices=io.FORMATS)

    def qopts(sp):
        sp.add_argument("--state", type=state, default=StateSelector("ground"))
        sp.add_argument("--method", choices=("perturbative", "overlap"), default="perturbative")
        sp.add_argument("--doublet", choices=qgt.DOUBLET_POLICIES, default="exact")

    sp = sub.add_parser("spectrum", help="eigenvalues")
    sp.add_argument("--j", type=spin, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_spectrum)

    sp = sub.add_parser("dos", help="density of states histogram of E/j")
    sp.add_argument("--j", type=spin, required=True)
    sp.add_argument("--bins", type=int, default=40)
    common(sp)
    sp.set_defaults(fn=cmd_dos)

    sp = sub.add_parser("qgt", help="QGT of one state at one point")
    sp.add_argument("--j", type=spin, required=True)
    common(sp)
    qopts(sp)
    sp.set_defaults(fn=cmd_qgt)

    sp = sub.add_parser("mesh", help="QGT on a grid, written as a FieldFile")
    sp.add_argument("--j", type=spin, required=True)
    sp.add_argument("--omega-x", type=grid, required=True)
    sp.add_argument("--xi-y", type=grid, required=True)
    sp.add_argument("--threads", type=positive_int, default=1)
    common(sp, point=False)
    qopts(sp)
    sp.set_defaults(fn=cmd_mesh)

    sp = sub.add_parser("curvature", help="scalar curvature of a FieldFile")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--det-floor", type=float, default=geometry.DET_FLOOR)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=io.FORMATS)
    sp.set_defaults(fn=cmd_curvature)

    sp = sub.add_parser("classical", help="classical limit")
    sp.add_argument("what", choices=("points", "lyapunov", "critical", "surface", "observables"))
    sp.add_argument("--q", type=grid, default=grid("-2:2:41"))
    sp.add_argument("--p", type=grid, default=grid("-2:2:41"))
    sp.add_argument("--j", type=spin, default=1.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--phi", type=float, default=0.0)
    common(sp)
    sp.set_defaults(fn=cmd_classical)

    sp = sub.add_parser("hp", help="Holstein-Primakoff closed forms")
    sp.add_argument("what", choices=("ground", "symmetric", "broken", "quadratic", "berry", "emax"))
    sp.add_argument("--j", type=spin, default=1.0)
    common(sp)
    sp.set_defaults(fn=cmd_hp)

    sp = sub.add_parser("coherent", help="Bloch coherent states")
    sp.add_argument("what", choices=("state", "qgt", "curvature"))
    sp.add_argument("--j", type=spin, required=True)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--phi", type=float, default=0.0)
    sp.add_argument("--branch", choices=coherent.BRANCHES, default="broken")
    sp.add_argument("--numeric", action="store_true", help="chain-rule numeric QGT")
    common(sp)
    sp.set_defaults(fn=cmd_coherent)

    sp = sub.add_parser("peaks", help="finite-size peaks along a cut, one row per j")
    sp.add_argument("--j-list", type=spin_list, required=True)
    sp.add_argument("--quantity", choices=analysis.QUANTITIES, required=True)
    sp.add_argument("--xi-y", type=float, required=True)
    sp.add_argument("--omega-x", type=grid, help="cut grid (default: window below omega_xc)")
    sp.add_argument("--at", type=float, help="evaluate at this omega_x instead of a cut")
    sp.add_argument("--extremum", choices=("max", "min"), default="max")
    sp.add_argument("--zoom", type=int, default=1)
    sp.add_argument("--h", type=float, help="curvature stencil step")
    sp.add_argument("--state", type=state, default=StateSelector("highest"))
    sp.add_argument("--threads", type=positive_int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=io.FORMATS)
    sp.set_defaults(fn=cmd_peaks)

    sp = sub.add_parser("fit", help="fit a named model to two columns of a table")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--model", choices=sorted(analysis.MODELS), required=True)
    sp.add_argument("--x", default="j")
    sp.add_argument("--y", default="value")
    sp.add_argument("--initial", type=float_list)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=io.FORMATS)
    sp.set_defaults(fn=cmd_fit)

    sp = sub.add_parser("compare", help="numeric, HP and coherent metrics side by side")
    sp.add_argument("--j", type=spin, required=True)
    sp.add_argument("--omega-x", type=grid, required=True)
    sp.add_argument("--xi-y", type=grid, required=True)
    sp.add_argument("--state", type=state, default=StateSelector("highest"))
    sp.add_argument("--doublet", choices=qgt.DOUBLET_POLICIES, default="resolved")
    common(sp, point=False)
    sp.set_defaults(fn=cmd_compare)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.fn(args)
    except (OSError, io.SchemaError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
