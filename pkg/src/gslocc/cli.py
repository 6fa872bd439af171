"""Command-line interface: ``gslocc {prepare,classify,map,protocol,fidelity}``.

Exit codes: 0 whenever a question was answered (including "unphysical" and
"not transformable" verdicts), 2 for invalid invocations.  A JSON config file
(``--config``) may supply any flag by its long name; flags given on the
command line win.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import entanglement as ent
from . import protocols as pr
from . import teleportation as tp
from .states import EffectiveScheme, SymmetricState, from_effective, state_to_dict

__all__ = ["main", "build_parser", "UsageError"]

DEFAULTS = {
    "parties": 3,
    "grid": 200,
    "protocol": None,
    "quadrature": "x",
    "format": None,
    "transmittance": 1.0,
    "squeezing": "optimal",
    "a_min": 1.0,
    "a_max": 100.0,
    "g_min": 0.0,
    "g_max": 10.0,
    "points": 101,
    "seed": 0,
}

PICTURES = {
    "canonical": ("m", "n", "c", "d"),
    "effective": ("vx", "vp", "wx", "wp"),
    "thermal": ("n1", "r1", "n_last", "r_last"),
}


class UsageError(Exception):
    pass


def _add_state_args(p, with_parties=True):
    g = p.add_argument_group("state (give exactly one picture)")
    if with_parties:
        g.add_argument("--parties", type=int, help="number of parties N (default 3)")
    for name in ("m", "n", "c", "d"):
        g.add_argument(f"--{name}", type=float)
    for name in ("vx", "vp", "wx", "wp"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--n1", type=float, help="thermal noise of the N-1 identical inputs")
    g.add_argument("--r1", type=float, help="squeezing of the N-1 identical inputs")
    g.add_argument("--nN", dest="n_last", type=float, help="thermal noise of input N")
    g.add_argument("--rN", dest="r_last", type=float, help="squeezing of input N")


def _add_common(p):
    p.add_argument("--config", help="JSON file with flag values; command-line flags win")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, help="accepted for reproducible runs; no command draws random numbers")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gslocc",
        description="Symmetric multipartite Gaussian states under Gaussian LOCC (vacuum variance 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="convert between parameter pictures and check physicality")
    _add_state_args(p)
    _add_common(p)

    p = sub.add_parser("classify", help="entanglement class of one state")
    _add_state_args(p)
    _add_common(p)

    p = sub.add_parser("map", help="class map over a (c, d) grid")
    p.add_argument("--parties", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--n", type=float)
    p.add_argument("--grid", type=int, help="cells per axis (default 200)")
    for ax in ("c", "d"):
        p.add_argument(f"--{ax}-min", type=float)
        p.add_argument(f"--{ax}-max", type=float)
        p.add_argument(f"--{ax}-count", type=int)
    p.add_argument("--protocol", choices=["none", "noise", "qnd"])
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--quadrature", choices=["x", "p"])
    p.add_argument("--format", choices=["csv", "json", "ppm"])
    p.add_argument("--jobs", type=int, help="worker processes (default GSLOCC_THREADS or CPU count)")
    _add_common(p)

    p = sub.add_parser("protocol", help="plan and apply a transformation protocol")
    _add_state_args(p)
    p.add_argument("--protocol", choices=["noise", "qnd"])
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--quadrature", choices=["x", "p"])
    p.add_argument("--verbose", action="store_true", default=None, help="list every admissible QND root")
    _add_common(p)

    p = sub.add_parser("fidelity", help="assisted teleportation fidelity (N = 3)")
    _add_state_args(p, with_parties=False)
    p.add_argument("--transmittance", type=float, help="Charlie's T = t^2 (default 1)")
    p.add_argument("--optimize", action="store_true", default=None, help="report the optimal squeezing")
    p.add_argument("--sweep", choices=["a", "g"])
    p.add_argument("--squeezing", help="for --sweep g: 'optimal' or 'fixed:<a>'")
    p.add_argument("--a-min", type=float)
    p.add_argument("--a-max", type=float)
    p.add_argument("--g-min", type=float)
    p.add_argument("--g-max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    _add_common(p)
    return parser


def _merge_config(args):
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as err:
            raise UsageError(f"cannot read config {args.config}: {err}") from err
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            dest = {"nN": "n_last", "rN": "r_last", "N": "parties"}.get(dest, dest)
            if hasattr(args, dest) and getattr(args, dest) is None:
                setattr(args, dest, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _state(args, parties=None):
    parties = parties if parties is not None else args.parties
    given = {name: [getattr(args, f, None) is not None for f in fields] for name, fields in PICTURES.items()}
    complete = [name for name, flags in given.items() if all(flags)]
    partial = [name for name, flags in given.items() if any(flags) and not all(flags)]
    if partial or len(complete) != 1:
        raise UsageError(
            "give exactly one complete state picture: --m --n --c --d, --vx --vp --wx --wp, or --n1 --r1 --nN --rN"
        )
    vals = [float(getattr(args, f)) for f in PICTURES[complete[0]]]
    try:
        if complete[0] == "canonical":
            return SymmetricState(parties, *vals)
        if complete[0] == "effective":
            e = EffectiveScheme(parties, *vals)
        else:
            e = EffectiveScheme.from_thermal_squeezed(parties, *vals)
        return from_effective(e)
    except ValueError as err:
        raise UsageError(str(err)) from err


def _targets(args):
    if args.k1 is None or args.k2 is None:
        raise UsageError("--k1 and --k2 are required with a protocol")
    try:
        return pr.TargetRatios(float(args.k1), float(args.k2))
    except ValueError as err:
        raise UsageError(str(err)) from err


def _state_report(s):
    out = state_to_dict(s)
    out["physical"] = bool(s.is_physical())
    mx, mw = s.physicality_margins()
    out["margins"] = {"VxVp_minus_1": mx, "WxWp_minus_1": mw}
    return out


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def cmd_prepare(args):
    return _json(_state_report(_state(args))), 0


def cmd_classify(args):
    s = _state(args)
    cls = ent.classify(s)
    out = {"class": cls.label, "physical": cls != ent.EntanglementClass.UNPHYSICAL}
    if out["physical"]:
        out["ppt_min"] = ent.ppt_min_symplectic(s)
        out["fully_separable"] = bool(ent.is_fully_separable(s))
    else:
        out["ppt_min"] = None
        out["fully_separable"] = None
    out["state"] = _state_report(s)
    return _json(out), 0


def cmd_map(args):
    if args.m is None or args.n is None:
        raise UsageError("map needs --m and --n")
    if args.grid < 1:
        raise UsageError("--grid must be positive")
    try:
        c_def, d_def = ent.default_grids(args.m, args.n, args.parties, args.grid)
        c_axis = ent.Grid(
            c_def.lo if args.c_min is None else args.c_min,
            c_def.hi if args.c_max is None else args.c_max,
            args.grid if args.c_count is None else args.c_count,
        )
        d_axis = ent.Grid(
            d_def.lo if args.d_min is None else args.d_min,
            d_def.hi if args.d_max is None else args.d_max,
            args.grid if args.d_count is None else args.d_count,
        )
    except ValueError as err:
        raise UsageError(f"bad grid: {err}") from err
    protocol = args.protocol or "none"
    targets = _targets(args) if protocol != "none" else None
    fmt = args.format or "csv"
    if fmt == "ppm" and not args.out:
        raise UsageError("--format ppm needs --out")
    jobs = args.jobs if args.jobs is not None else ent.default_jobs()

    t0 = time.perf_counter()
    cmap = ent.class_map(args.m, args.n, args.parties, c_axis, d_axis, protocol, targets, args.quadrature, jobs=jobs)
    elapsed = time.perf_counter() - t0
    counts = {cls.label: n for cls, n in cmap.counts().items()}
    print(f"map: {c_axis.count}x{d_axis.count} cells in {elapsed:.2f} s; {counts}", file=sys.stderr)

    if fmt == "ppm":
        return cmap.to_ppm(), 0
    if fmt == "json":
        return _json({
            "m": cmap.m, "n": cmap.n, "N": cmap.n_parties, "protocol": cmap.protocol,
            "k1": targets.k1 if targets else None, "k2": targets.k2 if targets else None,
            "quadrature": cmap.quadrature,
            "c_grid": [c_axis.lo, c_axis.hi, c_axis.count],
            "d_grid": [d_axis.lo, d_axis.hi, d_axis.count],
            "counts": counts,
            "codes": cmap.codes.tolist(),
        }), 0
    return cmap.to_csv(), 0


def cmd_protocol(args):
    if args.protocol is None:
        raise UsageError("--protocol noise|qnd is required")
    s = _state(args)
    t = _targets(args)
    out = {"input": _state_report(s), "protocol": args.protocol, "targets": {"k1": t.k1, "k2": t.k2}}
    if not s.is_physical():
        out["not_transformable"] = "unphysical-input"
        return _json(out), 0
    plan = pr.plan_noise(s, t, args.quadrature) if args.protocol == "noise" else pr.plan_qnd(s, t)
    if args.protocol == "qnd" and args.verbose and not (isinstance(plan, pr.NotTransformable)
                                                        and plan.reason is pr.Reason.DEGENERATE_INPUT):
        out["qnd_roots"] = [{"g_sq": u, "a_sq": a_sq} for u, a_sq in pr.qnd_candidates(s, t)]
    if isinstance(plan, pr.NotTransformable):
        out["not_transformable"] = plan.reason.value
        out["detail"] = plan.detail
        return _json(out), 2 if plan.reason is pr.Reason.DEGENERATE_INPUT else 0
    o = pr.transform_state(s, plan)
    out["plan"] = pr.plan_to_dict(plan)
    out["transformed"] = _state_report(o)
    out["residuals"] = {"k1": o.n / o.m - t.k1, "k2": o.d / o.c - t.k2}
    return _json(out), 0


def _parse_squeezing(spec):
    if spec == "optimal":
        return "optimal"
    if isinstance(spec, str) and spec.startswith("fixed:"):
        try:
            a = float(spec.split(":", 1)[1])
        except ValueError:
            a = float("nan")
        if a > 0:
            return a
    raise UsageError(f"--squeezing must be 'optimal' or 'fixed:<a>' with a > 0, got {spec!r}")


def cmd_fidelity(args):
    s = _state(args, parties=3)
    if not s.is_physical():
        raise UsageError(f"state is unphysical: {s}")
    if not (s.c > 0 and s.d > 0):
        raise UsageError("teleportation needs c > 0 and d > 0 (gain convention R = diag(-1, 1))")
    if args.points < 1:
        raise UsageError("--points must be positive")

    if args.sweep == "a":
        if not 0 < args.a_min <= args.a_max:
            raise UsageError("need 0 < --a-min <= --a-max")
        grid = np.geomspace(args.a_min, args.a_max, args.points)
        curve = tp.fidelity_vs_squeezing(s, grid)
        return curve.to_csv(s), 0
    if args.sweep == "g":
        if not 0 <= args.g_min <= args.g_max:
            raise UsageError("need 0 <= --g-min <= --g-max")
        grid = np.linspace(args.g_min, args.g_max, args.points)
        curve = tp.fidelity_vs_g(s, grid, _parse_squeezing(args.squeezing))
        return curve.to_csv(s), 0

    try:
        rep = tp.fidelity(s, tp.CharlieSetup(args.transmittance))
    except ValueError as err:
        raise UsageError(str(err)) from err
    out = {
        "state": _state_report(s),
        "transmittance": args.transmittance,
        "F": rep.F,
        "det_E": rep.det_E,
        "F_closed_T1": tp.fidelity_closed(s),
    }
    if args.optimize:
        a = tp.optimal_squeezing(s.effective())
        out["a_opt"] = a
        out["a_opt_db"] = tp.db(a)
        out["F_opt"] = tp.fidelity_closed(tp.squeezed(s, a))
        out["gain"] = out["F_opt"] / out["F_closed_T1"] - 1.0
    return _json(out), 0


COMMANDS = {
    "prepare": cmd_prepare,
    "classify": cmd_classify,
    "map": cmd_map,
    "protocol": cmd_protocol,
    "fidelity": cmd_fidelity,
}


def _emit(payload, path):
    if path:
        mode = "wb" if isinstance(payload, bytes) else "w"
        with open(path, mode) as fh:
            fh.write(payload)
    elif isinstance(payload, bytes):
        sys.stdout.buffer.write(payload)
    else:
        sys.stdout.write(payload)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        payload, code = COMMANDS[args.command](args)
    except UsageError as err:
        print(f"gslocc {args.command}: error: {err}", file=sys.stderr)
        return 2
    _emit(payload, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
