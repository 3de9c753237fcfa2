"""Command-line front end: ``melkit <command> [flags]``.

Exit status: 0 success, 1 a validation check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .exact_coeff import HalfPowerSeries, to_decimal
from .io import SCHEMA_VERSION, SchemaError, load_perturbation, perturbation_to_json
from .melnikov_core import (
    Basis,
    MelnikovCombination,
    assemble,
    expand,
    reduce_to_canonical,
    rewrite_I,
    rewrite_J,
)
from .pendulum_sim import SimulationError, SystemSpec, find_cycles, integrate_orbit, melnikov_agreement, period, return_map
from .perturbation import PiecewisePerturbation, SmoothPerturbation
from .quadrature import quad_melnikov
from .zero_analysis import (
    BoundQuery,
    RealizationError,
    count_sign_changes,
    jacobian_rank,
    max_zero_bound,
    rank_D_piecewise,
    rank_D_smooth,
    realize_zeros,
)


class InputError(Exception):
    pass


def _emit_json(payload: dict, out) -> None:
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _emit_csv(header, rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _h_grid(args) -> list[float]:
    if args.h is not None:
        return [args.h]
    if args.h_min is None or args.h_max is None:
        raise InputError("give --h or both --h-min and --h-max")
    return np.geomspace(args.h_min, args.h_max, args.grid).tolist()


def _term(args) -> Basis:
    if args.term is None or args.i is None or args.j is None:
        raise InputError("give --input FILE or --term KIND --i I --j J")
    return Basis(args.term, args.i, args.j)


def _load(args):
    if args.input is None:
        raise InputError("--input FILE is required")
    try:
        return load_perturbation(args.input)
    except OSError as e:
        raise InputError(str(e)) from None


def _series_report(s: HalfPowerSeries, digits: int) -> dict:
    return {"text": str(s), "identically_zero": s.identically_zero,
            "terms": [r for r in s.to_json(digits) if r["decimal"] not in ("0.0", "0")]}


# -- commands -----------------------------------------------------------------

def cmd_expand(args, out) -> int:
    if args.input:
        target = assemble(_load(args))
    else:
        target = _term(args)
    s = expand(target, args.order)
    if args.json:
        _emit_json({"command": "expand", "target": str(target), "order": args.order,
                    "series": _series_report(s, args.digits)}, out)
        return 0
    out.write(str(s) + "\n")
    for e, c in s.terms():
        out.write(f"  h^({e}/2): {c} = {to_decimal(c, args.digits)}\n")
    return 0


def cmd_quad(args, out) -> int:
    hs = _h_grid(args)
    if args.input:
        p = _load(args)
        f = lambda h: quad_melnikov(p, h, args.tol)
        label = "M"
    else:
        b = _term(args)
        f = lambda h: b.quad(h, args.tol)
        label = str(b)
    res = [(h, f(h)) for h in hs]
    ok = all(r.converged for _, r in res)
    if args.csv:
        _emit_csv(["h", label], [(h, r.value) for h, r in res], out)
    elif args.json:
        _emit_json({"command": "quad", "target": label,
                    "values": [{"h": h, **r.to_json()} for h, r in res]}, out)
    else:
        for h, r in res:
            flags = f"  [{', '.join(r.flags)}]" if r.flags else ""
            out.write(f"h={h:.10g}  {label}={r.value:.{args.digits}g}  +/- {r.abs_error_estimate:.2e}{flags}\n")
    return 0 if ok else 1


def cmd_identities(args, out) -> int:
    hs = [float(v) for v in args.h_list.split(",")]
    rows, ok = [], True
    for kind in ("I", "J"):
        for i in range(args.i_max + 1):
            for r in range(0 if kind == "I" else 1, args.r_max + 1):
                for k in range(args.k_max + 1):
                    rel = rewrite_I(i, r, k) if kind == "I" else rewrite_J(i, r, k)
                    exact = rel.series_residual(args.order).is_zero()
                    worst = 0.0
                    for h in hs:
                        d, scale = rel.quad_residual(h, args.tol)
                        worst = max(worst, abs(d) / scale)
                    good = exact and worst <= args.quad_rel
                    ok &= good
                    rows.append({"relation": str(rel), "kind": kind, "i": i, "r": r, "k": k,
                                 "series_residual_zero": exact, "quad_rel_residual": worst, "ok": good})
    if args.json:
        _emit_json({"command": "identities", "ok": ok, "relations": rows}, out)
    else:
        bad = [r for r in rows if not r["ok"]]
        out.write(f"{len(rows)} relations checked, {len(bad)} failures, "
                  f"max quadrature residual {max(r['quad_rel_residual'] for r in rows):.2e}\n")
        for r in bad:
            out.write(f"FAIL {r['relation']}\n")
    return 0 if ok else 1


def _random_perturbation(rng: random.Random, family: str, n: int, m: int, r: int):
    val = lambda: Fraction(rng.randint(-50, 50), rng.randint(1, 12))
    if family == "smooth":
        s1 = rng.choice([max(2 * r, 1), 2 * r + 1])
        s2 = rng.choice([2 * r + 2 * m - 1, 2 * r + 2 * m])
        return SmoothPerturbation(n, s1, s2, [[val() for _ in range(s2 - s1 + 1)] for _ in range(n + 1)],
                                  [[val() for _ in range(s2 - s1 + 1)] for _ in range(n)])
    rt, l = r, m
    s1 = rng.choice([2 * rt - 1, 2 * rt])
    s_hat = max(s1, rng.choice([2 * rt + 2 * l - 2, 2 * rt + 2 * l - 1]))
    s2, s3 = (s_hat, rng.randint(s1, s_hat)) if rng.random() < 0.5 else (rng.randint(s1, s_hat), s_hat)
    side = lambda top: SmoothPerturbation(n, s1, top, [[val() for _ in range(top - s1 + 1)] for _ in range(n + 1)])
    return PiecewisePerturbation(n, s1, s2, s3, side(s2), side(s3))


def cmd_reduce(args, out) -> int:
    if args.fuzz:
        if args.seed is None:
            raise InputError("--fuzz needs an explicit --seed")
        rng = random.Random(args.seed)
        fam = args.family or "smooth"
        n, m = args.n if args.n is not None else 1, args.m if args.m is not None else 2
        r = args.r if args.r is not None else (0 if fam == "smooth" else 1)
        fails = 0
        for _ in range(args.fuzz):
            c = assemble(_random_perturbation(rng, fam, n, m, r))
            if expand(reduce_to_canonical(c), args.order) != expand(c, args.order):
                fails += 1
        if args.json:
            _emit_json({"command": "reduce", "fuzz": args.fuzz, "seed": args.seed, "failures": fails}, out)
        else:
            out.write(f"{args.fuzz} random {fam} perturbations (n={n}, m/l={m}, r={r}): {fails} failures\n")
        return 0 if fails == 0 else 1
    p = _load(args)
    cf = reduce_to_canonical(assemble(p))
    same = expand(cf, args.order) == expand(cf.source, args.order)
    if args.json:
        _emit_json({"command": "reduce", "canonical": cf.to_json(), "series_identical": same}, out)
    else:
        for blk in cf.blocks:
            out.write(f"{blk.kind}-block n={blk.n} m={blk.m} r={blk.r} (map onto: {blk.is_surjective()})\n")
            for b, a in zip(blk.basis, blk.A):
                out.write(f"  {a} * {b}\n")
            out.write("  map rows (A) x columns (" + ", ".join(map(str, blk.inputs)) + "):\n")
            for b, row in zip(blk.basis, blk.matrix):
                out.write(f"    {str(b):10s} " + " ".join(f"{str(v):>8s}" for v in row) + "\n")
        out.write(f"series identical through order {args.order}: {same}\n")
    return 0 if same else 1


def cmd_rank(args, out) -> int:
    fam = args.family
    m = args.m if args.m is not None else args.l
    if m is None or args.n is None:
        raise InputError("rank needs --n and --m (or --l)")
    if args.jacobian:
        rep = jacobian_rank(fam, args.n, m, args.r)
    elif fam == "smooth":
        rep = rank_D_smooth(args.n, m, args.r if args.r is not None else 0)
    else:
        rep = rank_D_piecewise(args.n, m, args.r if args.r is not None else 1)
    if args.json:
        _emit_json({"command": "rank", "report": rep.to_json()}, out)
    else:
        out.write(f"{rep.label}: rank {rep.rank} (expected {rep.expected}) {'ok' if rep.ok else 'MISMATCH'}\n")
        for k, v in rep.checks.items():
            out.write(f"  {k}: {v}\n")
    return 0 if rep.ok else 1


def _query(args) -> BoundQuery:
    if args.family == "smooth":
        return BoundQuery("smooth", args.n, m=args.m)
    return BoundQuery("piecewise", args.n, s1=args.s1, s_hat=args.s_hat)


def cmd_bound(args, out) -> int:
    b = max_zero_bound(_query(args))
    if args.json:
        _emit_json({"command": "bound", "bound": b}, out)
    else:
        out.write(f"{b}\n")
    return 0


def cmd_realize(args, out) -> int:
    q = _query(args)
    k = max_zero_bound(q)
    if args.locations:
        locs = [float(v) for v in args.locations.split(",")]
    else:
        locs = [0.05] if k == 1 else np.geomspace(0.02, 0.12, k).tolist()
    real = realize_zeros(q, locs, grid=args.grid)
    if args.json:
        _emit_json({"command": "realize", "realization": real.to_json()}, out)
    else:
        out.write(f"target {k} zeros at {locs}\n")
        out.write(f"verified zeros: {[float(f'{z:.8g}') for z in real.verified_zeros]} on (0, {real.eps0:.4g}]\n")
        out.write(json.dumps(perturbation_to_json(real.perturbation), sort_keys=True) + "\n")
        for d in real.diagnostics:
            out.write(f"  {d}\n")
    return 0 if real.verified else 1


def cmd_zeros(args, out) -> int:
    p = _load(args)
    lo = args.h_min if args.h_min is not None else 0.005
    hi = args.h_max if args.h_max is not None else 0.5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = count_sign_changes(lambda h: quad_melnikov(p, h, args.tol), (lo, hi), args.grid)
    if args.csv:
        _emit_csv(["h", "M"], list(zip(rep.grid, rep.values)), out)
    elif args.json:
        _emit_json({"command": "zeros", "report": rep.to_json()}, out)
    else:
        out.write(f"{rep.count} sign change(s) on [{lo}, {hi}]\n")
        for a, b in rep.brackets:
            out.write(f"  [{a:.10g}, {b:.10g}]\n")
        if rep.indeterminate:
            out.write(f"  indeterminate at {len(rep.indeterminate)} grid point(s)\n")
    return 0 if rep.ok else 1


def cmd_simulate(args, out) -> int:
    spec = SystemSpec(args.epsilon, _load(args))
    tol = args.tol if args.tol is not None else 1e-10
    if args.t_max is not None:
        h = args.h if args.h is not None else 0.5
        tr = integrate_orbit(spec, (0.0, (2 * h) ** 0.5), args.t_max, tol)
        if args.csv:
            out.write(tr.to_csv())
        elif args.json:
            _emit_json({"command": "simulate", "samples": len(tr.t), "crossings": tr.crossings,
                        "H_start": float(tr.H[0]), "H_end": float(tr.H[-1])}, out)
        else:
            out.write(f"{len(tr.t)} steps, {len(tr.crossings)} crossings of y=0, "
                      f"H {tr.H[0]:.12g} -> {tr.H[-1]:.12g}\n")
        return 0
    if args.h is not None:
        s = return_map(spec, args.h, tol)
        if args.json:
            _emit_json({"command": "simulate", "return": s.to_json()}, out)
        else:
            out.write(f"h_in={s.h_in:.12g} h_out={s.h_out:.12g} d={s.displacement:.6e} "
                      f"T={s.flight_time:.10g} (unperturbed {period(args.h):.10g})\n")
        return 0
    rep = find_cycles(spec, (args.h_min, args.h_max), args.grid, tol)
    if args.csv:
        _emit_csv(["h", "d"], list(zip(rep.grid, rep.displacements)), out)
    elif args.json:
        _emit_json({"command": "simulate", "cycles": rep.to_json()}, out)
    else:
        out.write(f"{len(rep.cycles)} cycle(s)\n")
        for c in rep.cycles:
            out.write(f"  h*={c.h_star:.8g} in [{c.bracket[0]:.6g}, {c.bracket[1]:.6g}] "
                      f"{'attracting' if c.stability < 0 else 'repelling'}\n")
        for d in rep.diagnostics:
            out.write(f"  {d}\n")
    return 0 if not rep.indeterminate else 1


def cmd_agree(args, out) -> int:
    spec = SystemSpec(args.epsilon, _load(args))
    hs = _h_grid(args)
    tol = args.tol if args.tol is not None else 1e-10
    rep = melnikov_agreement(spec, hs, tol)
    if args.csv:
        _emit_csv(["h", "d_over_eps", "M"], [(r["h"], r["d_over_eps"], r["melnikov"]) for r in rep.rows], out)
    elif args.json:
        _emit_json({"command": "agree", "report": rep.to_json()}, out)
    else:
        for r in rep.rows:
            out.write(f"h={r['h']:.6g}  d/eps={r['d_over_eps']:.10g}  M={r['melnikov']:.10g}\n")
        out.write(f"max |d/eps - M| = {rep.max_abs_deviation:.3e}, signs agree: {rep.signs_agree}\n")
    return 0 if rep.signs_agree else 1


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="melkit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"melkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, order=5, tol=1e-12, grid=64):
        p.add_argument("--input", help="perturbation JSON file")
        p.add_argument("--order", type=int, default=order)
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--h", type=float)
        p.add_argument("--h-min", type=float)
        p.add_argument("--h-max", type=float)
        p.add_argument("--grid", type=int, default=grid)
        p.add_argument("--epsilon", type=float, default=1e-4)
        p.add_argument("--seed", type=int)
        p.add_argument("--json", action="store_true")
        p.add_argument("--csv", action="store_true")
        p.add_argument("--digits", type=int, default=10)
        return p

    def term(p):
        p.add_argument("--term", choices=["I", "J", "L", "Lt"])
        p.add_argument("--i", type=int)
        p.add_argument("--j", type=int, help="y power (I, J) or second index (L, Lt)")

    def family(p):
        p.add_argument("--family", choices=["smooth", "piecewise"], default="smooth")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--l", type=int)
        p.add_argument("--r", type=int)
        p.add_argument("--s1", type=int)
        p.add_argument("--s-hat", type=int)

    p = common(sub.add_parser("expand", help="exact small-h series"))
    term(p)
    p.set_defaults(func=cmd_expand)

    p = common(sub.add_parser("quad", help="quadrature values"), grid=16)
    term(p)
    p.set_defaults(func=cmd_quad)

    p = common(sub.add_parser("identities", help="verify the integration-by-parts relations"),
               order=20, tol=1e-13)
    p.add_argument("--i-max", type=int, default=5)
    p.add_argument("--r-max", type=int, default=4)
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--h-list", default="0.1,0.5,1.0")
    p.add_argument("--quad-rel", type=float, default=1e-7)
    p.set_defaults(func=cmd_identities)

    p = common(sub.add_parser("reduce", help="canonical form and its linear map"), order=15)
    family(p)
    p.add_argument("--fuzz", type=int, default=0, help="number of random perturbations to check")
    p.set_defaults(func=cmd_reduce)

    p = common(sub.add_parser("rank", help="exact rank reports"))
    family(p)
    p.add_argument("--jacobian", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = common(sub.add_parser("bound", help="theoretical zero bound"))
    family(p)
    p.set_defaults(func=cmd_bound)

    p = common(sub.add_parser("realize", help="perturbation attaining the bound"))
    family(p)
    p.add_argument("--locations", help="comma-separated zero locations in (0, 0.2]")
    p.set_defaults(func=cmd_realize)

    p = common(sub.add_parser("zeros", help="sign changes of M on a grid"))
    p.set_defaults(func=cmd_zeros)

    p = common(sub.add_parser("simulate", help="return map, trajectories, cycles"), tol=None, grid=32)
    p.add_argument("--t-max", type=float)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("agree", help="d(h)/eps against M(h)"), tol=None, grid=16)
    p.set_defaults(func=cmd_agree)
    return ap


def _validate(args) -> None:
    if getattr(args, "order", 1) < 1:
        raise InputError("--order must be >= 1")
    if getattr(args, "tol", None) is not None and args.tol <= 0:
        raise InputError("--tol must be positive")
    if args.command in ("bound", "realize"):
        if args.n is None:
            raise InputError("--n is required")
        if args.family == "smooth" and args.m is None:
            raise InputError("smooth family needs --m")
        if args.family == "piecewise" and (args.s1 is None or args.s_hat is None):
            raise InputError("piecewise family needs --s1 and --s-hat")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _validate(args)
        return args.func(args, out)
    except (InputError, SchemaError, ValueError) as e:
        sys.stderr.write(f"melkit {args.command}: {e}\n")
        return 2
    except (SimulationError, RealizationError) as e:
        sys.stderr.write(f"melkit {args.command}: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
