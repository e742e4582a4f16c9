"""Command line interface: ``roughfbm <command> ...``.

Exit status is 0 on success, 1 for invalid input (bad flags, files or
parameters) and 2 for numerical failures.  JSON results carry the resolved
configuration; CSV outputs get a ``<out>.run.json`` record next to them.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import runpy
import sys

import numpy as np
import scipy

from . import __version__
from .errors import DomainError, NumericalError
from .fbm import FbmModel, FbmPath, Grid, sample_batch
from .fileio import (detect_flavor, dump_json, read_lift_csv, read_paths_csv, write_curve_csv,
                     write_lift_csv, write_paths_csv, write_solution_csv)
from .finance import (MarketParams, arbitrage_demo, call, figure1_curve, figure1_features,
                      price_call, price_monte_carlo)
from .forms import BUILTIN_FORMS, builtin_form
from .integrate import OneForm, integrate_one_form, lift_spacetime, total, zero_mean_verify
from .rde import ScalarFunction, chain_rule_check, geometric_field, solve_rde
from .roughpath import lift_ito, lift_stratonovich

FLAVOR_NAMES = {"ito": "ito", "strat": "stratonovich"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _version_text():
    return (f"roughfbm {__version__} (python {platform.python_version()}, numpy {np.__version__}, "
            f"scipy {scipy.__version__})")


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> dict:
    skip = {"func", "config", "command", "action", "target"}
    out = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    out["command"] = " ".join(x for x in (getattr(args, "command", None), getattr(args, "action", None),
                                          getattr(args, "target", None)) if x)
    out["version"] = __version__
    return out


def _emit_json(args, payload: dict):
    payload = dict(payload)
    payload["config"] = _config(args)
    text = dump_json(payload)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _sidecar(args, summary: dict):
    record = {"config": _config(args), "summary": summary}
    with open(args.out + ".run.json", "w") as fh:
        fh.write(dump_json(record) + "\n")


def _open_out(path):
    return open(path, "w", newline="")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ROUGHFBM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DomainError(f"ROUGHFBM_SEED must be an integer, got {env!r}") from None


def _sidecar_config(path) -> dict:
    try:
        with open(path + ".run.json") as fh:
            return json.load(fh).get("config", {})
    except (OSError, ValueError):
        return {}


def _load_form(spec: str, d: int) -> OneForm:
    if spec in BUILTIN_FORMS:
        return builtin_form(spec, d)
    if spec.endswith(".py") and os.path.exists(spec):
        ns = runpy.run_path(spec)
        form = ns.get("ONE_FORM")
        if form is None and callable(ns.get("one_form")):
            form = ns["one_form"](d)
        if not isinstance(form, OneForm):
            raise DomainError(f"{spec} must define ONE_FORM (a OneForm) or one_form(d)")
        return form
    raise DomainError(f"unknown one-form {spec!r}; use one of {sorted(BUILTIN_FORMS)} or a .py file")


def _read_lift(args):
    cfg = _sidecar_config(args.inp)
    hurst = args.hurst if getattr(args, "hurst", None) is not None else cfg.get("hurst")
    rp, ids = read_lift_csv(args.inp, hurst=hurst)
    found = detect_flavor(rp)
    want = FLAVOR_NAMES[args.flavor]
    if found != want:
        raise DomainError(f"{args.inp} holds a {found} lift but --flavor {args.flavor} was given")
    return rp.with_arrays(flavor=want), ids


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args):
    model = FbmModel(args.hurst, args.dim)
    grid = Grid(0.0, args.t1, args.steps)
    args.seed = _seed(args)
    batch = sample_batch(model, grid, args.seed, args.paths, method=args.method, workers=args.workers)
    with _open_out(args.out) as fh:
        write_paths_csv(fh, grid.times, batch.values, batch.index)
    _sidecar(args, {"paths": args.paths, "steps": args.steps})
    print(f"sample: wrote {args.paths} paths x {args.steps + 1} points to {args.out}")


def cmd_lift(args):
    grid, values, ids = read_paths_csv(args.inp)
    cfg = _sidecar_config(args.inp)
    hurst = args.hurst if args.hurst is not None else cfg.get("hurst")
    if args.flavor == "ito" and hurst is None:
        raise DomainError("the Itô lift needs --hurst (no run record found next to the input)")
    model = FbmModel(hurst if hurst is not None else 0.5, values.shape[-1])
    path = FbmPath(model, grid, values, 0, ids)
    lift = lift_ito if args.flavor == "ito" else lift_stratonovich
    rp = lift(path, args.level)
    if rp.grid.n < 2:
        raise DomainError("a lift file needs at least two steps")
    args.hurst = hurst
    with _open_out(args.out) as fh:
        write_lift_csv(fh, rp, ids)
    _sidecar(args, {"paths": len(ids), "steps": rp.grid.n, "flavor": rp.flavor})
    print(f"lift: wrote {rp.flavor} lift of {len(ids)} paths on {rp.grid.n} steps to {args.out}")


def cmd_integrate(args):
    rp, ids = _read_lift(args)
    form = _load_form(args.one_form, rp.dim)
    res = integrate_one_form(form, rp, stride=args.stride, cross_terms=args.cross_terms)
    with _open_out(args.out) as fh:
        write_lift_csv(fh, res, ids)
    tot1 = total(res)[0]
    summary = {"paths": len(ids), "level1_total": tot1.tolist()}
    _sidecar(args, summary)
    print(f"integrate: wrote {res.flavor} integral of {form.name} for {len(ids)} paths to {args.out}")


def cmd_rde_solve(args):
    rp, ids = _read_lift(args)
    if rp.dim != 1:
        raise DomainError("the geometric field needs a one-dimensional driver")
    sol = solve_rde(geometric_field(_Geo(args)), lift_spacetime(rp), [args.x0],
                    tol=args.tol, max_iter=args.max_iter)
    with _open_out(args.out) as fh:
        write_solution_csv(fh, rp.grid.times, sol.values, ids)
    _sidecar(args, {"paths": len(ids), "iterations": sol.iterations, "gap": sol.gap})
    print(f"rde solve: {sol.iterations} Picard sweeps, gap {sol.gap:.3g}, wrote {args.out}")


class _Geo:
    def __init__(self, args):
        self.mu, self.sigma, self.X0 = args.mu, args.sigma, args.x0
        self.hurst = args.hurst


CHAIN_G = {
    "one": ScalarFunction(lambda x, t: np.ones_like(x), lambda x, t: np.zeros_like(x), "one"),
    "identity": ScalarFunction(lambda x, t: x, lambda x, t: np.ones_like(x), "identity"),
    "square": ScalarFunction(lambda x, t: x * x, lambda x, t: 2.0 * x, "square"),
}


def cmd_rde_chain(args):
    if args.sigma < 0:
        raise DomainError("sigma must be non-negative")
    args.seed = _seed(args)
    model = FbmModel(args.hurst)
    grid = Grid(0.0, args.t1, 2**args.max_level)
    path = sample_batch(model, grid, args.seed, args.paths, workers=args.workers)
    levels = range(args.min_level, args.max_level + 1)
    rep = chain_rule_check(CHAIN_G[args.g], _Geo(args), path, levels, source=args.source)
    _emit_json(args, rep.as_dict())


def _market(args, T=None, H=None):
    return MarketParams(mu=args.mu if args.mu is not None else args.rate, sigma=args.sigma,
                        r=args.rate, X0=args.spot, K=args.strike,
                        T=args.maturity if T is None else T, hurst=args.hurst if H is None else H)


def cmd_price_call(args):
    p = _market(args)
    out = {"price": price_call(p)}
    if args.mc:
        args.seed = _seed(args)
        price, se = price_monte_carlo(p, call(p.K), args.mc, args.seed, workers=args.workers)
        out.update({"mc_price": price, "se": se})
    _emit_json(args, out)


def cmd_price_curve(args):
    hs = [float(h) for h in args.hurst_list.split(",") if h.strip()]
    if args.t_steps < 1:
        raise DomainError("--t-steps must be >= 1")
    ts = np.linspace(args.t_min, args.t_max, args.t_steps)
    p = _market(args, T=1.0, H=hs[0] if hs else 0.5)
    table = figure1_curve(p, ts, hs)
    with _open_out(args.out) as fh:
        write_curve_csv(fh, table)
    feats = figure1_features(table) if np.any(np.isclose(ts, 1.0)) else {}
    _sidecar(args, {"rows": len(table), **feats})
    print(f"price curve: wrote {len(table)} rows to {args.out}")


def cmd_verify_zero_mean(args):
    args.seed = _seed(args)
    form = _load_form(args.one_form, args.dim)
    model = FbmModel(args.hurst, args.dim)
    grid = Grid(0.0, args.t1, args.steps)
    res = zero_mean_verify(form, model, grid, args.paths, args.seed, flavor=FLAVOR_NAMES[args.flavor],
                           workers=args.workers)
    _emit_json(args, res.as_dict())


def cmd_arbitrage(args):
    args.seed = _seed(args)
    p = _market(args)
    grid = Grid(0.0, p.T, 2**args.level)
    path = sample_batch(FbmModel(p.hurst), grid, args.seed, args.paths, workers=args.workers)
    levels = range(max(args.level - args.refinements, 1), args.level + 1)
    rep = arbitrage_demo(p, path, levels, n_terminal=args.terminal, seed=args.seed)
    _emit_json(args, rep)


# ---------------------------------------------------------------------------
# parser


def _market_flags(p, defaults=True):
    p.add_argument("--sigma", type=float, default=2.0 if defaults else None, required=not defaults)
    p.add_argument("--strike", type=float, default=3.0)
    p.add_argument("--spot", type=float, default=3.5)
    p.add_argument("--rate", type=float, default=0.05)
    p.add_argument("--mu", type=float, default=None, help="drift; defaults to the rate")
    p.add_argument("--maturity", type=float, default=1.0)
    p.add_argument("--hurst", type=float, default=0.5)


def build_parser():
    top = _Parser(prog="roughfbm", description="Rough-path integration against fractional Brownian motion.")
    top.add_argument("--version", action="version", version=_version_text())
    top.add_argument("--config", help="JSON file of flag defaults for the chosen command")
    top.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo sampling")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)
    table = {}

    p = sub.add_parser("sample", help="sample fBM paths to CSV")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1024)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--method", choices=["auto", "circulant", "cholesky"], default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)
    table[("sample",)] = p

    p = sub.add_parser("lift", help="lift sampled paths to level-2 rough paths")
    p.add_argument("--flavor", choices=["ito", "strat"], required=True)
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--hurst", type=float, default=None)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lift)
    table[("lift",)] = p

    p = sub.add_parser("integrate", help="rough integral of a one-form along a lift")
    p.add_argument("--one-form", required=True)
    p.add_argument("--flavor", choices=["ito", "strat"], required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--cross-terms", action="store_true")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_integrate)
    table[("integrate",)] = p

    p = sub.add_parser("rde", help="rough differential equations")
    rsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = rsub.add_parser("solve", help="solve dY = mu Y dt + sigma Y dB along a lift")
    q.add_argument("--field", choices=["geometric"], default="geometric")
    q.add_argument("--mu", type=float, default=0.0)
    q.add_argument("--sigma", type=float, required=True)
    q.add_argument("--x0", type=float, default=1.0)
    q.add_argument("--hurst", type=float, default=None)
    q.add_argument("--flavor", choices=["ito", "strat"], required=True)
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--max-iter", type=int, default=50)
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_rde_solve)
    table[("rde", "solve")] = q
    q = rsub.add_parser("verify", help="verification reports")
    vsub = q.add_subparsers(dest="target", required=True, parser_class=_Parser)
    c = vsub.add_parser("chain-rule", help="chain rule residuals for geometric fBM")
    c.add_argument("--g", choices=sorted(CHAIN_G), default="identity")
    c.add_argument("--hurst", type=float, default=0.45)
    c.add_argument("--sigma", type=float, default=0.5)
    c.add_argument("--mu", type=float, default=0.1)
    c.add_argument("--x0", type=float, default=1.0)
    c.add_argument("--t1", type=float, default=1.0)
    c.add_argument("--min-level", type=int, default=8)
    c.add_argument("--max-level", type=int, default=12)
    c.add_argument("--paths", type=int, default=8)
    c.add_argument("--source", choices=["closed_form", "rde"], default="closed_form")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_rde_chain)
    table[("rde", "verify", "chain-rule")] = c

    p = sub.add_parser("price", help="fractional Black-Scholes prices")
    psub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = psub.add_parser("call", help="European call price")
    _market_flags(q)
    q.add_argument("--mc", type=int, default=0, help="also price with this many Monte Carlo draws")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_price_call)
    table[("price", "call")] = q
    q = psub.add_parser("curve", help="call price over maturities and Hurst values (CSV)")
    _market_flags(q)
    q.add_argument("--t-min", type=float, default=0.05)
    q.add_argument("--t-max", type=float, default=3.0)
    q.add_argument("--t-steps", type=int, default=60)
    q.add_argument("--hurst-list", default="0.35,0.40,0.45,0.50")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_price_curve)
    table[("price", "curve")] = q

    p = sub.add_parser("verify", help="Monte Carlo verifications")
    vsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = vsub.add_parser("zero-mean", help="mean of the level-1 integral over many paths")
    q.add_argument("--one-form", required=True)
    q.add_argument("--hurst", type=float, required=True)
    q.add_argument("--dim", type=int, default=1)
    q.add_argument("--t1", type=float, default=1.0)
    q.add_argument("--steps", type=int, default=256)
    q.add_argument("--paths", type=int, default=100_000)
    q.add_argument("--flavor", choices=["ito", "strat"], default="ito")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_verify_zero_mean)
    table[("verify", "zero-mean")] = q

    p = sub.add_parser("arbitrage", help="the Stratonovich-market arbitrage")
    asub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = asub.add_parser("demo", help="arbitrage report (JSON)")
    _market_flags(q)
    q.set_defaults(sigma=0.5, spot=1.0, strike=1.0, mu=0.1, hurst=0.45)
    q.add_argument("--level", type=int, default=12)
    q.add_argument("--refinements", type=int, default=5)
    q.add_argument("--paths", type=int, default=16)
    q.add_argument("--terminal", type=int, default=10_000)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_arbitrage)
    table[("arbitrage", "demo")] = q
    return top, table


def _command_key(table, rest):
    for size in (3, 2, 1):
        if tuple(rest[:size]) in table:
            return tuple(rest[:size])
    return None


def _apply_config(table, path, key):
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except ValueError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise DomainError(f"{path}: expected a JSON object")
    if key is None:
        raise DomainError("--config needs a command")
    parser = table[key]
    known = {a.dest for a in parser._actions}
    unknown = sorted(set(k.replace("-", "_") for k in cfg) - known)
    if unknown:
        raise DomainError(f"{path}: unknown keys {unknown}")
    parser.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    for a in parser._actions:
        if a.dest in cfg or a.dest.replace("_", "-") in cfg:
            a.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    top, table = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--workers")
    known, rest = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(table, known.config, _command_key(table, rest))
        args = top.parse_args(argv)
        if args.workers < 1:
            raise DomainError("--workers must be >= 1")
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DomainError, ValueError, OSError) as exc:
        print(f"roughfbm: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError) as exc:
        print(f"roughfbm: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
