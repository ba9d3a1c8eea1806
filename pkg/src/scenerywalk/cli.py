"""Command-line front-end.

Subcommands: ``exponents`` (phase-diagram tables), ``simulate`` (Monte Carlo
estimators), ``chemdist`` (distance scaling fits) and ``verify`` (acceptance
suites).  Configuration can come from a JSON file (--config) with flags
winning over file values; the master seed falls back to the
``SCENERYWALK_SEED`` environment variable.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 refused by
design (stretched-exponential Monte Carlo request).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, chemdist, exponents, montecarlo, reporting, verify
from .montecarlo import StretchedRegimeError

_CONFIG_KEYS = {
    "alpha",
    "dim",
    "rho",
    "delta",
    "gamma",
    "t_grid",
    "replicas",
    "seed",
    "out",
    "format",
    "jobs",
    "which",
    "task",
    "quantile",
    "suite",
    "seeds",
    "field",
}


def _parse_grid(text, geometric: bool) -> list[float]:
    """Parse "a,b,c" lists or "lo:hi:n" ranges (geometric for t grids).

    Config files may supply plain numbers or lists instead of strings.
    """
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = text.strip()
    if not text:
        raise ValueError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range syntax is lo:hi:n, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1 or lo <= 0 and geometric:
            raise ValueError(f"bad range {text!r}")
        if n == 1:
            return [lo]
        if geometric:
            return list(np.geomspace(lo, hi, n))
        return list(np.linspace(lo, hi, n))
    return [float(v) for v in text.split(",")]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenerywalk",
        description="Heavy-tailed random scenery walks: exponents, simulation, verification.",
    )
    parser.add_argument("--version", action="version", version=f"scenerywalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--alpha", help="tail index, value or grid (list/lo:hi:n)")
        p.add_argument("--dim", type=int, help="lattice dimension d")
        p.add_argument("--rho", help="deviation exponent rho (value or grid)")
        p.add_argument("--delta", help="vertical displacement exponent delta")
        p.add_argument("--gamma", help="transverse displacement exponent gamma")
        p.add_argument("--t-grid", dest="t_grid", help="time grid, list or lo:hi:n (geometric)")
        p.add_argument("--replicas", type=int, help="Monte Carlo replicas")
        p.add_argument("--seed", type=int, help="master seed (env SCENERYWALK_SEED fallback)")
        p.add_argument("--out", default=None, help="output path (default stdout, write-once)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--jobs", type=int, default=None, help="parallel evaluation slots")

    p_exp = sub.add_parser("exponents", help="tabulate exponent phase diagrams")
    common(p_exp)
    p_exp.add_argument("--which", choices=("p", "q", "displacement"), help="table kind")

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo estimator")
    p_sim.add_argument(
        "task", choices=("lln", "scaling", "tail-scan", "chen", "khasminskii")
    )
    common(p_sim)
    p_sim.add_argument("--quantile", type=float, default=0.5)
    p_sim.add_argument("--b-value", dest="b_value", type=float, default=5.0)
    p_sim.add_argument("--moment", type=int, default=2)

    p_chem = sub.add_parser("chemdist", help="chemical distance scaling fit")
    common(p_chem)
    p_chem.add_argument("--seeds", type=int, default=20, help="number of environments")

    p_ver = sub.add_parser("verify", help="run acceptance suites")
    common(p_ver)
    p_ver.add_argument("--suite", default="all", help="comma list of suite names or 'all'")
    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        parser.error(f"unknown config fields: {sorted(unknown)}")
    if "field" in cfg:
        # scenery description record {alpha, dim, seed, law}
        from .scenery import SceneryField

        try:
            fld = SceneryField.from_config(cfg.pop("field"))
        except (ValueError, KeyError, TypeError) as exc:
            parser.error(f"bad field record: {exc}")
        cfg.setdefault("alpha", fld.alpha)
        cfg.setdefault("dim", fld.dim)
        cfg.setdefault("seed", fld.seed)
    for key, value in cfg.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _master_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("SCENERYWALK_SEED")
    if env is not None:
        return int(env)
    return 0


def _emit(args, header, rows, payload) -> None:
    fmt = args.format or "csv"
    out = args.out or "-"
    if fmt == "csv":
        reporting.write_text(out, reporting.render_csv(header, rows))
    else:
        reporting.write_text(out, reporting.render_json(payload))


def _cmd_exponents(args, parser) -> int:
    if args.alpha is None or args.dim is None:
        parser.error("exponents needs --alpha and --dim")
    alphas = _parse_grid(args.alpha, geometric=False)
    which = args.which
    if which is None:
        which = "p" if args.rho is not None else "q"
    if which == "p":
        if args.rho is None:
            parser.error("--which p needs --rho")
        xs = _parse_grid(args.rho, geometric=False)
    else:
        if args.delta is None:
            parser.error(f"--which {which} needs --delta")
        xs = _parse_grid(args.delta, geometric=False)
    gamma = float(_parse_grid(args.gamma, geometric=False)[0]) if args.gamma else 0.0
    rows = exponents.phase_diagram(alphas, xs, which.upper(), args.dim, gamma=gamma)
    prov = reporting.provenance_string(
        {"cmd": "exponents", "which": which, "dim": args.dim, "alpha": alphas, "x": xs}
    )
    header = ("alpha", "x", "value", "regime")
    payload = {
        "command": "exponents",
        "which": which,
        "dim": args.dim,
        "provenance": prov,
        "rows": [dict(zip(header, r)) for r in rows],
    }
    _emit(args, header, rows, payload)
    return 0


def _cmd_simulate(args, parser) -> int:
    seed = _master_seed(args)
    if args.replicas is None or args.replicas < 1:
        parser.error("simulate needs --replicas >= 1")
    if args.alpha is None or args.dim is None:
        parser.error("simulate needs --alpha and --dim")
    alpha = float(_parse_grid(args.alpha, geometric=False)[0])
    dim = args.dim
    t_grid = _parse_grid(args.t_grid, geometric=True) if args.t_grid else None
    params = {
        "task": args.task,
        "alpha": alpha,
        "dim": dim,
        "seed": seed,
        "replicas": args.replicas,
        "t_grid": t_grid,
    }
    prov = reporting.provenance_string(params)

    if args.task == "lln":
        if not t_grid or len(t_grid) != 1:
            parser.error("lln needs --t-grid with exactly one value")
        r = montecarlo.lln_check(alpha, dim, t_grid[0], args.replicas, seed)
        header = ("t", "mean", "stderr", "target", "seed", "replicas", "provenance")
        rows = [(r.t, r.mean, r.stderr, r.target, seed, r.replicas, prov)]
        payload = {"command": "simulate", **params, "provenance": prov, "result": rows[0][:4]}
        _emit(args, header, rows, payload)
        return 0
    if args.task == "scaling":
        if not t_grid:
            parser.error("scaling needs --t-grid")
        r = montecarlo.scaling_exponent_estimate(
            alpha, dim, t_grid, args.replicas, args.quantile, seed, jobs=args.jobs
        )
        header = ("t", "quantile_A_t", "seed", "replicas", "provenance")
        rows = [(t, q, seed, args.replicas, prov) for t, q in r.quantiles]
        payload = {
            "command": "simulate",
            **params,
            "provenance": prov,
            "slope": r.slope,
            "stderr": r.stderr,
            "reference": r.reference,
            "one_sided": r.one_sided,
            "quantiles": r.quantiles,
        }
        _emit(args, header, rows, payload)
        return 0
    if args.task == "tail-scan":
        if not t_grid:
            parser.error("tail-scan needs --t-grid")
        model = "rcm" if args.delta is not None else "rwrs"
        kwargs = {}
        if model == "rwrs":
            if args.rho is None:
                parser.error("rwrs tail-scan needs --rho")
            kwargs["rho"] = float(_parse_grid(args.rho, geometric=False)[0])
        else:
            kwargs["delta"] = float(_parse_grid(args.delta, geometric=False)[0])
            kwargs["gamma"] = float(_parse_grid(args.gamma, geometric=False)[0]) if args.gamma else 0.0
        scan = montecarlo.tail_prob_scan(
            model, alpha, dim, t_grid, args.replicas, seed, jobs=args.jobs, **kwargs
        )
        header = (
            "t",
            "probability",
            "ci_low",
            "ci_high",
            "seed",
            "replicas",
            "provenance",
        )
        rows = [
            (t, e.probability, e.ci_low, e.ci_high, seed, e.replicas, prov)
            for t, e in zip(scan.t_grid, scan.estimates)
        ]
        payload = {
            "command": "simulate",
            **params,
            **kwargs,
            "model": model,
            "provenance": prov,
            "floor_ok": scan.floor_ok,
            "slope": None if scan.slope is None else scan.slope.slope,
            "rows": rows,
        }
        _emit(args, header, rows, payload)
        return 0
    if args.task == "chen":
        if not t_grid or len(t_grid) != 1:
            parser.error("chen needs --t-grid with exactly one value")
        rep = montecarlo.chen_verify(dim, t_grid[0], args.b_value, args.replicas, seed)
        header = ("lambda", "threshold", "probability", "bound", "seed", "replicas", "provenance")
        rows = [
            (r.lam, r.threshold, r.estimate.probability, r.bound, seed, args.replicas, prov)
            for r in rep.rows
        ]
        payload = {
            "command": "simulate",
            **params,
            "provenance": prov,
            "a_value": rep.a_value,
            "violations": rep.n_violations,
            "rows": rows,
        }
        _emit(args, header, rows, payload)
        return 0
    # khasminskii
    if not t_grid or len(t_grid) != 1:
        parser.error("khasminskii needs --t-grid with exactly one value")
    rep = montecarlo.khasminskii_verify(dim, t_grid[0], args.moment, args.replicas, seed)
    header = ("t", "m", "lhs", "rhs", "violated", "seed", "replicas", "provenance")
    rows = [(rep.t, rep.m, rep.lhs, rep.rhs, rep.violated, seed, args.replicas, prov)]
    payload = {"command": "simulate", **params, "provenance": prov, "row": rows[0][:5]}
    _emit(args, header, rows, payload)
    return 0


def _cmd_chemdist(args, parser) -> int:
    if args.alpha is None or args.dim is None or args.delta is None or not args.t_grid:
        parser.error("chemdist needs --alpha --dim --delta --t-grid")
    alpha = float(_parse_grid(args.alpha, geometric=False)[0])
    delta = float(_parse_grid(args.delta, geometric=False)[0])
    gamma = float(_parse_grid(args.gamma, geometric=False)[0]) if args.gamma else 0.0
    t_grid = _parse_grid(args.t_grid, geometric=True)
    seed = _master_seed(args)
    seeds = [seed + k for k in range(args.seeds)]
    fit = chemdist.chemdist_scaling(alpha, args.dim, delta, gamma, t_grid, seeds)
    prov = reporting.provenance_string(
        {"cmd": "chemdist", "alpha": alpha, "dim": args.dim, "delta": delta, "gamma": gamma}
    )
    header = ("t", "seed", "distance", "provenance")
    rows = [(t, s, d, prov) for t, s, d in fit.rows]
    rows.append(("slope", fit.slope, fit.stderr, prov))
    payload = {
        "command": "chemdist",
        "alpha": alpha,
        "dim": args.dim,
        "delta": delta,
        "gamma": gamma,
        "provenance": prov,
        "slope": fit.slope,
        "stderr": fit.stderr,
        "rows": [(t, s, d) for t, s, d in fit.rows],
    }
    _emit(args, header, rows, payload)
    return 0


def _cmd_verify(args, parser) -> int:
    names = list(verify.SUITES) if args.suite == "all" else args.suite.split(",")
    try:
        results = verify.run_suites(names)
    except KeyError as exc:
        parser.error(str(exc))
    for r in results:
        print(r.line())
    payload = {
        "command": "verify",
        "results": [
            {
                "name": r.name,
                "passed": r.passed,
                "runtime_s": round(r.runtime_s, 3),
                "details": r.details,
            }
            for r in results
        ],
    }
    if args.out not in (None, "-"):
        reporting.write_text(args.out, reporting.render_json(payload))
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    try:
        if args.command == "exponents":
            return _cmd_exponents(args, parser)
        if args.command == "simulate":
            return _cmd_simulate(args, parser)
        if args.command == "chemdist":
            return _cmd_chemdist(args, parser)
        return _cmd_verify(args, parser)
    except StretchedRegimeError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
