"""Command-line front end.

Every command echoes its fully resolved configuration next to the results.
Exit codes: 0 success, 1 internal error, 2 rejected parameters, 3 solver
stall / vanishing escape / degenerate fibering.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import experiments as ex
from .energy import FiberingDegenerate, ParameterError, ProblemParams, check_regime, REGIMES
from .grid import GridError, build_grid
from .solver import CONVERGED, DEGENERATE, SolverOptions, first_eigenpair, ground_state
from .space import export_csv
from .special import DomainError, constants_report, crit_exponents

COMMANDS = ("constants", "solve", "eigen", "noncompact", "asymptotics", "audit", "escape-demo")

# flags that may also come from a config file, with their defaults
DEFAULTS = {
    "N": 3, "alpha": 1.0, "alpha2": None, "beta": 0.0, "p": 4.0, "lambda": 0.0, "mu": None,
    "gamma": 0.0, "k": "1,4,16,64", "q": None, "eps": None, "subcritical": False,
    "rmax": 40.0, "cells": 4000, "grading": 2.0, "rule": 8,
    "tol": SolverOptions.tol, "max_iter": SolverOptions.max_iter,
    "regime": None, "seed": 0, "jobs": 1, "format": "json", "out": None, "out_dir": None,
}


class UsageError(ValueError):
    pass


def _floats(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="henon", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with default values for any flag")
        sp.add_argument("--N", type=int, default=None)
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--alpha2", type=float, default=None)
        sp.add_argument("--beta", type=float, default=None)
        sp.add_argument("--p", type=float, default=None)
        sp.add_argument("--lambda", dest="lambda", type=float, default=None)
        sp.add_argument("--mu", type=float, default=None)
        sp.add_argument("--gamma", type=float, default=None)
        sp.add_argument("--k", default=None, help="comma-separated k values")
        sp.add_argument("--q", type=float, default=None)
        sp.add_argument("--eps", default=None, help="comma-separated eps values")
        sp.add_argument("--subcritical", action="store_const", const=True, default=None,
                        help="drop the critical term")
        sp.add_argument("--rmax", type=float, default=None)
        sp.add_argument("--cells", type=int, default=None)
        sp.add_argument("--grading", type=float, default=None)
        sp.add_argument("--rule", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        sp.add_argument("--regime", choices=REGIMES, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None)
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--out", default=None, help="output file (stdout if omitted)")
        sp.add_argument("--out-dir", dest="out_dir", default=None,
                        help="directory; file names echo the parameter tuple")
    return ap


def resolve(ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = ns.command
    return cfg


def _params(cfg: dict) -> ProblemParams:
    P = ProblemParams(N=cfg["N"], alpha1=cfg["alpha"], beta=cfg["beta"], p=cfg["p"],
                      lam=cfg["lambda"], alpha2=cfg["alpha2"], mu=cfg["mu"],
                      critical=not cfg["subcritical"])
    if cfg["regime"]:
        check_regime(P, cfg["regime"])
    return P


def _eps(cfg):
    return ex.DEFAULT_EPS if cfg["eps"] is None else _floats(cfg["eps"])


def _tag(cfg: dict) -> str:
    keys = {
        "constants": ("N", "alpha", "alpha2"),
        "solve": ("N", "alpha", "beta", "p", "lambda", "alpha2", "mu"),
        "eigen": ("N", "beta"),
        "noncompact": ("N", "gamma"),
        "asymptotics": ("N", "alpha", "beta", "p", "alpha2"),
        "audit": ("N", "alpha", "alpha2", "seed"),
        "escape-demo": ("N", "alpha"),
    }[cfg["command"]]
    parts = [cfg["command"]] + [f"{k}{cfg[k]:g}" for k in keys if cfg[k] is not None]
    return "_".join(parts)


# ---------------------------------------------------------------- commands

def cmd_constants(cfg):
    crit_exponents(cfg["N"], cfg["alpha"])
    rep = constants_report(cfg["N"], cfg["alpha"], cfg["alpha2"])
    return {"result": rep.to_dict()}, None, 0


def cmd_solve(cfg):
    P = _params(cfg)
    grid = build_grid(cfg["rmax"], cfg["cells"], grading=cfg["grading"], cell_rule=cfg["rule"])
    opts = SolverOptions(tol=cfg["tol"], max_iter=cfg["max_iter"])
    try:
        res = ground_state(P, grid, opts)
    except FiberingDegenerate as exc:
        return {"result": {"status": DEGENERATE, "message": str(exc)}}, None, 3
    out = res.to_dict()
    out["params"] = P.to_dict()
    out["grid"] = grid.describe()
    code = 0 if res.status == CONVERGED else 3
    return {"result": out}, res.u, code


def cmd_eigen(cfg):
    grid = build_grid(cfg["rmax"], cfg["cells"], grading=cfg["grading"], cell_rule=cfg["rule"])
    res = first_eigenpair(cfg["N"], cfg["beta"], grid)
    return {"result": res.to_dict()}, res.phi1, 0


def cmd_noncompact(cfg):
    ks = [int(k) for k in _floats(cfg["k"])]
    rep = ex.noncompactness_report(cfg["N"], cfg["gamma"], ks, q=cfg["q"])
    return {"result": rep, "rows": rep["rows"]}, None, 0


def cmd_asymptotics(cfg):
    kw = dict(N=cfg["N"], alpha=cfg["alpha"], beta=cfg["beta"], p=cfg["p"],
              eps_list=_eps(cfg), alpha2=cfg["alpha2"], jobs=cfg["jobs"])
    rows = ex.bubble_asymptotics_rows(**kw)
    fits = ex.fits_from_rows(rows, cfg["N"], cfg["alpha"], cfg["beta"], cfg["p"], cfg["alpha2"])
    return {"result": [f.to_dict() for f in fits], "rows": rows}, None, 0


def cmd_audit(cfg):
    if cfg["alpha2"] is not None and cfg["mu"] is None:
        # the coupling does not enter the inequalities
        cfg["mu"] = 1.0
    P = _params(cfg)
    corpus = ex.standard_corpus(P.N, P.alpha1, seed=cfg["seed"])
    rep = ex.inequality_audit(corpus, P)
    summary = {"n_members": len(corpus), "n_violations": len(rep.violations),
               "min_slack": rep.min_slack, "violations": rep.violations,
               "conditions": rep.conditions}
    return {"result": summary, "rows": rep.rows}, None, 0


def cmd_escape_demo(cfg):
    rows = ex.threshold_escape_demo(cfg["N"], cfg["alpha"], _eps(cfg))
    return {"result": rows, "rows": rows}, None, 0


HANDLERS = {
    "constants": cmd_constants, "solve": cmd_solve, "eigen": cmd_eigen,
    "noncompact": cmd_noncompact, "asymptotics": cmd_asymptotics, "audit": cmd_audit,
    "escape-demo": cmd_escape_demo,
}


def run(cfg: dict) -> int:
    """Dispatch one resolved configuration; write outputs; return the exit code."""
    payload, profile, code = HANDLERS[cfg["command"]](cfg)
    doc = {"config": cfg, **{k: v for k, v in payload.items() if k != "rows"}}
    out = cfg["out"]
    if out is None and cfg["out_dir"]:
        Path(cfg["out_dir"]).mkdir(parents=True, exist_ok=True)
        out = str(Path(cfg["out_dir"]) / f"{_tag(cfg)}.{cfg['format']}")
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
    if cfg["format"] == "csv":
        rows = payload.get("rows")
        if rows is None:
            rows = [payload["result"]] if isinstance(payload["result"], dict) else payload["result"]
        if out is None:
            raise UsageError("--format csv needs --out or --out-dir")
        ex.write_csv(rows, out)
        # the config echo and summary travel in a JSON sidecar
        ex.write_json(doc, str(Path(out).with_suffix(".json")))
    elif out is None:
        sys.stdout.write(ex.dumps(doc))
    else:
        ex.write_json(doc, out)
    if profile is not None and out is not None:
        export_csv(profile, str(Path(out).with_name(Path(out).stem + "_profile.csv")))
    return code


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(ns)
        return run(cfg)
    except (ParameterError, DomainError, GridError, UsageError) as exc:
        print(f"henon: rejected: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).exception("internal error")
        print(f"henon: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
