"""Command-line front end.

Subcommands: certify-lemmas, certify-k, solve, oracle-compare, verify-bounds, report.

Settings are resolved in this order, later entries winning:
built-in defaults < config file (``--config``, key = value sections) <
PHI4FLOW_OUTPUT_DIR (output directory only) < command-line flags.
The resolved settings are embedded in every JSON output.

Exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .reports import CertReport, SCHEMA_VERSION, reports_to_csv, write_csv, write_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
OUTPUT_ENV = "PHI4FLOW_OUTPUT_DIR"
CLAIMED_K = 6.2e5


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    output_dir: str = "phi4flow-out"
    seed: int = 0
    threads: int = 1
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "output_dir": self.output_dir, "seed": self.seed,
                "threads": self.threads, "params": dict(sorted(self.params.items())), "version": __version__}


def _read_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file {path} not found")
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        text = p.read_text(encoding="utf-8")
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc
    flat = {}
    for section in parser.sections():
        for k, v in parser.items(section):
            flat[k] = v
    return flat


def _coerce(value, kind, name):
    if value is None:
        return None
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if kind is list:
            if isinstance(value, (list, tuple)):
                return list(value)
            return [s.strip() for s in str(value).split(",") if s.strip()]
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {name}: {value!r}") from exc


# parameter name -> (type, default)
PARAMS = {
    "lemma": (list, []),
    "perturb": (list, []),
    "records": (list, []),
    "n_cap": (int, 50),
    "l_cap": (int, 50),
    "claimed_k": (float, CLAIMED_K),
    "l_max": (int, 1),
    "lam0": (float, 100.0),
    "p_max": (float, 10.0),
    "family": (str, "all"),
    "rtol": (float, 1e-9),
    "K": (float, CLAIMED_K),
    "tables": (str, ""),
    "tree_samples": (int, 100),
}


def resolve(args: argparse.Namespace) -> RunConfig:
    file_vals = _read_config_file(getattr(args, "config", None))
    out = file_vals.get("output_dir", "phi4flow-out")
    out = os.environ.get(OUTPUT_ENV, out)
    if getattr(args, "output_dir", None):
        out = args.output_dir
    seed = _coerce(args.seed if args.seed is not None else file_vals.get("seed", 0), int, "seed")
    default_threads = os.cpu_count() or 1
    threads = _coerce(args.threads if args.threads is not None else file_vals.get("threads", default_threads),
                      int, "threads")
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    params = {}
    for name, (kind, default) in PARAMS.items():
        val = default
        if name in file_vals:
            val = _coerce(file_vals[name], kind, name)
        flag = getattr(args, name, None)
        if flag is not None and flag != []:
            val = _coerce(flag, kind, name)
        params[name] = val
    return RunConfig(args.command, str(out), seed, threads, params)


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.output_dir) / name


def _registry(cfg: RunConfig):
    from .constants import DEFAULT
    reg = DEFAULT
    for item in cfg.params["perturb"]:
        try:
            reg = reg.perturbed(item)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    return reg


# ---------------------------------------------------------------- commands

def cmd_certify_lemmas(cfg: RunConfig) -> int:
    from .lemmas import LEMMAS, run_lemmas
    sel = cfg.params["lemma"] or sorted(LEMMAS)
    bad = [s for s in sel if s not in LEMMAS]
    if bad:
        raise UsageError(f"unknown lemma(s) {bad}; choose from 1..8")
    t0 = time.perf_counter()
    reports = run_lemmas(sel, seed=cfg.seed, registry=_registry(cfg), threads=cfg.threads)
    for r in reports:
        print(r.summary())
        for c in r.failures:
            print(f"    failed: {c.name}: computed={c.computed:.6g} claimed={c.claimed:.6g} {c.note}")
    ok = all(r.passed for r in reports)
    write_json(_out(cfg, "lemmas.json"), {"kind": "lemmas", "passed": ok, "reports": [r.to_dict() for r in reports]},
               cfg.to_dict())
    (_out(cfg, "lemmas.csv")).write_text(reports_to_csv(reports), encoding="utf-8")
    print(f"lemmas: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f} s)")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify_k(cfg: RunConfig) -> int:
    from .chain import RECORDS, ChainError, CapBoundaryError, get_record, ktilde, minimal_K
    reg = _registry(cfg)
    try:
        records = [get_record(r) for r in cfg.params["records"]] if cfg.params["records"] else list(RECORDS)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    t0 = time.perf_counter()
    try:
        res = minimal_K(records, reg, n_cap=cfg.params["n_cap"], l_cap=cfg.params["l_cap"])
    except CapBoundaryError as exc:
        print(f"boundary guard: {exc}", file=sys.stderr)
        raise NumericalError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except ChainError as exc:
        raise NumericalError(str(exc)) from exc
    elapsed = time.perf_counter() - t0
    claimed = cfg.params["claimed_k"]
    rep = CertReport("constant chain", f"{len(records)} records, n <= {cfg.params['n_cap']}, l <= {cfg.params['l_cap']}")
    rep.add("minimal K satisfying every record", claimed, res.K,
            note=f"binding {res.binding.id} at n={res.binding.n}, l={res.binding.l}, |w|={res.binding.w}")
    b = res.binding
    print(f"K* = {res.K:.6g}  binding = {b.id} (n={b.n}, l={b.l}, |w|={b.w})  iterations = {res.iterations}  "
          f"({elapsed:.2f} s)")
    print(f"Ktilde(|w|=0..3)  = {[round(ktilde(w, False, reg), 4) for w in range(4)]}")
    print(f"Ktilde'(|w|=0..3) = {[round(ktilde(w, True, reg), 4) for w in range(4)]}")
    ranked = sorted(res.table, key=lambda r: -r.implied_K)
    for r in ranked[:6]:
        print(f"  {r.id:8s} n={r.n:<3d} l={r.l:<3d} |w|={r.w}  implied K = {r.implied_K:.6g}"
              f"{'  (sup at cap, tail cannot bind)' if r.at_cap else ''}")
    print(rep.summary())
    payload = {
        "kind": "constant-chain", "K_star": res.K, "iterations": res.iterations,
        "binding": b.__dict__, "passed": rep.passed, "report": rep.to_dict(),
        "ktilde": [ktilde(w, False, reg) for w in range(4)],
        "ktilde_half": [ktilde(w, True, reg) for w in range(4)],
        "registry": reg.as_dict(),
        "table": [r.__dict__ for r in res.table],
    }
    write_json(_out(cfg, "k_chain.json"), payload, cfg.to_dict())
    write_csv(_out(cfg, "k_chain.csv"), ["record", "n", "l", "w", "implied_K", "ratio_at_K", "at_cap"],
              [[r.id, r.n, r.l, r.w, float(r.implied_K), float(r.ratio_at_K), r.at_cap] for r in res.table])
    return EXIT_OK if rep.passed else EXIT_FAIL


def _solver(cfg: RunConfig):
    from .flow_solver import FlowSolver, SolverConfig
    p = cfg.params
    try:
        sc = SolverConfig(lam0=p["lam0"], l_max=p["l_max"], p_max=p["p_max"], rtol=p["rtol"], threads=cfg.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return FlowSolver(sc)


def _solve_tables(cfg: RunConfig, solver) -> dict:
    from .model import FAMILIES
    fam = cfg.params["family"]
    if fam != "all" and fam not in FAMILIES:
        raise UsageError(f"unknown family {fam!r}; choose from {('all',) + FAMILIES}")
    try:
        solver.solve()
    except RuntimeError as exc:
        raise NumericalError(str(exc)) from exc
    tables = {}
    for l in range(solver.config.l_max + 1):
        for two_n, t in solver.tables(l).items():
            if fam == "all" or t.family == fam:
                tables[f"L{two_n},{l}"] = t
    return tables


RENORM_TOL = {"L2,1(0)": 1e-8, "dp2 L2,1(0)": 1e-6, "L4,1(0)": 1e-8, "L2,2(0)": 1e-8, "dp2 L2,2(0)": 1e-6}


def cmd_solve(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    solver = _solver(cfg)
    tables = _solve_tables(cfg, solver)
    rep = CertReport("renormalization conditions", f"Lam = 0, l <= {solver.config.l_max}")
    m = solver.config.m
    for key, val in solver.renormalization_residuals().items():
        tol = RENORM_TOL[key] * (m * m if key.startswith("L2") else 1.0)
        rep.add(f"|{key}|", tol, abs(val))
    for key, t in tables.items():
        write_csv(_out(cfg, f"table_{key.replace(',', '_')}.csv"), list(t.axes) + ["value"],
                  [[float(v) for v in (*(t.axes[a][i] for a, i in zip(t.axes, idx)), t.values[idx])]
                   for idx in np.ndindex(t.values.shape)])
    payload = {
        "kind": "solve", "passed": rep.passed, "report": rep.to_dict(),
        "counterterms": solver.counterterms.as_dict(),
        "rhs_evaluations": solver.rhs_evaluations,
        "tables": {k: {"n": t.n, "l": t.l, "family": t.family, "shape": list(t.values.shape),
                       "axes": [[a, list(map(float, v))] for a, v in t.axes.items()]} for k, t in tables.items()},
        "quadrature_tail": math.exp(-solver.config.radial_panels[-1] ** 2),
    }
    write_json(_out(cfg, "solve.json"), payload, cfg.to_dict())
    write_json(_out(cfg, "tables.json"), {"kind": "tables", "g": solver.config.g,
                                          "tables": {k: t.to_dict() for k, t in tables.items()}}, cfg.to_dict())
    print(rep.summary())
    print(f"{len(tables)} tables written to {cfg.output_dir} ({time.perf_counter() - t0:.1f} s)")
    return EXIT_OK if rep.passed else EXIT_FAIL


def oracle_comparison(solver, seed: int = 0, tree_samples: int = 100) -> CertReport:
    """Solver against the graph-by-graph oracle at fixed test points."""
    from .flow_solver import tree_cag
    from .model import FlowScales, MomentumConfig, make_family
    from .oracle import bubble_l1, tadpole_l1, tree_graph_enumeration

    c = solver.config
    g = c.g
    rep = CertReport("oracle comparison", f"Lam0 = {c.lam0:g}, m = {c.m:g}")
    # tadpole over Lam/m in [0, 10]; absolute floor where the value itself is ~exp(-m^2/Lam^2)
    floor = 1e-12 * (g / 24.0) * c.m**2
    worst = 0.0
    for lam in np.linspace(0.0, 10.0, 41) * c.m:
        ref = tadpole_l1(FlowScales(float(lam), c.lam0, c.m), g).value
        got = solver.evaluate(1, 1, make_family("antipodal-pair", 1.0), float(lam))
        worst = max(worst, abs(got - ref) / max(abs(ref), floor))
    rep.add("tadpole: max relative error over Lam/m in [0, 10]", 1e-6, worst)
    # trees
    rng = np.random.default_rng(seed)
    for nlegs, samples in ((4, 10), (6, tree_samples), (8, 10)):
        worst = 0.0
        for _ in range(samples):
            P = rng.normal(size=(nlegs, 4)) * rng.uniform(0.1, 4.0)
            P[-1] = -P[:-1].sum(axis=0)
            cfg = MomentumConfig(P)
            lam = float(rng.uniform(0.0, 5.0))
            sc = FlowScales(lam, c.lam0, c.m)
            ref = tree_graph_enumeration(cfg, sc, g)
            got = tree_cag(cfg, sc, g)
            worst = max(worst, abs(got - ref) / abs(ref))
        rep.add(f"tree 2n={nlegs}: max relative error over {samples} random configurations", 1e-10, worst)
    # one-loop four-point on (p, -p, q, -q)
    worst = 0.0
    for p, q, cos, lam in FOUR_POINT_TEST_POINTS:
        cfg = make_family("four-point", p * c.m, q * c.m, cos)
        ref = bubble_l1(cfg, FlowScales(lam * c.m, c.lam0, c.m), g).value
        got = solver.evaluate(1, 2, cfg, lam * c.m)
        worst = max(worst, abs(got - ref) / abs(ref))
    rep.add(f"one-loop four-point: max relative error at {len(FOUR_POINT_TEST_POINTS)} points", 1e-4, worst)
    return rep


# (|p|, |q|, cos, Lam) in units of m
FOUR_POINT_TEST_POINTS = (
    (1.0, 2.0, 0.3, 0.0), (0.5, 0.5, 0.0, 0.0), (3.0, 1.0, -0.7, 0.0), (5.0, 3.0, -0.5, 0.0),
    (8.0, 8.0, 0.0, 0.0), (2.0, 2.0, 1.0, 0.0), (4.0, 0.5, 0.9, 0.0), (1.5, 6.0, -1.0, 0.0),
    (1.0, 2.0, 0.3, 2.0), (0.5, 0.5, 0.0, 1.0), (3.0, 1.0, -0.7, 0.5), (5.0, 3.0, -0.5, 5.0),
    (2.0, 2.0, 1.0, 3.0), (1.0, 1.0, 0.5, 10.0), (6.0, 2.0, 0.2, 1.0), (0.8, 3.0, -0.3, 0.25),
    (2.5, 2.5, 0.0, 20.0), (7.0, 1.0, 0.6, 2.0), (1.0, 4.0, -0.9, 50.0), (3.0, 3.0, 0.5, 100.0),
)


def cmd_oracle_compare(cfg: RunConfig) -> int:
    cfg.params["l_max"] = max(1, cfg.params["l_max"])
    cfg.params["p_max"] = max(cfg.params["p_max"], 10.0)
    solver = _solver(cfg)
    try:
        solver.solve(1)
    except RuntimeError as exc:
        raise NumericalError(str(exc)) from exc
    rep = oracle_comparison(solver, cfg.seed, cfg.params["tree_samples"])
    for ch in rep.checks:
        print(f"  {'ok  ' if ch.passed else 'FAIL'} {ch.name}: {ch.computed:.3g} (tolerance {ch.claimed:g})")
    print(rep.summary())
    write_json(_out(cfg, "oracle.json"), {"kind": "oracle", "passed": rep.passed, "report": rep.to_dict()},
               cfg.to_dict())
    return EXIT_OK if rep.passed else EXIT_FAIL


def _load_tables(path: str) -> tuple[list, float]:
    from .flow_solver import AmplitudeTable
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        raw = doc["payload"]["tables"]
        g = float(doc["payload"].get("g", 1.0))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read tables from {path}: {exc}") from exc
    try:
        out = [AmplitudeTable.from_dict(t) for t in raw.values()]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed table in {path}: {exc}") from exc
    return out, g


def cmd_verify_bounds(cfg: RunConfig) -> int:
    from .bounds import check_amplitude
    if cfg.params["tables"]:
        tables, g = _load_tables(cfg.params["tables"])
    else:
        solver = _solver(cfg)
        tables = list(_solve_tables(cfg, solver).values())
        g = solver.config.g
    nodes = [nd for t in tables for nd in t.nodes()]
    if not nodes:
        raise UsageError("no amplitude tables to check")
    K = cfg.params["K"]
    if not K > 0:
        raise UsageError("K must be positive")
    rep = check_amplitude(nodes, K, g=g, unit_coupling_convention=True)
    print(rep.summary())
    print(f"worst margin bound/|value| = {rep.info['worst_margin']:.4g} over {len(nodes)} nodes")
    write_json(_out(cfg, "bounds.json"), {"kind": "bounds", "passed": rep.passed, "report": rep.to_dict()},
               cfg.to_dict())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    files = sorted(p for p in out.glob("*.json") if p.name != "summary.json") if out.is_dir() else []
    rows = []
    for p in files:
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except ValueError:
            continue
        payload = doc.get("payload", {})
        if "passed" in payload:
            rows.append([p.name, payload.get("kind", ""), bool(payload["passed"])])
    if not rows:
        raise UsageError(f"no reports found in {out}")
    ok = all(r[2] for r in rows)
    for name, kind, passed in rows:
        print(f"  {'PASS' if passed else 'FAIL'}  {kind:14s} {name}")
    write_json(out / "summary.json", {"kind": "summary", "passed": ok,
                                      "reports": [{"file": a, "kind": b, "passed": c} for a, b, c in rows]},
               cfg.to_dict())
    write_csv(out / "summary.csv", ["file", "kind", "passed"], rows)
    print(f"overall: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "certify-lemmas": cmd_certify_lemmas,
    "certify-k": cmd_certify_k,
    "solve": cmd_solve,
    "oracle-compare": cmd_oracle_compare,
    "verify-bounds": cmd_verify_bounds,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="phi4flow", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} (report schema {SCHEMA_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--output-dir", help=f"output directory (env {OUTPUT_ENV})")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        return p

    def solver_flags(p):
        p.add_argument("--l-max", dest="l_max", type=int)
        p.add_argument("--lam0", type=float)
        p.add_argument("--p-max", dest="p_max", type=float)
        p.add_argument("--rtol", type=float)
        p.add_argument("--family", help="zero | antipodal-pair | four-point | all")

    p = common(sub.add_parser("certify-lemmas", help="check the elementary inequalities"))
    p.add_argument("--lemma", action="append", default=[], help="lemma id 1..8 (repeatable)")
    p.add_argument("--perturb", action="append", default=[], help="NAME=+10%% or NAME=value (repeatable)")

    p = common(sub.add_parser("certify-k", help="minimal K from the inequality chain"))
    p.add_argument("--perturb", action="append", default=[], help="NAME=+10%% or NAME=value (repeatable)")
    p.add_argument("--caps", help="N or N,L caps of the parameter sweep")
    p.add_argument("--records", action="append", default=[], help="restrict to record ids (repeatable)")
    p.add_argument("--claimed-k", dest="claimed_k", type=float)

    p = common(sub.add_parser("solve", help="integrate the flow equations"))
    solver_flags(p)

    p = common(sub.add_parser("oracle-compare", help="solver against the Feynman-graph oracle"))
    solver_flags(p)
    p.add_argument("--tree-samples", dest="tree_samples", type=int)

    p = common(sub.add_parser("verify-bounds", help="check solved amplitudes against the bounds"))
    solver_flags(p)
    p.add_argument("--K", dest="K", type=float)
    p.add_argument("--tables", help="tables.json from a previous solve")

    common(sub.add_parser("report", help="aggregate the JSON reports in the output directory"))
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        caps = getattr(args, "caps", None)
        if caps:
            parts = caps.split(",")
            try:
                args.n_cap = int(parts[0])
                args.l_cap = int(parts[1]) if len(parts) > 1 else int(parts[0])
            except ValueError as exc:
                raise UsageError(f"bad --caps {caps!r}") from exc
        cfg = resolve(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
