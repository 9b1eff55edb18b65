"""Command-line interface: ``dynagree {run,sweep,check-model,butterfly,export-dot}``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from . import analysis, digraph, formats, scenario, stochmat
from .errors import BudgetError, ConfigurationError

MAX_SWEEP_CELLS = 10_000


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _load(args) -> scenario.Scenario:
    s = scenario.load(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.cap is not None:
        changes["cap"] = args.cap
    return scenario.validate(dataclasses.replace(s, **changes)) if changes else s


# -- run ---------------------------------------------------------------------

def cmd_run(args) -> int:
    s = _load(args)
    report, trace = analysis.bound_suite(s, retain_matrices=args.retain_matrices)
    out = Path(args.out_dir)
    _write(out / "summary.csv", trace.summary_csv())
    _write(out / "report.csv", _csv([report.row()]))
    if s.full_trace or args.full_trace:
        _write(out / "trace.csv", trace.values_csv())
    if args.retain_matrices and trace.matrices is not None:
        for k, w in enumerate(trace.matrices, start=1):
            _write(out / "matrices" / f"round_{k:06d}.csv", stochmat.to_csv(w))
    print(report.summary())
    return 1 if report.bound_satisfied is False else 0


# -- sweep ------------------------------------------------------------------

def _parse_grid(items: list[str]) -> dict[str, list]:
    grid = {}
    for item in items:
        key, sep, vals = item.partition("=")
        if not sep or not vals:
            raise ConfigurationError(f"--grid expects key=v1,v2,..., got {item!r}")
        grid[key.strip()] = [yaml.safe_load(v) for v in vals.split(",")]
    return grid


def _cell(job):
    base, assignment = job
    s = base
    for key, value in assignment:
        s = scenario.with_value(s, key, value)
    report, _ = analysis.bound_suite(s)
    row = {key: value for key, value in assignment}
    row.update(observed_round="" if report.observed_round is None else report.observed_round,
               theorem_bound="" if report.theorem_bound is None else report.theorem_bound,
               delta_at_decision="" if report.delta_at_decision is None else report.delta_at_decision,
               bound_satisfied="" if report.bound_satisfied is None else report.bound_satisfied)
    return row


def cmd_sweep(args) -> int:
    base = _load(args)
    grid = _parse_grid(args.grid)
    cells = 1
    for vals in grid.values():
        cells *= len(vals)
    if cells > args.max_cells:
        raise BudgetError(f"grid has {cells} cells, more than --max-cells={args.max_cells}")
    keys = list(grid)
    jobs = [(base, tuple(zip(keys, combo))) for combo in itertools.product(*grid.values())]
    # validate every cell before running any of them
    for _, assignment in jobs:
        s = base
        for key, value in assignment:
            s = scenario.with_value(s, key, value)
    workers = args.workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell, jobs))
    out = Path(args.out_dir)
    _write(out / "sweep.csv", _csv(rows))
    sys.stdout.write(_csv(rows))
    return 1 if any(r["bound_satisfied"] is False for r in rows) else 0


# -- check-model -----------------------------------------------------------

def cmd_check_model(args) -> int:
    n, graphs = formats.read_edge_list(args.graphs)
    verdict = analysis.decide_solvability(graphs)
    print(f"graphs: {len(graphs)}  n: {n}")
    if verdict.coordinated:
        print("solvable: every graph is rooted")
    else:
        print("unsolvable: the model contains a non-rooted graph")
        print(digraph.to_dot(verdict.witness, "witness"), end="")
        if args.out_dir:
            _write(Path(args.out_dir) / "witness.dot", digraph.to_dot(verdict.witness, "witness"))
    if args.k_nonsplit is not None:
        ok = digraph.is_k_nonsplit(graphs, args.k_nonsplit)
        print(f"{args.k_nonsplit}-nonsplit: {'yes' if ok else 'no'}")
    return 0


# -- butterfly ----------------------------------------------------------------

def cmd_butterfly(args) -> int:
    rows = []
    for m in range(args.m_min, args.m_max + 1):
        rep = analysis.butterfly_experiment(m, args.epsilon)
        rows.append(rep.row())
    text = _csv(rows)
    if args.out_dir:
        _write(Path(args.out_dir) / "butterfly.csv", text)
    sys.stdout.write(text)
    return 0


# -- export-dot --------------------------------------------------------------

def cmd_export_dot(args) -> int:
    if args.edges:
        _, graphs = formats.read_edge_list(args.edges)
    else:
        if not args.config:
            raise ConfigurationError("export-dot needs --config or --edges")
        s = _load(args)
        pattern = analysis.pattern_for(s)
        graphs = [pattern(k) for k in range(1, args.rounds + 1)]
    out = Path(args.out_dir)
    for k, g in enumerate(graphs, start=1):
        _write(out / f"round_{k:04d}.dot", digraph.to_dot(g, f"round{k}"))
    _write(out / "pattern.edges", formats.format_edge_list(graphs))
    print(f"wrote {len(graphs)} graphs to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynagree", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="scenario YAML file")
        p.add_argument("--seed", type=int, default=None, help=f"overrides the config seed (fallback: ${scenario.SEED_ENV})")
        p.add_argument("--cap", type=int, default=None, help="maximum number of rounds")
        p.add_argument("--out-dir", default="out")

    p = sub.add_parser("run", help="run one scenario and check its bound")
    common(p)
    p.add_argument("--retain-matrices", action="store_true")
    p.add_argument("--full-trace", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a parameter grid")
    common(p)
    p.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2",
                   help="dotted field and values, e.g. model.f=0,1,2")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--max-cells", type=int, default=MAX_SWEEP_CELLS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check-model", help="decide solvability for a set of graphs")
    p.add_argument("graphs", help="edge-list file")
    p.add_argument("--k-nonsplit", type=int, default=None, metavar="K")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("butterfly", help="butterfly lower-bound experiment")
    p.add_argument("--m-min", type=int, default=3)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_butterfly)

    p = sub.add_parser("export-dot", help="write DOT files for a pattern or edge list")
    common(p, config_required=False)
    p.add_argument("--edges", default=None, help="edge-list file instead of a scenario")
    p.add_argument("--rounds", type=int, default=5)
    p.set_defaults(func=cmd_export_dot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, BudgetError, formats.ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
