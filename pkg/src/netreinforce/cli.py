"""Command-line front end.

Every subcommand reads a network from a GraphML/JSON file or a generator
spec (``path:N``, ``hypercube:Q:D[:wrap]``, ``example:NAME``) and prints
CSV (default) or JSON. Exit codes: 0 ok, 1 usage, 2 data error,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .errors import NetReinforceError
from .graph import Network, load_network
from .partition import (
    PARTITIONERS,
    Partition,
    cut_stats,
    partition_hypercube,
    singleton_partition,
    whole_partition,
)
from .programs import Flood, PathRouting, RandomAutomaton, RoutingProgram, parse_routes
from .reinforce import FaultKind, ReinforcedNetwork, overheads, replicate
from .reliability import (
    DEFAULT_TARGET,
    SWEEP_COLUMNS,
    SweepRow,
    analyze,
    failure,
    naive_rows,
    pareto_sweep,
)
from .simulate import (
    FaultScenario,
    exhaustive_success,
    monte_carlo,
    run,
    run_reference,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VALIDATION = 0, 1, 2, 3
SWEEP_FORMAT_VERSION = 1
SWEEP_HEADER = f"# netreinforce sweep v{SWEEP_FORMAT_VERSION}: " + ",".join(SWEEP_COLUMNS)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument helpers -------------------------------------------------------


def int_list(text: str) -> list[int]:
    """Parse ``"1,2,5-8"`` into ``[1, 2, 5, 6, 7, 8]``; the empty string gives ``[]``."""
    out: list[int] = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        lo, sep, hi = tok.partition("-")
        try:
            if sep:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(tok))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    return out


def probability(text: str) -> float:
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text}")
    return p


def target_prob(text: str) -> float:
    p = probability(text)
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"target must lie strictly between 0 and 1: {text}")
    return p


def fault_kind(text: str) -> FaultKind:
    try:
        return FaultKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


# -- output -----------------------------------------------------------------


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


def emit(args, rows: Sequence[dict], columns: Sequence[str] | None = None, header: str | None = None) -> None:
    """Write ``rows`` as CSV (with optional comment header) or as a JSON list."""
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump(list(rows), fh, indent=2)
            fh.write("\n")
            return
        columns = list(columns or (rows[0].keys() if rows else []))
        buf = io.StringIO()
        if header:
            buf.write(header + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
        fh.write(buf.getvalue())


def _write_json(path: str, data) -> None:
    Path(path).write_text(json.dumps(data, separators=(",", ":")) + "\n")


# -- shared build plumbing --------------------------------------------------


def _add_partition_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--partition", metavar="FILE", help="partition JSON ({regions: [[ids...], ...]})")
    group.add_argument("--max-region", type=int, metavar="N", help="partition with regions of at most N nodes")
    group.add_argument("--strong", action="store_true", help="singleton partition (full replication)")
    group.add_argument("--naive", action="store_true", help="one region (independent copies of the network)")
    p.add_argument("--method", default="spectral", choices=sorted(PARTITIONERS), help="partitioner for --max-region")


def _partition(args, g: Network) -> Partition:
    if args.partition:
        part = Partition.from_json(json.loads(Path(args.partition).read_text()))
        if part.n != g.n:
            raise ValueError(f"partition covers {part.n} nodes but the network has {g.n}")
        return part
    if args.max_region is not None:
        return PARTITIONERS[args.method](g, args.max_region)
    if args.naive:
        return whole_partition(g)
    return singleton_partition(g)


def _build(args, g: Network) -> ReinforcedNetwork:
    return replicate(g, _partition(args, g), args.f, args.model)


def _program(spec: str, g: Network, seed: int) -> RoutingProgram:
    head, _, rest = spec.partition(":")
    if head == "flood":
        sources = [g.node_index(tok) for tok in rest.split(",")] if rest else [0]
        return Flood(g, sources)
    if head == "paths" and rest:
        return PathRouting(g, parse_routes(Path(rest).read_text(), g))
    if head == "random":
        return RandomAutomaton(g, seed=int(rest) if rest else seed)
    raise UsageError(f"unknown program {spec!r}; expected flood[:SRC,...], paths:FILE or random[:SEED]")


# -- subcommands ------------------------------------------------------------


def cmd_info(args) -> int:
    g = load_network(args.graph)
    degrees = [len(nb) for nb in g.neighbors]
    row = {
        "n": g.n,
        "m": len(g.undirected_edges),
        "arcs": g.m,
        "connected": g.is_connected(),
        "components": len(g.components(range(g.n))),
        "deg_min": min(degrees, default=0),
        "deg_max": max(degrees, default=0),
        "deg_mean": statistics.fmean(degrees) if degrees else 0.0,
    }
    emit(args, [row])
    return EXIT_OK


def cmd_partition(args) -> int:
    g = load_network(args.graph)
    if args.side is not None:
        head, _, rest = args.graph.partition(":")
        dims = rest.split(":")
        if head != "hypercube" or len(dims) < 2:
            raise UsageError("--side needs a hypercube:Q:D generator spec")
        part = partition_hypercube(int(dims[0]), int(dims[1]), args.side)
    else:
        if args.max_region is None:
            raise UsageError("partition needs --max-region or --side")
        part = PARTITIONERS[args.method](g, args.max_region)
    if args.save:
        _write_json(args.save, part.to_json())
    row = cut_stats(g, part).row()
    if args.format == "json":
        row = {**row, "regions": [list(r) for r in part.regions]}
    emit(args, [row])
    return EXIT_OK


def cmd_reinforce(args) -> int:
    g = load_network(args.graph)
    rn = _build(args, g)
    ov = overheads(rn)
    if args.save:
        _write_json(args.save, rn.to_json())
    row = {
        "model": rn.model.value,
        "f": rn.f,
        "ell": rn.ell,
        "k": rn.partition.k,
        "nodes": rn.n_copies,
        "arcs": len(rn.arcs),
        "nu": str(ov.nu),
        "eta": str(ov.eta),
    }
    if args.format == "json":
        row = {**row, "nu": float(ov.nu), "eta": float(ov.eta), "build": rn.to_json()}
    emit(args, [row])
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.sizes:
        sizes = args.sizes
    elif args.graph:
        g = load_network(args.graph)
        sizes = _partition(args, g).sizes
    else:
        raise UsageError("analyze needs a graph or --sizes")
    rep = analyze(sizes, args.f, args.model, args.p, args.target)
    emit(
        args,
        [
            {
                "model": args.model.value,
                "f": args.f,
                "k": len(sizes),
                "r_max": max(sizes),
                "p": args.p,
                "failure": rep.failure_prob,
                "reliability": 1.0 - rep.failure_prob,
                "target": rep.target,
                "max_p": rep.max_p,
                "saturated": rep.saturated,
            }
        ],
    )
    return EXIT_OK


def sweep_rows(g: Network, args) -> list[SweepRow]:
    if not args.f:
        return []
    rows = pareto_sweep(g, args.f, args.model, args.target, args.max_region, args.method)
    if args.baseline_copies:
        rows.extend(naive_rows(g, args.baseline_copies, args.target))
    return rows


def cmd_sweep(args) -> int:
    g = load_network(args.graph)
    rows = [r.as_dict() for r in sweep_rows(g, args)]
    emit(args, rows, SWEEP_COLUMNS, header=SWEEP_HEADER)
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = load_network(args.graph)
    rn = _build(args, g)
    program = _program(args.program, g, args.seed)
    rounds = args.rounds if args.rounds is not None else program.horizon
    sizes = rn.partition.sizes
    if args.scenario:
        data = json.loads(Path(args.scenario).read_text())
        scenario = FaultScenario.from_json(data)
        if args.adversary:
            scenario = FaultScenario(scenario.faulty, args.adversary, scenario.seed)
        bad = [x for x in scenario.faulty if not 0 <= x < rn.n_copies]
        if bad:
            raise ValueError(f"scenario names copy ids outside 0..{rn.n_copies - 1}: {bad}")
        out = run(rn, program, scenario, rounds, reference=run_reference(g, program, rounds), record=True)
        if args.trace:
            with open(args.trace, "w") as fh:
                for rec in out.trace_records(rn):
                    fh.write(json.dumps(rec) + "\n")
        emit(
            args,
            [
                {
                    "faulty": len(scenario.faulty),
                    "adversary": scenario.adversary,
                    "rounds": rounds,
                    "success": out.success,
                    "failed_round": "" if out.failed_round is None else out.failed_round,
                }
            ],
        )
        return EXIT_OK
    if args.p is None:
        raise UsageError("simulate needs --p or --scenario")
    if args.trace:
        raise UsageError("--trace applies to a single --scenario run")
    row = {"p": args.p, "rounds": rounds}
    if args.exhaustive:
        row["exact_success"] = exhaustive_success(rn, program, args.p, rounds, args.adversary)
    est = monte_carlo(rn, program, args.p, rounds, args.trials, args.seed, args.adversary)
    row.update(
        trials=est.trials,
        successes=est.successes,
        success_rate=est.success_rate,
        ci_low=est.low,
        ci_high=est.high,
        analytic_lower_bound=1.0 - failure(sizes, rn.f, rn.model, args.p),
    )
    emit(args, [row])
    return EXIT_OK


def _read_rows(path: str) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        missing = [c for c in SWEEP_COLUMNS if c not in rec]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows.append(
            {
                "scheme": rec["scheme"],
                "f": int(rec["f"]),
                "max_region": int(rec["max_region"]),
                "nu": float(rec["nu"]),
                "eta": float(rec["eta"]),
                "max_p": float(rec["max_p"]),
            }
        )
    return rows


def validate_rows(g: Network, rows: Iterable[dict], args) -> list[dict]:
    """Rebuild each design, check its overheads, then check reliability by simulation."""
    program = Flood(g, [0]) if g.n else None
    report = []
    for i, row in enumerate(rows):
        model = args.model
        if row["scheme"] == "naive":
            part, model = whole_partition(g), FaultKind.OMISSION
        elif row["f"] == 0:
            part = whole_partition(g)
        else:
            part = PARTITIONERS[args.method](g, row["max_region"])
        rn = replicate(g, part, row["f"], model)
        ov = overheads(rn)
        p = row["max_p"]
        out = {
            "row": i,
            "scheme": row["scheme"],
            "f": row["f"],
            "max_region": row["max_region"],
            "p": p,
            "analytic": 1.0 - failure(part.sizes, rn.f, rn.model, p),
            "empirical": "",
            "ci_half_width": "",
            "status": "pass",
            "reason": "",
        }
        if not (math.isclose(float(ov.nu), row["nu"], rel_tol=1e-9) and math.isclose(float(ov.eta), row["eta"], rel_tol=1e-9)):
            out["status"] = "fail"
            out["reason"] = f"overheads rebuild to nu={float(ov.nu)!r} eta={float(ov.eta)!r}"
            report.append(out)
            continue
        est = monte_carlo(rn, program, p, trials=args.trials, seed=args.seed + i)
        out["empirical"] = est.success_rate
        out["ci_half_width"] = est.half_width
        if est.success_rate < out["analytic"] - 3 * est.half_width:
            out["status"] = "fail"
            out["reason"] = "empirical success below analytic bound"
        report.append(out)
    return report


def cmd_validate(args) -> int:
    g = load_network(args.graph)
    if args.rows:
        rows = _read_rows(args.rows)
    else:
        rows = [r.as_dict() for r in sweep_rows(g, args)]
    report = validate_rows(g, rows, args)
    emit(args, report)
    failed = [r for r in report if r["status"] != "pass"]
    for r in failed:
        print(f"row {r['row']}: {r['reason']}", file=sys.stderr)
    return EXIT_VALIDATION if failed else EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed for all randomness (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="FILE", help="write results here instead of stdout")

    parser = _Parser(prog="netreinforce", description="Replicate networks to tolerate random node faults.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text, graph_nargs=None):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.add_argument("graph", nargs=graph_nargs, help="GraphML/JSON file or generator spec")
        p.set_defaults(func=fn)
        return p

    add("info", cmd_info, "summarise a network")

    p = add("partition", cmd_partition, "split a network into regions and report cut statistics")
    p.add_argument("--max-region", type=int, metavar="N")
    p.add_argument("--method", default="spectral", choices=sorted(PARTITIONERS))
    p.add_argument("--side", type=int, metavar="H", help="axis-aligned subcubes of side H (hypercube specs only)")
    p.add_argument("--save", metavar="FILE", help="write the partition JSON here")

    def add_design(p):
        p.add_argument("--f", type=int, default=1, help="fault parameter (default 1)")
        p.add_argument("--model", type=fault_kind, default=FaultKind.OMISSION, help="omission or byzantine")
        _add_partition_args(p)

    p = add("reinforce", cmd_reinforce, "build a replicated network and report its overheads")
    add_design(p)
    p.add_argument("--save", metavar="FILE", help="write the build JSON here")

    p = add("analyze", cmd_analyze, "failure probability and tolerable p of a design", graph_nargs="?")
    add_design(p)
    p.add_argument("--sizes", type=int_list, help="region sizes instead of a graph, e.g. 3,2")
    p.add_argument("--p", type=probability, default=0.0, help="per-node fault probability")
    p.add_argument("--target", type=target_prob, default=DEFAULT_TARGET)

    def add_sweep_args(p):
        p.add_argument("--f", type=int_list, default=[0, 1], help="fault parameters, e.g. 0,1 or 1-3")
        p.add_argument("--model", type=fault_kind, default=FaultKind.OMISSION)
        p.add_argument("--target", type=target_prob, default=DEFAULT_TARGET)
        p.add_argument("--max-region", type=int_list, help="region-size grid (default 1..n)")
        p.add_argument("--method", default="spectral", choices=sorted(PARTITIONERS))
        p.add_argument(
            "--baseline-copies", type=int_list, default=[1, 2, 3], help="naive replication baselines (default 1,2,3)"
        )

    p = add("sweep", cmd_sweep, "overheads and tolerable p over an (f, max_region) grid")
    add_sweep_args(p)

    p = add("simulate", cmd_simulate, "run the replicated network under sampled or given faults")
    add_design(p)
    p.add_argument("--p", type=probability)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--rounds", type=int, help="horizon (default: the program's own)")
    p.add_argument("--adversary", help="fault behaviour, e.g. omit-all, omit-random, corrupt-all")
    p.add_argument("--program", default="flood", help="flood[:SRC,...], paths:FILE or random[:SEED]")
    p.add_argument("--scenario", metavar="FILE", help="run one fault scenario JSON instead of sampling")
    p.add_argument("--trace", metavar="FILE", help="JSON-lines trace of a --scenario run")
    p.add_argument("--exhaustive", action="store_true", help="also enumerate every fault set (small builds)")

    p = add("validate", cmd_validate, "cross-check sweep rows against simulation")
    add_sweep_args(p)
    p.add_argument("--rows", metavar="CSV", help="validate rows from an earlier sweep instead of recomputing")
    p.add_argument("--trials", type=int, default=2000)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (NetReinforceError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
