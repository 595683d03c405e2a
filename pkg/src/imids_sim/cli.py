"""Command-line front end: run, compare, and sweep scenarios.

`run` executes one scenario and writes the per-round metrics CSV plus a
summary JSON. `compare` runs the layered defense and the baseline on the
same seed and renders the alive and accuracy charts. `sweep` crosses one
axis against the sectored/unsectored modes and renders the energy chart.

Exit codes: 0 on success, 2 for configuration problems, 3 for runtime
failures such as an uncoverable deployment.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import tempfile

from . import topology as topo
from .charts import Series, line_chart
from .config import MODES, ConfigError, apply_overrides, load_raw, parse_config
from .engine import run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

CSV_HEADER = (
    "round,alive,energy_spent_total,suspects_new,quarantines_new,tp,fp,tn,fn"
)

RUNTIME_ERRORS = (
    topo.CoverageFailure,
    topo.UnreachableNode,
    topo.MonitorUnavailable,
    RuntimeError,
    OSError,
)


def _atomic_write(path: str, text: str) -> None:
    """Write via a sibling temp file and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.chmod(tmp_path, 0o644)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _metrics_csv(trace) -> str:
    lines = [CSV_HEADER]
    for report in trace.reports:
        lines.append(
            f"{report.round},{report.alive_count},{report.energy_spent_total!r},"
            f"{len(report.suspects_new)},{len(report.quarantines_new)},"
            f"{report.tp},{report.fp},{report.tn},{report.fn}"
        )
    return "\n".join(lines) + "\n"


def _lifetime_round(trace, alive_initial: int):
    for report in trace.reports:
        if report.alive_count < alive_initial:
            return report.round
    return None


def _summarize(trace) -> dict:
    alive_initial = sum(1 for node_id in trace.initial_energy if node_id != topo.SINK_ID)
    confusion = trace.final_confusion
    return {
        "mode": trace.mode,
        "seed": trace.seed,
        "rounds_executed": len(trace.reports),
        "alive_initial": alive_initial,
        "final_alive": trace.reports[-1].alive_count if trace.reports else alive_initial,
        "lifetime_round": _lifetime_round(trace, alive_initial),
        "extinction_round": trace.extinction_round,
        "accuracy": confusion.accuracy,
        "detection_rate": confusion.detection_rate,
        "tp": confusion.tp,
        "fp": confusion.fp,
        "tn": confusion.tn,
        "fn": confusion.fn,
        "attackers": trace.attacker_ids,
        "quarantined": {str(k): v for k, v in sorted(trace.ledgers.quarantined.items())},
        "total_energy_spent_j": trace.total_energy_spent(),
        "cluster_count": trace.cluster_count,
        "sector_count": trace.sector_count,
        "monitor_count": trace.monitor_count,
        "config": trace.config,
    }


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_run(args) -> int:
    raw = load_raw(args.config)
    config = parse_config(apply_overrides(raw, args.override))
    trace = run_simulation(config)
    out = args.out
    csv_path = os.path.join(out, "metrics.csv")
    summary_path = os.path.join(out, "summary.json")
    _atomic_write(csv_path, _metrics_csv(trace))
    _atomic_write(summary_path, _dump_json(_summarize(trace)))
    print(csv_path)
    print(summary_path)
    return EXIT_OK


def _compare_csv(traces) -> str:
    lines = ["mode," + CSV_HEADER]
    for mode, trace in traces.items():
        for report in trace.reports:
            lines.append(
                f"{mode},{report.round},{report.alive_count},"
                f"{report.energy_spent_total!r},{len(report.suspects_new)},"
                f"{len(report.quarantines_new)},{report.tp},{report.fp},"
                f"{report.tn},{report.fn}"
            )
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    raw = load_raw(args.config)
    traces = {}
    for mode in ("imids", "itids"):
        arm_raw = copy.deepcopy(raw)
        arm_raw["mode"] = mode
        traces[mode] = run_simulation(parse_config(arm_raw))

    imids, itids = traces["imids"], traces["itids"]
    spr = imids.config.get("seconds_per_round", 1.0)
    alive_series = [
        Series(
            label="IMIDS",
            xs=tuple(r.round * spr for r in imids.reports),
            ys=tuple(r.alive_count for r in imids.reports),
        ),
        Series(
            label="ITIDS",
            xs=tuple(r.round * spr for r in itids.reports),
            ys=tuple(r.alive_count for r in itids.reports),
        ),
    ]
    accuracy_series = [
        Series(
            label="IMIDS",
            xs=tuple(r.round for r in imids.reports),
            ys=tuple(imids.accuracy_series()),
        ),
        Series(
            label="ITIDS",
            xs=tuple(r.round for r in itids.reports),
            ys=tuple(itids.accuracy_series()),
        ),
    ]

    rounds = max(len(imids.reports), len(itids.reports))

    def alive_at(trace, r):
        return trace.reports[r].alive_count if r < len(trace.reports) else 0

    dominance = {
        "alive_imids_ge_itids_every_round": all(
            alive_at(imids, r) >= alive_at(itids, r) for r in range(rounds)
        ),
        "final_alive_imids": alive_at(imids, rounds - 1) if rounds else None,
        "final_alive_itids": alive_at(itids, rounds - 1) if rounds else None,
        "accuracy_imids": imids.final_confusion.accuracy,
        "accuracy_itids": itids.final_confusion.accuracy,
        "accuracy_margin": imids.final_confusion.accuracy - itids.final_confusion.accuracy,
    }

    out = args.out
    paths = {
        "csv": os.path.join(out, "compare.csv"),
        "alive": os.path.join(out, "alive_vs_time.svg"),
        "accuracy": os.path.join(out, "accuracy_vs_round.svg"),
        "summary": os.path.join(out, "summary.json"),
    }
    _atomic_write(paths["csv"], _compare_csv(traces))
    _atomic_write(
        paths["alive"],
        line_chart(alive_series, "Alive nodes over time", "time (s)", "alive nodes"),
    )
    _atomic_write(
        paths["accuracy"],
        line_chart(accuracy_series, "Detection accuracy over time", "round", "accuracy"),
    )
    summary = {
        "dominance": dominance,
        "imids": _summarize(imids),
        "itids": _summarize(itids),
    }
    _atomic_write(paths["summary"], _dump_json(summary))
    for path in paths.values():
        print(path)
    return EXIT_OK


SWEEP_AXES = ("node_count", "attackers", "mode")


def _sweep_cells(raw: dict, axis: str, values):
    """Yield (value, mode, raw config) for every cell of the sweep."""
    if axis == "mode":
        for value in values:
            if value not in MODES:
                raise ConfigError(f"unknown mode '{value}' in sweep values")
            cell = copy.deepcopy(raw)
            cell["mode"] = value
            yield value, value, cell
        return
    for value in values:
        try:
            count = int(value)
        except ValueError as exc:
            raise ConfigError(f"axis '{axis}' needs integer values, got '{value}'") from exc
        for mode in ("imids", "imids-no-sectors"):
            cell = copy.deepcopy(raw)
            cell["mode"] = mode
            if axis == "node_count":
                cell.setdefault("deployment", {})["node_count"] = count
            else:
                attack = cell.setdefault("attack", {})
                attack["attacker_count"] = count
                attack.pop("attacker_ids", None)
            yield count, mode, cell


def cmd_sweep(args) -> int:
    raw = load_raw(args.config)
    if args.axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value")

    rows = []
    energy = {}  # mode -> list of (value, joules)
    for value, mode, cell_raw in _sweep_cells(raw, args.axis, values):
        trace = run_simulation(parse_config(cell_raw))
        confusion = trace.final_confusion
        total = trace.total_energy_spent()
        rows.append(
            f"{args.axis},{value},{mode},{trace.seed},{len(trace.reports)},"
            f"{trace.reports[-1].alive_count if trace.reports else ''},"
            f"{total!r},{confusion.accuracy!r},{confusion.detection_rate!r}"
        )
        energy.setdefault(mode, []).append((value, total))

    out = args.out
    csv_path = os.path.join(out, "sweep.csv")
    header = "axis,value,mode,seed,rounds,final_alive,total_energy_j,accuracy,detection_rate"
    _atomic_write(csv_path, "\n".join([header] + rows) + "\n")
    print(csv_path)

    if args.axis != "mode":
        series = [
            Series(
                label=mode,
                xs=tuple(v for v, _ in points),
                ys=tuple(e for _, e in points),
            )
            for mode, points in sorted(energy.items())
        ]
        svg_path = os.path.join(out, f"energy_vs_{args.axis}.svg")
        _atomic_write(
            svg_path,
            line_chart(
                series,
                f"Total energy consumed vs {args.axis}",
                args.axis.replace("_", " "),
                "energy (J)",
            ),
        )
        print(svg_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imids-sim",
        description="Simulate a layered sensor-network defense against sleep deprivation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario, emit metrics CSV + summary JSON")
    run_p.add_argument("config", help="scenario JSON file")
    run_p.add_argument("--out", default="out", help="output directory (default: out)")
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted config override, e.g. rounds=10 or attack.start_round=0",
    )
    run_p.set_defaults(handler=cmd_run)

    cmp_p = sub.add_parser("compare", help="run imids vs itids on the same seed")
    cmp_p.add_argument("config", help="scenario JSON file")
    cmp_p.add_argument("--out", default="out", help="output directory (default: out)")
    cmp_p.set_defaults(handler=cmd_compare)

    sweep_p = sub.add_parser("sweep", help="cross one axis against sectored/unsectored modes")
    sweep_p.add_argument("config", help="scenario JSON file")
    sweep_p.add_argument("--axis", required=True, help="node_count, attackers, or mode")
    sweep_p.add_argument("--values", required=True, help="comma-separated cell values")
    sweep_p.add_argument("--out", default="out", help="output directory (default: out)")
    sweep_p.set_defaults(handler=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RUNTIME_ERRORS as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
