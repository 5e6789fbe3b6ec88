"""``airblock`` command line: simulate, montecarlo, analyze.

Exit codes: 0 success, 1 I/O failure, 2 unreadable scenario, 3 invalid
configuration, 4 separation violated while ``--strict`` is set.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from airblock.duration import blocking_bounds, option_durations
from airblock.errors import ConfigError
from airblock.export import finite_or_none, trace_to_csv, trace_to_svg, write_atomic
from airblock.geometry import encounter_point
from airblock.modes import Mode, predict_blocking
from airblock.safety_filter import free_flight_threshold
from airblock.scenario_file import ScenarioParseError, load_scenario
from airblock.sim.config import ScenarioConfig, Strategy
from airblock.sim.engine import EventKind, run_scenario
from airblock.sim.montecarlo import run_monte_carlo

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_UNSAFE = 4


def _load(path: str) -> ScenarioConfig:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _err(msg: str) -> None:
    print(f"airblock: {msg}", file=sys.stderr)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args.scenario)
    trace = run_scenario(config)
    csv_text = trace_to_csv(trace)
    svg_text = trace_to_svg(trace) if args.plot else None
    write_atomic(args.out, csv_text)
    if svg_text is not None:
        write_atomic(args.plot, svg_text)

    violations = trace.events_of(EventKind.SAFETY_VIOLATION)
    print(f"steps: {len(trace.rows)}")
    for aid in trace.agent_ids:
        t = trace.arrival_times.get(aid)
        print(f"{aid}: " + (f"arrived at {t:.6g} s" if t is not None else "did not arrive"))
    print(f"min separation: {trace.min_separation:.6g} m")
    print(f"events: {len(trace.events)}, safety violations: {len(violations)}")
    if violations and args.strict:
        _err("separation dropped below r")
        return EXIT_UNSAFE
    return EXIT_OK


def cmd_montecarlo(args: argparse.Namespace) -> int:
    names = [s for s in args.strategies.split(",") if s.strip()]
    try:
        summary = run_monte_carlo(
            args.seed,
            args.n,
            names,
            workers=args.workers,
            knows_opponent_target=not args.estimate_targets,
        )
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    write_atomic(args.out, json.dumps(summary, indent=2, allow_nan=False) + "\n")
    for name, stats in summary["strategies"].items():
        red = stats["reduction_pct"]
        red_s = "n/a" if red is None else f"{red:.2f}%"
        mean = stats["mean_completion_s"]
        mean_s = "n/a" if mean is None else f"{mean:.3f} s"
        print(f"{name:>9}: mean flight time {mean_s}, reduction {red_s}, violations {stats['violations']}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _load(args.scenario)
    if len(config.agents) != 2:
        _err("analyze needs a two-airplane scenario")
        return EXIT_CONFIG
    a, b = config.agents
    params = config.safety
    threshold = free_flight_threshold(params)
    sep = math.dist(a.position, b.position)
    print(f"free-flight threshold: {threshold:.6f} m")
    print(f"initial separation: {sep:.6f} m ({'free flight' if sep > threshold else 'filter may act'})")
    if encounter_point(a.position, a.target, b.position, b.target) is None:
        verdict = "no encounter point"
    elif predict_blocking(a.position, a.target, b.position, b.target, config.tolerances.angle, config.tolerances.angle):
        verdict = "blocking predicted"
    else:
        verdict = "no blocking predicted"
    print(f"verdict: {verdict}")

    # the onset comes from a run without any resolution strategy
    trace = run_scenario(config.with_strategy(Strategy.NONE))
    onset = next((k for k, row in enumerate(trace.rows) if row.agents[0].mode is Mode.BLOCKING), None)
    if onset is None:
        print("blocking onset: none in the maintain-course run")
        return EXIT_OK
    row = trace.rows[onset]
    p1, p2 = row.agents[0].position, row.agents[1].position
    bounds = blocking_bounds(p1, a.target, p2, b.target, params, check=False)
    episodes = trace.blocking_episodes(0)
    measured = episodes[0][1] - episodes[0][0]
    od = option_durations(p1, a.target, p2, b.target, params)
    print(f"blocking onset: t = {row.time:.6g} s")
    print(f"t_lb: {bounds.t_lb:.6f} s")
    print(f"t_ub: {bounds.t_ub:.6f} s")
    print(f"measured duration: {measured:.6g} s" if math.isfinite(measured) else "measured duration: open")
    print(f"option maintain: {od.t_b:.6f} s")
    print(f"option {a.id} yields: {od.t_u_i:.6f} s")
    print(f"option {b.id} yields: {od.t_u_j:.6f} s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airblock", description="Two-dimensional airplane encounter simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write its trace")
    sim.add_argument("scenario")
    sim.add_argument("--out", required=True, help="CSV trace path")
    sim.add_argument("--plot", help="optional SVG plot path")
    sim.add_argument("--strict", action="store_true", help="exit 4 if separation drops below r")
    sim.set_defaults(func=cmd_simulate)

    mc = sub.add_parser("montecarlo", help="paired strategy comparison over generated encounters")
    mc.add_argument("--n", type=int, default=100)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--strategies", default="maintain,fixed,adaptive", help="comma separated")
    mc.add_argument("--out", required=True, help="JSON stats path")
    mc.add_argument("--workers", type=int, default=1)
    mc.add_argument(
        "--estimate-targets",
        action="store_true",
        help="airplanes triangulate the other target instead of knowing it",
    )
    mc.set_defaults(func=cmd_montecarlo)

    an = sub.add_parser("analyze", help="blocking prediction and duration bounds for a two-airplane scenario")
    an.add_argument("scenario")
    an.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 1) < 1 or getattr(args, "workers", 1) < 1 or getattr(args, "seed", 0) < 0:
        _err("--n and --workers must be >= 1 and --seed >= 0")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        _err(f"{args.scenario}: {exc}")
        return EXIT_PARSE
    except ConfigError as exc:
        _err(f"invalid configuration: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
