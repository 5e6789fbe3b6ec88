"""Paired Monte Carlo comparison of the resolution strategies.

The headline metric is the mean flight time per airplane (total flight time
of the pair divided by two), which is what the adaptive rule tries to
minimise. The makespan, when the last airplane lands, is reported alongside.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

from airblock.sim.config import Strategy
from airblock.sim.engine import EventKind, run_scenario
from airblock.sim.generate import generate_blocking_scenario, scenario_rng

STRATEGY_NAMES = {Strategy.NONE: "maintain", Strategy.FIXED: "fixed", Strategy.ADAPTIVE: "adaptive"}
ORDER = (Strategy.NONE, Strategy.FIXED, Strategy.ADAPTIVE)


@dataclass(frozen=True)
class RunResult:
    completion_s: Optional[float]
    makespan_s: Optional[float]
    blocking_s: float
    min_separation: float
    violations: int


@dataclass(frozen=True)
class ScenarioResult:
    index: int
    runs: dict  # strategy name -> RunResult


def parse_strategies(names: Iterable[str]) -> tuple[Strategy, ...]:
    """Map user-facing names to strategies; the maintain baseline is always included."""
    lookup = {v: k for k, v in STRATEGY_NAMES.items()}
    lookup["none"] = Strategy.NONE
    chosen = {Strategy.NONE}
    for name in names:
        key = name.strip().lower()
        if key not in lookup:
            raise ValueError(f"unknown strategy {name!r}; expected one of maintain, fixed, adaptive")
        chosen.add(lookup[key])
    return tuple(s for s in ORDER if s in chosen)


def _blocking_time(trace) -> float:
    dt = trace.config.physics.dt
    per_agent = [sum(1 for m in trace.modes(i) if m.value == "Blocking") * dt for i in range(len(trace.config.agents))]
    return max(per_agent)


def run_one(args: tuple[int, int, tuple[Strategy, ...], bool]) -> ScenarioResult:
    seed, index, strategies, knows = args
    base = generate_blocking_scenario(scenario_rng(seed, index), knows_opponent_target=knows, name=f"mc-{index}")
    runs = {}
    for strategy in strategies:
        trace = run_scenario(base.with_strategy(strategy))
        times = list(trace.arrival_times.values())
        runs[STRATEGY_NAMES[strategy]] = RunResult(
            completion_s=math.fsum(times) / len(times) if trace.completed else None,
            makespan_s=trace.completion_time,
            blocking_s=_blocking_time(trace),
            min_separation=trace.min_separation,
            violations=len(trace.events_of(EventKind.SAFETY_VIOLATION)),
        )
    return ScenarioResult(index, runs)


def run_monte_carlo(
    seed: int,
    n: int,
    strategies: Iterable[Strategy | str] = ORDER,
    workers: int = 1,
    knows_opponent_target: bool = True,
) -> dict:
    """Run ``n`` generated encounters under each strategy and summarise.

    The result is a plain dict ready for JSON output. Scenario ``i`` always
    uses the same random stream, so the summary does not depend on
    ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    names = [s.value if isinstance(s, Strategy) else s for s in strategies]
    names = ["maintain" if x == "none" else x for x in names]
    chosen = parse_strategies(names)
    jobs = [(seed, i, chosen, knows_opponent_target) for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        results = [run_one(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    return summarise(seed, n, chosen, results)


def _mean(values: list[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def summarise(seed: int, n: int, strategies: tuple[Strategy, ...], results: list[ScenarioResult]) -> dict:
    names = [STRATEGY_NAMES[s] for s in strategies]
    # paired statistics only over scenarios every strategy completed
    complete = [r for r in results if all(r.runs[k].completion_s is not None for k in names)]
    base = _mean([r.runs["maintain"].completion_s for r in complete])
    summary = {}
    for name in names:
        mean = _mean([r.runs[name].completion_s for r in complete])
        reduction = None
        if mean is not None and base:
            reduction = 100.0 * (base - mean) / base
        makespan = _mean([r.runs[name].makespan_s for r in complete])
        summary[name] = {
            "mean_completion_s": mean,
            "reduction_pct": reduction,
            "mean_makespan_s": makespan,
            "violations": sum(r.runs[name].violations for r in results),
            "incomplete": sum(1 for r in results if r.runs[name].completion_s is None),
            "mean_blocking_s": _mean([r.runs[name].blocking_s for r in results]),
            "min_separation": min(r.runs[name].min_separation for r in results),
        }
    table = [
        {
            "index": r.index,
            **{
                name: {
                    "completion_s": r.runs[name].completion_s,
                    "makespan_s": r.runs[name].makespan_s,
                    "blocking_s": r.runs[name].blocking_s,
                    "min_separation": r.runs[name].min_separation,
                    "violations": r.runs[name].violations,
                }
                for name in names
            },
        }
        for r in results
    ]
    return {
        "n": n,
        "seed": seed,
        "paired": len(complete),
        "strategies": summary,
        "scenarios": table,
    }
