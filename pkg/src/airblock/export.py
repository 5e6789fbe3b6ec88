"""Trace export: CSV tables and SVG overhead plots, plus atomic file writes."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable
from xml.sax.saxutils import escape, quoteattr

from airblock.sim.engine import Event, SimulationTrace

AGENT_FIELDS = ("px", "py", "theta", "theta_cmd", "mode", "delta", "activated", "phase")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def fmt(x: float) -> str:
    """Nine significant digits, no exponent surprises for integers."""
    if x == 0.0:
        return "0"
    return format(x, ".9g")


def csv_header(agent_ids: Iterable[str]) -> list[str]:
    cols = ["time"]
    for aid in agent_ids:
        cols.extend(f"{aid}_{f}" for f in AGENT_FIELDS)
    cols.append("events")
    return cols


def _event_label(e: Event) -> str:
    return f"{e.kind.value}:{e.agent}"


def trace_to_csv(trace: SimulationTrace) -> str:
    """One row per step plus a closing row holding the final positions.

    Events are attached to the row whose time they carry, as
    ``Kind:agent`` labels separated by ``|``. The closing row leaves the
    per-step fields (mode, Δ, activation) empty since no step was taken there.
    """
    dt = trace.config.physics.dt
    n_rows = len(trace.rows)
    by_row: dict[int, list[str]] = {}
    for e in trace.events:
        k = int(round(e.time / dt))
        by_row.setdefault(k, []).append(_event_label(e))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(trace.agent_ids))
    for k, row in enumerate(trace.rows):
        out = [fmt(row.time)]
        for s in row.agents:
            out.extend(
                [
                    fmt(s.position[0]),
                    fmt(s.position[1]),
                    fmt(s.heading),
                    fmt(s.theta_cmd),
                    s.mode.value,
                    fmt(s.delta),
                    "1" if s.activated else "0",
                    s.phase.value,
                ]
            )
        out.append("|".join(by_row.get(k, ())))
        w.writerow(out)
    last = trace.rows[-1].agents if trace.rows else ()
    out = [fmt(n_rows * dt)]
    for i, pos in enumerate(trace.final_positions):
        heading = last[i].heading if last else trace.config.agents[i].initial_heading()
        phase = "Arrived" if trace.agent_ids[i] in trace.arrival_times else ""
        out.extend([fmt(pos[0]), fmt(pos[1]), fmt(heading), "", "", "", "", phase])
    tail = [lab for k, labels in sorted(by_row.items()) if k >= n_rows for lab in labels]
    out.append("|".join(tail))
    w.writerow(out)
    return buf.getvalue()


def trace_to_svg(trace: SimulationTrace, width: int = 800) -> str:
    """Overhead plot: trajectories, square targets, thick segments where the
    filter was active, and a marker for each event."""
    cfg = trace.config
    n = len(cfg.agents)
    paths = [trace.positions(i) for i in range(n)]
    xs = [float(v) for p in paths for v in p[:, 0]] + [a.target[0] for a in cfg.agents]
    ys = [float(v) for p in paths for v in p[:, 1]] + [a.target[1] for a in cfg.agents]
    pad = 0.5 * cfg.r
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    span_x = max(x1 - x0, 1e-9)
    span_y = max(y1 - y0, 1e-9)
    height = max(1, int(round(width * span_y / span_x)))
    scale = width / span_x

    def pt(x: float, y: float) -> str:
        return f"{fmt((x - x0) * scale)},{fmt((y1 - y) * scale)}"

    stroke = max(1.0, 0.004 * width)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{escape(cfg.name or 'trace')}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for i, a in enumerate(cfg.agents):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(pt(float(x), float(y)) for x, y in paths[i])
        parts.append(
            f'<polyline class="trajectory" data-agent={quoteattr(a.id)} fill="none" '
            f'stroke="{colour}" stroke-width="{fmt(stroke)}" points="{pts}"/>'
        )
        # activation segments, one path with a subpath per contiguous run
        segs: list[str] = []
        run: list[str] = []
        for k, row in enumerate(trace.rows):
            if row.agents[i].activated:
                if not run:
                    run.append(pt(float(paths[i][k, 0]), float(paths[i][k, 1])))
                run.append(pt(float(paths[i][k + 1, 0]), float(paths[i][k + 1, 1])))
            elif run:
                segs.append("M" + " L".join(run))
                run = []
        if run:
            segs.append("M" + " L".join(run))
        if segs:
            parts.append(
                f'<path class="activation" data-agent={quoteattr(a.id)} fill="none" '
                f'stroke="{colour}" stroke-opacity="0.5" stroke-width="{fmt(4 * stroke)}" d="{" ".join(segs)}"/>'
            )
        side = 0.3 * cfg.r * scale
        tx, ty = (a.target[0] - x0) * scale, (y1 - a.target[1]) * scale
        parts.append(
            f'<rect class="target" data-agent={quoteattr(a.id)} x="{fmt(tx - side / 2)}" '
            f'y="{fmt(ty - side / 2)}" width="{fmt(side)}" height="{fmt(side)}" '
            f'fill="none" stroke="{colour}" stroke-width="{fmt(stroke)}"/>'
        )
    ids = trace.agent_ids
    dt = cfg.physics.dt
    for e in trace.events:
        i = ids.index(e.agent)
        k = min(int(round(e.time / dt)), len(paths[i]) - 1)
        x, y = float(paths[i][k, 0]), float(paths[i][k, 1])
        cx, cy = pt(x, y).split(",")
        parts.append(
            f'<circle class="event" data-kind="{e.kind.value}" data-agent={quoteattr(e.agent)} '
            f'cx="{cx}" cy="{cy}" r="{fmt(3 * stroke)}" fill="black">'
            f"<title>{escape(_event_label(e))} t={fmt(e.time)}</title></circle>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write ``text`` so readers see either the old file or the complete new one."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def finite_or_none(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return x
