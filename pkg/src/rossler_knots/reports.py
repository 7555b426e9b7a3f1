"""Deterministic report, CSV and SVG emission.

Identical inputs must give byte-identical artifacts: no timestamps, fixed
key order, floats via repr (shortest round-trip form), CSV numbers with 17
significant digits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .knots import CrossingDiagram, PolygonalKnot, project

SCHEMA_VERSION = 1

__all__ = ["Report", "csv_lines", "emit_svg", "SCHEMA_VERSION"]


def _plain(obj: Any) -> Any:
    """Deterministic JSON-ready form; numpy and dataclass-ish values unpacked."""
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "__dict__") and not isinstance(obj, type):
        return {k: _plain(v) for k, v in sorted(vars(obj).items())}
    return repr(obj)


@dataclass
class Report:
    """One command's full output: inputs echo, results, diagnostics."""

    command: str
    inputs: dict
    results: dict
    diagnostics: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "command": self.command,
            "seed": self.seed,
            "inputs": _plain(self.inputs),
            "results": _plain(self.results),
            "diagnostics": _plain(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=True) + "\n"

    @staticmethod
    def roundtrip_equal(serialized: str) -> bool:
        parsed = json.loads(serialized)
        again = json.dumps(parsed, sort_keys=True, indent=1, ensure_ascii=True) + "\n"
        return again == serialized


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def csv_lines(header: list[str], rows: list[list]) -> str:
    """CSV with 17-significant-digit floats and a header row."""
    out = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append("nan" if np.isnan(v) else _g17(v))
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# SVG


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def emit_svg(
    source: PolygonalKnot | CrossingDiagram,
    width: int = 600,
    stroke: str = "#1a1a1a",
    seed: int = 0,
) -> str:
    """Deterministic SVG of a projected curve with under-strand gaps.

    Curves are projected onto the (x, y) plane viewpoint by default; the
    under strand of every crossing is broken by a small gap.  The root
    element carries data-crossings with the crossing count.
    """
    if isinstance(source, PolygonalKnot):
        diagram = project(source, direction_hint=(0.0, 0.0, 1.0), seed=seed)
    else:
        diagram = source
    pts = diagram.plane_points
    if pts is None:
        raise ValueError("diagram carries no plane geometry to draw")
    n = len(pts)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.05 * span
    gap_r = 0.012 * span

    # per-segment under-crossing gap parameters
    gaps: dict[int, list[float]] = {}
    for cid, (over_at, under_at) in sorted(diagram.crossing_segments.items()):
        seg, t = under_at
        gaps.setdefault(seg, []).append(t)

    def seg_pieces(i: int) -> list[tuple[float, float]]:
        cuts = sorted(gaps.get(i, []))
        pieces = []
        a, b = pts[i], pts[(i + 1) % n]
        seg_len = float(np.linalg.norm(b - a))
        dt = gap_r / seg_len if seg_len > 0 else 0.5
        start = 0.0
        for t in cuts:
            end = max(start, t - dt)
            if end > start:
                pieces.append((start, end))
            start = min(1.0, t + dt)
        if start < 1.0:
            pieces.append((start, 1.0))
        return pieces

    def to_canvas(q) -> tuple[float, float]:
        x = (q[0] - lo[0] + pad) / (span + 2 * pad) * width
        y = width - (q[1] - lo[1] + pad) / (span + 2 * pad) * width
        return x, y

    paths = []
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for t0, t1 in seg_pieces(i):
            q0 = to_canvas(a + t0 * (b - a))
            q1 = to_canvas(a + t1 * (b - a))
            paths.append(
                f'<path d="M {_fmt(q0[0])} {_fmt(q0[1])} L {_fmt(q1[0])} {_fmt(q1[1])}"/>'
            )
    body = "\n".join(paths)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
        f'viewBox="0 0 {width} {width}" data-crossings="{diagram.n_crossings}">\n'
        f'<g fill="none" stroke="{stroke}" stroke-width="1.4" stroke-linecap="round">\n'
        f"{body}\n</g>\n</svg>\n"
    )
