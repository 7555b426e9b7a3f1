"""The half-plane Poincare section {y' = 0} and its first-return map.

The section is the plane x + a*y = 0.  On it, the flow is tangent exactly
on the line z = x/a; the half-plane above that line ("upper", z > x/a) is
crossed downward (y' goes from + to -) and the lower half upward.  Both
fixed points sit on the tangency line.  Section coordinates are
(u, w) = (x, z), with y = -u/a eliminated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Params, fixed_points
from .errors import (
    EscapeError,
    FixedPointError,
    NoCrossingError,
)
from .integrator import Trajectory, integrate
from .parallel import map_indexed

__all__ = [
    "SectionChart",
    "SectionPoint",
    "ReturnMapSample",
    "Crossing",
    "classify_point",
    "crossings_of",
    "next_crossing",
    "first_return",
    "return_map",
    "return_map_grid",
    "GridResult",
]

UPPER = "upper"
LOWER = "lower"
LINE = "line"
OFF = "off-section"

_LINE_BAND = 1e-12
_ON_SECTION_TOL = 1e-10
_REFINE_TOL = 1e-11
_CAPTURE_RADIUS = 1e-8
_CHUNK_TIME = 25.0


@dataclass(frozen=True)
class SectionChart:
    """Chart (u, w) <-> (u, -u/a, w) for the section plane x + a*y = 0."""

    a: float

    @property
    def normal(self) -> np.ndarray:
        return np.array([1.0, self.a, 0.0])

    def to_state(self, u: float, w: float) -> np.ndarray:
        return np.array([u, -u / self.a, w])

    def from_state(self, s) -> tuple[float, float]:
        return float(s[0]), float(s[2])

    def line_w(self, u: float) -> float:
        """w-coordinate of the tangency line at abscissa u."""
        return u / self.a

    def side(self, u: float, w: float) -> str:
        d = w - u / self.a
        if abs(d) <= _LINE_BAND:
            return LINE
        return UPPER if d > 0.0 else LOWER


@dataclass(frozen=True)
class SectionPoint:
    u: float
    w: float
    side: str

    @classmethod
    def make(cls, chart: SectionChart, u: float, w: float) -> "SectionPoint":
        return cls(float(u), float(w), chart.side(float(u), float(w)))

    def margin(self, chart: SectionChart) -> float:
        """Signed distance w - u/a from the tangency line (positive on upper)."""
        return self.w - chart.line_w(self.u)


@dataclass(frozen=True)
class Crossing:
    """One refined section crossing of a trajectory."""

    tau: float            # elapsed integration parameter
    state: np.ndarray
    side: str             # side of the refined point (upper/lower)
    margin: float         # d/dt (y') at the crossing, physical time


@dataclass(frozen=True)
class ReturnMapSample:
    """One application of the first-return map on the upper half-plane."""

    in_point: SectionPoint
    out_point: SectionPoint
    return_time: float
    transversality_margin: float
    lower_crossings: int


def classify_point(p: Params, s) -> str:
    """Classify a 3-space point against the section; see module docstring."""
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    g = x + p.a * y
    norm = math.sqrt(x * x + y * y + z * z)
    if abs(g) > _ON_SECTION_TOL * (1.0 + norm):
        return OFF
    return SectionChart(p.a).side(x, z)


def _gdot(p: Params, s) -> float:
    """d/dt of g = x + a*y along the physical flow (equals y'')."""
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    return -y - z + p.a * (x + p.a * y)


def _g_poly(traj: Trajectory, i: int) -> tuple[float, np.ndarray]:
    """Constant term and quartic coefficients of g(theta) on step i."""
    a = traj.params.a
    g0 = traj.states[i, 0] + a * traj.states[i, 1]
    coef = traj.h[i] * (traj.q[i, 0] + a * traj.q[i, 1])
    return float(g0), coef


def _g_eval(g0: float, coef: np.ndarray, th: float) -> float:
    return g0 + th * (coef[0] + th * (coef[1] + th * (coef[2] + th * coef[3])))


def _g_deriv(coef: np.ndarray, th: float) -> float:
    return coef[0] + th * (2.0 * coef[1] + th * (3.0 * coef[2] + th * 4.0 * coef[3]))


def _refine_root(g0: float, coef: np.ndarray, lo: float, hi: float,
                 glo: float, ghi: float) -> float:
    """Root of the dense-output g polynomial in [lo, hi]: bisection + Newton."""
    th = 0.5 * (lo + hi)
    for _ in range(200):
        g = _g_eval(g0, coef, th)
        if g == 0.0:
            return th
        if (g > 0.0) == (glo > 0.0):
            lo, glo = th, g
        else:
            hi, ghi = th, g
        d = _g_deriv(coef, th)
        used_newton = False
        if d != 0.0:
            tn = th - g / d
            if lo < tn < hi:
                th = tn
                used_newton = True
        if not used_newton:
            th = 0.5 * (lo + hi)
        if hi - lo < 1e-16:
            break
    return th


def crossings_of(traj: Trajectory, *, want_side: str | None = None,
                 max_count: int | None = None,
                 skip_initial: bool = True) -> list[Crossing]:
    """All refined section crossings of a trajectory, in order.

    A crossing is "upper" when the crossing point lies in the upper
    half-plane, equivalently when y' decreases through zero in physical
    time.  Interior double crossings are caught by probing the dense
    midpoint of every step.  With skip_initial, a start point already on
    the section is not reported as a crossing at tau = 0.
    """
    p = traj.params
    n = traj.n_steps
    if n == 0:
        return []
    a = p.a
    g_nodes = traj.states[:, 0] + a * traj.states[:, 1]
    # dense midpoints: states[i] + h*(q @ [.5, .25, .125, .0625]) per component
    th_pows = np.array([0.5, 0.25, 0.125, 0.0625])
    mids = traj.states[:-1] + traj.h[:, None] * (traj.q @ th_pows)
    g_mids = mids[:, 0] + a * mids[:, 1]

    scale0 = 1.0 + float(np.linalg.norm(traj.states[0]))
    ambiguous_start = skip_initial and abs(g_nodes[0]) <= _REFINE_TOL * scale0

    out: list[Crossing] = []
    for i in range(n):
        pairs = (
            (0.0, 0.5, g_nodes[i], g_mids[i]),
            (0.5, 1.0, g_mids[i], g_nodes[i + 1]),
        )
        g0, coef = None, None
        for lo, hi, glo, ghi in pairs:
            if ambiguous_start and i == 0 and lo == 0.0:
                # start sits on the section; do not report the departure
                if glo == 0.0 or (glo > 0.0) != (ghi > 0.0):
                    continue
            if glo == 0.0:
                continue
            if (glo > 0.0) == (ghi > 0.0) and ghi != 0.0:
                continue
            if g0 is None:
                g0, coef = _g_poly(traj, i)
            th = _refine_root(g0, coef, lo, hi, glo, ghi)
            state = traj.eval_step(i, th)
            # physical-time margin; stored g decreases in tau iff it
            # decreases in physical time times direction
            margin = _gdot(p, state)
            side = UPPER if margin < 0.0 else LOWER
            if want_side is not None and side != want_side:
                continue
            tau = float(traj.t[i] + th * traj.h[i])
            out.append(Crossing(tau=tau, state=state, side=side, margin=margin))
            if max_count is not None and len(out) >= max_count:
                return out
    return out


def _check_capture(p: Params, states: np.ndarray, tau_limit_index: int | None = None):
    """Raise FixedPointError if any state enters the capture ball of a fixed point."""
    inner, outer = fixed_points(p)
    pts = states if tau_limit_index is None else states[: tau_limit_index + 1]
    d_in = np.min(np.linalg.norm(pts - inner, axis=1))
    d_out = np.min(np.linalg.norm(pts - outer, axis=1))
    if min(d_in, d_out) < _CAPTURE_RADIUS:
        which = "inner" if d_in <= d_out else "outer"
        raise FixedPointError(
            f"trajectory entered the {which} fixed-point capture ball "
            f"(d={min(d_in, d_out):.2e}); return map undefined here",
            reason="fixed-point-capture",
        )


def next_crossing(
    p: Params,
    s0,
    target_side: str = UPPER,
    t_max: float = 1e4,
    tol: float = 1e-9,
    *,
    direction: int = 1,
    collect: bool = False,
    capture_check: bool = False,
) -> tuple[np.ndarray, float] | tuple[np.ndarray, float, list[Crossing]]:
    """First crossing of the requested side reached from s0.

    Integrates forward (or backward with direction=-1) in chunks, refining
    candidate crossings on the dense output.  Raises NoCrossingError /
    EscapeError / FixedPointError as applicable.  With collect=True the
    crossings of the *other* side encountered before the hit are returned
    too (used for intermediate-crossing counts).
    """
    elapsed = 0.0
    state = np.asarray(s0, dtype=float)
    others: list[Crossing] = []
    first_chunk = True
    while elapsed < t_max:
        chunk = min(_CHUNK_TIME, t_max - elapsed)
        traj = integrate(p, state, chunk, tol, direction=direction)
        found = crossings_of(traj, skip_initial=first_chunk)
        for cr in found:
            if cr.side == target_side:
                if capture_check:
                    idx = int(np.searchsorted(traj.t, cr.tau))
                    _check_capture(p, traj.states, idx)
                t_hit = elapsed + cr.tau
                if collect:
                    return cr.state, t_hit, others
                return cr.state, t_hit
            others.append(Crossing(elapsed + cr.tau, cr.state, cr.side, cr.margin))
        if capture_check:
            _check_capture(p, traj.states)
        if traj.termination == "escape":
            raise EscapeError(f"escape at |s| > radius before any {target_side} crossing")
        if traj.termination == "fixed-point":
            raise FixedPointError(f"converged to a fixed point before any {target_side} crossing")
        elapsed += traj.end_time
        state = traj.end_state
        first_chunk = False
    raise NoCrossingError(f"no {target_side} crossing within t_max={t_max}")


def first_return(
    p: Params,
    q: SectionPoint,
    t_max: float = 1e4,
    tol: float = 1e-9,
) -> ReturnMapSample:
    """First-return map on the upper half-plane at q.

    q must lie strictly in the upper half (margin >= 1e-9).  Records the
    lower-half crossings passed on the way.  Failure modes: no return
    within t_max (NoCrossingError), escape (EscapeError), fixed-point
    capture or convergence (FixedPointError).
    """
    chart = SectionChart(p.a)
    if q.side != UPPER or q.margin(chart) < 1e-9:
        raise ValueError(f"start point must lie strictly in the upper half-plane: {q}")
    s0 = chart.to_state(q.u, q.w)
    state, t_hit, others = next_crossing(
        p, s0, UPPER, t_max, tol, collect=True, capture_check=True
    )
    margin = _gdot(p, state)
    out = SectionPoint.make(chart, state[0], state[2])
    n_lower = sum(1 for cr in others if cr.side == LOWER)
    return ReturnMapSample(
        in_point=q,
        out_point=out,
        return_time=t_hit,
        transversality_margin=margin,
        lower_crossings=n_lower,
    )


def return_map(p: Params, t_max: float = 1e4, tol: float = 1e-9):
    """The first-return map as a plain (u, w) -> (u, w) callable."""
    chart = SectionChart(p.a)

    def f(uw: tuple[float, float]) -> tuple[float, float]:
        q = SectionPoint.make(chart, uw[0], uw[1])
        s = first_return(p, q, t_max, tol)
        return (s.out_point.u, s.out_point.w)

    return f


@dataclass
class GridResult:
    u_vals: np.ndarray
    w_vals: np.ndarray
    samples: dict[tuple[int, int], ReturnMapSample]
    failures: dict[tuple[int, int], str]

    @property
    def n_success(self) -> int:
        return len(self.samples)


def return_map_grid(
    p: Params,
    u_range: tuple[float, float],
    w_range: tuple[float, float],
    nu: int,
    nw: int,
    t_max: float = 1e3,
    tol: float = 1e-9,
) -> GridResult:
    """first_return on an nu x nw node grid; failures recorded, never raised."""
    chart = SectionChart(p.a)
    u_vals = np.linspace(u_range[0], u_range[1], nu) if nu > 0 else np.empty(0)
    w_vals = np.linspace(w_range[0], w_range[1], nw) if nw > 0 else np.empty(0)
    cells = [(i, j) for i in range(nu) for j in range(nw)]

    def work(cell):
        i, j = cell
        q = SectionPoint.make(chart, u_vals[i], w_vals[j])
        if q.side != UPPER or q.margin(chart) < 1e-9:
            return cell, None, "not-in-upper-half"
        try:
            return cell, first_return(p, q, t_max, tol), None
        except NoCrossingError as e:
            return cell, None, e.reason
        except Exception as e:  # pragma: no cover - defensive
            return cell, None, f"error: {e}"

    samples: dict[tuple[int, int], ReturnMapSample] = {}
    failures: dict[tuple[int, int], str] = {}
    for cell, sample, reason in map_indexed(work, cells):
        if sample is not None:
            samples[cell] = sample
        else:
            failures[cell] = reason
    return GridResult(u_vals=u_vals, w_vals=w_vals, samples=samples, failures=failures)
