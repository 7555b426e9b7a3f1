"""One-dimensional invariant manifolds and heteroclinic diagnostics.

The inner fixed point carries a one-dimensional stable manifold (grown
backward in time), the outer one a one-dimensional unstable manifold
(grown forward).  A bounded connection from the outer to the inner point,
together with the two unbounded branches, closes up into a knot once the
tails are truncated on a large sphere; at a trefoil candidate that knot
has the trefoil certificate.

The mismatch between the two bounded branch halves is measured where both
must cross the upper half-plane section; driving it to zero over two free
parameters is the trefoil-parameter search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Params, check_assumptions, classify_fixed_point, fixed_points, jacobian
from .errors import BranchTypeError, ClosureError, NoCrossingError, SearchError
from .integrator import Trajectory, integrate
from .knots import PolygonalKnot
from .parallel import map_indexed
from .section import LOWER, UPPER, SectionChart, next_crossing

__all__ = [
    "ManifoldBranch",
    "grow_branch",
    "trapping_diagnostics",
    "HeteroclinicDiagnostics",
    "heteroclinic_mismatch",
    "TrefoilSearchResult",
    "find_trefoil_candidate",
    "build_lambda_knot",
    "MismatchScan",
    "mismatch_scan",
    "coincidence_diagnostic",
]

BRANCH_NAMES = ("stable-inner+", "stable-inner-", "unstable-outer+", "unstable-outer-")


@dataclass
class ManifoldBranch:
    name: str
    base: np.ndarray
    direction: np.ndarray
    orientation: int
    offset: float
    eigen_residual: float
    trajectory: Trajectory

    @property
    def seed(self) -> np.ndarray:
        return self.base + self.orientation * self.offset * self.direction

    @property
    def escapes(self) -> bool:
        return self.trajectory.termination == "escape"


def _real_eigenvector(p: Params, s, gamma: float) -> tuple[np.ndarray, float]:
    J = jacobian(p, s)
    A = J - gamma * np.eye(3)
    _, _, vt = np.linalg.svd(A)
    v = vt[-1]
    v = v / np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v, float(np.linalg.norm(J @ v - gamma * v))


def grow_branch(
    p: Params,
    which: str,
    h: float = 1e-6,
    t_max: float = 400.0,
    tol: float = 1e-10,
    escape_radius: float = 1e4,
) -> ManifoldBranch:
    """Grow one side of a one-dimensional manifold from an eigenvector seed.

    which: "stable-inner{+,-}" (backward time from the inner point) or
    "unstable-outer{+,-}" (forward time from the outer point).  The seed
    offset h must lie in [1e-7, 1e-4]; BranchTypeError if the fixed point
    does not carry the requested one-dimensional direction.
    """
    if which not in BRANCH_NAMES:
        raise ValueError(f"which must be one of {BRANCH_NAMES}")
    if not (1e-7 <= h <= 1e-4):
        raise ValueError(f"seed offset h={h} outside [1e-7, 1e-4]")
    inner, outer = fixed_points(p)
    stable = which.startswith("stable-inner")
    base = inner if stable else outer
    an = classify_fixed_point(p, base)
    want = "stable-axis" if stable else "unstable-axis"
    if an.kind != want:
        raise BranchTypeError(
            f"{which}: fixed point is {an.kind}, needs {want} (gamma={an.gamma:.4g})"
        )
    v, resid = _real_eigenvector(p, base, an.gamma)
    if resid > 1e-9:
        raise BranchTypeError(f"eigenvector residual {resid:.2e} > 1e-9")
    orientation = 1 if which.endswith("+") else -1
    seed = base + orientation * h * v
    direction = -1 if stable else 1
    traj = integrate(
        p, seed, t_max, tol, direction=direction, escape_radius=escape_radius
    )
    return ManifoldBranch(
        name=which,
        base=base,
        direction=v,
        orientation=orientation,
        offset=h,
        eigen_residual=resid,
        trajectory=traj,
    )


@dataclass(frozen=True)
class TrappingReport:
    branch: str
    entry_time: float | None
    n_tail_samples: int
    satisfied: bool
    alt_threshold_holds: bool | None = None


def trapping_diagnostics(p: Params, branch: ManifoldBranch, slack: float = 1e-9) -> TrappingReport:
    """Check the escape-wedge predicate on an unbounded branch.

    The unbounded connections are oriented from their fixed point out to
    infinity, i.e. along the branch's own growth parameterization (backward
    time for the inner-stable branch), and the rate dy/dtau is taken along
    that orientation.  Inner-stable: y >= -slack and dy/dtau >= -slack,
    which holds numerically throughout the sampled parameter space.
    Outer-unstable: dy/dtau >= -slack and x <= (ab - c)/a + slack as
    specified; the sampled tails instead satisfy the mirrored wedge
    dy/dtau <= slack with y <= (ab - c)/a + slack (the y-coordinate of the
    outer point), which is reported via alt_threshold_holds.  entry_time is
    the elapsed parameter after the last violation; satisfied needs at
    least 10 trailing samples past it.
    """
    traj = branch.trajectory
    st = traj.states
    dydtau = traj.direction * (st[:, 0] + p.a * st[:, 1])
    alt = None
    if branch.name.startswith("stable-inner"):
        ok = (st[:, 1] >= -slack) & (dydtau >= -slack)
    else:
        bar = (p.a * p.b - p.c) / p.a
        ok = (dydtau >= -slack) & (st[:, 0] <= bar + slack)
        alt_ok = (dydtau <= slack) & (st[:, 1] <= bar + slack)
        tail = alt_ok[max(0, len(alt_ok) - max(10, len(alt_ok) // 4)):]
        alt = bool(np.all(tail))
    viol = np.nonzero(~ok)[0]
    if len(viol) == 0:
        entry_idx = 0
    elif viol[-1] == len(st) - 1:
        return TrappingReport(branch.name, None, 0, False, alt)
    else:
        entry_idx = int(viol[-1]) + 1
    n_tail = len(st) - entry_idx
    return TrappingReport(
        branch=branch.name,
        entry_time=float(traj.t[entry_idx]),
        n_tail_samples=n_tail,
        satisfied=n_tail >= 10,
        alt_threshold_holds=alt,
    )


# ---------------------------------------------------------------------------
# heteroclinic mismatch


@dataclass
class HeteroclinicDiagnostics:
    mismatch: np.ndarray                # 2-vector in section coordinates
    mismatch_norm: float
    out_side: int                       # orientation of the bounded outer branch
    in_side: int                        # orientation of the bounded inner branch
    outer_crossing: np.ndarray          # (u, w) of the forward half
    inner_crossing: np.ndarray          # (u, w) of the backward half
    outer_time: float
    inner_time: float
    n_upper: int
    n_lower: int
    trapping_inner: TrappingReport | None
    trapping_outer: TrappingReport | None
    offset: float


def _first_upper_crossing(p: Params, seed, direction: int, t_max: float, tol: float):
    state, t_hit, others = next_crossing(
        p, seed, UPPER, t_max, tol, direction=direction, collect=True
    )
    return state, t_hit, others


def heteroclinic_mismatch(
    p: Params,
    h: float = 1e-6,
    t_max: float = 400.0,
    tol: float = 1e-10,
    pairing: tuple[int, int] | None = None,
    with_trapping: bool = False,
) -> HeteroclinicDiagnostics:
    """Mismatch between the bounded manifold halves on the upper half-plane.

    The forward half leaves the outer point along its unstable direction;
    the backward half leaves the inner point along its stable direction.
    Each is followed to its first upper-half crossing; the mismatch is the
    difference of the two crossing points in section coordinates.  Branch
    orientations are chosen by minimal mismatch unless a frozen pairing is
    supplied (root finders freeze it to keep the objective continuous).
    Crossing failures propagate as NoCrossingError subclasses.
    """
    rep = check_assumptions(p)
    if not (rep.ranges_ok and rep.saddle_foci_ok):
        raise BranchTypeError(f"assumptions fail at {p}: ranges={rep.ranges_ok}")
    inner, outer = fixed_points(p)
    an_in = classify_fixed_point(p, inner)
    an_out = classify_fixed_point(p, outer)
    v_in, _ = _real_eigenvector(p, inner, an_in.gamma)
    v_out, _ = _real_eigenvector(p, outer, an_out.gamma)
    chart = SectionChart(p.a)

    def half(base, v, side, direction):
        seed = base + side * h * v
        state, t_hit, others = _first_upper_crossing(p, seed, direction, t_max, tol)
        uw = np.array(chart.from_state(state))
        lowers = sum(1 for c in others if c.side == LOWER)
        uppers = sum(1 for c in others if c.side == UPPER)
        return uw, t_hit, lowers, uppers

    sides_out = (pairing[0],) if pairing else (1, -1)
    sides_in = (pairing[1],) if pairing else (1, -1)
    best = None
    failures: list[str] = []
    for so in sides_out:
        try:
            uw_o, t_o, low_o, up_o = half(outer, v_out, so, +1)
        except NoCrossingError as e:
            failures.append(f"outer{so:+d}: {e.reason}")
            continue
        for si in sides_in:
            try:
                uw_i, t_i, low_i, up_i = half(inner, v_in, si, -1)
            except NoCrossingError as e:
                failures.append(f"inner{si:+d}: {e.reason}")
                continue
            mis = uw_o - uw_i
            cand = (float(np.linalg.norm(mis)), so, si, uw_o, uw_i, t_o, t_i,
                    low_o + low_i, 1 + up_o + up_i)
            if best is None or cand[0] < best[0]:
                best = cand
    if best is None:
        raise NoCrossingError(
            f"no heteroclinic candidate at {p}: {'; '.join(failures)}"
        )
    norm, so, si, uw_o, uw_i, t_o, t_i, n_low, n_up = best

    trap_in = trap_out = None
    if with_trapping:
        bi = grow_branch(p, f"stable-inner{'-' if si > 0 else '+'}", h, t_max, tol)
        bo = grow_branch(p, f"unstable-outer{'-' if so > 0 else '+'}", h, t_max, tol)
        if bi.escapes:
            trap_in = trapping_diagnostics(p, bi)
        if bo.escapes:
            trap_out = trapping_diagnostics(p, bo)
    return HeteroclinicDiagnostics(
        mismatch=uw_o - uw_i,
        mismatch_norm=norm,
        out_side=so,
        in_side=si,
        outer_crossing=uw_o,
        inner_crossing=uw_i,
        outer_time=t_o,
        inner_time=t_i,
        n_upper=n_up,
        n_lower=n_low,
        trapping_inner=trap_in,
        trapping_outer=trap_out,
        offset=h,
    )


# ---------------------------------------------------------------------------
# trefoil-parameter search


@dataclass
class TrefoilSearchResult:
    params: Params
    diagnostics: HeteroclinicDiagnostics
    converged: bool
    diagnostics_pass: bool
    iterations: int
    knot_poly: object | None = None
    knot_class: str | None = None


def find_trefoil_candidate(
    p0: Params,
    free: tuple[str, str] = ("a", "c"),
    tol: float = 1e-8,
    max_iter: int = 40,
    h: float = 1e-6,
    t_max: float = 400.0,
    ode_tol: float = 1e-10,
    with_knot: bool = True,
) -> TrefoilSearchResult:
    """Drive the heteroclinic mismatch to zero over two free parameters.

    Damped Broyden with a finite-difference seed Jacobian; the branch
    pairing is frozen at p0.  Convergence means |mismatch| <= tol; the
    crossing-count and knot-certificate diagnostics are then evaluated and
    reported (a converged point that fails them is returned labeled, not
    silently accepted).  SearchError if max_iter is exhausted.
    """
    if len(free) != 2 or any(f not in ("a", "b", "c") for f in free) or free[0] == free[1]:
        raise ValueError(f"free must name two distinct parameters, got {free}")

    d0 = heteroclinic_mismatch(p0, h, t_max, ode_tol)
    pairing = (d0.out_side, d0.in_side)

    def params_at(x):
        kw = {free[0]: float(x[0]), free[1]: float(x[1])}
        return p0.replace(**kw)

    def F(x):
        d = heteroclinic_mismatch(params_at(x), h, t_max, ode_tol, pairing=pairing)
        return d.mismatch, d

    x = np.array([getattr(p0, free[0]), getattr(p0, free[1])])
    fx, diag = d0.mismatch, d0
    if d0.mismatch_norm <= tol:
        return _finish_search(params_at(x), diag, True, 0, with_knot, h, t_max, ode_tol)

    # finite-difference seed Jacobian
    J = np.empty((2, 2))
    fd = 1e-6 * (1.0 + np.abs(x))
    for col in range(2):
        e = np.zeros(2)
        e[col] = fd[col]
        try:
            fp_, _ = F(x + e)
            fm_, _ = F(x - e)
            J[:, col] = (fp_ - fm_) / (2 * fd[col])
        except (NoCrossingError, BranchTypeError) as exc:
            raise SearchError(f"mismatch not evaluable near seed: {exc}") from exc

    for it in range(1, max_iter + 1):
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError as exc:
            raise SearchError(f"singular Broyden matrix at iter {it}") from exc
        lam = 1.0
        moved = False
        for _ in range(8):
            xt = x + lam * step
            try:
                ft, dt = F(xt)
            except (NoCrossingError, BranchTypeError):
                lam /= 2.0
                continue
            if np.linalg.norm(ft) < np.linalg.norm(fx):
                dx = xt - x
                df = ft - fx
                J += np.outer(df - J @ dx, dx) / float(dx @ dx)
                x, fx, diag = xt, ft, dt
                moved = True
                break
            lam /= 2.0
        if not moved:
            raise SearchError(
                f"no mismatch progress at iter {it} (|mismatch|={np.linalg.norm(fx):.3e})"
            )
        if np.linalg.norm(fx) <= tol:
            return _finish_search(params_at(x), diag, True, it, with_knot, h, t_max, ode_tol)
    raise SearchError(
        f"trefoil search: |mismatch|={np.linalg.norm(fx):.3e} > {tol} after {max_iter} iterations"
    )


def _finish_search(p, diag, converged, iterations, with_knot, h, t_max, ode_tol):
    diagnostics_pass = diag.n_upper == 1 and diag.n_lower == 1
    poly = None
    label = None
    if with_knot:
        from .knots import knot_certificate

        try:
            lam = build_lambda_knot(p, diag, h=h, t_max=t_max, tol=ode_tol)
            _, _, poly, cls = knot_certificate(lam)
            label = cls.label
            diagnostics_pass = diagnostics_pass and cls.kind == "trefoil"
        except (ClosureError, NoCrossingError, Exception) as e:  # noqa: BLE001
            label = f"knot-build-failed: {e}"
            diagnostics_pass = False
    return TrefoilSearchResult(
        params=p,
        diagnostics=diag,
        converged=converged,
        diagnostics_pass=diagnostics_pass,
        iterations=iterations,
        knot_poly=poly,
        knot_class=label,
    )


# ---------------------------------------------------------------------------
# the heteroclinic knot


def _arc_length_resample(traj: Trajectory, n: int, tau_end: float | None = None) -> np.ndarray:
    """n samples of a trajectory at uniform arc-length spacing.

    Time-uniform sampling is useless here: branches spend most of their
    time in micro-scale departure from a fixed point while the visible
    curve is traced in a few time units.
    """
    if tau_end is None:
        tau_end = float(traj.t[-1])
    mask = traj.t <= tau_end
    nodes = traj.states[mask]
    taus = traj.t[mask]
    if len(nodes) < 2 or tau_end <= taus[-1]:
        end_state = traj.state_at(tau_end)
        if len(nodes) == 0 or not np.array_equal(nodes[-1], end_state):
            nodes = np.vstack([nodes, end_state[None, :]]) if len(nodes) else end_state[None, :]
            taus = np.append(taus, tau_end)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(nodes, axis=0), axis=1))])
    if arc[-1] == 0.0:
        return nodes[:1].copy()
    targets = np.linspace(0.0, arc[-1], n)
    taus_at = np.interp(targets, arc, taus)
    return np.array([traj.state_at(t) for t in taus_at])


def _truncate_at_radius(traj: Trajectory, R: float, n: int = 200) -> np.ndarray | None:
    """Arc-length samples from the start until |s| first reaches R."""
    norms = np.linalg.norm(traj.states, axis=1)
    beyond = np.nonzero(norms >= R)[0]
    if len(beyond) == 0:
        return None
    i_end = int(beyond[0])
    if i_end == 0:
        return traj.states[:1].copy()
    # refine the radius crossing on the dense segment by bisection
    i = i_end - 1
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(traj.eval_step(i, mid)) >= R:
            hi = mid
        else:
            lo = mid
    tau_end = traj.t[i] + hi * traj.h[i]
    return _arc_length_resample(traj, n, float(tau_end))


def _resample_polyline(pts: np.ndarray, max_edge: float) -> list[np.ndarray]:
    out = [pts[0]]
    for q in pts[1:]:
        prev = out[-1]
        d = float(np.linalg.norm(q - prev))
        if d > max_edge:
            n_ins = int(d / max_edge)
            for j in range(1, n_ins + 1):
                out.append(prev + (j / (n_ins + 1)) * (q - prev))
        if d > 0:
            out.append(q)
    return out


def build_lambda_knot(
    p: Params,
    diag: HeteroclinicDiagnostics,
    R: float | None = None,
    h: float = 1e-6,
    t_max: float = 400.0,
    tol: float = 1e-10,
    max_retries: int = 3,
) -> PolygonalKnot:
    """Close the union of the one-dimensional manifolds into a polygonal knot.

    Pieces: the bounded forward half (outer point to the section), the
    bounded backward half reversed (section to inner point), the unbounded
    inner tail out to |s| = R, a great-circle arc on the R-sphere, and the
    unbounded outer tail back.  R defaults to 10x the bounded-piece radius;
    if the closure arc cannot clear the curve the radius is doubled, up to
    max_retries, then ClosureError.
    """
    inner, outer = fixed_points(p)
    an_in = classify_fixed_point(p, inner)
    an_out = classify_fixed_point(p, outer)
    v_in, _ = _real_eigenvector(p, inner, an_in.gamma)
    v_out, _ = _real_eigenvector(p, outer, an_out.gamma)
    chart = SectionChart(p.a)

    # bounded halves, stopped at their (frozen-pairing) upper crossings
    def bounded_half(base, v, side, direction, t_hit):
        seed = base + side * h * v
        traj = integrate(p, seed, t_hit, tol, direction=direction)
        return _arc_length_resample(traj, 260)

    fwd = bounded_half(outer, v_out, diag.out_side, +1, diag.outer_time)
    bwd = bounded_half(inner, v_in, diag.in_side, -1, diag.inner_time)

    core = np.vstack([fwd, bwd[::-1], inner[None, :]])
    r_core = float(np.max(np.linalg.norm(core, axis=1)))
    radius = R if R is not None else 10.0 * r_core

    for attempt in range(max_retries):
        gi = grow_branch(p, f"stable-inner{'-' if diag.in_side > 0 else '+'}",
                         h, t_max, tol, escape_radius=1.5 * radius)
        go = grow_branch(p, f"unstable-outer{'-' if diag.out_side > 0 else '+'}",
                         h, t_max, tol, escape_radius=1.5 * radius)
        tail_in = _truncate_at_radius(gi.trajectory, radius)
        tail_out = _truncate_at_radius(go.trajectory, radius)
        if tail_in is None or tail_out is None:
            radius *= 2.0
            continue
        A_in = tail_in[-1] / np.linalg.norm(tail_in[-1]) * radius
        A_out = tail_out[-1] / np.linalg.norm(tail_out[-1]) * radius
        arc = _great_circle_arc(A_in, A_out, radius)
        loop = np.vstack([
            fwd,                # outer seed -> junction
            bwd[::-1],          # junction -> inner seed
            tail_in,            # inner seed -> sphere
            arc,                # sphere arc
            tail_out[::-1],     # sphere -> outer seed
        ])
        max_edge = radius / 30.0
        pts = np.array(_resample_polyline(loop, max_edge))
        knot = PolygonalKnot(
            pts,
            provenance="heteroclinic loop",
            meta={"truncation_radius": radius, "closure_arc_points": len(arc),
                  "mismatch_norm": diag.mismatch_norm},
        )
        # closure arc must clear the rest of the curve
        body = np.array(_resample_polyline(np.vstack([fwd, bwd[::-1]]), max_edge))
        clearance = min(
            float(np.min(np.linalg.norm(body[:, None, :] - arc[None, :, :], axis=2))),
            float(np.min(np.linalg.norm(tail_in[:-5, None, :] - arc[None, :, :], axis=2)))
            if len(tail_in) > 6 else np.inf,
        )
        if clearance < 0.02 * radius:
            radius *= 2.0
            continue
        return knot
    raise ClosureError(f"no clear sphere closure after {max_retries} radius doublings")


def _great_circle_arc(a: np.ndarray, b: np.ndarray, radius: float, n: int = 64) -> np.ndarray:
    na, nb = a / np.linalg.norm(a), b / np.linalg.norm(b)
    dot = float(np.clip(na @ nb, -1.0, 1.0))
    ang = math.acos(dot)
    if ang < 1e-9:
        return np.array([a, b])
    axis = np.cross(na, nb)
    norm_axis = np.linalg.norm(axis)
    if norm_axis < 1e-12:
        # antipodal: bend through a perpendicular waypoint
        probe = np.array([1.0, 0.0, 0.0]) if abs(na[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        mid = np.cross(na, probe)
        mid /= np.linalg.norm(mid)
        first = _great_circle_arc(a, mid * radius, radius, n // 2)
        second = _great_circle_arc(mid * radius, b, radius, n // 2)
        return np.vstack([first[:-1], second])
    ts = np.linspace(0.0, 1.0, n)
    pts = np.array([
        (math.sin((1 - t) * ang) * na + math.sin(t * ang) * nb) / math.sin(ang)
        for t in ts
    ])
    return pts * radius


# ---------------------------------------------------------------------------
# two-parameter scan


@dataclass
class MismatchScan:
    x_name: str
    y_name: str
    x_vals: np.ndarray
    y_vals: np.ndarray
    norms: np.ndarray                      # (nx, ny), NaN on failure
    reasons: dict[tuple[int, int], str]
    diags: dict[tuple[int, int], HeteroclinicDiagnostics]

    @property
    def finite_fraction(self) -> float:
        if self.norms.size == 0:
            return 0.0
        return float(np.mean(np.isfinite(self.norms)))

    def local_minima(self, top: int = 5) -> list[tuple[int, int]]:
        out = []
        nx, ny = self.norms.shape
        for i in range(nx):
            for j in range(ny):
                v = self.norms[i, j]
                if not np.isfinite(v):
                    continue
                neigh = []
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ii, jj = i + di, j + dj
                    if 0 <= ii < nx and 0 <= jj < ny and np.isfinite(self.norms[ii, jj]):
                        neigh.append(self.norms[ii, jj])
                if neigh and all(v <= w for w in neigh):
                    out.append(((i, j), v))
        out.sort(key=lambda kv: kv[1])
        return [ij for ij, _ in out[:top]]


def mismatch_scan(
    p0: Params,
    free: tuple[str, str],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    nx: int,
    ny: int,
    h: float = 1e-6,
    t_max: float = 200.0,
    tol: float = 1e-9,
) -> MismatchScan:
    """Heteroclinic |mismatch| over a grid of two free parameters.

    Per-node failures (no crossing, escape, wrong fixed-point types) are
    recorded in the reasons map and leave NaN in the value grid; the scan
    itself never raises.
    """
    x_vals = np.linspace(x_range[0], x_range[1], nx) if nx > 0 else np.empty(0)
    y_vals = np.linspace(y_range[0], y_range[1], ny) if ny > 0 else np.empty(0)
    cells = [(i, j) for i in range(nx) for j in range(ny)]

    def work(cell):
        i, j = cell
        pz = p0.replace(**{free[0]: float(x_vals[i]), free[1]: float(y_vals[j])})
        try:
            d = heteroclinic_mismatch(pz, h, t_max, tol)
            return cell, d, None
        except (NoCrossingError, BranchTypeError, Exception) as e:  # noqa: BLE001
            reason = getattr(e, "reason", None) or f"{type(e).__name__}: {e}"
            return cell, None, str(reason)

    norms = np.full((nx, ny), np.nan)
    reasons: dict[tuple[int, int], str] = {}
    diags: dict[tuple[int, int], HeteroclinicDiagnostics] = {}
    for cell, d, reason in map_indexed(work, cells):
        if d is not None:
            norms[cell] = d.mismatch_norm
            diags[cell] = d
        else:
            reasons[cell] = reason
    return MismatchScan(free[0], free[1], x_vals, y_vals, norms, reasons, diags)


# ---------------------------------------------------------------------------
# two-dimensional manifold coincidence (report-only diagnostic)


def coincidence_diagnostic(
    p: Params,
    ring_radius: float = 1e-3,
    n_ring: int = 8,
    t_max: float = 120.0,
    tol: float = 1e-9,
) -> dict:
    """Distance between the inner unstable surface and the outer stable plane.

    A fundamental ring on the inner point's spiral (unstable) plane is
    integrated forward; at each trajectory's closest approach to the outer
    point, the distance to the outer stable plane (spanned by its spiral
    eigenvectors) is recorded.  Report-only: coincidence of the
    two-dimensional manifolds is diagnosed, never enforced.
    """
    inner, outer = fixed_points(p)
    an_in = classify_fixed_point(p, inner)
    an_out = classify_fixed_point(p, outer)
    J_in = jacobian(p, inner)
    J_out = jacobian(p, outer)

    def spiral_plane(J, lam):
        A = J - lam.real * np.eye(3)
        B = A @ A + (lam.imag ** 2) * np.eye(3)
        _, _, vt = np.linalg.svd(B)
        return vt[-1], vt[-2]

    u1, u2 = spiral_plane(J_in, an_in.eigenvalues[1])
    s1, s2 = spiral_plane(J_out, an_out.eigenvalues[1])
    normal = np.cross(s1, s2)
    normal /= np.linalg.norm(normal)

    dists = []
    for theta in np.linspace(0, 2 * np.pi, n_ring, endpoint=False):
        seed = inner + ring_radius * (math.cos(theta) * u1 + math.sin(theta) * u2)
        traj = integrate(p, seed, t_max, tol)
        d_out = np.linalg.norm(traj.states - outer, axis=1)
        i_close = int(np.argmin(d_out))
        plane_dist = abs(float((traj.states[i_close] - outer) @ normal))
        dists.append((float(d_out[i_close]), plane_dist))
    approach = [d for d, _ in dists]
    plane = [q for _, q in dists]
    return {
        "n_ring": n_ring,
        "ring_radius": ring_radius,
        "median_closest_approach": float(np.median(approach)),
        "median_plane_distance": float(np.median(plane)),
        "max_plane_distance": float(np.max(plane)),
    }
