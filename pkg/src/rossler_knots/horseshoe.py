"""Symbolic dynamics on the return map.

Itinerary coding against a fold-based binary partition, topological
horseshoe verification by strip-crossing counts, periodic-orbit solving
per symbol word (multiple-shooting Newton), the planar fixed-point index
(winding number of f(x) - x), and index/knot persistence under parameter
perturbation.

The partition is a proxy: the fold abscissa of the induced one-dimensional
map stands in for the exact preimage curve that splits the domain, which
has no constructive description.  Itinerary consistency checks guard it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Params
from .errors import (
    ItineraryError,
    NoCrossingError,
    NotUnimodalError,
    OrbitSolveError,
    RefinementLimitError,
    SearchError,
    WordError,
    ZeroDisplacementError,
)
from .integrator import integrate
from .knots import PolygonalKnot
from .section import (
    UPPER,
    GridResult,
    ReturnMapSample,
    SectionChart,
    SectionPoint,
    crossings_of,
    first_return,
)
from .words import is_primitive, rotations, validate_word

__all__ = [
    "PartitionModel",
    "calibrate_partition",
    "attractor_samples",
    "itinerary",
    "Rectangle",
    "HorseshoeReport",
    "verify_topological_horseshoe",
    "affine_horseshoe",
    "AFFINE_STRIPS",
    "affine_horseshoe_periodic_point",
    "affine_horseshoe_itinerary",
    "newton_fixed_point",
    "synthetic_horseshoe_selftest",
    "PeriodicOrbit",
    "find_periodic_orbit",
    "orbit_curve",
    "IndexResult",
    "circle_loop",
    "fixed_point_index",
    "PersistenceReport",
    "persistence_check",
]

DEFAULT_SETTLE_STATE = (0.0, -5.0, 0.02)
DEFAULT_SETTLE_TIME = 300.0


# ---------------------------------------------------------------------------
# partition


@dataclass(frozen=True)
class PartitionModel:
    """Binary partition of the return domain at the fold abscissa.

    symbol '1' is u < fold_u, '2' is u >= fold_u.  orientation records
    whether the induced map attains a maximum or a minimum at the fold.
    """

    fold_u: float
    orientation: str
    u_range: tuple[float, float]

    def symbol(self, u: float) -> str:
        return "1" if u < self.fold_u else "2"

    def word_of(self, us) -> str:
        return "".join(self.symbol(float(u)) for u in us)


def _local_quadratic_fit(us: np.ndarray, vs: np.ndarray, window: int):
    """Callable evaluating a moving local quadratic least-squares fit."""
    order = np.argsort(us)
    us = us[order]
    vs = vs[order]
    n = len(us)
    window = max(5, min(window, n))

    def f(x: float) -> float:
        i = int(np.searchsorted(us, x))
        lo = max(0, min(n - window, i - window // 2))
        uu = us[lo: lo + window] - x
        vv = vs[lo: lo + window]
        A = np.stack([np.ones_like(uu), uu, uu * uu], axis=1)
        coef, *_ = np.linalg.lstsq(A, vv, rcond=None)
        return float(coef[0])

    return f


def calibrate_partition(samples) -> PartitionModel:
    """Fold abscissa of the induced map u -> u' fitted along the samples.

    samples: a GridResult or an iterable of ReturnMapSample (>= 100 needed).
    The fitted one-dimensional map must have exactly one interior extremum
    (maximum or minimum); the abscissa is refined by golden-section search
    on the local quadratic fit.  NotUnimodalError otherwise.
    """
    if isinstance(samples, GridResult):
        samples = list(samples.samples.values())
    else:
        samples = list(samples)
    if len(samples) < 100:
        raise ValueError(f"need >= 100 successful samples, got {len(samples)}")
    us = np.array([s.in_point.u for s in samples])
    vs = np.array([s.out_point.u for s in samples])
    fit = _local_quadratic_fit(us, vs, window=max(9, len(us) // 12))

    u_lo, u_hi = float(us.min()), float(us.max())
    pad = 0.02 * (u_hi - u_lo)
    grid = np.linspace(u_lo + pad, u_hi - pad, 96)
    fg = np.array([fit(x) for x in grid])

    scale = float(fg.max() - fg.min())
    if scale <= 0:
        raise NotUnimodalError("induced map is constant")
    du = grid[1] - grid[0]
    slope_floor = 0.02 * scale / (grid[-1] - grid[0])
    slopes = np.diff(fg) / du
    signs = [int(np.sign(s)) for s in slopes if abs(s) > slope_floor]
    runs = [s for i, s in enumerate(signs) if i == 0 or s != signs[i - 1]]
    if len(runs) != 2:
        raise NotUnimodalError(
            f"induced map is not unimodal on [{u_lo:.4g}, {u_hi:.4g}] "
            f"(slope sign pattern {runs})"
        )
    orientation = "max" if runs == [1, -1] else "min"
    g = (lambda x: -fit(x)) if orientation == "min" else fit

    # golden-section maximization around the coarse extremum
    i0 = int(np.argmax(fg)) if orientation == "max" else int(np.argmin(fg))
    a = grid[max(0, i0 - 4)]
    b = grid[min(len(grid) - 1, i0 + 4)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(200):
        if b - a < 1e-10:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
    return PartitionModel(fold_u=0.5 * (a + b), orientation=orientation, u_range=(u_lo, u_hi))


def attractor_samples(
    p: Params,
    n: int,
    tol: float = 1e-9,
    settle_state=DEFAULT_SETTLE_STATE,
    settle_time: float = DEFAULT_SETTLE_TIME,
) -> list[ReturnMapSample]:
    """n consecutive return-map samples along the attractor.

    Integrates one long trajectory and reads off consecutive upper
    crossings (one integration, not n separate return solves).
    """
    chart = SectionChart(p.a)
    s = integrate(p, settle_state, settle_time, tol).end_state
    out: list[ReturnMapSample] = []
    prev: SectionPoint | None = None
    prev_tau = 0.0
    lowers = 0
    elapsed = 0.0
    guard = 0
    while len(out) < n and guard < 200:
        guard += 1
        traj = integrate(p, s, 50.0, tol)
        for cr in crossings_of(traj, skip_initial=True):
            if cr.side != UPPER:
                lowers += 1
                continue
            pt = SectionPoint.make(chart, cr.state[0], cr.state[2])
            tau = elapsed + cr.tau
            if prev is not None:
                out.append(
                    ReturnMapSample(
                        in_point=prev,
                        out_point=pt,
                        return_time=tau - prev_tau,
                        transversality_margin=cr.margin,
                        lower_crossings=lowers,
                    )
                )
                if len(out) >= n:
                    break
            prev, prev_tau = pt, tau
            lowers = 0
        if traj.termination != "time":
            raise NoCrossingError(f"attractor sampling interrupted: {traj.termination}")
        elapsed += traj.end_time
        s = traj.end_state
    return out


def itinerary(
    p: Params,
    q: SectionPoint,
    n: int,
    model: PartitionModel,
    t_max: float = 1e3,
    tol: float = 1e-9,
) -> str:
    """n symbols of the forward itinerary of q under the return map."""
    if n < 1:
        raise ValueError("need n >= 1 symbols")
    word = model.symbol(q.u)
    cur = q
    for _ in range(n - 1):
        try:
            cur = first_return(p, cur, t_max, tol).out_point
        except NoCrossingError as e:
            raise ItineraryError(f"itinerary interrupted: {e}", prefix=word) from e
        word += model.symbol(cur.u)
    return word


# ---------------------------------------------------------------------------
# topological horseshoe verification


@dataclass(frozen=True)
class Rectangle:
    """Parallelogram ABCD: AB and CD are the exit sides, AC and BD the walls.

    Frame coordinates: point = A + s_h (B - A) + s_v (C - A); strips are
    horizontal bands in s_v connecting the AC (s_h = 0) and BD (s_h = 1)
    sides; images must stretch across s_v from the AB side to the CD side.
    """

    A: tuple[float, float]
    B: tuple[float, float]
    C: tuple[float, float]

    @property
    def D(self) -> tuple[float, float]:
        return (self.B[0] + self.C[0] - self.A[0], self.B[1] + self.C[1] - self.A[1])

    def to_plane(self, sh: float, sv: float) -> tuple[float, float]:
        ax, ay = self.A
        return (
            ax + sh * (self.B[0] - ax) + sv * (self.C[0] - ax),
            ay + sh * (self.B[1] - ay) + sv * (self.C[1] - ay),
        )

    def to_frame(self, pt) -> tuple[float, float]:
        ax, ay = self.A
        m = np.array(
            [[self.B[0] - ax, self.C[0] - ax], [self.B[1] - ay, self.C[1] - ay]]
        )
        sh, sv = np.linalg.solve(m, np.array([pt[0] - ax, pt[1] - ay]))
        return float(sh), float(sv)


@dataclass
class HorseshoeReport:
    valid: bool
    crossing_ok: dict[int, bool]
    meets_ok: dict[tuple[int, int], bool]
    witnesses: dict[str, tuple[float, float]]
    eval_failures: int
    probes: int

    @property
    def passed(self) -> bool:
        return self.valid and all(self.crossing_ok.values()) and all(self.meets_ok.values())


def verify_topological_horseshoe(
    map_fn,
    rect: Rectangle,
    strips: list[tuple[float, float]],
    n_edge: int = 500,
    n_fibers: int = 5,
    slack: float = 1e-9,
) -> HorseshoeReport:
    """Check the two strip-crossing conditions of a topological horseshoe.

    (i) the image of every strip crosses the rectangle from the AB side to
    the CD side: for a transverse fiber of the strip (s_h fixed, s_v across
    the band), the image polyline must contain a contiguous arc inside the
    walls whose s_v spans from <= slack to >= 1 - slack.  Checked on
    n_fibers fibers per strip, each sampled with n_edge (>= 500) points.
    (ii) the image of every strip meets every strip, probed on the fiber
    images plus the strip's long boundary edges.  Witness points are
    recorded; evaluation failures over 1% of probe points invalidate the
    report.
    """
    n_edge = max(n_edge, 500)
    failures = 0
    probes = 0
    crossing_ok: dict[int, bool] = {}
    meets_ok: dict[tuple[int, int], bool] = {}
    witnesses: dict[str, tuple[float, float]] = {}
    images: dict[int, list[tuple[float, float]]] = {}

    def image_polyline(points):
        nonlocal failures, probes
        out = []
        for sh, sv in points:
            probes += 1
            try:
                img = map_fn(rect.to_plane(float(sh), float(sv)))
                out.append(rect.to_frame(img))
            except Exception:
                failures += 1
                out.append(None)
        return out

    for si, (v_lo, v_hi) in enumerate(strips):
        strip_img: list[tuple[float, float]] = []
        fiber_pass = []
        for sh in np.linspace(0.0, 1.0, n_fibers):
            fiber = [(sh, sv) for sv in np.linspace(v_lo, v_hi, n_edge)]
            pts = image_polyline(fiber)
            strip_img.extend(pt for pt in pts if pt is not None)
            ok = False
            run: list[tuple[float, float]] = []
            for pt in pts + [None]:
                inside = pt is not None and -slack <= pt[0] <= 1.0 + slack
                if inside:
                    run.append(pt)
                else:
                    if run:
                        svs = [q[1] for q in run]
                        if min(svs) <= slack and max(svs) >= 1.0 - slack:
                            ok = True
                            witnesses[f"strip{si}-crossing"] = run[len(run) // 2]
                    run = []
            fiber_pass.append(ok)
        for sv_edge in (v_lo, v_hi):
            edge = [(sh, sv_edge) for sh in np.linspace(0.0, 1.0, n_edge)]
            strip_img.extend(pt for pt in image_polyline(edge) if pt is not None)
        crossing_ok[si] = all(fiber_pass)
        images[si] = strip_img

    for si in range(len(strips)):
        for sj, (v_lo, v_hi) in enumerate(strips):
            hit = None
            for sh, sv in images[si]:
                if -slack <= sh <= 1.0 + slack and v_lo - slack <= sv <= v_hi + slack:
                    hit = (sh, sv)
                    break
            meets_ok[(si, sj)] = hit is not None
            if hit is not None:
                witnesses[f"image{si}-meets-strip{sj}"] = hit

    valid = failures <= 0.01 * probes
    return HorseshoeReport(valid, crossing_ok, meets_ok, witnesses, failures, probes)


# ---------------------------------------------------------------------------
# the synthetic affine horseshoe (self-test fixture)

AFFINE_STRIPS = [(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]


def affine_horseshoe(uv):
    """Piecewise-affine horseshoe on the unit square.

    Lower third: contract x by 3, expand y by 3.  Upper third: fold to the
    right ear, reversing the contracting direction only, so every periodic
    point is a direct saddle (index -1).  The middle third is the fold cap,
    mapped above the square.
    """
    x, y = float(uv[0]), float(uv[1])
    if y <= 1.0 / 3.0:
        return (x / 3.0, 3.0 * y)
    if y >= 2.0 / 3.0:
        return (1.0 - x / 3.0, 3.0 * y - 2.0)
    s = 3.0 * y - 1.0
    return (x / 3.0 + s * (1.0 - 2.0 * x / 3.0), 1.0 + 2.0 * s * (1.0 - s) + 0.1)


def affine_horseshoe_periodic_point(word: str) -> tuple[float, float]:
    """Closed-form periodic point of the affine horseshoe with the given itinerary.

    x and y decouple into affine one-dimensional maps; the composition over
    the word has a unique fixed point in each coordinate.
    """
    validate_word(word)
    ax, bx = 1.0, 0.0
    ay, by = 1.0, 0.0
    for ch in word:
        if ch == "1":
            ax, bx = ax / 3.0, bx / 3.0
            ay, by = 3.0 * ay, 3.0 * by
        else:
            ax, bx = -ax / 3.0, 1.0 - bx / 3.0
            ay, by = 3.0 * ay, 3.0 * by - 2.0
    return (bx / (1.0 - ax), by / (1.0 - ay))


def newton_fixed_point(map_fn, k: int, seed, residual_tol: float = 1e-10,
                       max_iter: int = 50) -> tuple[float, float]:
    """Damped Newton for map^k(z) = z from a seed; raises SearchError."""

    def fk(z):
        out = (float(z[0]), float(z[1]))
        for _ in range(k):
            out = map_fn(out)
        return np.asarray(out, dtype=float)

    z = np.asarray(seed, dtype=float)
    for _ in range(max_iter):
        r = fk(z) - z
        if np.linalg.norm(r) <= residual_tol:
            return (float(z[0]), float(z[1]))
        h = 1e-7
        J = np.empty((2, 2))
        for col in range(2):
            e = np.zeros(2)
            e[col] = h
            J[:, col] = (fk(z + e) - fk(z - e)) / (2 * h)
        step = np.linalg.solve(J - np.eye(2), -r)
        lam, nxt = 1.0, None
        for _ in range(10):
            trial = z + lam * step
            if np.linalg.norm(fk(trial) - trial) < np.linalg.norm(r):
                nxt = trial
                break
            lam /= 2.0
        if nxt is None:
            raise SearchError(f"Newton stalled at residual {np.linalg.norm(r):.3e}")
        z = nxt
    raise SearchError(f"no fixed point of map^{k} near {seed} after {max_iter} iterations")


def affine_horseshoe_itinerary(z, k: int) -> str:
    """k symbols of an affine-horseshoe orbit (strip membership per step)."""
    word = ""
    for _ in range(k):
        word += "1" if z[1] <= 0.5 else "2"
        z = affine_horseshoe(z)
    return word


def synthetic_horseshoe_selftest(max_len: int = 6) -> dict:
    """Full self-test of the synthetic affine horseshoe.

    Verifies the two strip-crossing conditions, then for every primitive
    necklace class of length <= max_len: Newton-confirms the closed-form
    periodic point, checks its itinerary and minimal period, and computes
    its fixed-point index (a direct saddle, so -1, for every class).  Class
    totals are compared against brute-force necklace counts enumerated from
    all binary words.
    """
    from itertools import product as iproduct

    from .words import canonical_necklace, is_primitive

    rect = Rectangle((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    verification = verify_topological_horseshoe(affine_horseshoe, rect, AFFINE_STRIPS)

    def brute_necklaces(k: int) -> set[str]:
        return {
            canonical_necklace("".join(w))
            for w in iproduct("12", repeat=k)
            if is_primitive("".join(w))
        }

    words_report: dict[str, dict] = {}
    found_counts: dict[int, int] = {}
    necklace_counts: dict[int, int] = {}
    all_minus_one = True
    for k in range(1, max_len + 1):
        classes = brute_necklaces(k)
        necklace_counts[k] = len(classes)
        found = 0
        for w in sorted(classes):
            seed = affine_horseshoe_periodic_point(w)
            pt = newton_fixed_point(affine_horseshoe, k, seed, residual_tol=1e-12)
            itin = affine_horseshoe_itinerary(pt, k)
            itin_ok = canonical_necklace(itin) == w
            # minimal period: no proper divisor return
            zz = pt
            minimal = True
            for d in range(1, k):
                zz = affine_horseshoe(zz)
                if k % (d) == 0 and d < k and np.hypot(zz[0] - pt[0], zz[1] - pt[1]) < 1e-9:
                    minimal = False
            # orbit distance to the branch boundary limits the loop radius
            ys = []
            z = pt
            for _ in range(k):
                ys.append(z[1])
                z = affine_horseshoe(z)
            bdist = min(min(abs(y - 1.0 / 3.0), abs(y - 2.0 / 3.0)) for y in ys)
            radius = 0.4 * bdist * 3.0 ** (-k)
            idx = fixed_point_index(affine_horseshoe, circle_loop(pt, radius), k=k)
            ok = itin_ok and minimal
            if ok:
                found += 1
            if idx.index != -1:
                all_minus_one = False
            words_report[w] = {
                "point": pt,
                "itinerary_ok": itin_ok,
                "minimal_period": minimal,
                "index": idx.index,
                "loop_radius": radius,
            }
        found_counts[k] = found
    return {
        "verification": verification,
        "words": words_report,
        "found_counts": found_counts,
        "necklace_counts": necklace_counts,
        "counts_match": found_counts == necklace_counts,
        "all_indices_minus_one": all_minus_one,
    }


# ---------------------------------------------------------------------------
# periodic orbits of the flow (multiple shooting)


@dataclass
class PeriodicOrbit:
    """Solved periodic orbit of the return map with word-length unknowns."""

    word: str                      # requested word
    observed_word: str | None      # itinerary at the solution (None: no model)
    points: np.ndarray             # (k, 2) section points, one per shift
    period: float
    segment_times: np.ndarray      # (k,) per-segment return times
    residual: float
    multipliers: tuple[complex, complex]
    segment_jacobians: list[np.ndarray]
    status: str                    # "ok" | "wrong-itinerary"
    params: Params

    @property
    def k(self) -> int:
        return len(self.points)


def _return_uw(p: Params, uw, t_max: float, tol: float):
    chart = SectionChart(p.a)
    q = SectionPoint.make(chart, float(uw[0]), float(uw[1]))
    s = first_return(p, q, t_max, tol)
    return np.array([s.out_point.u, s.out_point.w]), s.return_time


def _seed_from_attractor(p: Params, word: str, model: PartitionModel | None,
                         tol: float) -> tuple[list[np.ndarray], PartitionModel]:
    k = len(word)
    n = max(200, 60 * k)
    samples = attractor_samples(p, n, tol=1e-9)
    if model is None:
        model = calibrate_partition(samples)
    us = [s.in_point.u for s in samples]
    symbols = model.word_of(us)
    pad = min(2 * k + 4, len(symbols) - k)
    want = (word * ((pad // k) + 2))[:pad]
    for i in range(len(symbols) - pad):
        if symbols[i: i + pad] == want:
            pts = [np.array([samples[i + j].in_point.u, samples[i + j].in_point.w])
                   for j in range(k)]
            return pts, model
    raise OrbitSolveError(
        f"no attractor segment shadows word {word!r}; supply explicit seeds"
    )


def find_periodic_orbit(
    p: Params,
    word: str,
    seeds=None,
    *,
    model: PartitionModel | None = None,
    tol: float = 1e-11,
    t_max: float = 1e3,
    max_iter: int = 30,
    residual_tol: float = 1e-10,
) -> PeriodicOrbit:
    """Multiple-shooting Newton for the periodic orbit of a symbol word.

    Unknowns are the k section points; equations match each first return to
    the next point and close the loop.  The Newton system uses central
    finite-difference Jacobians and damped steps.  Non-convergence raises
    OrbitSolveError; convergence onto an orbit whose itinerary differs from
    the requested word is returned labeled status="wrong-itinerary".
    """
    validate_word(word)
    if not is_primitive(word):
        raise WordError(f"word {word!r} is not of minimal period")
    k = len(word)
    if seeds is None:
        seeds, model = _seed_from_attractor(p, word, model, tol)
    Z = np.array([[float(s[0]), float(s[1])] for s in seeds], dtype=float)
    if Z.shape != (k, 2):
        raise ValueError(f"need {k} seed points, got {Z.shape}")

    times = np.zeros(k)

    def residual_vec(Zc):
        R = np.empty((k, 2))
        T = np.empty(k)
        for j in range(k):
            R[j], T[j] = _return_uw(p, Zc[j], t_max, tol)
        F = R - np.roll(Zc, -1, axis=0)
        return F.reshape(-1), R, T

    F, R, times = residual_vec(Z)
    jac_blocks: list[np.ndarray] = [np.eye(2) for _ in range(k)]
    for it in range(max_iter):
        fnorm = np.max(np.abs(F))
        if fnorm <= residual_tol:
            break
        # block Jacobian by central differences
        J = np.zeros((2 * k, 2 * k))
        for j in range(k):
            B = np.empty((2, 2))
            for col in range(2):
                h = 1e-6 * (1.0 + abs(Z[j, col]))
                e = np.zeros(2)
                e[col] = h
                rp, _ = _return_uw(p, Z[j] + e, t_max, tol)
                rm, _ = _return_uw(p, Z[j] - e, t_max, tol)
                B[:, col] = (rp - rm) / (2 * h)
            jac_blocks[j] = B
            J[2 * j: 2 * j + 2, 2 * j: 2 * j + 2] = B
            nxt = (j + 1) % k
            J[2 * j: 2 * j + 2, 2 * nxt: 2 * nxt + 2] -= np.eye(2)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as e:
            raise OrbitSolveError(f"singular shooting Jacobian at iter {it}: {e}") from e
        lam = 1.0
        improved = False
        for _ in range(8):
            Zt = Z + lam * step.reshape(k, 2)
            try:
                Ft, Rt, Tt = residual_vec(Zt)
            except NoCrossingError:
                lam /= 2.0
                continue
            if np.max(np.abs(Ft)) < fnorm:
                Z, F, R, times = Zt, Ft, Rt, Tt
                improved = True
                break
            lam /= 2.0
        if not improved:
            raise OrbitSolveError(
                f"no Newton progress for word {word!r} at iter {it} (residual {fnorm:.3e})"
            )
    else:
        raise OrbitSolveError(
            f"word {word!r}: residual {np.max(np.abs(F)):.3e} after {max_iter} iterations"
        )

    resid = float(np.max(np.abs(F)))
    # minimal-period / distinctness check
    status = "ok"
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(Z[i] - Z[j]) < 1e-6:
                status = "wrong-itinerary"
    observed = None
    if model is not None:
        observed = model.word_of(Z[:, 0])
        if observed not in rotations(word):
            status = "wrong-itinerary"

    M = np.eye(2)
    for B in jac_blocks:
        M = B @ M
    mult = np.linalg.eigvals(M)
    return PeriodicOrbit(
        word=word,
        observed_word=observed,
        points=Z,
        period=float(np.sum(times)),
        segment_times=times.copy(),
        residual=resid,
        multipliers=(complex(mult[0]), complex(mult[1])),
        segment_jacobians=jac_blocks,
        status=status,
        params=p,
    )


def orbit_curve(orbit: PeriodicOrbit, tol: float = 1e-10, points_per_lap: int = 240) -> PolygonalKnot:
    """The closed 3-space curve of a solved orbit, resampled densely."""
    p = orbit.params
    chart = SectionChart(p.a)
    verts: list[np.ndarray] = []
    for j in range(orbit.k):
        s0 = chart.to_state(orbit.points[j, 0], orbit.points[j, 1])
        traj = integrate(p, s0, 1.2 * float(orbit.segment_times[j]), tol)
        crs = crossings_of(traj, want_side=UPPER, skip_initial=True, max_count=1)
        if not crs:
            raise OrbitSolveError("orbit segment lost the section crossing")
        tau_end = crs[0].tau
        taus = np.linspace(0.0, tau_end, points_per_lap, endpoint=False)
        verts.extend(traj.state_at(t) for t in taus)
    return PolygonalKnot(np.array(verts), provenance="ODE orbit")


# ---------------------------------------------------------------------------
# fixed-point index


@dataclass(frozen=True)
class IndexResult:
    index: int
    k: int
    min_displacement: float
    n_points: int
    loop: np.ndarray


def circle_loop(center, radius: float, n: int = 32) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.stack(
        [center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)], axis=1
    )


def fixed_point_index(
    map_fn,
    loop: np.ndarray,
    k: int = 1,
    noise_floor: float = 0.0,
    max_points: int = 1 << 17,
) -> IndexResult:
    """Winding number of v(x) = map^k(x) - x around 0 along the loop.

    The polyline is refined adaptively until every turning increment of
    arg v is below pi/2, which pins the winding number of a continuous v
    without derivative bounds.  ZeroDisplacementError if a loop point has
    |v| <= 10 * noise_floor (or exactly 0); RefinementLimitError if the
    refinement budget is exhausted.
    """

    def fk(z):
        out = (float(z[0]), float(z[1]))
        for _ in range(k):
            out = map_fn(out)
        return out

    pts: list[np.ndarray] = [np.asarray(q, dtype=float) for q in loop]
    if len(pts) < 3:
        raise ValueError("loop needs at least 3 vertices")

    def v_of(q):
        img = fk(q)
        return np.array([img[0] - q[0], img[1] - q[1]])

    vs = [v_of(q) for q in pts]

    def guard(v):
        m = float(np.hypot(v[0], v[1]))
        if m <= 10.0 * noise_floor or m == 0.0:
            raise ZeroDisplacementError(
                f"fixed point on (or too near) the index loop: |v| = {m:.3e}"
            )
        return m

    min_disp = min(guard(v) for v in vs)
    while True:
        angles = [math.atan2(v[1], v[0]) for v in vs]
        bad: list[int] = []
        total = 0.0
        n = len(pts)
        for i in range(n):
            d = angles[(i + 1) % n] - angles[i]
            while d <= -math.pi:
                d += 2.0 * math.pi
            while d > math.pi:
                d -= 2.0 * math.pi
            total += d
            if abs(d) >= math.pi / 2.0:
                bad.append(i)
        if not bad:
            idx = total / (2.0 * math.pi)
            nearest = round(idx)
            if abs(idx - nearest) > 1e-6:
                raise RefinementLimitError(f"winding sum {idx} is not an integer")
            return IndexResult(
                index=int(nearest),
                k=k,
                min_displacement=min_disp,
                n_points=len(pts),
                loop=np.array(pts),
            )
        if len(pts) + len(bad) > max_points:
            raise RefinementLimitError(f"index refinement exceeded {max_points} points")
        for count, i in enumerate(bad):
            pos = i + count + 1
            nxt = pts[pos] if pos < len(pts) else pts[0]
            mid = 0.5 * (pts[pos - 1] + nxt)
            v = v_of(mid)
            min_disp = min(min_disp, guard(v))
            pts.insert(pos, mid)
            vs.insert(pos, v)


# ---------------------------------------------------------------------------
# persistence under parameter perturbation


@dataclass
class PersistenceReport:
    index_before: int
    index_after: int
    poly_before: object
    poly_after: object
    index_preserved: bool
    certificate_preserved: bool
    steps: list[tuple[float, bool]]     # (fraction of dp reached, converged)
    step_checks: list[dict]             # per accepted step when requested
    orbit_after: PeriodicOrbit
    loop_radius: float


def _orbit_index(p: Params, orbit_points: np.ndarray, k: int, radius: float,
                 tol: float, t_max: float) -> IndexResult:
    def f(uw):
        out, _ = _return_uw(p, uw, t_max, tol)
        return (float(out[0]), float(out[1]))

    loop = circle_loop(orbit_points[0], radius, n=24)
    return fixed_point_index(f, loop, k=k, noise_floor=1e3 * tol)


def persistence_check(
    p: Params,
    orbit: PeriodicOrbit,
    dp: tuple[float, float, float],
    *,
    tol: float = 1e-11,
    t_max: float = 1e3,
    dp_floor: float = 1e-12,
    first_step: float = 1.0,
    check_each_step: bool = False,
) -> PersistenceReport:
    """Continue an orbit to p + dp; compare index and knot certificate.

    The continuation marches in fractions of dp starting at first_step,
    halving on failure until success or the floor; SearchError when the
    full dp cannot be reached.  With check_each_step, the index and the
    Alexander certificate are evaluated at every accepted intermediate
    parameter, not just the endpoints.  The loop radius is residual-scaled
    and checked fixed-point free via the displacement guard.
    """
    from .knots import knot_certificate

    z0 = orbit.points[0]
    radius = 10.0 * math.sqrt(max(orbit.residual, 1e-14)) * (1.0 + float(np.linalg.norm(z0)))
    idx_before = _orbit_index(p, orbit.points, orbit.k, radius, tol, t_max)
    _, _, poly_before, _ = knot_certificate(orbit_curve(orbit))

    dp = np.asarray(dp, dtype=float)
    frac_done = 0.0
    frac_step = float(first_step)
    current = orbit
    cur_p = p
    steps: list[tuple[float, bool]] = []
    step_checks: list[dict] = []
    while frac_done < 1.0 - 1e-15:
        frac_step = min(frac_step, 1.0 - frac_done)
        target = Params(*(np.array(p.astuple()) + (frac_done + frac_step) * dp))
        try:
            cont = find_periodic_orbit(
                target,
                current.word,
                seeds=current.points,
                tol=tol,
                t_max=t_max,
                residual_tol=max(1e-10, 10 * orbit.residual),
            )
            steps.append((frac_done + frac_step, True))
            frac_done += frac_step
            current = cont
            cur_p = target
            if check_each_step:
                idx_i = _orbit_index(cur_p, current.points, current.k, radius, tol, t_max)
                _, _, poly_i, _ = knot_certificate(orbit_curve(current))
                step_checks.append({
                    "fraction": frac_done,
                    "index": idx_i.index,
                    "poly": poly_i,
                })
        except (OrbitSolveError, NoCrossingError):
            steps.append((frac_done + frac_step, False))
            frac_step /= 2.0
            if frac_step * float(np.linalg.norm(dp)) < dp_floor:
                raise SearchError(
                    f"continuation stalled at fraction {frac_done:.6f} of dp"
                ) from None

    idx_after = _orbit_index(cur_p, current.points, current.k, radius, tol, t_max)
    _, _, poly_after, _ = knot_certificate(orbit_curve(current))
    return PersistenceReport(
        index_before=idx_before.index,
        index_after=idx_after.index,
        poly_before=poly_before,
        poly_after=poly_after,
        index_preserved=idx_before.index == idx_after.index,
        certificate_preserved=poly_before == poly_after,
        steps=steps,
        step_checks=step_checks,
        orbit_after=current,
        loop_radius=radius,
    )
