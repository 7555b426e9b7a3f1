"""Knot classification of closed polygonal curves.

Pipeline: generic planar projection -> signed Gauss code -> Reidemeister
I/II reduction -> Alexander polynomial (exact integer arithmetic) ->
match against torus-knot polynomials.  Also contains the braid machinery:
geometric braid closures and the word -> braid construction on the Lorenz
0-1 template (untwisted ear for symbol 1, half-twisted ear for symbol 2).

The Alexander polynomial is a certificate, not a complete invariant:
"trefoil-compatible" means the polynomial matches, nothing stronger.  All
chirality statements are up to a global mirror, which the certificate
cannot see.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DiagramError, GenericityError, WordError
from .laurent import LaurentPoly, bareiss_det, torus_alexander
from .words import is_primitive, rotations, sort_unimodal, validate_word

__all__ = [
    "PolygonalKnot",
    "CrossingDiagram",
    "GaussEntry",
    "BraidWord",
    "project",
    "simplify",
    "alexander",
    "identify",
    "Classification",
    "braid_to_knot",
    "lorenz_word_to_braid",
    "template_knot_certificate",
    "knot_certificate",
]


# ---------------------------------------------------------------------------
# curves


@dataclass
class PolygonalKnot:
    """Closed polygonal curve in 3-space; closure edge last->first is implicit.

    meta carries construction facts (e.g. truncation radius and closure-arc
    size for heteroclinic loops) that reports echo verbatim.
    """

    vertices: np.ndarray
    provenance: str = "synthetic"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 3:
            raise ValueError("need an (N, 3) array with N >= 3")
        # drop exact duplicates of consecutive vertices (incl. wrap)
        keep = np.ones(len(v), dtype=bool)
        for i in range(len(v)):
            if np.array_equal(v[i], v[(i + 1) % len(v)]):
                keep[i] = False
        v = v[keep]
        if len(v) < 3:
            raise ValueError("degenerate curve")
        self.vertices = v

    @property
    def n(self) -> int:
        return len(self.vertices)

    def min_vertex_spacing(self) -> float:
        v = self.vertices
        d = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        return float(d.min())

    def segment_clearance(self) -> float:
        """Minimum distance between non-adjacent segments (simplicity report)."""
        v = self.vertices
        n = len(v)
        best = np.inf
        for i in range(n):
            a0, a1 = v[i], v[(i + 1) % n]
            js = [j for j in range(i + 2, n) if not (i == 0 and j == n - 1)]
            for j in js:
                b0, b1 = v[j], v[(j + 1) % n]
                best = min(best, _segment_distance(a0, a1, b0, b1))
        return float(best)

    def resample_midpoints(self) -> "PolygonalKnot":
        v = self.vertices
        mids = 0.5 * (v + np.roll(v, -1, axis=0))
        out = np.empty((2 * len(v), 3))
        out[0::2] = v
        out[1::2] = mids
        return PolygonalKnot(out, self.provenance)

    @staticmethod
    def circle(n: int = 64, radius: float = 1.0) -> "PolygonalKnot":
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        v = np.stack([radius * np.cos(th), radius * np.sin(th), np.zeros(n)], axis=1)
        return PolygonalKnot(v, "synthetic")

    @staticmethod
    def parametric_trefoil(n: int = 200) -> "PolygonalKnot":
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        v = np.stack(
            [np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)],
            axis=1,
        )
        return PolygonalKnot(v, "synthetic")


def _segment_distance(a0, a1, b0, b1) -> float:
    """Distance between two 3-D segments."""
    u = a1 - a0
    v = b1 - b0
    w = a0 - b0
    uu, vv, uv = u @ u, v @ v, u @ v
    wu, wv = w @ u, w @ v
    den = uu * vv - uv * uv
    if den > 1e-14 * max(uu * vv, 1e-300):
        s = (uv * wv - vv * wu) / den
        t = (uu * wv - uv * wu) / den
    else:
        s, t = 0.0, wv / vv if vv > 0 else 0.0
    s = min(1.0, max(0.0, s))
    t = min(1.0, max(0.0, t))
    # clamped candidates: re-project each clamped parameter
    best = np.inf
    for ss, tt in ((s, t), (0.0, None), (1.0, None), (None, 0.0), (None, 1.0)):
        if ss is None:
            tt_ = tt
            ss_ = max(0.0, min(1.0, (tt_ * uv + wu) / uu if uu > 0 else 0.0))
        elif tt is None:
            ss_ = ss
            tt_ = max(0.0, min(1.0, (ss_ * uv - wv) / vv if vv > 0 else 0.0))
        else:
            ss_, tt_ = ss, tt
        d = np.linalg.norm(w + ss_ * u - tt_ * v)
        best = min(best, d)
    return float(best)


# ---------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class GaussEntry:
    crossing: int
    over: bool
    sign: int


@dataclass
class CrossingDiagram:
    """Signed Gauss code, with optional plane geometry for rendering."""

    entries: tuple[GaussEntry, ...]
    direction: np.ndarray | None = None
    positions: dict[int, np.ndarray] = field(default_factory=dict)
    plane_points: np.ndarray | None = None      # projected vertices (N, 2)
    crossing_segments: dict[int, tuple[tuple[int, float], tuple[int, float]]] = field(
        default_factory=dict
    )  # crossing -> ((over_seg, over_t), (under_seg, under_t))

    def __post_init__(self):
        self.validate()

    def validate(self):
        seen: dict[int, list[GaussEntry]] = {}
        for e in self.entries:
            seen.setdefault(e.crossing, []).append(e)
        for cid, es in seen.items():
            if len(es) != 2 or es[0].over == es[1].over:
                raise DiagramError(f"crossing {cid} must appear once over, once under")
            if es[0].sign != es[1].sign:
                raise DiagramError(f"crossing {cid} has inconsistent signs")

    @property
    def n_crossings(self) -> int:
        return len(self.entries) // 2

    @property
    def crossing_ids(self) -> list[int]:
        return sorted({e.crossing for e in self.entries})

    @property
    def writhe(self) -> int:
        return sum(e.sign for e in self.entries if e.over)


# ---------------------------------------------------------------------------
# projection


def _frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = direction / np.linalg.norm(direction)
    probe = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, probe)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2


def _cross2(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _find_crossings(p2: np.ndarray, depth: np.ndarray, margin: float):
    """All transverse double points of the closed polyline p2.

    Returns None when a degeneracy (near-parallel overlap, near-vertex hit,
    near-tangent depth, near-triple point) is detected, prompting a new
    projection direction.
    """
    n = len(p2)
    d2 = np.roll(p2, -1, axis=0) - p2
    ddep = np.roll(depth, -1) - depth
    scale = float(np.max(np.abs(p2))) + 1.0
    hits = []
    for i in range(n - 2):
        j0 = i + 2
        j1 = n if i > 0 else n - 1
        if j0 >= j1:
            continue
        js = np.arange(j0, j1)
        rhs = p2[js] - p2[i]
        den = d2[i, 0] * d2[js, 1] - d2[i, 1] * d2[js, 0]
        num_t = rhs[:, 0] * d2[js, 1] - rhs[:, 1] * d2[js, 0]
        num_u = rhs[:, 0] * d2[i, 1] - rhs[:, 1] * d2[i, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num_t / den
            u = num_u / den
        near = (t > -margin) & (t < 1 + margin) & (u > -margin) & (u < 1 + margin)
        ok_den = np.abs(den) > 1e-12 * scale * scale
        cand = near & ok_den
        # parallel segments whose boxes meet cannot be adjudicated
        par = ~ok_den
        if np.any(par):
            for j in js[par]:
                if _segments_overlap(p2, i, int(j)):
                    return None
        for idx in np.nonzero(cand)[0]:
            j = int(js[idx])
            ti, uj = float(t[idx]), float(u[idx])
            if not (margin < ti < 1 - margin and margin < uj < 1 - margin):
                if -margin < ti < 1 + margin and -margin < uj < 1 + margin:
                    return None  # crossing too close to a vertex
                continue
            zi = depth[i] + ti * ddep[i]
            zj = depth[j] + uj * ddep[j]
            if abs(zi - zj) < 1e-9 * (1.0 + scale):
                return None  # tangent in depth
            hits.append((i, ti, j, uj, zi, zj))
    # near-triple points: two crossings too close in the plane
    if len(hits) > 1:
        pts = np.array([p2[i] + t * d2[i] for (i, t, _, _, _, _) in hits])
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        d[np.diag_indices(len(pts))] = np.inf
        if float(d.min()) < 1e-9 * scale:
            return None
    return hits


def _segments_overlap(p2, i, j) -> bool:
    a0, a1 = p2[i], p2[(i + 1) % len(p2)]
    b0, b1 = p2[j], p2[(j + 1) % len(p2)]
    lo_a = np.minimum(a0, a1) - 1e-12
    hi_a = np.maximum(a0, a1) + 1e-12
    lo_b = np.minimum(b0, b1) - 1e-12
    hi_b = np.maximum(b0, b1) + 1e-12
    return bool(np.all(hi_a >= lo_b) and np.all(hi_b >= lo_a))


def project(knot: PolygonalKnot, direction_hint=None, seed: int = 0) -> CrossingDiagram:
    """Generic planar projection of a closed curve to a crossing diagram.

    The hint direction is perturbed deterministically (seeded) until the
    projection is generic: no parallel segment pairs in conflict, no
    crossings within 1e-9 of a vertex, no depth tangencies, no triple
    points.  GenericityError after 100 attempts.
    """
    hint = np.array([0.0, 0.0, 1.0]) if direction_hint is None else np.asarray(direction_hint, float)
    if np.linalg.norm(hint) == 0:
        hint = np.array([0.0, 0.0, 1.0])
    rng = np.random.RandomState(seed)
    v = knot.vertices
    margin = 1e-9
    for attempt in range(100):
        if attempt == 0:
            d = hint.copy()
        else:
            d = hint + (0.02 * attempt) * rng.standard_normal(3)
        nd = np.linalg.norm(d)
        if nd == 0:
            continue
        d = d / nd
        e1, e2 = _frame(d)
        p2 = np.stack([v @ e1, v @ e2], axis=1)
        depth = v @ d
        hits = _find_crossings(p2, depth, margin)
        if hits is None:
            continue
        entries_events = []  # (segment, param, crossing_id, over, sign)
        positions: dict[int, np.ndarray] = {}
        segimap: dict[int, tuple[tuple[int, float], tuple[int, float]]] = {}
        d2 = np.roll(p2, -1, axis=0) - p2
        for cid, (i, ti, j, uj, zi, zj) in enumerate(hits):
            over_first = zi > zj
            di, dj = d2[i], d2[j]
            d_over, d_under = (di, dj) if over_first else (dj, di)
            # right-handed positive: under direction rotates CCW onto over
            sign = 1 if _cross2(d_over, d_under) < 0 else -1
            entries_events.append((i, ti, cid, over_first, sign))
            entries_events.append((j, uj, cid, not over_first, sign))
            positions[cid] = p2[i] + ti * d2[i]
            over_at = (i, ti) if over_first else (j, uj)
            under_at = (j, uj) if over_first else (i, ti)
            segimap[cid] = (over_at, under_at)
        entries_events.sort(key=lambda e: (e[0], e[1]))
        entries = tuple(GaussEntry(cid, over, sign) for (_, _, cid, over, sign) in entries_events)
        return CrossingDiagram(
            entries=entries,
            direction=d,
            positions=positions,
            plane_points=p2,
            crossing_segments=segimap,
        )
    raise GenericityError("no generic projection direction after 100 perturbations")


# ---------------------------------------------------------------------------
# Reidemeister reduction


def simplify(diagram: CrossingDiagram) -> CrossingDiagram:
    """Reduce the Gauss code by Reidemeister I and II until neither applies.

    Purely combinatorial; plane geometry of removed crossings is dropped.
    The Alexander polynomial is invariant under both moves.
    """
    entries = list(diagram.entries)

    def remove_ids(ids: set[int]):
        nonlocal entries
        entries = [e for e in entries if e.crossing not in ids]

    changed = True
    while changed:
        changed = False
        L = len(entries)
        # R1: the two passages of one crossing are cyclically adjacent
        for k in range(L):
            if L >= 2 and entries[k].crossing == entries[(k + 1) % L].crossing:
                remove_ids({entries[k].crossing})
                changed = True
                break
        if changed:
            continue
        # R2: a pair of crossings adjacent twice, once both-over and once
        # both-under, with opposite signs
        adj: dict[frozenset, list[tuple[int, bool, bool]]] = {}
        for k in range(L):
            e1, e2 = entries[k], entries[(k + 1) % L]
            if e1.crossing == e2.crossing:
                continue
            key = frozenset((e1.crossing, e2.crossing))
            adj.setdefault(key, []).append((k, e1.over, e2.over))
        for key, occs in adj.items():
            if len(key) != 2:
                continue
            c, d_ = tuple(key)
            sc = next(e.sign for e in entries if e.crossing == c)
            sd = next(e.sign for e in entries if e.crossing == d_)
            if sc != -sd:
                continue
            both_over = any(o1 and o2 for (_, o1, o2) in occs)
            both_under = any((not o1) and (not o2) for (_, o1, o2) in occs)
            if both_over and both_under:
                remove_ids(set(key))
                changed = True
                break

    keep = {e.crossing for e in entries}
    return CrossingDiagram(
        entries=tuple(entries),
        direction=diagram.direction,
        positions={c: p for c, p in diagram.positions.items() if c in keep},
        plane_points=diagram.plane_points,
        crossing_segments={c: s for c, s in diagram.crossing_segments.items() if c in keep},
    )


# ---------------------------------------------------------------------------
# Alexander polynomial


def alexander(diagram: CrossingDiagram) -> LaurentPoly:
    """Alexander polynomial from the signed Gauss code, exactly.

    Builds the crossing/arc incidence matrix of the knot group's Wirtinger
    presentation (free calculus, generators abelianized to t), deletes one
    row and one column, and takes the fraction-free determinant.  Result is
    normalized to lowest exponent 0 with positive leading coefficient.
    """
    entries = diagram.entries
    n = len(entries) // 2
    if n == 0:
        return LaurentPoly.one()

    # arcs: index increments after every under-passage; wraps mod n
    arc_at: list[int] = []
    a = 0
    for e in entries:
        arc_at.append(a % n)
        if not e.over:
            a += 1
    if a != n:
        raise DiagramError("gauss code does not close up")

    ids = sorted({e.crossing for e in entries})
    row_of = {cid: k for k, cid in enumerate(ids)}
    t = LaurentPoly.term(1, 1)
    tinv = LaurentPoly.term(1, -1)
    one = LaurentPoly.one()
    M = [[LaurentPoly.zero() for _ in range(n)] for _ in range(n)]
    for k, e in enumerate(entries):
        r = row_of[e.crossing]
        if e.over:
            # over-arc contribution 1 - t^(sign)
            M[r][arc_at[k]] = M[r][arc_at[k]] + (one - (t if e.sign > 0 else tinv))
        else:
            a_in = arc_at[k]
            a_out = (a_in + 1) % n
            M[r][a_in] = M[r][a_in] + (t if e.sign > 0 else tinv)
            M[r][a_out] = M[r][a_out] - one
    minor = [row[: n - 1] for row in M[: n - 1]]
    return bareiss_det(minor).alexander_normalized()


@dataclass(frozen=True)
class Classification:
    kind: str                   # "unknot" | "torus" | "trefoil" | "unknown"
    p: int | None = None
    q: int | None = None

    @property
    def label(self) -> str:
        if self.kind == "unknot":
            return "unknot-compatible"
        if self.kind == "trefoil":
            return "trefoil-compatible (torus(2,3))"
        if self.kind == "torus":
            return f"torus({self.p},{self.q})-compatible"
        return "unknown"


def identify(poly: LaurentPoly, bound: int = 12) -> Classification:
    """Match a normalized polynomial against torus-knot certificates.

    Certificates only: polynomial equality, not knot equivalence.  The
    trefoil is torus(2, 3).
    """
    poly = poly.alexander_normalized()
    if poly == LaurentPoly.one():
        return Classification("unknot")
    for p in range(2, bound):
        for q in range(p + 1, bound + 1):
            try:
                ta = torus_alexander(p, q)
            except Exception:
                continue
            if poly == ta:
                if (p, q) == (2, 3):
                    return Classification("trefoil", 2, 3)
                return Classification("torus", p, q)
    return Classification("unknown")


def knot_certificate(knot: PolygonalKnot, seed: int = 0):
    """project -> simplify -> alexander -> identify, as one call."""
    diagram = project(knot, seed=seed)
    reduced = simplify(diagram)
    poly = alexander(reduced)
    return diagram, reduced, poly, identify(poly)


# ---------------------------------------------------------------------------
# braids


@dataclass(frozen=True)
class BraidWord:
    """Artin generators on n strands; letter +-i is sigma_i^(+-1), 1-based."""

    n: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise WordError("braid needs at least one strand")
        for l in self.letters:
            if l == 0 or abs(l) > self.n - 1:
                raise WordError(f"letter {l} invalid on {self.n} strands")

    def permutation(self) -> list[int]:
        """position -> position after the braid (top to bottom)."""
        pos = list(range(self.n))
        for l in self.letters:
            i = abs(l) - 1
            pos[i], pos[i + 1] = pos[i + 1], pos[i]
        out = [0] * self.n
        for bottom_pos, strand in enumerate(pos):
            out[strand] = bottom_pos
        return out


def braid_to_knot(braid: BraidWord, provenance: str = "template braid") -> PolygonalKnot:
    """Geometric closure of a braid as a simple polygonal curve.

    Strands run down a slab (crossing depth +-0.4); trace-closure arcs
    return behind the slab at distinct depths, which keeps the embedding
    honest and the curve simple by construction.  The braid permutation
    must be a single cycle (links are out of scope).
    """
    n, letters = braid.n, braid.letters
    L = len(letters)
    paths: list[list[tuple[float, float, float]]] = [[(float(s), 0.0, 0.0)] for s in range(n)]
    strand_at = list(range(n))  # position -> strand
    for step, letter in enumerate(letters):
        i = abs(letter) - 1
        y1 = -(step + 1.0)
        ymid = -(step + 0.5)
        sl, sr = strand_at[i], strand_at[i + 1]
        left_over = letter > 0
        xm = i + 0.5
        paths[sl].append((xm, ymid, 0.4 if left_over else -0.4))
        paths[sl].append((float(i + 1), y1, 0.0))
        paths[sr].append((xm, ymid, -0.4 if left_over else 0.4))
        paths[sr].append((float(i), y1, 0.0))
        for pos in range(n):
            if pos != i and pos != i + 1:
                paths[strand_at[pos]].append((float(pos), y1, 0.0))
        strand_at[i], strand_at[i + 1] = sr, sl

    ybot = -(L + 0.0)
    # single-cycle check on the closure
    end_pos = {strand_at[pos]: pos for pos in range(n)}
    order = []
    s = 0
    while True:
        order.append(s)
        s = end_pos[s]
        if s == 0:
            break
    if len(order) != n:
        raise DiagramError(f"braid closure has {n - len(order) + 1} components; need a knot")

    verts: list[tuple[float, float, float]] = []
    for s in order:
        verts.extend(paths[s])
        q = end_pos[s]
        zq = -1.0 - 0.3 * (q + 1)
        xout = -2.0 - 0.3 * (q + 1)
        verts.append((float(q), ybot - 1.0, zq))
        verts.append((xout, ybot - 1.0, zq))
        verts.append((xout, 1.0, zq))
        verts.append((float(q), 1.0, zq))
    return PolygonalKnot(np.array(verts), provenance)


# ---------------------------------------------------------------------------
# Lorenz 0-1 template


def lorenz_word_to_braid(word: str) -> BraidWord:
    """Braid of the closed template orbit with the given primitive word.

    The word's cyclic shifts, ordered by the unimodal itinerary order, give
    the strand order on the branch line.  Symbol-1 strands descend the
    untwisted ear; symbol-2 strands descend the half-twisted ear, which
    reverses their bundle (one positive half twist) before both ears merge
    back, ear-1 strands passing over ear-2 strands.  The closure of the
    returned braid is the template knot of the word.
    """
    validate_word(word)
    if not is_primitive(word):
        raise WordError(f"word {word!r} is not of minimal period")
    k = len(word)
    rots = sort_unimodal(rotations(word))
    rank = {r: i for i, r in enumerate(rots)}
    targets = [rank[r[1:] + r[0]] for r in rots]
    groups = [1 if r[0] == "1" else 2 for r in rots]
    n1 = sum(1 for g in groups if g == 1)
    m = k - n1

    letters: list[int] = []
    # positive half twist reversing the ear-2 bundle (positions n1 .. k-1)
    for r in range(m - 1, 0, -1):
        for ii in range(1, r + 1):
            letters.append(n1 + ii)
    arr = targets[:n1] + targets[n1:][::-1]
    grp = groups[:n1] + groups[n1:][::-1]
    # merge: bubble to sorted targets; every swap is an inter-ear crossing
    changed = True
    while changed:
        changed = False
        for pidx in range(k - 1):
            if arr[pidx] > arr[pidx + 1]:
                gen = pidx + 1
                letters.append(gen if grp[pidx] == 1 else -gen)
                arr[pidx], arr[pidx + 1] = arr[pidx + 1], arr[pidx]
                grp[pidx], grp[pidx + 1] = grp[pidx + 1], grp[pidx]
                changed = True
    return BraidWord(k, tuple(letters))


def template_knot_certificate(word: str, seed: int = 0):
    """Word -> braid -> closed curve -> certificate, as one call."""
    braid = lorenz_word_to_braid(word)
    knot = braid_to_knot(braid)
    _, reduced, poly, cls = knot_certificate(knot, seed=seed)
    return braid, knot, poly, cls
