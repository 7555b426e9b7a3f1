"""Rossler vector field: parameters, fixed points, spectra, assumption checks.

The system integrated everywhere in this package is the modern form

    x' = -y - z
    y' = x + a*y
    z' = b*x + z*(x - c)

with a, b, c real.  The classical three-parameter form (with a constant B
instead of the b*x term) is supported through :func:`convert_classical`,
which maps it onto the modern form by a translation of state space.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError, ConversionMismatchError, DegenerateParamsError

__all__ = [
    "Params",
    "ClassicalParams",
    "StateTransform",
    "FixedPointAnalysis",
    "AssumptionReport",
    "field",
    "jacobian",
    "fixed_points",
    "classify_fixed_point",
    "check_assumptions",
    "convert_classical",
]


@dataclass(frozen=True)
class Params:
    """Parameter triple (a, b, c) of the modern-form vector field."""

    a: float
    b: float
    c: float

    def astuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def replace(self, **kw: float) -> "Params":
        d = {"a": self.a, "b": self.b, "c": self.c}
        d.update(kw)
        return Params(d["a"], d["b"], d["c"])

    def in_admissible_ranges(self) -> bool:
        """Range gate: a, b in (0,1) and c > 1."""
        return 0.0 < self.a < 1.0 and 0.0 < self.b < 1.0 and self.c > 1.0


@dataclass(frozen=True)
class ClassicalParams:
    """Parameter triple (A, B, C) of the classical form (constant term B in z')."""

    A: float
    B: float
    C: float


def field(p: Params, s) -> np.ndarray:
    """Vector field at state s = (x, y, z)."""
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    return np.array([-y - z, x + p.a * y, p.b * x + z * (x - p.c)])


def jacobian(p: Params, s) -> np.ndarray:
    """Jacobian of :func:`field` at s."""
    x, z = float(s[0]), float(s[2])
    return np.array(
        [
            [0.0, -1.0, -1.0],
            [1.0, p.a, 0.0],
            [p.b + z, 0.0, x - p.c],
        ]
    )


def fixed_points(p: Params) -> tuple[np.ndarray, np.ndarray]:
    """The two fixed points: inner (the origin) and outer.

    Raises DegenerateParamsError when c/a - b = 0, where the outer fixed
    point collides with the origin.
    """
    w = p.c / p.a - p.b
    if w == 0.0 or not math.isfinite(w):
        raise DegenerateParamsError(f"c/a - b = {w!r} at {p}")
    inner = np.zeros(3)
    outer = np.array([p.c - p.a * p.b, p.b - p.c / p.a, w])
    return inner, outer


def _cubic_roots(c2: float, c1: float, c0: float) -> list[complex]:
    """Roots of l^3 + c2 l^2 + c1 l + c0 (Cardano, then Newton polish).

    A 3x3 spectrum never needs a general eigensolver; the closed form plus
    one or two Newton corrections reaches machine accuracy.
    """
    # depressed cubic t^3 + p t + q with l = t - c2/3
    shift = c2 / 3.0
    pp = c1 - c2 * c2 / 3.0
    qq = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    sq = cmath.sqrt(disc)
    u3 = -qq / 2.0 + sq
    if abs(u3) < 1e-300:
        u3 = -qq / 2.0 - sq
    u = u3 ** (1.0 / 3.0)
    if u == 0:
        roots = [-shift + 0j] * 3
    else:
        v = -pp / (3.0 * u)
        w = complex(-0.5, math.sqrt(3.0) / 2.0)
        roots = [u + v - shift, u * w + v / w - shift, u * w.conjugate() + v / w.conjugate() - shift]

    def poly(l: complex) -> complex:
        return ((l + c2) * l + c1) * l + c0

    def dpoly(l: complex) -> complex:
        return (3.0 * l + 2.0 * c2) * l + c1

    polished = []
    for r in roots:
        for _ in range(3):
            d = dpoly(r)
            if d == 0:
                break
            step = poly(r) / d
            r = r - step
            if abs(step) < 1e-16 * (1.0 + abs(r)):
                break
        polished.append(r)

    # enforce exact conjugate symmetry: a real cubic has either three real
    # roots or one real root and a conjugate pair
    reals = [r for r in polished if abs(r.imag) <= 1e-9 * (1.0 + abs(r))]
    if len(reals) == 1:
        pair = [r for r in polished if r is not reals[0]]
        mid = 0.5 * (pair[0] + pair[1].conjugate())
        return [complex(reals[0].real, 0.0), mid, mid.conjugate()]
    return [complex(r.real, 0.0) for r in polished]


@dataclass(frozen=True)
class FixedPointAnalysis:
    """Spectral picture at a fixed point of the flow.

    kind is "stable-axis" when the real eigenvalue is negative and the
    spiral pair expands (the configuration of the inner fixed point),
    "unstable-axis" for the mirror configuration (outer fixed point), and
    "other" for anything else.  saddle_index is |rho/gamma| and shilnikov
    flags saddle_index < 1.
    """

    location: np.ndarray
    eigenvalues: tuple[complex, complex, complex]
    gamma: float
    rho: float
    psi: float
    saddle_index: float
    kind: str
    shilnikov: bool
    all_real: bool


def classify_fixed_point(p: Params, s, *, require_fixed: bool = True) -> FixedPointAnalysis:
    """Eigen-analysis of the linearization at a fixed point s.

    Raises ClassificationError (reported, not fatal to scans) when the
    spectrum is entirely real, i.e. s is not a saddle focus.  With
    require_fixed the residual of the field at s must be <= 1e-10.
    """
    s = np.asarray(s, dtype=float)
    if require_fixed:
        r = float(np.linalg.norm(field(p, s)))
        if r > 1e-10 * (1.0 + float(np.linalg.norm(s))):
            raise ValueError(f"state {s} is not a fixed point (|F| = {r:.3e})")
    J = jacobian(p, s)
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    m2 = (
        J[1, 1] * J[2, 2]
        - J[1, 2] * J[2, 1]
        + J[0, 0] * J[2, 2]
        - J[0, 2] * J[2, 0]
        + J[0, 0] * J[1, 1]
        - J[0, 1] * J[1, 0]
    )
    det = float(np.linalg.det(J))
    lams = _cubic_roots(-float(tr), float(m2), -det)

    real_lams = [l for l in lams if l.imag == 0.0]
    if len(real_lams) == 3:
        raise ClassificationError(f"all-real spectrum at {s}: {lams}") from None
    gamma = real_lams[0].real
    pair = [l for l in lams if l.imag != 0.0]
    rho = pair[0].real
    psi = abs(pair[0].imag)
    if gamma < 0.0 < rho:
        kind = "stable-axis"
    elif rho < 0.0 < gamma:
        kind = "unstable-axis"
    else:
        kind = "other"
    nu = abs(rho / gamma) if gamma != 0.0 else math.inf
    return FixedPointAnalysis(
        location=s,
        eigenvalues=(complex(gamma), pair[0], pair[1]),
        gamma=gamma,
        rho=rho,
        psi=psi,
        saddle_index=nu,
        kind=kind,
        shilnikov=nu < 1.0,
        all_real=False,
    )


@dataclass(frozen=True)
class AssumptionReport:
    """Verdicts for the three admissibility assumptions of the parameter space."""

    ranges_ok: bool
    saddle_foci_ok: bool
    shilnikov_ok: bool
    inner: FixedPointAnalysis | None
    outer: FixedPointAnalysis | None
    notes: tuple[str, ...]

    @property
    def in_parameter_space(self) -> bool:
        return self.ranges_ok and self.saddle_foci_ok and self.shilnikov_ok


def check_assumptions(p: Params) -> AssumptionReport:
    """Report-only check of the three parameter-space assumptions.

    1. a, b in (0,1), c > 1  (and the two fixed points exist).
    2. Inner fixed point has a stable axis with expanding spiral; outer has
       the opposite configuration.
    3. At least one of the two saddle indices is < 1 (Shilnikov condition).
    """
    notes: list[str] = []
    ranges_ok = p.in_admissible_ranges()
    inner_an = outer_an = None
    saddle = shil = False
    try:
        inner, outer = fixed_points(p)
    except DegenerateParamsError as e:
        notes.append(str(e))
    else:
        try:
            inner_an = classify_fixed_point(p, inner)
        except ClassificationError as e:
            notes.append(f"inner: {e}")
        try:
            outer_an = classify_fixed_point(p, outer)
        except ClassificationError as e:
            notes.append(f"outer: {e}")
        if inner_an is not None and outer_an is not None:
            saddle = inner_an.kind == "stable-axis" and outer_an.kind == "unstable-axis"
            shil = inner_an.shilnikov or outer_an.shilnikov
    return AssumptionReport(ranges_ok, saddle, shil, inner_an, outer_an, tuple(notes))


@dataclass(frozen=True)
class StateTransform:
    """Translation between classical-form and modern-form state spaces.

    modern = classical + offset; the linear part is the identity, so the
    pushforward of the classical field is just the field evaluated at the
    translated point.
    """

    offset: np.ndarray

    def to_modern(self, S) -> np.ndarray:
        return np.asarray(S, dtype=float) + self.offset

    def to_classical(self, s) -> np.ndarray:
        return np.asarray(s, dtype=float) - self.offset


def classical_field(cp: ClassicalParams, S) -> np.ndarray:
    """Classical-form vector field (constant term B in the z equation)."""
    X, Y, Z = float(S[0]), float(S[1]), float(S[2])
    return np.array([-Y - Z, X + cp.A * Y, cp.B + Z * (X - cp.C)])


def convert_classical(cp: ClassicalParams) -> tuple[Params, StateTransform]:
    """Map classical parameters (A, B, C) onto the modern form.

    Matching coefficients of the translated field gives a = A, b = -p1,
    c = C + A*p1 with p1 = (-C + sqrt(C^2 - 4AB)) / (2A); the translation
    is modern = classical + (A*p1, -p1, p1).  The correspondence is not
    stated in closed form anywhere authoritative, so the result is always
    certified numerically: the pushforward residual over a fixed 10-state
    sample must stay below 1e-9 or ConversionMismatchError is raised.
    """
    disc = cp.C * cp.C - 4.0 * cp.A * cp.B
    if disc <= 0.0:
        raise DegenerateParamsError(f"C^2 - 4AB = {disc} <= 0; no real translation")
    if cp.A == 0.0:
        raise DegenerateParamsError("A = 0 has no modern-form counterpart")
    p1 = (-cp.C + math.sqrt(disc)) / (2.0 * cp.A)
    p = Params(cp.A, -p1, cp.C + cp.A * p1)
    tr = StateTransform(offset=np.array([cp.A * p1, -p1, p1]))

    # pushforward certificate on a deterministic state sample
    sample = [
        (0.0, 0.0, 0.0),
        (1.0, 1.0, 1.0),
        (-1.0, 2.0, 0.5),
        (3.0, -4.0, 2.0),
        (0.1, 0.1, 5.0),
        (-7.0, 0.3, 0.2),
        (10.0, -10.0, 10.0),
        (0.5, -0.25, 0.125),
        (-2.5, 1.5, -0.5),
        (6.0, 2.0, -3.0),
    ]
    worst = 0.0
    for S in sample:
        S = np.array(S)
        r = float(np.max(np.abs(field(p, tr.to_modern(S)) - classical_field(cp, S))))
        scale = 1.0 + float(np.max(np.abs(classical_field(cp, S))))
        worst = max(worst, r / scale)
    if worst > 1e-9:
        raise ConversionMismatchError(
            f"pushforward residual {worst:.3e} > 1e-9 for {cp}; derived (b, c) invalid here"
        )
    return p, tr
