"""Adaptive integration of the Rossler field with dense output.

Backend selection: the compiled extension (rossler_knots._kernels) is used
when importable, otherwise the pure-Python twin.  Both produce bit-identical
trajectories; ROSSLER_KNOTS_BACKEND=python|compiled forces a choice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .core import Params
from .errors import IntegrationError, StepUnderflowError

__all__ = ["Trajectory", "integrate", "backend_name", "available_backends"]

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None


def available_backends() -> dict[str, object]:
    out: dict[str, object] = {"python": _kernels_py}
    if _kernels is not None:
        out["compiled"] = _kernels
    return out


def _select_backend():
    forced = os.environ.get("ROSSLER_KNOTS_BACKEND", "").strip().lower()
    if forced == "python":
        return _kernels_py
    if forced == "compiled":
        if _kernels is None:
            raise ImportError("ROSSLER_KNOTS_BACKEND=compiled but the extension is not built")
        return _kernels
    return _kernels if _kernels is not None else _kernels_py


_BACKEND = _select_backend()

_STATUS_NAMES = {
    0: "time",
    1: "escape",
    2: "fixed-point",
    3: "step-underflow",
    4: "max-steps",
}


def backend_name() -> str:
    return _BACKEND.BACKEND


@dataclass
class Trajectory:
    """Result of one integration run.

    t is the elapsed integration parameter (strictly increasing, starting
    at 0); physical time is direction * t.  states has one row per node.
    q holds the quartic dense-output coefficients of each accepted step:
    on step i (from t[i] to t[i+1], size h[i]),

        y(theta) = states[i] + h[i] * (q[i] @ [theta, theta^2, theta^3, theta^4])

    for theta in [0, 1].  termination is one of "time", "escape",
    "fixed-point".
    """

    params: Params
    t: np.ndarray
    states: np.ndarray
    q: np.ndarray
    h: np.ndarray
    direction: int
    termination: str
    tol: float

    @property
    def n_steps(self) -> int:
        return len(self.h)

    @property
    def end_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def end_time(self) -> float:
        return float(self.t[-1])

    def eval_step(self, i: int, theta: float) -> np.ndarray:
        """Dense state inside step i at fraction theta in [0, 1]."""
        qi = self.q[i]
        th = float(theta)
        poly = th * (qi[:, 0] + th * (qi[:, 1] + th * (qi[:, 2] + th * qi[:, 3])))
        return self.states[i] + self.h[i] * poly

    def eval_step_component(self, i: int, theta: float, j: int) -> float:
        qi = self.q[i, j]
        th = float(theta)
        return float(
            self.states[i, j]
            + self.h[i] * (th * (qi[0] + th * (qi[1] + th * (qi[2] + th * qi[3]))))
        )

    def state_at(self, tau: float) -> np.ndarray:
        """Dense state at elapsed parameter tau in [0, t[-1]]."""
        tau = float(tau)
        if tau <= 0.0:
            return self.states[0].copy()
        if tau >= self.t[-1]:
            return self.states[-1].copy()
        i = int(np.searchsorted(self.t, tau, side="right") - 1)
        i = min(i, self.n_steps - 1)
        return self.eval_step(i, (tau - self.t[i]) / self.h[i])

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """n dense samples uniform in elapsed parameter."""
        taus = np.linspace(0.0, float(self.t[-1]), n)
        return taus, np.array([self.state_at(tau) for tau in taus])


def integrate(
    p: Params,
    s0,
    t_end: float,
    tol: float = 1e-9,
    *,
    direction: int = 1,
    escape_radius: float = 1e4,
    fp_tol: float = 1e-12,
    max_steps: int = 5_000_000,
    h_fixed: float = 0.0,
) -> Trajectory:
    """Integrate from s0 for elapsed time t_end along direction * field.

    tol is the per-step local error tolerance (mixed absolute/relative,
    scale tol * (1 + |state|)); admissible range [1e-13, 1e-3].  Terminates
    at t_end, on escape (|s| > escape_radius) or on fixed-point convergence
    (|field| < fp_tol).  Raises StepUnderflowError if the adaptive step
    falls below 1e-14 and IntegrationError if max_steps is exhausted.
    """
    if not (1e-13 <= tol <= 1e-3):
        raise ValueError(f"tol {tol} outside [1e-13, 1e-3]")
    if t_end <= 0.0:
        raise ValueError("t_end must be positive (use direction=-1 for backward time)")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    x, y, z = float(s0[0]), float(s0[1]), float(s0[2])
    status, (ts, ys, qs, hs) = _BACKEND.integrate_raw(
        p.a, p.b, p.c, x, y, z, float(t_end), float(tol), float(direction),
        float(escape_radius), float(fp_tol), int(max_steps), float(h_fixed),
    )
    if status == 3:
        raise StepUnderflowError(
            f"step size underflow at t={ts[-1]:.6g} near state {ys[-1]}"
        )
    if status == 4:
        raise IntegrationError(f"max_steps={max_steps} exhausted at t={ts[-1]:.6g}")
    return Trajectory(
        params=p,
        t=ts,
        states=ys,
        q=qs,
        h=hs,
        direction=direction,
        termination=_STATUS_NAMES[status],
        tol=tol,
    )
