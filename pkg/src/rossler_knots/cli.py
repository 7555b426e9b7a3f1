"""Command-line front end.

Subcommands: analyze, scan, orbits, knot, verify-horseshoe, persist.  Each
accepts --config (key = value lines) plus flag overrides and writes
deterministic JSON/CSV/SVG artifacts into --out.  Exit codes: 0 success
(including reports whose diagnostics fail), 2 configuration error, 3
numerical failure that prevented any output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import ClassicalParams, Params, check_assumptions, classify_fixed_point, convert_classical, fixed_points
from .errors import ConfigError, NoCrossingError, SearchError, ToolkitError
from .knots import PolygonalKnot, knot_certificate
from .reports import Report, csv_lines, emit_svg

_CONFIG_KEYS = {
    "a": float, "b": float, "c": float,
    "A": float, "B": float, "C": float,
    "tol": float, "t_max": float, "seed": int, "out": str,
}


@dataclass
class RunConfig:
    a: float | None = None
    b: float | None = None
    c: float | None = None
    A: float | None = None
    B: float | None = None
    C: float | None = None
    tol: float = 1e-9
    t_max: float = 400.0
    seed: int = 0
    out: str = "."

    def resolve_params(self) -> tuple[Params, dict]:
        """Parameters from modern (a, b, c) or classical (A, B, C) input."""
        info: dict = {}
        classical = [self.A, self.B, self.C]
        modern = [self.a, self.b, self.c]
        if all(v is not None for v in classical):
            cp = ClassicalParams(self.A, self.B, self.C)
            p, tr = convert_classical(cp)
            info["classical"] = {"A": self.A, "B": self.B, "C": self.C}
            info["state_offset"] = tr.offset
            info["converted"] = {"a": p.a, "b": p.b, "c": p.c}
            return p, info
        if all(v is not None for v in modern):
            return Params(self.a, self.b, self.c), info
        raise ConfigError("need parameters: either a, b, c or classical A, B, C")

    def validate(self):
        if not (1e-13 <= self.tol <= 1e-3):
            raise ConfigError(f"tol {self.tol} outside [1e-13, 1e-3]")
        if self.t_max <= 0:
            raise ConfigError("t_max must be positive")


def _parse_config_file(path: str) -> dict:
    values: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](val)
        except ValueError as e:
            raise ConfigError(f"{path}:{ln}: bad value for {key}: {val!r}") from e
    return values


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        for k, v in _parse_config_file(args.config).items():
            setattr(cfg, k, v)
    for k in _CONFIG_KEYS:
        flag = getattr(args, k if k != "out" else "out", None)
        if flag is not None:
            setattr(cfg, k, flag)
    cfg.validate()
    return cfg


def _write(out_dir: str, name: str, content: str) -> Path:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    path = d / name
    path.write_bytes(content.encode())
    return path


def _params_echo(cfg: RunConfig, p: Params, extra: dict) -> dict:
    echo = {"a": p.a, "b": p.b, "c": p.c, "tol": cfg.tol, "t_max": cfg.t_max}
    echo.update(extra)
    return echo


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(cfg: RunConfig, args) -> int:
    p, info = cfg.resolve_params()
    ass = check_assumptions(p)
    results: dict = {"assumptions": {
        "ranges_ok": ass.ranges_ok,
        "saddle_foci_ok": ass.saddle_foci_ok,
        "shilnikov_ok": ass.shilnikov_ok,
        "in_parameter_space": ass.in_parameter_space,
        "notes": list(ass.notes),
    }}
    try:
        inner, outer = fixed_points(p)
        results["fixed_points"] = {"inner": inner, "outer": outer}
        for name, s in (("inner", inner), ("outer", outer)):
            try:
                an = classify_fixed_point(p, s)
                results[f"spectrum_{name}"] = {
                    "eigenvalues": list(an.eigenvalues),
                    "gamma": an.gamma,
                    "rho": an.rho,
                    "psi": an.psi,
                    "saddle_index": an.saddle_index,
                    "kind": an.kind,
                    "shilnikov": an.shilnikov,
                }
            except ToolkitError as e:
                results[f"spectrum_{name}"] = {"error": str(e)}
    except ToolkitError as e:
        results["fixed_points"] = {"error": str(e)}
    rep = Report("analyze", _params_echo(cfg, p, info), results, seed=cfg.seed)
    path = _write(cfg.out, "analyze.json", rep.to_json())
    print(f"analyze: wrote {path}")
    return 0


def cmd_scan(cfg: RunConfig, args) -> int:
    from .manifolds import find_trefoil_candidate, mismatch_scan

    p, info = cfg.resolve_params()
    free = tuple(args.free.split(","))
    if len(free) != 2:
        raise ConfigError(f"--free needs two names, got {args.free!r}")

    def parse_range(s):
        lo, _, hi = s.partition(":")
        try:
            return float(lo), float(hi)
        except ValueError as e:
            raise ConfigError(f"bad range {s!r}") from e

    xr = parse_range(args.x_range)
    yr = parse_range(args.y_range)
    scan = mismatch_scan(p, free, xr, yr, args.nx, args.ny, t_max=cfg.t_max, tol=cfg.tol)

    rows = []
    for i in range(args.nx):
        for j in range(args.ny):
            rows.append([
                i, j, float(scan.x_vals[i]), float(scan.y_vals[j]),
                float(scan.norms[i, j]),
                scan.reasons.get((i, j), ""),
            ])
    csv = csv_lines(["i", "j", free[0], free[1], "mismatch", "failure"], rows)
    csv_path = _write(cfg.out, "scan.csv", csv)

    minima = scan.local_minima(args.candidates)
    results: dict = {
        "finite_fraction": scan.finite_fraction,
        "grid": {"nx": args.nx, "ny": args.ny, "x_range": xr, "y_range": yr, "free": list(free)},
        "local_minima": [
            {"i": i, "j": j, free[0]: float(scan.x_vals[i]), free[1]: float(scan.y_vals[j]),
             "mismatch": float(scan.norms[i, j])}
            for i, j in minima
        ],
    }
    if args.refine and minima:
        i, j = minima[0]
        seed_p = p.replace(**{free[0]: float(scan.x_vals[i]), free[1]: float(scan.y_vals[j])})
        try:
            res = find_trefoil_candidate(seed_p, free, tol=args.refine_tol,
                                         t_max=cfg.t_max, ode_tol=cfg.tol)
            results["refined"] = {
                "params": {"a": res.params.a, "b": res.params.b, "c": res.params.c},
                "mismatch": res.diagnostics.mismatch_norm,
                "converged": res.converged,
                "diagnostics_pass": res.diagnostics_pass,
                "n_upper": res.diagnostics.n_upper,
                "n_lower": res.diagnostics.n_lower,
                "knot_class": res.knot_class,
                "alexander": str(res.knot_poly) if res.knot_poly is not None else None,
                "iterations": res.iterations,
            }
        except (SearchError, NoCrossingError, ToolkitError) as e:
            results["refined"] = {"converged": False, "error": str(e)}
    rep = Report("scan", _params_echo(cfg, p, info), results, seed=cfg.seed)
    path = _write(cfg.out, "scan.json", rep.to_json())
    print(f"scan: wrote {path} and {csv_path} (finite {scan.finite_fraction:.1%})")
    return 0


def cmd_orbits(cfg: RunConfig, args) -> int:
    from .horseshoe import attractor_samples, calibrate_partition, find_periodic_orbit, orbit_curve
    from .words import lyndon_words

    p, info = cfg.resolve_params()
    if args.words:
        words = args.words.split(",")
    elif args.max_len:
        words = lyndon_words(args.max_len)
    else:
        raise ConfigError("orbits: need --words or --max-len")

    samples = attractor_samples(p, max(300, 60 * max(len(w) for w in words)), tol=cfg.tol)
    model = calibrate_partition(samples)
    results: dict = {"partition": {"fold_u": model.fold_u, "orientation": model.orientation,
                                   "u_range": list(model.u_range)},
                     "orbits": {}}
    for w in words:
        try:
            orb = find_periodic_orbit(p, w, model=model, t_max=cfg.t_max)
            curve = orbit_curve(orb)
            _, _, poly, cls = knot_certificate(curve, seed=cfg.seed)
            results["orbits"][w] = {
                "status": orb.status,
                "observed_word": orb.observed_word,
                "residual": orb.residual,
                "period": orb.period,
                "points": orb.points,
                "multipliers": list(orb.multipliers),
                "alexander": str(poly),
                "knot_class": cls.label,
                "curve": curve.vertices,
            }
        except ToolkitError as e:
            results["orbits"][w] = {"status": "failed", "error": str(e)}
    rep = Report("orbits", _params_echo(cfg, p, info), results, seed=cfg.seed)
    path = _write(cfg.out, "orbits.json", rep.to_json())
    solved = sum(1 for r in results["orbits"].values() if r.get("status") == "ok")
    print(f"orbits: wrote {path} ({solved}/{len(words)} words solved)")
    return 0


def cmd_knot(cfg: RunConfig, args) -> int:
    p = None
    if args.source == "orbit":
        if not args.from_file or not args.word:
            raise ConfigError("knot --source orbit needs --from <orbits.json> and --word")
        try:
            data = json.loads(Path(args.from_file).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read {args.from_file}: {e}") from e
        entry = data.get("results", {}).get("orbits", {}).get(args.word)
        if not entry or "curve" not in entry:
            raise ConfigError(f"no stored curve for word {args.word!r} in {args.from_file}")
        knot = PolygonalKnot(np.array(entry["curve"]), provenance="ODE orbit")
        # only the basename: identical inputs must give identical bytes
        inputs = {"source": "orbit", "word": args.word, "from": Path(args.from_file).name}
    else:
        from .manifolds import build_lambda_knot, heteroclinic_mismatch

        p, info = cfg.resolve_params()
        diag = heteroclinic_mismatch(p, t_max=cfg.t_max, tol=cfg.tol)
        knot = build_lambda_knot(p, diag, t_max=cfg.t_max, tol=cfg.tol)
        inputs = _params_echo(cfg, p, info)
        inputs["source"] = "heteroclinic"
        inputs["mismatch"] = diag.mismatch_norm
    diagram, reduced, poly, cls = knot_certificate(knot, seed=cfg.seed)
    svg = emit_svg(knot, seed=cfg.seed)
    svg_path = _write(cfg.out, "knot.svg", svg)
    results = {
        "n_vertices": knot.n,
        "crossings": diagram.n_crossings,
        "crossings_reduced": reduced.n_crossings,
        "writhe": diagram.writhe,
        "alexander": str(poly),
        "alexander_coeffs": list(poly.coeffs),
        "knot_class": cls.label,
        "svg": svg_path.name,
    }
    rep = Report("knot", inputs, results, seed=cfg.seed)
    path = _write(cfg.out, "knot.json", rep.to_json())
    print(f"knot: wrote {path} and {svg_path} ({cls.label})")
    return 0


def cmd_verify_horseshoe(cfg: RunConfig, args) -> int:
    from .horseshoe import (
        Rectangle,
        attractor_samples,
        calibrate_partition,
        synthetic_horseshoe_selftest,
        verify_topological_horseshoe,
    )

    if args.synthetic:
        rep_data = synthetic_horseshoe_selftest(args.max_len)
        v = rep_data["verification"]
        results = {
            "mode": "synthetic",
            "verification": {
                "passed": v.passed, "valid": v.valid,
                "crossing_ok": {str(k): b for k, b in v.crossing_ok.items()},
                "meets_ok": {f"{i}->{j}": b for (i, j), b in v.meets_ok.items()},
                "witnesses": v.witnesses,
                "probes": v.probes, "eval_failures": v.eval_failures,
            },
            "found_counts": {str(k): v2 for k, v2 in rep_data["found_counts"].items()},
            "necklace_counts": {str(k): v2 for k, v2 in rep_data["necklace_counts"].items()},
            "counts_match": rep_data["counts_match"],
            "all_indices_minus_one": rep_data["all_indices_minus_one"],
            "indices": {w: r["index"] for w, r in rep_data["words"].items()},
        }
        inputs = {"mode": "synthetic", "max_len": args.max_len}
        rep = Report("verify-horseshoe", inputs, results, seed=cfg.seed)
        path = _write(cfg.out, "verify-horseshoe.json", rep.to_json())
        ok = v.passed and rep_data["counts_match"] and rep_data["all_indices_minus_one"]
        print(f"verify-horseshoe: wrote {path} (synthetic suite {'pass' if ok else 'FAIL'})")
        return 0

    from .section import return_map

    p, info = cfg.resolve_params()
    samples = attractor_samples(p, args.samples, tol=cfg.tol)
    model = calibrate_partition(samples)
    # the rectangle's expanding range must sit inside the image range so
    # that strip images can stretch wall to wall
    out_u = np.array([s.out_point.u for s in samples])
    ws = np.array([s.in_point.w for s in samples])
    iu_lo, iu_hi = np.quantile(out_u, 0.01), np.quantile(out_u, 0.99)
    margin = 0.02 * (iu_hi - iu_lo)
    u_lo, u_hi = iu_lo + margin, iu_hi - margin
    w_pad = 0.05 * (ws.max() - ws.min() + 1e-6)
    w_lo, w_hi = float(ws.min() - w_pad), float(ws.max() + w_pad)
    rect = Rectangle((u_lo, w_lo), (u_lo, w_hi), (u_hi, w_lo))
    gap = args.strip_gap * (u_hi - u_lo)
    uc = model.fold_u

    def to_sv(u):
        return (u - u_lo) / (u_hi - u_lo)

    strips = [(0.0, to_sv(uc - gap)), (to_sv(uc + gap), 1.0)]
    f = return_map(p, t_max=cfg.t_max, tol=cfg.tol)

    def plane_map(uw):
        return f((uw[0], uw[1]))

    # rectangle frame maps (u, w) with s_h along w, s_v along u
    def frame_map(pt):
        return plane_map(pt)

    v = verify_topological_horseshoe(frame_map, rect, strips, n_edge=args.n_edge)
    results = {
        "mode": "return-map",
        "rectangle": {"A": rect.A, "B": rect.B, "C": rect.C, "D": rect.D},
        "strips": strips,
        "partition": {"fold_u": model.fold_u, "orientation": model.orientation},
        "verification": {
            "passed": v.passed, "valid": v.valid,
            "crossing_ok": {str(k): b for k, b in v.crossing_ok.items()},
            "meets_ok": {f"{i}->{j}": b for (i, j), b in v.meets_ok.items()},
            "witnesses": v.witnesses,
            "probes": v.probes, "eval_failures": v.eval_failures,
        },
    }
    rep = Report("verify-horseshoe", _params_echo(cfg, p, info), results, seed=cfg.seed)
    path = _write(cfg.out, "verify-horseshoe.json", rep.to_json())
    print(f"verify-horseshoe: wrote {path} (passed={v.passed})")
    return 0


def cmd_persist(cfg: RunConfig, args) -> int:
    from .horseshoe import attractor_samples, calibrate_partition, find_periodic_orbit, persistence_check

    p, info = cfg.resolve_params()
    dp_parts = args.dp.split(",")
    if len(dp_parts) != 3:
        raise ConfigError(f"--dp needs three comma-separated numbers, got {args.dp!r}")
    dp = tuple(float(v) for v in dp_parts)
    samples = attractor_samples(p, max(300, 60 * len(args.word)), tol=cfg.tol)
    model = calibrate_partition(samples)
    orbit = find_periodic_orbit(p, args.word, model=model, t_max=cfg.t_max)
    rep_data = persistence_check(p, orbit, dp, t_max=cfg.t_max)
    results = {
        "word": args.word,
        "dp": list(dp),
        "index_before": rep_data.index_before,
        "index_after": rep_data.index_after,
        "index_preserved": rep_data.index_preserved,
        "alexander_before": str(rep_data.poly_before),
        "alexander_after": str(rep_data.poly_after),
        "certificate_preserved": rep_data.certificate_preserved,
        "steps": [{"fraction": f, "converged": ok} for f, ok in rep_data.steps],
        "loop_radius": rep_data.loop_radius,
        "residual_after": rep_data.orbit_after.residual,
    }
    rep = Report("persist", _params_echo(cfg, p, info), results, seed=cfg.seed)
    path = _write(cfg.out, "persist.json", rep.to_json())
    print(
        f"persist: wrote {path} (index {rep_data.index_before}->{rep_data.index_after}, "
        f"certificate preserved: {rep_data.certificate_preserved})"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sp):
    sp.add_argument("--config", help="key = value configuration file")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--A", type=float, help="classical-form parameter")
    sp.add_argument("--B", type=float, help="classical-form parameter")
    sp.add_argument("--C", type=float, help="classical-form parameter")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output directory (default .)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rossler-knots",
        description="Numerical topology toolkit for the Rossler system",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("analyze", help="fixed points, spectra, admissibility")
    _add_common(sp)

    sp = sub.add_parser("scan", help="heteroclinic mismatch over two parameters")
    _add_common(sp)
    sp.add_argument("--free", default="a,c", help="two free parameter names (default a,c)")
    sp.add_argument("--x-range", required=True, help="lo:hi for the first free parameter")
    sp.add_argument("--y-range", required=True, help="lo:hi for the second free parameter")
    sp.add_argument("--nx", type=int, default=40)
    sp.add_argument("--ny", type=int, default=40)
    sp.add_argument("--candidates", type=int, default=5)
    sp.add_argument("--refine", action="store_true", help="refine the best local minimum")
    sp.add_argument("--refine-tol", type=float, default=1e-8)

    sp = sub.add_parser("orbits", help="solve periodic orbits per symbol word")
    _add_common(sp)
    sp.add_argument("--words", help="comma-separated words over 1,2")
    sp.add_argument("--max-len", type=int, help="enumerate primitive words up to this length")

    sp = sub.add_parser("knot", help="knot certificate of a stored orbit or the heteroclinic loop")
    _add_common(sp)
    sp.add_argument("--source", choices=["orbit", "heteroclinic"], default="orbit")
    sp.add_argument("--from", dest="from_file", help="orbits.json with stored curves")
    sp.add_argument("--word", help="orbit word inside --from")

    sp = sub.add_parser("verify-horseshoe", help="strip-crossing verification")
    _add_common(sp)
    sp.add_argument("--synthetic", action="store_true", help="run the built-in affine self-test")
    sp.add_argument("--max-len", type=int, default=6, help="synthetic word length bound")
    sp.add_argument("--samples", type=int, default=400, help="attractor samples (return-map mode)")
    sp.add_argument("--strip-gap", type=float, default=0.04, help="half-gap around the fold, relative")
    sp.add_argument("--n-edge", type=int, default=500)

    sp = sub.add_parser("persist", help="index and knot certificate under perturbation")
    _add_common(sp)
    sp.add_argument("--word", required=True)
    sp.add_argument("--dp", required=True, help="da,db,dc perturbation")
    return ap


_DISPATCH = {
    "analyze": cmd_analyze,
    "scan": cmd_scan,
    "orbits": cmd_orbits,
    "knot": cmd_knot,
    "verify-horseshoe": cmd_verify_horseshoe,
    "persist": cmd_persist,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _build_config(args)
        return _DISPATCH[args.cmd](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ToolkitError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
