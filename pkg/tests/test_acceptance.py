"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines.
"""

import itertools

import numpy as np
import pytest

from rossler_knots import (
    Params,
    check_assumptions,
    classify_fixed_point,
    field,
    fixed_points,
    integrate,
    jacobian,
)
from rossler_knots import horseshoe as hs
from rossler_knots import knots as kn
from rossler_knots import manifolds as mf
from rossler_knots import section as sec
from rossler_knots.cli import main as cli_main
from rossler_knots.errors import SearchError, ToolkitError
from rossler_knots.laurent import LaurentPoly, torus_alexander
from rossler_knots.words import canonical_necklace, is_primitive, lyndon_words


def _line(num: int, ok: bool, desc: str):
    print(f"ACCEPTANCE {num:2d}: {'PASS' if ok else 'FAIL'} - {desc}")
    assert ok, f"acceptance criterion {num} failed: {desc}"


def _random_valid_params(rng, n):
    out = []
    while len(out) < n:
        p = Params(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(1.05, 10.0))
        try:
            if check_assumptions(p).in_parameter_space:
                out.append(p)
        except ToolkitError:
            continue
    return out


def test_acceptance_01_fixed_point_formulas():
    rng = np.random.RandomState(101)
    worst_field = 0.0
    worst_ident = 0.0
    for p in _random_valid_params(rng, 1000):
        inner, outer = fixed_points(p)
        worst_field = max(worst_field, float(np.max(np.abs(field(p, inner)))))
        worst_field = max(worst_field, float(np.max(np.abs(field(p, outer)))))
        for s in (inner, outer):
            J = jacobian(p, s)
            an = classify_fixed_point(p, s)
            lam = np.array(an.eigenvalues)
            tr, det = np.trace(J), np.linalg.det(J)
            scale = 1.0 + abs(tr) + abs(det)
            worst_ident = max(
                worst_ident,
                abs(lam.sum() - tr) / scale,
                abs(lam.prod() - det) / scale,
            )
    ok = worst_field <= 1e-12 and worst_ident <= 1e-9
    _line(1, ok, f"1000 params: field residual {worst_field:.2e} <= 1e-12, "
                 f"eigen identities {worst_ident:.2e} <= 1e-9")


def test_acceptance_02_integrator_order(chaotic_params, attractor_state):
    T = 50.0
    ends = [integrate(chaotic_params, attractor_state, T, 1e-9, h_fixed=h).end_state
            for h in (0.02, 0.01, 0.005, 0.0025)]
    errs = [np.linalg.norm(ends[i] - ends[i + 1]) for i in range(3)]
    orders = [float(np.log2(errs[i] / errs[i + 1])) for i in range(2)]
    ok = min(orders) >= 4.0
    _line(2, ok, f"step-halving orders {[f'{o:.2f}' for o in orders]} (need >= 4.0)")


def test_acceptance_03_section_transversality(chaotic_params, attractor_state):
    rng = np.random.RandomState(103)
    base = integrate(chaotic_params, attractor_state, 600.0, 1e-9)
    idx = np.linspace(0, base.n_steps, 500, endpoint=False).astype(int)
    worst_g = 0.0
    all_neg = True
    for i in idx:
        s0 = base.states[i] + 1e-3 * rng.standard_normal(3)
        state, _ = sec.next_crossing(chaotic_params, s0, sec.UPPER, 50.0)
        g = abs(state[0] + chaotic_params.a * state[1])
        worst_g = max(worst_g, g)
        if sec._gdot(chaotic_params, state) >= 0:
            all_neg = False
    ok = all_neg and worst_g <= 1e-11
    _line(3, ok, f"500 bounded trajectories hit the upper half transversely; "
                 f"max |x+ay| = {worst_g:.2e} <= 1e-11, margins < 0: {all_neg}")


def test_acceptance_04_trapping_diagnostics():
    rng = np.random.RandomState(104)
    n_ok = 0
    params = _random_valid_params(rng, 20)
    for p in params:
        good = False
        for side in "+-":
            b = mf.grow_branch(p, f"stable-inner{side}", t_max=400.0)
            if not b.escapes:
                continue
            rep = mf.trapping_diagnostics(p, b)
            if rep.satisfied and rep.entry_time is not None:
                good = True
                break
        n_ok += good
    ok = n_ok == 20
    _line(4, ok, f"{n_ok}/20 params: escaping inner-stable tail satisfies "
                 f"y >= -1e-9 and dy/dtau >= -1e-9 past its entry time")


def test_acceptance_05_synthetic_horseshoe_suite():
    rep = hs.synthetic_horseshoe_selftest(6)
    counts = [rep["necklace_counts"][k] for k in range(1, 7)]
    brute = []
    for k in range(1, 7):
        classes = {canonical_necklace("".join(w))
                   for w in itertools.product("12", repeat=k) if is_primitive("".join(w))}
        brute.append(len(classes))
    ok = (
        rep["verification"].passed
        and counts == brute == [2, 1, 2, 3, 6, 9]
        and rep["counts_match"]
        and rep["all_indices_minus_one"]
    )
    _line(5, ok, f"affine horseshoe: strip conditions pass, class counts {counts} "
                 f"match necklace oracle, all indices -1: {rep['all_indices_minus_one']}")


def test_acceptance_06_index_calculus():
    saddle = lambda uv: (2 * uv[0], uv[1] / 2)
    contraction = lambda uv: (uv[0] / 2, uv[1] / 2)
    translation = lambda uv: (uv[0] + 3, uv[1])
    i_s = hs.fixed_point_index(saddle, hs.circle_loop((0, 0), 1.0)).index
    i_c = hs.fixed_point_index(contraction, hs.circle_loop((0, 0), 1.0)).index
    i_t = hs.fixed_point_index(translation, hs.circle_loop((0, 0), 1.0)).index
    refined = hs.fixed_point_index(saddle, hs.circle_loop((0, 0), 1.0, n=64)).index
    scaled = hs.fixed_point_index(saddle, hs.circle_loop((0, 0), 2.0)).index
    ok = (i_s, i_c, i_t) == (-1, 1, 0) and refined == i_s and scaled == i_s
    _line(6, ok, f"saddle {i_s}, contraction {i_c}, translation {i_t}; "
                 f"refinement x2 and radius x2 invariant")


def test_acceptance_07_knot_engine(inflate_unknot):
    from math import gcd

    torus_ok = True
    for p in range(2, 5):
        for q in range(p + 1, 6):
            if gcd(p, q) != 1:
                continue
            letters = tuple(list(range(1, p)) * q)
            knot = kn.braid_to_knot(kn.BraidWord(p, letters))
            _, _, poly, _ = kn.knot_certificate(knot)
            torus_ok &= poly == torus_alexander(p, q)

    knot = kn.PolygonalKnot.parametric_trefoil(160)
    rng = np.random.RandomState(107)
    polys = {kn.alexander(kn.simplify(kn.project(knot, rng.standard_normal(3), seed=5)))
             for _ in range(20)}
    proj_ok = polys == {LaurentPoly((1, -1, 1))}

    rng2 = np.random.RandomState(108)
    reduce_ok = True
    for _ in range(30):
        d = inflate_unknot(rng2, rng2.randint(1, 6))
        r = kn.simplify(d)
        reduce_ok &= r.n_crossings == 0 and kn.alexander(r) == LaurentPoly.one()
    ok = torus_ok and proj_ok and reduce_ok
    _line(7, ok, f"torus braids exact: {torus_ok}; 20-direction invariance: {proj_ok}; "
                 f"inflated unknots reduce to trivial: {reduce_ok}")


def test_acceptance_08_template_content():
    trefoil_word = None
    classes = set()
    for w in lyndon_words(8):
        _, _, _, cls = kn.template_knot_certificate(w)
        if cls.kind in ("trefoil", "torus"):
            classes.add((cls.p, cls.q))
            if cls.kind == "trefoil" and trefoil_word is None:
                trefoil_word = w
        if trefoil_word is not None and len(classes) >= 2:
            break
    ok = trefoil_word is not None and len(classes) >= 2
    _line(8, ok, f"template words <= 8: trefoil at {trefoil_word!r}, "
                 f"torus classes {sorted(classes)}")


def test_acceptance_09_heteroclinic_scan():
    p0 = Params(0.3, 0.2, 2.0)
    scan = mf.mismatch_scan(p0, ("a", "c"), (0.12, 0.42), (1.6, 3.2), 40, 40,
                            t_max=200.0, tol=1e-9)
    finite_ok = scan.finite_fraction >= 0.60

    # continuity along grid rows away from failure boundaries
    jumps = []
    nx, ny = scan.norms.shape
    def clean(i, j):
        for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            if 0 <= ii < nx and 0 <= jj < ny and not np.isfinite(scan.norms[ii, jj]):
                return False
        return True
    for i in range(nx - 1):
        for j in range(ny):
            if clean(i, j) and clean(i + 1, j):
                jumps.append(abs(scan.norms[i + 1, j] - scan.norms[i, j]))
    jumps = np.array(jumps)
    cont_ok = len(jumps) > 200 and float(np.mean(jumps <= 0.35)) >= 0.95

    refine_note = "refinement did not converge (allowed)"
    refine_ok = True
    minima = scan.local_minima(1)
    if minima:
        i, j = minima[0]
        seed = p0.replace(a=float(scan.x_vals[i]), c=float(scan.y_vals[j]))
        try:
            res = mf.find_trefoil_candidate(seed, ("a", "c"), tol=1e-8, max_iter=25,
                                            t_max=200.0, ode_tol=1e-9)
            refine_ok = (res.diagnostics.mismatch_norm <= 1e-8
                         and res.diagnostics.n_upper >= 1
                         and res.knot_class is not None)
            refine_note = (f"refined to |mismatch|={res.diagnostics.mismatch_norm:.2e}, "
                           f"nU={res.diagnostics.n_upper}, nL={res.diagnostics.n_lower}, "
                           f"knot={res.knot_class}")
        except (SearchError, ToolkitError) as e:
            refine_note = f"refinement did not converge ({type(e).__name__}; allowed)"
    ok = finite_ok and cont_ok and refine_ok
    _line(9, ok, f"40x40 scan: finite {scan.finite_fraction:.1%} >= 60%, "
                 f"continuity {float(np.mean(jumps <= 0.35)):.1%} of clean jumps <= 0.35; "
                 f"{refine_note}")


def test_acceptance_10_orbit_persistence(chaotic_params):
    samples = hs.attractor_samples(chaotic_params, 400)
    model = hs.calibrate_partition(samples)
    all_ok = True
    notes = []
    for word in ("1", "12"):
        orbit = hs.find_periodic_orbit(chaotic_params, word, model=model)
        rep = hs.persistence_check(chaotic_params, orbit, (2e-5, 0.0, 5e-5),
                                   first_step=0.5, check_each_step=True)
        step_ok = all(chk["index"] == rep.index_before and chk["poly"] == rep.poly_before
                      for chk in rep.step_checks)
        good = rep.index_preserved and rep.certificate_preserved and step_ok
        all_ok &= good
        notes.append(f"{word}: index {rep.index_before}->{rep.index_after}, "
                     f"cert {rep.poly_before}=={rep.poly_after}, "
                     f"{len(rep.step_checks)} step checks")
    _line(10, all_ok, "; ".join(notes))


def test_acceptance_11_cli_determinism(tmp_path):
    chaotic = ["--a", "0.2", "--b", "0.03513102417050051", "--c", "5.6929737951659"]
    runs = []
    for run_id in (1, 2):
        out = tmp_path / f"run{run_id}"
        cmds = [
            ["analyze", *chaotic, "--out", out / "a"],
            ["scan", "--a", "0.3", "--b", "0.2", "--c", "2.0",
             "--x-range", "0.25:0.4", "--y-range", "1.8:2.1",
             "--nx", "5", "--ny", "5", "--t-max", "100", "--out", out / "s"],
            ["orbits", *chaotic, "--words", "1", "--out", out / "o"],
            ["knot", "--source", "orbit", "--from", out / "o" / "orbits.json",
             "--word", "1", "--out", out / "k"],
            ["verify-horseshoe", "--synthetic", "--max-len", "4", "--out", out / "v"],
            ["persist", *chaotic, "--word", "1", "--dp", "1e-5,0,2e-5", "--out", out / "p"],
        ]
        for cmd in cmds:
            assert cli_main([str(c) for c in cmd]) == 0
        runs.append(out)
    diffs = []
    for rel in ["a/analyze.json", "s/scan.json", "s/scan.csv", "o/orbits.json",
                "k/knot.json", "k/knot.svg", "v/verify-horseshoe.json", "p/persist.json"]:
        b1 = (runs[0] / rel).read_bytes()
        b2 = (runs[1] / rel).read_bytes()
        if b1 != b2:
            diffs.append(rel)
    ok = not diffs
    _line(11, ok, f"all six commands byte-identical across reruns"
                  + (f" (diffs: {diffs})" if diffs else ""))
