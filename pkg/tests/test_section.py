import numpy as np
import pytest

from rossler_knots import Params, field, integrate
from rossler_knots import section as sec
from rossler_knots.errors import FixedPointError, NoCrossingError

P = Params(0.5, 0.5, 2.0)
CHART = sec.SectionChart(0.5)


def test_classify_point_half_plane_cases():
    assert sec.classify_point(P, (1, -2, 3)) == sec.UPPER    # x/a = 2 < 3
    assert sec.classify_point(P, (1, -2, 1)) == sec.LOWER    # x/a = 2 > 1
    assert sec.classify_point(P, (1, -2, 2)) == sec.LINE
    assert sec.classify_point(P, (1, 0, 0)) == sec.OFF


def test_chart_roundtrip_and_normal():
    for u, w in [(0.5, 2.0), (-3.0, 0.1), (1e3, -1e3)]:
        s = CHART.to_state(u, w)
        assert abs(s[0] + 0.5 * s[1]) <= 1e-14 * (1 + abs(u))
        u2, w2 = CHART.from_state(s)
        assert (u2, w2) == (u, w)
    assert np.array_equal(CHART.normal, [1.0, 0.5, 0.0])


def test_field_tangent_on_line():
    # F . N = 0 exactly on the tangency line w = u/a
    for u in (-2.0, 0.5, 3.0):
        s = CHART.to_state(u, CHART.line_w(u))
        assert abs(float(field(P, s) @ CHART.normal)) < 1e-13 * (1 + abs(u))


def test_next_crossing_postconditions(chaotic_params, attractor_state):
    state, t_hit = sec.next_crossing(chaotic_params, attractor_state, sec.UPPER, 50.0)
    assert t_hit > 0
    assert abs(state[0] + chaotic_params.a * state[1]) <= 1e-11
    assert sec._gdot(chaotic_params, state) < 0


def test_next_crossing_continuity(chaotic_params, attractor_state):
    # restarting slightly before a computed crossing lands on it almost at once
    state, t_hit = sec.next_crossing(chaotic_params, attractor_state, sec.UPPER, 50.0)
    traj = integrate(chaotic_params, attractor_state, t_hit * (1 - 1e-6), 1e-11)
    state2, dt = sec.next_crossing(chaotic_params, traj.end_state, sec.UPPER, 1.0)
    assert dt <= 2e-5 * t_hit
    assert np.linalg.norm(state2 - state) < 1e-5


def test_crossing_refinement_idempotent(chaotic_params, attractor_state):
    state, _ = sec.next_crossing(chaotic_params, attractor_state, sec.UPPER, 50.0)
    # refining from the refined point: root of g on a fresh dense segment
    traj = integrate(chaotic_params, state, 0.5, 1e-11)
    g0, coef = sec._g_poly(traj, 0)
    th = sec._refine_root(g0, coef, 0.0, 1e-6, g0 if g0 != 0 else 1e-30, -1.0)
    moved = np.linalg.norm(traj.eval_step(0, th) - state)
    assert moved <= 1e-12 * (1 + np.linalg.norm(state))


def test_crossing_time_tightens_with_tol(chaotic_params, attractor_state):
    ts = []
    for tol in (1e-7, 1e-9, 1e-12):
        _, t_hit = sec.next_crossing(chaotic_params, attractor_state, sec.UPPER, 50.0, tol)
        ts.append(t_hit)
    assert abs(ts[1] - ts[2]) < abs(ts[0] - ts[2]) or abs(ts[0] - ts[2]) < 1e-12


def test_no_crossing_within_budget():
    with pytest.raises(NoCrossingError):
        # far from the section heading to a fixed point region: tiny budget
        sec.next_crossing(P, (0.01, -0.01, 0.005), sec.UPPER, 1e-3)


def test_first_return_requires_upper_point():
    q = sec.SectionPoint.make(CHART, 1.0, CHART.line_w(1.0) - 1.0)  # lower half
    with pytest.raises(ValueError):
        sec.first_return(P, q)


def test_first_return_sample_invariants(chaotic_params, attractor_crossing):
    s = sec.first_return(chaotic_params, attractor_crossing)
    assert s.out_point.side == sec.UPPER
    assert s.transversality_margin < 0
    assert s.return_time > 0
    assert s.lower_crossings == 1
    out3 = sec.SectionChart(chaotic_params.a).to_state(s.out_point.u, s.out_point.w)
    assert abs(out3[0] + chaotic_params.a * out3[1]) <= 1e-11


def test_first_return_backward_recovery_mild():
    # mild contraction: the in-point is recoverable from the out-point
    tr = integrate(P, (0.3, -0.3, 0.1), 200.0, 1e-9)
    cr = sec.crossings_of(integrate(P, tr.end_state, 30.0, 1e-12), want_side=sec.UPPER)[0]
    q = sec.SectionPoint.make(CHART, cr.state[0], cr.state[2])
    s = sec.first_return(P, q, tol=1e-12)
    out3 = CHART.to_state(s.out_point.u, s.out_point.w)
    bk = integrate(P, out3, s.return_time, 1e-12, direction=-1)
    assert max(abs(bk.end_state[0] - q.u), abs(bk.end_state[2] - q.w)) <= 1e-7


def test_first_return_composition(chaotic_params, attractor_crossing):
    # two successive returns equal one return applied twice (same tol path)
    s1 = sec.first_return(chaotic_params, attractor_crossing)
    s2 = sec.first_return(chaotic_params, s1.out_point)
    f = sec.return_map(chaotic_params)
    uw = f((attractor_crossing.u, attractor_crossing.w))
    uw2 = f(uw)
    assert np.allclose(uw2, (s2.out_point.u, s2.out_point.w), atol=1e-9)


def test_fixed_point_capture():
    with pytest.raises(FixedPointError):
        # start on the section very near the inner fixed point: immediate capture
        q = sec.SectionPoint.make(CHART, 1e-10, 1e-9 + 1e-10 / 0.5)
        sec.first_return(P, q)


def test_grid_empty_and_failure_map(chaotic_params):
    g = sec.return_map_grid(chaotic_params, (0.0, 1.0), (0.0, 1.0), 0, 0)
    assert g.samples == {} and g.failures == {}
    g2 = sec.return_map_grid(chaotic_params, (-1.4, -0.6), (0.0, 0.05), 3, 2, t_max=50.0)
    assert len(g2.samples) + len(g2.failures) == 6
    assert g2.n_success >= 4


def test_grid_determinism(chaotic_params):
    g1 = sec.return_map_grid(chaotic_params, (-1.4, -0.6), (0.0, 0.05), 3, 2, t_max=50.0)
    g2 = sec.return_map_grid(chaotic_params, (-1.4, -0.6), (0.0, 0.05), 3, 2, t_max=50.0)
    assert g1.failures == g2.failures
    for k in g1.samples:
        assert g1.samples[k].out_point == g2.samples[k].out_point
        assert g1.samples[k].return_time == g2.samples[k].return_time


def test_grid_refinement_reproduces_shared_nodes(chaotic_params):
    g1 = sec.return_map_grid(chaotic_params, (-1.4, -0.6), (0.0, 0.04), 3, 3, t_max=50.0)
    g2 = sec.return_map_grid(chaotic_params, (-1.4, -0.6), (0.0, 0.04), 5, 5, t_max=50.0)
    # node (i, j) of the coarse grid is node (2i, 2j) of the refined grid
    for (i, j), s in g1.samples.items():
        s2 = g2.samples[(2 * i, 2 * j)]
        assert s2.out_point == s.out_point
        assert s2.return_time == s.return_time


def test_return_map_orientation_nonsingular(chaotic_params, attractor_crossing):
    f = sec.return_map(chaotic_params, tol=1e-10)
    u, w = attractor_crossing.u, attractor_crossing.w
    d = 1e-6
    fu1 = np.array(f((u + d, w)))
    fu0 = np.array(f((u - d, w)))
    fw1 = np.array(f((u, w + d)))
    fw0 = np.array(f((u, w - d)))
    J = np.column_stack([(fu1 - fu0) / (2 * d), (fw1 - fw0) / (2 * d)])
    assert abs(np.linalg.det(J)) > 0
