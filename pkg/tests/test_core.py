import math

import numpy as np
import pytest

from rossler_knots import (
    ClassicalParams,
    Params,
    check_assumptions,
    classify_fixed_point,
    convert_classical,
    field,
    fixed_points,
    jacobian,
)
from rossler_knots.core import classical_field
from rossler_knots.errors import ClassificationError, DegenerateParamsError

P = Params(0.5, 0.5, 2.0)


def test_field_at_origin_is_zero():
    assert np.array_equal(field(P, (0.0, 0.0, 0.0)), np.zeros(3))


def test_field_hand_substitution():
    # x'=-1-1, y'=1+0.5, z'=0.5*1 + 1*(1-2)
    assert np.allclose(field(P, (1.0, 1.0, 1.0)), [-2.0, 1.5, -0.5], atol=0, rtol=0)


def test_field_vanishes_at_outer_point():
    assert np.allclose(field(P, (1.75, -3.5, 3.5)), 0.0, atol=1e-14)


def test_jacobian_entries():
    J = jacobian(P, (0.0, 0.0, 0.0))
    assert np.array_equal(J, [[0, -1, -1], [1, 0.5, 0], [0.5, 0, -2]])


def test_jacobian_y_column_is_linear():
    for s in [(0, 0, 0), (3, -1, 2), (-5, 4, 0.1)]:
        J = jacobian(P, s)
        assert np.array_equal(J[:, 1], [-1.0, P.a, 0.0])


def _fd_jacobian(p, s, h=1e-6):
    s = np.asarray(s, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (field(p, s + e) - field(p, s - e)) / (2 * h)
    return J


def test_jacobian_matches_finite_differences():
    assert np.allclose(jacobian(P, (1, 1, 1)), _fd_jacobian(P, (1, 1, 1)), atol=1e-6)


def test_jacobian_matches_finite_differences_random_states():
    rng = np.random.RandomState(42)
    for _ in range(100):
        s = rng.uniform(-5, 5, size=3)
        assert np.allclose(jacobian(P, s), _fd_jacobian(P, s), atol=1e-6)


def test_fixed_points_values():
    inner, outer = fixed_points(P)
    assert np.array_equal(inner, np.zeros(3))
    assert np.allclose(outer, [1.75, -3.5, 3.5], atol=0, rtol=0)
    inner2, outer2 = fixed_points(Params(0.2, 0.3, 1.5))
    assert np.allclose(outer2, [1.44, -7.2, 7.2], atol=1e-15)


def test_fixed_points_field_residual_random_params():
    rng = np.random.RandomState(7)
    for _ in range(200):
        p = Params(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(1.05, 10.0))
        inner, outer = fixed_points(p)
        assert np.max(np.abs(field(p, inner))) == 0.0
        assert np.max(np.abs(field(p, outer))) <= 1e-12


def test_fixed_points_degenerate():
    with pytest.raises(DegenerateParamsError):
        fixed_points(Params(0.5, 4.0, 2.0))  # c/a - b = 0


def test_classify_inner_point():
    an = classify_fixed_point(P, (0.0, 0.0, 0.0))
    assert an.kind == "stable-axis"
    assert an.gamma < 0 < an.rho
    assert an.shilnikov == (an.saddle_index < 1.0)


def test_classify_trace_identity():
    # trace at the origin is a - c
    an = classify_fixed_point(P, (0.0, 0.0, 0.0))
    assert abs(sum(l.real for l in an.eigenvalues) - (P.a - P.c)) < 1e-10


def test_classify_matches_companion_matrix_oracle():
    rng = np.random.RandomState(3)
    for _ in range(50):
        p = Params(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(1.05, 8.0))
        for s in fixed_points(p):
            try:
                an = classify_fixed_point(p, s)
            except ClassificationError:
                continue
            oracle = np.sort_complex(np.linalg.eigvals(jacobian(p, s)))
            mine = np.sort_complex(np.array(an.eigenvalues))
            assert np.allclose(mine, oracle, rtol=1e-8, atol=1e-10)


def test_classify_residual_and_symmetric_functions():
    rng = np.random.RandomState(11)
    for _ in range(200):
        p = Params(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(1.05, 10.0))
        for s in fixed_points(p):
            J = jacobian(p, s)
            try:
                an = classify_fixed_point(p, s)
            except ClassificationError:
                continue
            tr = np.trace(J)
            det = np.linalg.det(J)
            lam = np.array(an.eigenvalues)
            scale = 1.0 + abs(tr) + abs(det)
            assert abs(lam.sum() - tr) <= 1e-9 * scale
            assert abs(lam.prod() - det) <= 1e-9 * scale
            for l in lam:
                resid = abs(np.linalg.det(J - l * np.eye(3)))
                assert resid <= 1e-10 * (1.0 + abs(l)) ** 3


def test_classify_rejects_non_fixed_point():
    with pytest.raises(ValueError):
        classify_fixed_point(P, (1.0, 1.0, 1.0))


def test_assumptions_pass_and_fail():
    rep = check_assumptions(P)
    assert rep.ranges_ok and rep.saddle_foci_ok and rep.shilnikov_ok
    assert rep.in_parameter_space
    rep2 = check_assumptions(Params(1.5, 0.5, 2.0))
    assert not rep2.ranges_ok


def test_assumptions_match_eigen_oracle():
    rep = check_assumptions(P)
    inner, outer = fixed_points(P)
    an_in = classify_fixed_point(P, inner)
    an_out = classify_fixed_point(P, outer)
    assert rep.saddle_foci_ok == (an_in.kind == "stable-axis" and an_out.kind == "unstable-axis")
    assert rep.shilnikov_ok == (an_in.shilnikov or an_out.shilnikov)


def test_convert_classical_p1_value():
    cp = ClassicalParams(0.2, 0.2, 5.7)
    p, tr = convert_classical(cp)
    p1 = (-5.7 + math.sqrt(5.7**2 - 4 * 0.2 * 0.2)) / (2 * 0.2)
    assert p.a == 0.2
    assert abs(p.b - (-p1)) < 1e-15
    assert abs(p.c - (5.7 + 0.2 * p1)) < 1e-15


def test_convert_classical_pushforward_residual():
    cp = ClassicalParams(0.2, 0.2, 5.7)
    p, tr = convert_classical(cp)
    rng = np.random.RandomState(5)
    for _ in range(20):
        S = rng.uniform(-8, 8, size=3)
        lhs = field(p, tr.to_modern(S))
        rhs = classical_field(cp, S)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * (1.0 + np.max(np.abs(rhs)))


def test_convert_classical_roundtrip_states():
    _, tr = convert_classical(ClassicalParams(0.2, 0.2, 5.7))
    rng = np.random.RandomState(6)
    for _ in range(20):
        S = rng.uniform(-10, 10, size=3)
        assert np.max(np.abs(tr.to_classical(tr.to_modern(S)) - S)) <= 1e-12


def test_convert_classical_origin_maps_to_small_z_fixed_point():
    cp = ClassicalParams(0.2, 0.2, 5.7)
    p, tr = convert_classical(cp)
    img = tr.to_classical((0.0, 0.0, 0.0))
    # classical fixed points: X^2 - C X + A B = 0, Y = -X/A, Z = X/A
    disc = math.sqrt(cp.C**2 - 4 * cp.A * cp.B)
    Xs = [(cp.C - disc) / 2, (cp.C + disc) / 2]
    fps = [np.array([X, -X / cp.A, X / cp.A]) for X in Xs]
    small = min(fps, key=lambda f: abs(f[2]))
    assert np.max(np.abs(img - small)) < 1e-9
    assert np.max(np.abs(classical_field(cp, img))) < 1e-9


def test_convert_classical_requires_positive_discriminant():
    with pytest.raises(DegenerateParamsError):
        convert_classical(ClassicalParams(1.0, 1.0, 1.0))  # C^2 - 4AB < 0
