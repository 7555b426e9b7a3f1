import numpy as np
import pytest

from rossler_knots import knots as kn
from rossler_knots.errors import DiagramError, WordError
from rossler_knots.laurent import LaurentPoly, torus_alexander
from rossler_knots.words import lyndon_words, min_period, primitive_necklaces

TREFOIL = LaurentPoly((1, -1, 1))
FIG8 = LaurentPoly((1, -3, 1))


def test_circle_projects_without_crossings():
    d, r, poly, cls = kn.knot_certificate(kn.PolygonalKnot.circle())
    assert d.n_crossings == 0
    assert poly == LaurentPoly.one()
    assert cls.kind == "unknot"


def test_parametric_trefoil_three_equal_signs():
    d = kn.project(kn.PolygonalKnot.parametric_trefoil())
    assert d.n_crossings == 3
    signs = [e.sign for e in d.entries if e.over]
    assert len(set(signs)) == 1
    assert d.writhe == sum(signs)
    assert kn.alexander(d) == TREFOIL


def test_brute_force_crossing_oracle_trefoil():
    # count sign changes of over/under by brute segment-pair enumeration
    knot = kn.PolygonalKnot.parametric_trefoil(120)
    d = kn.project(knot)
    v = knot.vertices
    dvec = d.direction
    e1 = np.cross(dvec, [1.0, 0.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(dvec, e1)
    p2 = np.stack([v @ e1, v @ e2], axis=1)
    n = len(p2)
    count = 0
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            a0, a1 = p2[i], p2[(i + 1) % n]
            b0, b1 = p2[j], p2[(j + 1) % n]
            da, db = a1 - a0, b1 - b0
            den = da[0] * db[1] - da[1] * db[0]
            if abs(den) < 1e-12:
                continue
            rhs = b0 - a0
            t = (rhs[0] * db[1] - rhs[1] * db[0]) / den
            u = (rhs[0] * da[1] - rhs[1] * da[0]) / den
            if 0 < t < 1 and 0 < u < 1:
                count += 1
    assert count == d.n_crossings


def test_writhe_equals_sign_sum():
    d = kn.project(kn.braid_to_knot(kn.BraidWord(3, (1, -2, 1, -2))))
    assert d.writhe == sum(e.sign for e in d.entries if e.over)


def test_simplify_removes_kink():
    # trefoil code with an extra R1 kink appended
    base = [(1, True, 1), (2, False, 1), (3, True, 1), (1, False, 1), (2, True, 1), (3, False, 1)]
    kinked = base + [(4, True, -1), (4, False, -1)]
    d = kn.CrossingDiagram(tuple(kn.GaussEntry(*e) for e in kinked))
    r = kn.simplify(d)
    assert r.n_crossings == d.n_crossings - 1
    assert kn.alexander(r) == TREFOIL


def test_simplify_trefoil_is_already_reduced():
    base = [(1, True, 1), (2, False, 1), (3, True, 1), (1, False, 1), (2, True, 1), (3, False, 1)]
    d = kn.CrossingDiagram(tuple(kn.GaussEntry(*e) for e in base))
    r = kn.simplify(d)
    assert r.entries == d.entries


def test_inflated_unknots_reduce_to_trivial(inflate_unknot):
    rng = np.random.RandomState(1)
    for trial in range(30):
        d = inflate_unknot(rng, rng.randint(1, 6))
        assert d.n_crossings <= 10
        r = kn.simplify(d)
        assert r.n_crossings == 0
        assert kn.alexander(r) == LaurentPoly.one()


def test_alexander_fig8_hand_code():
    # standard alternating 4-crossing figure-eight diagram
    code = [
        (1, True, 1), (2, False, 1), (3, True, -1), (4, False, -1),
        (2, True, 1), (1, False, 1), (4, True, -1), (3, False, -1),
    ]
    d = kn.CrossingDiagram(tuple(kn.GaussEntry(*e) for e in code))
    assert kn.alexander(d) == FIG8


def test_alexander_unknot_and_single_kink():
    assert kn.alexander(kn.CrossingDiagram(())) == LaurentPoly.one()
    kink = kn.CrossingDiagram((kn.GaussEntry(1, True, 1), kn.GaussEntry(1, False, 1)))
    assert kn.alexander(kink) == LaurentPoly.one()


def test_projection_direction_invariance():
    knot = kn.PolygonalKnot.parametric_trefoil(160)
    rng = np.random.RandomState(9)
    polys = set()
    for _ in range(20):
        hint = rng.standard_normal(3)
        d = kn.project(knot, direction_hint=hint, seed=3)
        polys.add(kn.alexander(kn.simplify(d)))
    assert polys == {TREFOIL}


def test_resampling_invariance():
    knot = kn.PolygonalKnot.parametric_trefoil(150)
    fine = knot.resample_midpoints()
    _, _, p1, _ = kn.knot_certificate(knot)
    _, _, p2, _ = kn.knot_certificate(fine)
    assert p1 == p2 == TREFOIL


def test_alexander_unit_at_one_and_symmetry():
    for knot in [
        kn.PolygonalKnot.parametric_trefoil(),
        kn.braid_to_knot(kn.BraidWord(3, (1, -2, 1, -2))),
        kn.braid_to_knot(kn.BraidWord(2, (1, 1, 1, 1, 1))),
    ]:
        _, _, poly, _ = kn.knot_certificate(knot)
        assert poly(1) in (-1, 1)
        assert poly.is_palindromic()


def test_identify_labels():
    assert kn.identify(LaurentPoly.one()).label == "unknot-compatible"
    assert kn.identify(TREFOIL).kind == "trefoil"
    assert kn.identify(FIG8, bound=12).kind == "unknown"
    assert kn.identify(torus_alexander(3, 5)).kind == "torus"


def test_braid_validation_and_permutation():
    with pytest.raises(WordError):
        kn.BraidWord(2, (2,))
    b = kn.BraidWord(3, (1, 2))
    assert b.permutation() == [2, 0, 1]


def test_braid_closure_multi_component_rejected():
    with pytest.raises(DiagramError):
        kn.braid_to_knot(kn.BraidWord(2, (1, 1)))  # Hopf link


def test_braid_closures_match_torus_polynomials():
    from math import gcd
    for p in range(2, 5):
        for q in range(p + 1, 6):
            if gcd(p, q) != 1:
                continue
            letters = tuple(list(range(1, p)) * q)
            knot = kn.braid_to_knot(kn.BraidWord(p, letters))
            _, _, poly, _ = kn.knot_certificate(knot)
            assert poly == torus_alexander(p, q), (p, q)


def test_braid_closure_simplicity():
    for letters, n in [((1, 1, 1), 2), ((1, -2, 1, -2), 3), ((), 1)]:
        knot = kn.braid_to_knot(kn.BraidWord(n, letters))
        assert knot.min_vertex_spacing() > 0
        assert knot.segment_clearance() > 0.05


def test_empty_braid_is_unknot():
    _, _, poly, cls = kn.knot_certificate(kn.braid_to_knot(kn.BraidWord(1, ())))
    assert cls.kind == "unknot" and poly == LaurentPoly.one()


def test_lorenz_words_basics():
    assert min_period("1212") == 2
    assert [len(primitive_necklaces(k)) for k in range(1, 7)] == [2, 1, 2, 3, 6, 9]
    with pytest.raises(WordError):
        kn.lorenz_word_to_braid("1212")
    b = kn.lorenz_word_to_braid("1")
    assert b.n == 1 and b.letters == ()


def test_lorenz_word_12_is_unknot():
    _, _, poly, cls = kn.template_knot_certificate("12")
    assert cls.kind == "unknot"


def test_lorenz_word_1222_is_trefoil():
    _, _, poly, cls = kn.template_knot_certificate("1222")
    assert cls.kind == "trefoil"


def test_template_enumeration_contains_torus_knots():
    found = set()
    for w in lyndon_words(6):
        _, _, _, cls = kn.template_knot_certificate(w)
        if cls.kind in ("trefoil", "torus"):
            found.add((cls.p, cls.q))
    assert (2, 3) in found
    assert len(found) >= 2
