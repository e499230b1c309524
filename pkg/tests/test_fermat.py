"""
Tests for exact Q(ζ8) arithmetic and the marked points of the Fermat quartic.

    pytest tests/test_fermat.py
"""

from fractions import Fraction

import pytest

import families
from finite_group import subgroup_generated
from fermat import (BRANCH_POINTS, TABLE, ZETA4, ZETA8, CurveError, Cyclotomic, ProjectivePoint, act,
                    fermat_group, fixed_points, marked_point_set, match_abstract_points, on_curve,
                    quotient_map, verify_marked_points)


# ── Q(ζ8) ────────────────────────────────────────────────────────────────────

def test_zeta_powers():
    assert ZETA8 ** 8 == 1
    assert ZETA8 ** 4 == -1
    assert ZETA4 ** 2 == -1
    assert ZETA8 ** 2 == ZETA4
    assert Cyclotomic.zeta(9) == ZETA8
    assert Cyclotomic.zeta(-1) == ZETA8 ** 7


def test_field_arithmetic():
    x = Cyclotomic((1, 2, 0, Fraction(-1, 3)))
    one = Cyclotomic.from_int(1)
    assert x * x.inverse() == one
    assert x / x == one
    assert (x - x).is_zero()
    assert x ** -2 * x ** 2 == one
    assert 2 * x == x + x
    assert 1 - x == -(x - 1)


def test_norm_and_conjugates():
    assert (1 + ZETA8).norm() == 2
    assert ZETA8.norm() == 1
    assert ZETA8.conjugate(3) == ZETA8 ** 3
    with pytest.raises(ValueError):
        ZETA8.conjugate(2)


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        Cyclotomic().inverse()


def test_text():
    assert str(Cyclotomic((1, 0, -1, 0))) == "1 - ζ^2"
    assert str(Cyclotomic()) == "0"
    assert Cyclotomic((Fraction(1, 2), 0, 0, 0)).as_list() == ["1/2", "0", "0", "0"]


# ── Projective points ─────────────────────────────────────────────────────────

def test_points_are_normalized():
    assert ProjectivePoint.of(2, 4, 2) == ProjectivePoint.of(1, 2, 1)
    assert ProjectivePoint.of(ZETA8, 0, 0) == ProjectivePoint.of(1, 0, 0)
    with pytest.raises(CurveError):
        ProjectivePoint.of(0, 0, 0)


def test_table_points_lie_on_the_curve():
    for p, _ in TABLE:
        assert on_curve(p)
    assert not on_curve(ProjectivePoint.of(1, 1, 1))


@pytest.mark.parametrize("scale", [ZETA8, 1 + ZETA8, Cyclotomic.from_int(-2), Cyclotomic((Fraction(1, 3), 0, 2, -1))])
def test_on_curve_ignores_rescaling(scale):
    points = [p for p, _ in TABLE] + [ProjectivePoint.of(1, 1, 1), ProjectivePoint.of(ZETA8, 0, 2)]
    for p in points:
        scaled = ProjectivePoint(tuple(scale * x for x in p.coords))
        assert scaled == p
        assert on_curve(scaled) == on_curve(p)


# ── Action and fixed points ───────────────────────────────────────────────────

def test_action_on_a_table_point():
    g = fermat_group()
    p = TABLE[0][0]
    assert act(g.element("(1,0)"), p) == p
    assert act(g.element("(0,1)"), p) != p


def test_action_is_exhaustively_compatible():
    g = fermat_group()
    marked = marked_point_set(g)
    identity = g.element(g.identity)
    for p in marked:
        assert act(identity, p) == p
    for x in g.elements():
        for y in g.elements():
            for p in marked:
                assert act(x * y, p) == act(x, act(y, p))


def test_fixed_points_of_generators():
    g = fermat_group()
    assert fixed_points(g.element("(1,0)")) == fixed_points(g.element("(3,0)"))
    assert len(fixed_points(g.element("(1,0)"))) == 4
    assert len(fixed_points(g.element("(2,0)"))) == 4
    assert fixed_points(g.element("(1,2)")) == []
    with pytest.raises(CurveError):
        fixed_points(g.element("(0,0)"))


def test_twelve_marked_points():
    marked = marked_point_set(fermat_group())
    assert len(marked) == 12
    assert all(on_curve(p) for p in marked)


def test_quotient_map_branch_points():
    images = {quotient_map(p) for p in marked_point_set(fermat_group())}
    assert images == set(BRANCH_POINTS)


def test_action_needs_z4_squared():
    g = families.klein_subgroup(fermat_group()).group
    with pytest.raises(CurveError):
        act(g.element("(2,0)"), TABLE[0][0])


# ── Verification report ───────────────────────────────────────────────────────

def test_verify_marked_points_passes():
    report = verify_marked_points()
    assert report.passed, [c.name for c in report.checks if not c.passed]
    assert report.orbit_lengths == [4, 4, 4]
    assert len(report.points) == 12
    assert report.subgroup_orbit_lengths is None


def test_verify_with_spec_and_subgroup(x_spec):
    spec = x_spec(1)
    report = verify_marked_points(families.klein_subgroup(spec.group), spec)
    assert report.passed
    assert report.subgroup_orbit_lengths == [2] * 6
    d = report.as_dict()
    assert d["passed"] is True
    assert "abstract marked points match coordinates" in [c["name"] for c in d["checks"]]


def test_match_abstract_points(x_spec):
    spec = x_spec(1)
    mapping = match_abstract_points(spec)
    assert len(mapping) == 12
    g = spec.group
    for mp, p in mapping.items():
        assert {x.index for x in g.elements() if act(x, p) == p} == set(mp.stabilizer)


def test_twisted_factor_has_no_standard_stabilizers(x_spec):
    # the twisted vector uses <(1,2)>, <(2,3)>, <(1,3)>, none of which fixes a point of the standard action
    with pytest.raises(CurveError):
        match_abstract_points(x_spec(2), factor=1)


def test_klein_orbit_count_is_checked(x_spec):
    report = verify_marked_points(families.klein_subgroup(x_spec(1).group))
    names = {c.name: c.passed for c in report.checks}
    assert names["2-torsion subgroup has 6 orbits of length 2"]
    assert any(n.startswith("orbits of {") and ok for n, ok in names.items())


def test_cyclic_subgroup_orbits_follow_the_stabilizers():
    h = subgroup_generated(fermat_group(), ["(1,0)"])
    report = verify_marked_points(h)
    assert report.passed, [c.name for c in report.checks if not c.passed]
    assert report.subgroup_orbit_lengths == [1, 1, 1, 1, 4, 4]
    assert "2-torsion subgroup has 6 orbits of length 2" not in [c.name for c in report.checks]
