"""
Tests for the fiber product, fixed-point generators and π₁.

Mark summary: n = 4 is `slow`, n = 5 is `stretch` (see conftest.py).

    pytest tests/test_pi1.py
    pytest tests/test_pi1.py --slow
"""

import dataclasses
import random

import numpy as np
import pytest

import families
import pi1
from finite_group import FiniteGroup, automorphism_from_matrix, make_abelian_group
from fpgroup import BudgetError, Word, WordError, abelianization, word_multiply
from orbifold import BranchData, GeneratingVector, GeneratingVectorError
from pi1 import (CERTIFIED, INFINITE, UNDETERMINED, UncertifiedError, armstrong_pi1, build_ambient_presentation,
                 build_fiber_product, enumerate_fix_generators, universal_cover_report)
from product_quotient import Factor, ProductQuotientSpec, singular_census
from settings import Limits


@pytest.fixture(scope="module")
def pi1_cache():
    """(family, n) → Pi1Result, computed once per module."""
    cache = {}

    def get(name, n):
        if (name, n) not in cache:
            cache[(name, n)] = armstrong_pi1(families.family(name, n))
        return cache[(name, n)]
    return get


# ── Ambient presentation and fiber product ───────────────────────────────────

def test_ambient_presentation(x_spec):
    p, offsets = build_ambient_presentation(x_spec(2))
    assert p.generators == ("c1_1", "c2_1", "c3_1", "c1_2", "c2_2", "c3_2")
    assert offsets == (0, 3)
    assert len(p.relators) == 2 * 4 + 3 * 3
    assert (1, 4, -1, -4) in p.relators


@pytest.mark.parametrize("n,index", [(1, 1), (2, 16), (3, 256)])
def test_fiber_product_index(x_spec, n, index):
    fp = build_fiber_product(x_spec(n))
    assert fp.index == index
    fp.table.verify()


def test_fiber_product_index_budget(x_spec):
    with pytest.raises(BudgetError):
        build_fiber_product(x_spec(3), Limits(max_cosets=100))


def test_fiber_product_membership(x_spec):
    fp = build_fiber_product(x_spec(2))
    # c1_1^2 ↦ (2,0) in factor 1, c1_2^2 ↦ (2,0) in factor 2
    inside = Word([1, 1, 4, 4])
    assert fp.contains(inside)
    assert fp.factor_values(inside) == (8, 8)
    assert not fp.contains(Word([1]))
    with pytest.raises(WordError):
        fp.schreier.rewrite(Word([1]))


def test_schreier_words_lie_in_fiber_product(x_spec):
    fp = build_fiber_product(x_spec(2))
    for s in range(1, fp.presentation.generator_count + 1):
        assert fp.contains(fp.schreier.schreier_word(s))


def test_inconsistent_epimorphisms_are_invalid_input(x_spec, monkeypatch):
    real = pi1._diagonal_quotient

    def collapsed(spec):
        q = real(spec)
        return dataclasses.replace(q, images=[q.identity] * len(q.images))

    monkeypatch.setattr(pi1, "_diagonal_quotient", collapsed)
    with pytest.raises(GeneratingVectorError, match="inconsistent"):
        build_fiber_product(x_spec(2))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_squares_in_one_factor_lie_in_the_fixed_subgroup(pi1_cache, seed):
    result = pi1_cache("Y", 2)
    fp = result.fiber_product
    rng = random.Random(seed)
    width = fp.offsets[1]
    w = Word(rng.choice([1, -1]) * rng.randint(1, width) for _ in range(12))
    square = word_multiply(w, w)
    assert fp.contains(square)
    assert result.is_trivial(square)


# ── Fixed-point generators ────────────────────────────────────────────────────

def test_fix_generators_have_common_nontrivial_value(x_spec):
    x2 = x_spec(2)
    fp = build_fiber_product(x2)
    fix = enumerate_fix_generators(fp)
    assert fix
    g = x2.group
    assert {g.label(f.value) for f in fix} <= {"(2,0)", "(0,2)", "(2,2)"}
    for f in fix:
        assert fp.contains(f.word)
        assert len(set(fp.factor_values(f.word))) == 1
        assert f.choices[0].conjugator == g.identity
        assert f.describe(g).startswith(g.label(f.value) + ": (")


def test_fix_generator_budget(x_spec):
    fp = build_fiber_product(x_spec(2))
    with pytest.raises(BudgetError):
        enumerate_fix_generators(fp, limits=Limits(max_relators=1))


# ── π₁ of the families ────────────────────────────────────────────────────────

@pytest.mark.parametrize("name,n", [("X", 2), ("X", 3), ("Y", 2), ("Y", 3)])
def test_family_pi1(pi1_cache, name, n):
    result = pi1_cache(name, n)
    expected = families.expected_values(name, n)
    assert result.status == CERTIFIED
    assert result.order == expected["pi1_order"]
    assert result.tag == expected["pi1_type"]
    assert result.abelian.is_elementary_abelian(2)
    assert not result.beyond_verified_range


def test_x3_order_is_sixteen(pi1_cache):
    assert pi1_cache("X", 3).order == 16
    assert pi1_cache("X", 3).tag == "Z2^4"


@pytest.mark.parametrize("n", [2, 3])
def test_x_is_four_times_y(pi1_cache, n):
    assert pi1_cache("X", n).order == 4 * pi1_cache("Y", n).order


def test_curve_quotient_is_simply_connected(x_spec):
    result = armstrong_pi1(x_spec(1))
    assert result.certified
    assert result.order == 1 and result.tag == "1"


@pytest.mark.parametrize("seed", [1, 7, 2024])
def test_seed_does_not_change_the_answer(x_spec, seed):
    result = armstrong_pi1(x_spec(2), seed=seed)
    assert (result.order, result.tag) == (8, "Z2^3")


def test_factor_order_does_not_change_the_answer(x_spec):
    result = armstrong_pi1(x_spec(3).permuted([1, 2, 0]))
    assert (result.order, result.tag) == (16, "Z2^4")


def test_uniform_automorphism_does_not_change_the_answer(x_spec):
    x2 = x_spec(2)
    twist = automorphism_from_matrix(x2.group, [[3, 0], [0, 1]])
    result = armstrong_pi1(x2.twisted(twist))
    assert (result.order, result.tag) == (8, "Z2^3")


def test_without_orbit_reduction(x_spec):
    full = armstrong_pi1(x_spec(2), reduce_orbits=False)
    reduced = armstrong_pi1(x_spec(2))
    assert full.order == reduced.order == 8
    assert full.counts["fix_relators"] >= reduced.counts["fix_relators"]


def _relabelled_z4_squared():
    """Z4² with indices reversed, so the identity sits at index 15."""
    g = make_abelian_group([4, 4])
    sigma = [g.order - 1 - x for x in range(g.order)]
    table = np.empty_like(g.table)
    for a in range(g.order):
        for b in range(g.order):
            table[sigma[a], sigma[b]] = sigma[g.mul(a, b)]
    labels = [g.label(sigma[x]) for x in range(g.order)]
    return FiniteGroup(table, labels, name="Z4^2")


def test_coset_representatives_start_at_the_identity():
    g = _relabelled_z4_squared()
    assert g.identity == 15
    cyclic = g.closure([g.index_of("(1,0)")])
    reps = pi1._coset_representatives(g, cyclic)
    assert reps[0] == g.identity
    assert len(reps) == 4
    assert len({frozenset(g.mul(x, y) for y in cyclic) for x in reps}) == 4


def test_identity_position_does_not_change_the_answer(x_spec):
    g = _relabelled_z4_squared()
    factors = tuple(Factor(families.BRANCH, GeneratingVector.from_labels(g, f.vector.labels()), "C")
                    for f in x_spec(2).factors)
    result = armstrong_pi1(ProductQuotientSpec(g, factors, "X_2"))
    assert result.certified
    assert (result.order, result.tag) == (8, "Z2^3")


@pytest.mark.parametrize("name", ["X", "Y"])
def test_orbit_reduction_keeps_the_order_at_n3(pi1_cache, name):
    full = armstrong_pi1(families.family(name, 3), reduce_orbits=False)
    assert full.certified
    assert (full.order, full.tag) == (pi1_cache(name, 3).order, pi1_cache(name, 3).tag)


@pytest.mark.parametrize("n", [2, 3])
def test_y_generators_are_involutions(pi1_cache, n):
    result = pi1_cache("Y", n)
    for s in range(1, result.presentation.generator_count + 1):
        assert result.table.trace(0, Word([s, s])) == 0


def test_fixed_point_elements_are_trivial(pi1_cache):
    result = pi1_cache("X", 2)
    assert result.is_trivial(Word([1, 1, 4, 4]))
    assert result.is_trivial(Word([1, 1, 1, 1]))
    with pytest.raises(WordError):
        result.element_of(Word([1]))


def test_element_of_lands_in_simplified_generators(pi1_cache):
    result = pi1_cache("X", 2)
    w = result.element_of(Word([1, 2, -1, -2]))
    assert all(0 < abs(x) <= result.presentation.generator_count for x in w)


def test_result_dict(pi1_cache):
    d = pi1_cache("Y", 2).as_dict()
    assert d["status"] == "certified" and d["order"] == 2
    assert d["abelian_invariants"] == {"free_rank": 0, "torsion": [2], "order": 2}
    assert "timing" in d
    assert "timing" not in pi1_cache("Y", 2).as_dict(timing=False)


def test_simplified_presentation_matches_abelian_invariants(pi1_cache):
    result = pi1_cache("X", 2)
    assert abelianization(result.presentation) == result.abelian


# ── Limits and other statuses ─────────────────────────────────────────────────

def test_budget_gives_undetermined(x_spec):
    result = armstrong_pi1(x_spec(3), Limits(max_cosets=100))
    assert result.status == UNDETERMINED
    assert result.order is None and result.abelian is None
    assert "max_cosets" in result.reason
    with pytest.raises(UncertifiedError):
        universal_cover_report(x_spec(3), result, singular_census(x_spec(3)))


def test_final_enumeration_limit_keeps_h1(x_spec):
    result = armstrong_pi1(x_spec(2), Limits(max_deductions=1))
    assert result.status == UNDETERMINED
    assert result.abelian is not None and str(result.abelian) == "Z2^3"
    assert result.tag == "H1 only: Z2^3"
    with pytest.raises(UncertifiedError):
        result.is_trivial(Word([1, 1, 4, 4]))


def _genus_one_quotient():
    g = make_abelian_group([2])
    vector = GeneratingVector.from_labels(g, ["(0)", "(0)", "(1)", "(1)"])
    return ProductQuotientSpec(g, (Factor(BranchData(1, (2, 2)), vector),), "E")


def test_positive_first_betti_number_is_infinite():
    result = armstrong_pi1(_genus_one_quotient())
    assert result.status == INFINITE
    assert result.order is None
    assert result.abelian.free_rank == 2
    assert result.tag == "infinite (H1 = Z^2)"


# ── Universal cover ───────────────────────────────────────────────────────────

@pytest.mark.parametrize("name,n", [("X", 2), ("X", 3), ("Y", 2), ("Y", 3)])
def test_universal_cover(pi1_cache, name, n):
    spec = families.family(name, n)
    report = universal_cover_report(spec, pi1_cache(name, n), singular_census(spec))
    assert report.singular_points == families.expected_values(name, n)["universal_cover_singular_points"]
    assert not report.simply_connected
    d = report.as_dict()
    assert d["projective"]["status"] == "cited" and d["contractible"]["value"] is False


def test_universal_cover_x3_has_384_singular_points(pi1_cache):
    spec = families.x_family(3)
    assert universal_cover_report(spec, pi1_cache("X", 3), singular_census(spec)).singular_points == 384


# ── Larger n ──────────────────────────────────────────────────────────────────

@pytest.mark.slow
@pytest.mark.parametrize("name", ["X", "Y"])
def test_family_pi1_n4(name):
    result = armstrong_pi1(families.family(name, 4))
    expected = families.expected_values(name, 4)
    assert result.certified
    assert (result.order, result.tag) == (expected["pi1_order"], expected["pi1_type"])


@pytest.mark.stretch
def test_family_pi1_n5():
    result = armstrong_pi1(families.family("Y", 5))
    assert result.status in (CERTIFIED, UNDETERMINED)
    if result.certified:
        assert result.order == families.expected_values("Y", 5)["pi1_order"]
    assert not result.beyond_verified_range


@pytest.mark.stretch
def test_x5_pi1():
    result = armstrong_pi1(families.family("X", 5))
    assert result.status in (CERTIFIED, UNDETERMINED)
    if result.certified:
        assert result.order == 64
