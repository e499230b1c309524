"""
Tests for branch data, orbifold presentations, generating vectors and the
numerical invariants of a single factor.

    pytest tests/test_orbifold.py
"""

import itertools
import math

import pytest

import families
from finite_group import make_abelian_group
from fpgroup import abelianization
from orbifold import (BranchData, BranchDataError, GeneratingVector, GeneratingVectorError, GenusError, OrderError,
                      RelatorError, SurjectivityError, UnsupportedError, invariant_b1_contribution,
                      invariant_deformation_dim, make_orbifold_group, riemann_hurwitz_genus,
                      validate_generating_vector)


# ── Branch data ───────────────────────────────────────────────────────────────

@pytest.mark.parametrize("text,genus,indices", [
    ("[0; 4,4,4]", 0, (4, 4, 4)),
    ("[0;2^6]", 0, (2,) * 6),
    ("  [1; ]  ", 1, ()),
    ("[2; 3, 2]", 2, (2, 3)),
])
def test_parse_branch_data(text, genus, indices):
    b = BranchData.parse(text)
    assert (b.base_genus, b.indices) == (genus, indices)


def test_branch_data_text():
    assert str(BranchData.parse("[0; 2^6]")) == "[0; 2,2,2,2,2,2]"
    assert str(BranchData(1)) == "[1; ]"


@pytest.mark.parametrize("text", ["0; 4,4,4", "[0; 4,x]", "[0; 1,4]", "[-1; 2]", "[0; 2^z]"])
def test_bad_branch_data(text):
    with pytest.raises(BranchDataError):
        BranchData.parse(text)


# ── Orbifold groups ───────────────────────────────────────────────────────────

def test_triangle_presentation():
    og = make_orbifold_group(BranchData.parse("[0; 4,4,4]"), suffix="_1")
    p = og.presentation
    assert p.generators == ("c1_1", "c2_1", "c3_1")
    assert p.relators == ((1,) * 4, (2,) * 4, (3,) * 4, (1, 2, 3))
    assert og.branch_letter(2) == 3


def test_genus_one_presentation():
    og = make_orbifold_group(BranchData.parse("[1; 2]"))
    assert og.presentation.generators == ("a1", "b1", "c1")
    assert og.presentation.relators[-1] == (1, 2, -1, -2, 3)
    assert og.branch_letter(0) == 3


def test_sphere_without_branch_points_has_no_relators():
    assert make_orbifold_group(BranchData(0)).presentation.relators == ()


@pytest.mark.parametrize("text", ["[0; 4,4,4]", "[0; 2,3,7]", "[0; 2^6]", "[0; 2,4,4]", "[0; 3,3,3]",
                                  "[0; 6,10,15]", "[0; 2,2,2,2]", "[0; 8,8,4]"])
def test_orbifold_abelianization_divides_index_product(text):
    branch = BranchData.parse(text)
    h1 = abelianization(make_orbifold_group(branch).presentation)
    assert h1.is_finite
    assert math.prod(branch.indices) % h1.order == 0


# ── Generating vectors ────────────────────────────────────────────────────────

def test_base_vector_is_valid(z4x4):
    og = make_orbifold_group(families.BRANCH)
    epi = validate_generating_vector(og, GeneratingVector.from_labels(z4x4, ["(1,0)", "(0,1)", "(3,3)"]))
    assert epi.kills_relators()
    assert z4x4.label(epi.branch_image(2)) == "(3,3)"
    assert epi.evaluate([1, 2]).label == "(1,1)"


def test_long_relator_failure(z4x4):
    og = make_orbifold_group(families.BRANCH)
    with pytest.raises(RelatorError):
        validate_generating_vector(og, GeneratingVector.from_labels(z4x4, ["(1,0)", "(0,1)", "(1,1)"]))


def test_order_failure(z4x4):
    og = make_orbifold_group(families.BRANCH)
    with pytest.raises(OrderError):
        validate_generating_vector(og, GeneratingVector.from_labels(z4x4, ["(1,0)", "(0,2)", "(3,2)"]))


def test_surjectivity_failure():
    g = make_abelian_group([2, 2])
    og = make_orbifold_group(BranchData.parse("[0; 2,2]"))
    with pytest.raises(SurjectivityError):
        validate_generating_vector(og, GeneratingVector.from_labels(g, ["(1,0)", "(1,0)"]))


def test_wrong_length(z4x4):
    og = make_orbifold_group(families.BRANCH)
    with pytest.raises(GeneratingVectorError):
        validate_generating_vector(og, GeneratingVector.from_labels(z4x4, ["(1,0)", "(0,1)"]))


def test_errors_share_a_base():
    assert issubclass(RelatorError, GeneratingVectorError)
    assert issubclass(OrderError, GeneratingVectorError)
    assert issubclass(SurjectivityError, GeneratingVectorError)


def test_twisted_vector_stays_valid(z4x4):
    from finite_group import automorphism_from_matrix
    twist = automorphism_from_matrix(z4x4, families.TWIST).inverse()
    v = GeneratingVector.from_labels(z4x4, ["(1,0)", "(0,1)", "(3,3)"]).apply(twist)
    assert v.labels() == ["(1,2)", "(2,3)", "(1,3)"]
    validate_generating_vector(make_orbifold_group(families.BRANCH), v)


def test_klein_vector_genus_three():
    g = make_abelian_group([2, 2])
    branch = BranchData.parse("[0; 2^6]")
    v = GeneratingVector.from_labels(g, ["(1,0)", "(1,0)", "(0,1)", "(0,1)", "(1,1)", "(1,1)"])
    validate_generating_vector(make_orbifold_group(branch), v)
    assert riemann_hurwitz_genus(g.order, branch) == 3


# ── Numerical invariants ──────────────────────────────────────────────────────

@pytest.mark.parametrize("order,text,genus", [
    (16, "[0; 4,4,4]", 3),
    (4, "[0; 2^6]", 3),
    (5, "[0; 2,2,2,2]", 1),
    (1, "[2; ]", 2),
    (8, "[0; 2,8,8]", 2),
])
def test_riemann_hurwitz(order, text, genus):
    assert riemann_hurwitz_genus(order, BranchData.parse(text)) == genus


@pytest.mark.parametrize("order,text", [(3, "[0; 2,2]"), (3, "[0; 2,2,2]"), (0, "[0; 2,2,2,2]")])
def test_riemann_hurwitz_rejects(order, text):
    with pytest.raises(GenusError):
        riemann_hurwitz_genus(order, BranchData.parse(text))


@pytest.mark.parametrize("text,dim", [
    ("[0; 4,4,4]", 0),
    ("[0; 2^6]", 3),
    ("[0; 2,2,2,2]", 1),
    ("[1; 2]", 1),
    ("[2; ]", 3),
])
def test_invariant_deformation_dim(text, dim):
    assert invariant_deformation_dim(BranchData.parse(text)) == dim


def test_invariant_deformation_dim_unsupported():
    with pytest.raises(UnsupportedError):
        invariant_deformation_dim(BranchData.parse("[1; ]"))


@pytest.mark.parametrize("text,b1", [("[0; 4,4,4]", 0), ("[1; 2]", 2), ("[2; ]", 4)])
def test_b1_contribution(text, b1):
    assert invariant_b1_contribution(BranchData.parse(text)) == b1


@pytest.mark.parametrize("m", range(2, 17))
def test_triangle_types_are_rigid(m):
    assert invariant_deformation_dim(BranchData(0, (m, m, m))) == 0


def _genus_or_none(order, branch):
    try:
        return riemann_hurwitz_genus(order, branch)
    except GenusError:
        return None


@pytest.mark.parametrize("indices", list(itertools.combinations_with_replacement([2, 3, 4, 6, 8, 12], 3)))
def test_riemann_hurwitz_grows_with_branching(indices):
    base = _genus_or_none(24, BranchData(0, indices))
    larger = [BranchData(0, indices + (m,)) for m in (2, 4, 6, 12)]
    larger += [BranchData(0, indices[:-1] + (m,)) for m in (6, 8, 12, 24) if m > indices[-1]]
    larger.append(BranchData(1, indices))
    if base is not None:
        for b in larger:
            g = _genus_or_none(24, b)
            assert g is None or g > base, str(b)


def test_riemann_hurwitz_chain():
    chain = ["[0; 4,4,4]", "[0; 4,4,8]", "[0; 4,8,8]", "[0; 8,8,8]", "[0; 2,8,8,8]", "[1; 2,8,8,8]"]
    genera = [riemann_hurwitz_genus(16, BranchData.parse(t)) for t in chain]
    assert genera == sorted(set(genera))
    assert genera[:4] == [3, 4, 5, 6]
