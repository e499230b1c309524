"""
families.py – the two product-quotient families built from the Fermat quartic.

X_n = Cⁿ / Z4², where C is the Fermat quartic, the first factor carries
the vector ((1,0), (0,1), (3,3)) of type [0; 4,4,4] and every other factor
the same vector composed with A⁻¹, A = [[1,2],[2,3]].  Y_n = Cⁿ / H for the
2-torsion subgroup H ≅ Z2², an unramified degree-4 cover of X_n.

expected_values() holds the numbers both families are known to have; the
`paper` command compares computed results against them.
"""

from __future__ import annotations

from finite_group import (FiniteGroup, Subgroup, abelian_group_name, automorphism_from_matrix,
                          make_abelian_group, subgroup_generated)
from orbifold import BranchData, GeneratingVector
from product_quotient import Factor, ProductQuotientSpec, restricted_spec

FAMILIES = ("X", "Y")

TWIST = ((1, 2), (2, 3))
BASE_VECTOR = ("(1,0)", "(0,1)", "(3,3)")
KLEIN = ("(2,0)", "(0,2)")
BRANCH = BranchData(0, (4, 4, 4))
VECTOR_SOURCE = "derived from the stabilizer table of the Fermat quartic"


def z4_squared() -> FiniteGroup:
    return make_abelian_group([4, 4])


def klein_subgroup(group: FiniteGroup) -> Subgroup:
    return subgroup_generated(group, KLEIN, name="Z2^2")


def x_family(n: int, group: FiniteGroup | None = None) -> ProductQuotientSpec:
    if n < 1:
        raise ValueError(f"the family needs n >= 1, got {n}")
    group = group or z4_squared()
    base = GeneratingVector.from_labels(group, BASE_VECTOR)
    twisted = base.apply(automorphism_from_matrix(group, TWIST).inverse())
    factors = [Factor(BRANCH, base, "C")] + [Factor(BRANCH, twisted, "C") for _ in range(n - 1)]
    return ProductQuotientSpec(group, tuple(factors), f"X_{n}", {"family": "X", "n": n})


def y_family(n: int) -> ProductQuotientSpec:
    x = x_family(n)
    y = restricted_spec(x, klein_subgroup(x.group), label=f"Y_{n}")
    y.metadata.update(family="Y", n=n)
    return y


def family(name: str, n: int) -> ProductQuotientSpec:
    if name.upper() == "X":
        return x_family(n)
    if name.upper() == "Y":
        return y_family(n)
    raise ValueError(f"unknown family {name!r} (expected one of {', '.join(FAMILIES)})")


def expected_values(name: str, n: int) -> dict:
    name = name.upper()
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}")
    if n < 2:
        raise ValueError(f"expected values are known for n >= 2, got {n}")
    if name == "X":
        singular, h1, rank = 3 * 2 ** (2 * n - 3), 0, n + 1
    else:
        singular, h1, rank = 3 * 2 ** (2 * n - 1), 3 * n, n - 1
    return {
        "singular_points": singular,
        "h1_theta": h1,
        "b1": 0,
        "pi1_order": 2 ** rank,
        "pi1_type": abelian_group_name([2] * rank),
        "universal_cover_singular_points": 3 * 2 ** (3 * n - 2),
        "kappa": n if n >= 3 else None,
    }
