"""
product_quotient.py – quotients (C₁×…×C_n)/G of curve products by a diagonal action.

Each factor C_i is encoded by branch data and a generating vector.  A point
of C_i with non-trivial stabilizer is a pair (k, x·⟨c_k⟩): the k-th branch
orbit and a left coset of the cyclic group generated by the image of c_k.
Its stabilizer is x⟨c_k⟩x⁻¹ and g ∈ G moves it to (k, gx·⟨c_k⟩).  No
coordinates are involved; fermat.py does the coordinate cross-check.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from finite_group import FiniteGroup, Homomorphism, Subgroup
from orbifold import (BranchData, GeneratingVector, GeneratingVectorError, GenusError,
                      OrbifoldEpimorphism, invariant_b1_contribution, invariant_deformation_dim,
                      make_orbifold_group, riemann_hurwitz_genus, validate_generating_vector)

log = logging.getLogger("pqw.census")

DEFAULT_CENSUS_BUDGET = 10_000_000
SMOOTH = "smooth"
CITED = "cited"


class CensusBudgetError(RuntimeError):
    """Too many marked-point tuples to enumerate."""


class CoverError(ValueError):
    """The subgroup cannot be used for an intermediate cover."""


class UnsupportedCoverError(CoverError):
    """Restricted generating data is only derived for abelian H with rational C_i/H."""


# ── Specification ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Factor:
    branch: BranchData
    vector: GeneratingVector
    label: str = ""


@dataclass(frozen=True, eq=False)
class ProductQuotientSpec:
    """
    G acting diagonally on n curves.

    Every generating vector is validated against its branch data on
    construction and every factor genus must be at least 2.
    """

    group: FiniteGroup
    factors: tuple[Factor, ...]
    label: str = ""
    metadata: dict = field(default_factory=dict)
    epimorphisms: tuple[OrbifoldEpimorphism, ...] = field(init=False)
    genera: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise GeneratingVectorError("a product-quotient needs at least one factor")
        epis, genera = [], []
        for i, f in enumerate(factors):
            if f.vector.target is not self.group:
                raise GeneratingVectorError(f"factor {i + 1}: vector targets {f.vector.target.name}, "
                                            f"not {self.group.name}")
            try:
                epis.append(validate_generating_vector(make_orbifold_group(f.branch), f.vector))
            except GeneratingVectorError as e:
                raise type(e)(f"factor {i + 1}: {e}") from None
            g = riemann_hurwitz_genus(self.group.order, f.branch)
            if g < 2:
                raise GenusError(f"factor {i + 1}: curve genus {g} < 2")
            genera.append(g)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "epimorphisms", tuple(epis))
        object.__setattr__(self, "genera", tuple(genera))

    @property
    def n(self) -> int:
        return len(self.factors)

    def permuted(self, order) -> "ProductQuotientSpec":
        return ProductQuotientSpec(self.group, tuple(self.factors[i] for i in order),
                                   self.label, dict(self.metadata))

    def twisted(self, automorphism: Homomorphism) -> "ProductQuotientSpec":
        """The same geometry relabelled by an automorphism of G applied to every factor."""
        return ProductQuotientSpec(
            self.group,
            tuple(Factor(f.branch, f.vector.apply(automorphism), f.label) for f in self.factors),
            self.label, dict(self.metadata))


# ── Marked points ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MarkedPoint:
    factor: int
    branch_index: int
    representative: int
    coset: frozenset[int]
    stabilizer: frozenset[int]

    def describe(self, group: FiniteGroup) -> str:
        return f"C{self.factor + 1}:c{self.branch_index + 1}@{group.label(self.representative)}"


def marked_points(spec: ProductQuotientSpec, i: int) -> list[MarkedPoint]:
    """Points of factor i with non-trivial stabilizer, by branch orbit then coset representative."""
    g = spec.group
    epi = spec.epimorphisms[i]
    points = []
    for k in range(spec.factors[i].branch.r):
        cyclic = sorted(g.closure([epi.branch_image(k)]))
        seen: set[int] = set()
        for x in range(g.order):
            if x in seen:
                continue
            coset = frozenset(g.mul(x, h) for h in cyclic)
            seen |= coset
            stab = frozenset(g.conjugate(h, x) for h in cyclic)
            points.append(MarkedPoint(i, k, min(coset), coset, stab))
    return points


def _point_action(spec: ProductQuotientSpec, points: list[MarkedPoint]) -> list[list[int]]:
    """perm[g][p] = index of g·p."""
    g = spec.group
    where = {(p.branch_index, p.representative): j for j, p in enumerate(points)}
    perm = []
    for x in range(g.order):
        perm.append([where[(p.branch_index, min(g.mul(x, y) for y in p.coset))] for p in points])
    return perm


def _mask(elements) -> int:
    m = 0
    for x in elements:
        m |= 1 << x
    return m


# ── Singularity census ────────────────────────────────────────────────────────

def half_type(n: int) -> str:
    return "1/2(" + ",".join(["1"] * n) + ")"


@dataclass(frozen=True)
class SingularityRecord:
    points: tuple[MarkedPoint, ...]
    stabilizer: frozenset[int]
    orbit_size: int
    type_tag: str


@dataclass(frozen=True)
class Census:
    n: int
    group_order: int
    records: tuple[SingularityRecord, ...]
    fixed_tuples: int

    @property
    def singular_points(self) -> int:
        return sum(1 for r in self.records if r.type_tag != SMOOTH)

    def by_type(self) -> dict[str, int]:
        return dict(sorted(Counter(r.type_tag for r in self.records if r.type_tag != SMOOTH).items()))

    @property
    def all_half_type(self) -> bool:
        return all(r.type_tag == half_type(self.n) for r in self.records)


def _type_tag(n: int, stabilizer_order: int) -> str:
    if n == 1:
        return SMOOTH
    if stabilizer_order == 2:
        return half_type(n)
    return f"undetermined(order {stabilizer_order})"


def singular_census(spec: ProductQuotientSpec, budget: int = DEFAULT_CENSUS_BUDGET) -> Census:
    """
    Tuples of marked points with non-trivial common stabilizer, grouped
    into G-orbits.  Each orbit is one singular point of the quotient
    (for n = 1 the quotient is a smooth curve and the orbits are tagged so).
    """
    g = spec.group
    per_factor = [marked_points(spec, i) for i in range(spec.n)]
    total = 1
    for pts in per_factor:
        total *= len(pts)
    if total > budget:
        raise CensusBudgetError(f"{total} marked-point tuples exceed the census budget {budget}")

    masks = [[_mask(p.stabilizer) for p in pts] for pts in per_factor]
    identity_bit = 1 << g.identity
    full = (1 << g.order) - 1

    tuples: list[tuple[int, ...]] = []

    def extend(i: int, mask: int, chosen: tuple[int, ...]) -> None:
        if i == spec.n:
            tuples.append(chosen)
            return
        for j, m in enumerate(masks[i]):
            common = mask & m
            if common != identity_bit:
                extend(i + 1, common, chosen + (j,))

    if all(per_factor):
        extend(0, full, ())

    actions = [_point_action(spec, pts) for pts in per_factor]
    orbits: Counter[tuple[int, ...]] = Counter()
    for chosen in tuples:
        orbits[min(tuple(actions[i][x][j] for i, j in enumerate(chosen)) for x in range(g.order))] += 1

    records = []
    for canon in sorted(orbits):
        size = orbits[canon]
        stab = frozenset.intersection(*(per_factor[i][j].stabilizer for i, j in enumerate(canon)))
        if size * len(stab) != g.order:
            raise AssertionError(f"orbit of {canon} has size {size} but stabilizer order {len(stab)}")
        records.append(SingularityRecord(tuple(per_factor[i][j] for i, j in enumerate(canon)),
                                         stab, size, _type_tag(spec.n, len(stab))))
    census = Census(spec.n, g.order, tuple(records), len(tuples))
    log.info(f"census: {census.fixed_tuples} tuples with non-trivial stabilizer, "
             f"{census.singular_points} singular points {census.by_type()}")
    return census


# ── Numerical invariants ──────────────────────────────────────────────────────

def h1_theta(spec: ProductQuotientSpec) -> int:
    """dim H¹(Θ) of the quotient: Σ of the G-invariant deformation dimensions of the factors."""
    for i, genus in enumerate(spec.genera):
        if genus < 2:
            raise GenusError(f"factor {i + 1} has genus {genus} < 2")
    return sum(invariant_deformation_dim(f.branch) for f in spec.factors)


def betti_b1(spec: ProductQuotientSpec) -> int:
    return sum(invariant_b1_contribution(f.branch) for f in spec.factors)


# ── Intermediate covers ───────────────────────────────────────────────────────

def fixed_elements(spec: ProductQuotientSpec) -> frozenset[int]:
    """Non-trivial elements of G with a fixed point on C₁×…×C_n."""
    g = spec.group
    common = None
    for i in range(spec.n):
        s = set()
        for p in marked_points(spec, i):
            s |= p.stabilizer
        common = s if common is None else common & s
    return frozenset(common or ()) - {g.identity}


def _restricted_factor(spec: ProductQuotientSpec, i: int, sub: Subgroup) -> Factor:
    """Branch data and generating vector of C_i → C_i/H."""
    g = spec.group
    f = spec.factors[i]
    epi = spec.epimorphisms[i]
    members = set(sub.elements)
    pairs = []
    for k, m in enumerate(f.branch.indices):
        c = epi.branch_image(k)
        cyclic = sorted(g.closure([c]))
        seen: set[int] = set()
        for x in range(g.order):
            if x in seen:
                continue
            seen |= {g.mul(g.mul(h, x), y) for h in sub.elements for y in cyclic}
            local = len(members & {g.conjugate(y, x) for y in cyclic})
            if local > 1:
                pairs.append((local, g.power(g.conjugate(c, x), m // local)))
    pairs.sort(key=lambda t: t[0])

    branch = BranchData(0, tuple(m for m, _ in pairs))
    genus = riemann_hurwitz_genus(g.order, f.branch)
    # 2g − 2 = |H|·(2g″ − 2 + Σ(1 − 1/m″)) has to give g″ = 0
    if riemann_hurwitz_genus(sub.order, branch) != genus:
        raise UnsupportedCoverError(f"factor {i + 1}: C/H is not rational; only rational intermediate quotients are supported")
    vector = GeneratingVector(sub.group, tuple(sub.restrict(x) for _, x in pairs))
    try:
        validate_generating_vector(make_orbifold_group(branch), vector)
    except GeneratingVectorError as e:
        raise CoverError(f"restricted action on factor {i + 1} is not a valid generating vector: {e}") from None
    return Factor(branch, vector, f.label)


@dataclass(frozen=True, eq=False)
class CoverResult:
    degree: int
    unramified: bool
    subgroup: tuple[str, ...]
    ramifying_elements: tuple[str, ...]
    base_singular_points: int
    spec: ProductQuotientSpec | None = None
    cover_singular_points: int | None = None
    note: str = ""

    @property
    def singularities_lift(self) -> bool:
        """Every singular point has exactly `degree` singular preimages."""
        return (self.unramified and self.cover_singular_points is not None
                and self.cover_singular_points == self.degree * self.base_singular_points)

    def as_dict(self) -> dict:
        out = {
            "subgroup": list(self.subgroup),
            "degree": self.degree,
            "unramified": self.unramified,
            "ramifying_elements": list(self.ramifying_elements),
            "base_singular_points": self.base_singular_points,
            "cover_singular_points": self.cover_singular_points,
            "singularities_lift": self.singularities_lift,
            "cover_factors": ([{"branch": str(f.branch), "vector": f.vector.labels()} for f in self.spec.factors]
                              if self.spec is not None else None),
        }
        if self.note:
            out["note"] = self.note
        return out


def _check_cover_subgroup(spec: ProductQuotientSpec, subgroup: Subgroup) -> None:
    if subgroup.ambient is not spec.group:
        raise CoverError("subgroup does not belong to the specification's group")
    if not subgroup.is_normal():
        raise CoverError(f"{subgroup} is not normal in {spec.group.name}")


def restricted_spec(spec: ProductQuotientSpec, subgroup: Subgroup, label: str | None = None) -> ProductQuotientSpec:
    """The same curves with the action restricted to H, for abelian H with every C_i/H rational."""
    _check_cover_subgroup(spec, subgroup)
    if not subgroup.group.is_abelian():
        raise UnsupportedCoverError(f"{subgroup} is not abelian; restricted generating vectors "
                                    "are derived for abelian H only")
    factors = tuple(_restricted_factor(spec, i, subgroup) for i in range(spec.n))
    meta = dict(spec.metadata, cover_of=spec.label or "spec", subgroup=subgroup.labels())
    if label is None:
        label = f"{spec.label}/H" if spec.label else ""
    return ProductQuotientSpec(subgroup.group, factors, label, meta)


def etale_intermediate_cover(spec: ProductQuotientSpec, subgroup: Subgroup,
                             budget: int = DEFAULT_CENSUS_BUDGET) -> CoverResult:
    """
    Z/H → Z/G for a normal subgroup H.  The cover is unramified exactly
    when every non-trivial element with a fixed point on the product lies
    in H.  When the restricted data cannot be derived (H non-abelian or
    some C_i/H of positive genus) the result still states degree and
    ramification, with spec left empty and a note saying why.
    """
    _check_cover_subgroup(spec, subgroup)
    g = spec.group
    fixed = fixed_elements(spec)
    ramifying = tuple(g.label(x) for x in sorted(fixed) if x not in subgroup)
    base = singular_census(spec, budget).singular_points
    try:
        cover = restricted_spec(spec, subgroup)
    except UnsupportedCoverError as e:
        result = CoverResult(subgroup.index, not ramifying, tuple(subgroup.labels()), ramifying, base, note=str(e))
    else:
        lifted = singular_census(cover, budget).singular_points
        result = CoverResult(subgroup.index, not ramifying, tuple(subgroup.labels()), ramifying, base,
                             cover, lifted)
    log.info(f"cover of degree {result.degree}: unramified={result.unramified}, "
             f"singular points {base} → {result.cover_singular_points}")
    return result


# ── Kodaira dimension bookkeeping ─────────────────────────────────────────────

@dataclass(frozen=True)
class KodairaReport:
    n: int
    genera: tuple[int, ...]
    all_genera_at_least_2: bool
    quasi_etale: bool
    terminal: bool
    kappa: int | None

    def as_dict(self) -> dict:
        return {
            "genera": list(self.genera),
            "all_genera_at_least_2": self.all_genera_at_least_2,
            "quasi_etale": self.quasi_etale,
            "terminal": {"value": self.terminal, "status": CITED,
                         "note": "1/2(1,...,1) singularities are terminal when n >= 3"},
            "kappa": ({"value": self.kappa, "status": CITED, "note": "kappa(C^n) = n descends to a "
                       "quasi-etale quotient with terminal singularities"}
                      if self.kappa is not None else
                      {"value": None, "status": "uncertified", "note": "not certified by this tool"}),
        }


def kodaira_report(spec: ProductQuotientSpec, census: Census) -> KodairaReport:
    """
    κ = n is claimed only when every factor has genus ≥ 2, the quotient map
    is quasi-étale (isolated fixed points, so n ≥ 2) and the singularities
    are terminal (all of type ½(1,…,1) with n ≥ 3).
    """
    genera_ok = all(g >= 2 for g in spec.genera)
    quasi_etale = spec.n >= 2
    terminal = spec.n >= 3 and census.all_half_type
    kappa = spec.n if genera_ok and quasi_etale and terminal else None
    return KodairaReport(spec.n, spec.genera, genera_ok, quasi_etale, terminal, kappa)
