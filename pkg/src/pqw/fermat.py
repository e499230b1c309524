"""
fermat.py – the Fermat quartic x₀⁴+x₁⁴+x₂⁴ = 0 with its Z4² action, in exact arithmetic.

Coordinates live in Q(ζ₈), stored as four Fractions over the basis
1, ζ, ζ², ζ³ with ζ⁴ = −1.  (a, b) ∈ Z4² acts by
(x₀ : x₁ : x₂) ↦ (ζ₄ᵃx₀ : ζ₄ᵇx₁ : x₂), ζ₄ = ζ².

verify_marked_points() rebuilds the marked points of the curve from the
fixed loci, checks the stabilizers and the quotient map, and matches them
against the abstract (branch orbit, coset) points of product_quotient.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import families
from finite_group import FiniteGroup, GroupElement, Subgroup, make_abelian_group, orbits_and_stabilizers
from product_quotient import ProductQuotientSpec, marked_points

log = logging.getLogger("pqw.fermat")

DEGREE = 4


class CurveError(ValueError):
    """A point or map does not belong to the Fermat quartic."""


# ── Q(ζ₈) ────────────────────────────────────────────────────────────────────

class Cyclotomic:
    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable = (0, 0, 0, 0)):
        c = tuple(Fraction(x) for x in coefficients)
        if len(c) != DEGREE:
            raise ValueError(f"need {DEGREE} coefficients, got {len(c)}")
        self._c = c

    @classmethod
    def from_int(cls, x) -> "Cyclotomic":
        return cls((x, 0, 0, 0))

    @classmethod
    def zeta(cls, k: int = 1) -> "Cyclotomic":
        """ζ₈ᵏ"""
        k %= 2 * DEGREE
        c = [0] * DEGREE
        c[k % DEGREE] = -1 if k >= DEGREE else 1
        return cls(c)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._c

    def is_zero(self) -> bool:
        return not any(self._c)

    def _coerce(self, other) -> "Cyclotomic":
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Cyclotomic(a + b for a, b in zip(self._c, other._c))

    __radd__ = __add__

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic(-a for a in self._c)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = [Fraction(0)] * DEGREE
        for i, a in enumerate(self._c):
            if not a:
                continue
            for j, b in enumerate(other._c):
                if not b:
                    continue
                k = i + j
                if k >= DEGREE:
                    out[k - DEGREE] -= a * b
                else:
                    out[k] += a * b
        return Cyclotomic(out)

    __rmul__ = __mul__

    def conjugate(self, j: int) -> "Cyclotomic":
        """Image under the automorphism ζ ↦ ζʲ, j odd."""
        if j % 2 == 0:
            raise ValueError(f"ζ ↦ ζ^{j} is not an automorphism of Q(ζ8)")
        out = Cyclotomic()
        for i, a in enumerate(self._c):
            if a:
                out = out + Cyclotomic.zeta(i * j) * a
        return out

    def norm(self) -> Fraction:
        n = self
        for j in (3, 5, 7):
            n = n * self.conjugate(j)
        if any(n._c[1:]):
            raise ArithmeticError(f"norm of {self} is not rational")
        return n._c[0]

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of 0 in Q(ζ8)")
        adj = self.conjugate(3) * self.conjugate(5) * self.conjugate(7)
        return adj * (1 / self.norm())

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, k: int) -> "Cyclotomic":
        if k < 0:
            return self.inverse() ** -k
        out = Cyclotomic.from_int(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def as_list(self) -> list[str]:
        return [str(a) for a in self._c]

    def __repr__(self) -> str:
        return f"Cyclotomic({', '.join(self.as_list())})"

    def __str__(self) -> str:
        terms = []
        for i, a in enumerate(self._c):
            if not a:
                continue
            basis = ("", "ζ", "ζ^2", "ζ^3")[i]
            if not basis:
                terms.append(str(a))
            elif a == 1:
                terms.append(basis)
            elif a == -1:
                terms.append("-" + basis)
            else:
                terms.append(f"{a}{basis}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


ZETA8 = Cyclotomic.zeta(1)
ZETA4 = Cyclotomic.zeta(2)


# ── Projective points ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ProjectivePoint:
    """Homogeneous coordinates scaled so the last nonzero one is 1."""

    coords: tuple[Cyclotomic, ...]

    def __post_init__(self):
        coords = tuple(x if isinstance(x, Cyclotomic) else Cyclotomic.from_int(x) for x in self.coords)
        nonzero = [x for x in coords if not x.is_zero()]
        if not nonzero:
            raise CurveError("all coordinates are zero")
        scale = nonzero[-1].inverse()
        object.__setattr__(self, "coords", tuple(x * scale for x in coords))

    @classmethod
    def of(cls, *coords) -> "ProjectivePoint":
        return cls(tuple(coords))

    def as_list(self) -> list[list[str]]:
        return [x.as_list() for x in self.coords]

    def __str__(self) -> str:
        return "(" + " : ".join(str(x) for x in self.coords) + ")"


def quartic(p: ProjectivePoint) -> Cyclotomic:
    return sum((x ** 4 for x in p.coords), Cyclotomic())


def on_curve(p: ProjectivePoint) -> bool:
    if len(p.coords) != 3:
        raise CurveError(f"{p} is not a point of P2")
    return quartic(p).is_zero()


# ── The Z4² action ────────────────────────────────────────────────────────────

def fermat_group() -> FiniteGroup:
    return make_abelian_group([4, 4])


def act(g: GroupElement, p: ProjectivePoint) -> ProjectivePoint:
    if g.group.abelian_factors != (4, 4):
        raise CurveError(f"{g.group.name} does not act on the Fermat quartic")
    a, b = g.group.coordinates(g.index)
    x0, x1, x2 = p.coords
    return ProjectivePoint((ZETA4 ** a * x0, ZETA4 ** b * x1, x2))


def _unit(i: int) -> ProjectivePoint:
    return ProjectivePoint(tuple(Cyclotomic.from_int(int(i == j)) for j in range(3)))


def _line_points(k: int) -> list[ProjectivePoint]:
    """C ∩ {x_k = 0}: x_i = 1, x_j⁴ = −1 for the other two coordinates i < j."""
    i, j = [t for t in range(3) if t != k]
    out = []
    for t in (1, 3, 5, 7):
        c = [Cyclotomic(), Cyclotomic(), Cyclotomic()]
        c[i] = Cyclotomic.from_int(1)
        c[j] = Cyclotomic.zeta(t)
        out.append(ProjectivePoint(tuple(c)))
    return out


def fixed_points(g: GroupElement) -> list[ProjectivePoint]:
    """
    Fixed points of g on C.  The fixed locus in P² is the union of the
    projectivised eigenspaces of diag(ζ₄ᵃ, ζ₄ᵇ, 1): a coordinate point for
    a simple eigenvalue, a coordinate line for a double one.
    """
    if g.is_identity():
        raise CurveError("the identity fixes every point")
    a, b = g.group.coordinates(g.index)
    exponents = (a % 4, b % 4, 0)
    out: list[ProjectivePoint] = []
    for value in sorted(set(exponents)):
        members = [i for i, e in enumerate(exponents) if e == value]
        if len(members) == 1:
            p = _unit(members[0])
            if on_curve(p):
                out.append(p)
        else:
            (k,) = [t for t in range(3) if t not in members]
            out.extend(_line_points(k))
    return out


def quotient_map(p: ProjectivePoint) -> ProjectivePoint:
    """f(x₀ : x₁ : x₂) = (x₀⁴ : x₁⁴), the quotient C → C/Z4² ≅ P¹."""
    x0, x1, _ = p.coords
    return ProjectivePoint((x0 ** 4, x1 ** 4))


# ── Verification ──────────────────────────────────────────────────────────────

TABLE = (
    (ProjectivePoint.of(0, 1, ZETA8), "(1,0)"),
    (ProjectivePoint.of(1, 0, ZETA8), "(0,1)"),
    (ProjectivePoint.of(1, ZETA8, 0), "(1,1)"),
)

BRANCH_POINTS = (ProjectivePoint.of(0, 1), ProjectivePoint.of(1, 0), ProjectivePoint.of(1, -1))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class FermatReport:
    points: list[ProjectivePoint] = field(default_factory=list)
    orbit_lengths: list[int] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    subgroup_orbit_lengths: list[int] | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))
        if not passed:
            log.warning(f"check failed: {name} ({detail})")

    def as_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "marked_points": [p.as_list() for p in self.points],
            "orbit_lengths": self.orbit_lengths,
            "checks": [c.as_dict() for c in self.checks],
        }
        if self.subgroup_orbit_lengths is not None:
            out["subgroup_orbit_lengths"] = self.subgroup_orbit_lengths
        return out


def marked_point_set(group: FiniteGroup) -> list[ProjectivePoint]:
    seen: dict[ProjectivePoint, None] = {}
    for g in group.elements():
        if not g.is_identity():
            for p in fixed_points(g):
                seen.setdefault(p, None)
    return list(seen)


def _generates(stab: Subgroup, label: str) -> bool:
    g = stab.ambient
    x = g.index_of(label)
    return set(stab.elements) == set(g.closure([x]))


def match_abstract_points(spec: ProductQuotientSpec, factor: int = 0) -> dict:
    """
    (branch orbit k, coset x⟨c_k⟩) ↦ x·P_k, where P_k is the table point
    whose stabilizer is ⟨img c_k⟩.  Returns the map; raises CurveError
    unless it is a stabilizer-preserving bijection onto the marked set.
    """
    group = spec.group
    marked = marked_point_set(group)
    stab = {p: frozenset(g.index for g in group.elements() if act(g, p) == p) for p in marked}
    base = {}
    epi = spec.epimorphisms[factor]
    for k in range(spec.factors[factor].branch.r):
        cyclic = group.closure([epi.branch_image(k)])
        hits = [p for p, _ in TABLE if stab[p] == cyclic]
        if len(hits) != 1:
            raise CurveError(f"no table point is stabilized by ⟨img c{k + 1}⟩")
        base[k] = hits[0]

    mapping = {}
    for mp in marked_points(spec, factor):
        images = {act(group.element(x), base[mp.branch_index]) for x in mp.coset}
        if len(images) != 1:
            raise CurveError(f"{mp.describe(group)} does not map to a single point")
        (p,) = images
        if stab[p] != mp.stabilizer:
            raise CurveError(f"{mp.describe(group)} and {p} have different stabilizers")
        mapping[mp] = p
    if len(set(mapping.values())) != len(mapping) or set(mapping.values()) != set(marked):
        raise CurveError(f"{len(mapping)} abstract points do not match {len(marked)} marked points one-to-one")
    return mapping


def verify_marked_points(subgroup: Subgroup | None = None,
                         spec: ProductQuotientSpec | None = None) -> FermatReport:
    """
    Recompute the marked points of C and check them against the table of
    stabilizer generators, the quotient map and, when spec is given, the
    abstract marked points of its first factor.
    """
    group = subgroup.ambient if subgroup is not None else fermat_group()
    report = FermatReport()
    marked = marked_point_set(group)
    report.points = marked
    report.check("marked points lie on C", all(on_curve(p) for p in marked))
    report.check("12 marked points", len(marked) == 12, f"found {len(marked)}")

    bad = [(g.label, h.label) for g in group.elements() for h in group.elements()
           for p in marked if act(g * h, p) != act(g, act(h, p))]
    report.check("act is a group action on the marked points", not bad,
                 f"first failure {bad[0]}" if bad else "")

    orbits = orbits_and_stabilizers(group, act, marked)
    report.orbit_lengths = sorted(len(o) for o in orbits)
    report.check("3 orbits of length 4", report.orbit_lengths == [4, 4, 4], str(report.orbit_lengths))
    stabs = {p: s for o in orbits for p, s in zip(o.points, o.stabilizers)}
    report.check("stabilizers cyclic of order 4",
                 all(s.order == 4 and s.group.is_abelian() and
                     any(s.ambient.element_order(x) == 4 for x in s.elements) for s in stabs.values()))

    for point, label in TABLE:
        ok = point in stabs and _generates(stabs[point], label)
        report.check(f"stabilizer of {point} is <{label}>", ok,
                     ", ".join(stabs[point].labels()) if point in stabs else "not a marked point")

    report.check("f is Z4^2-invariant",
                 all(quotient_map(act(g, q)) == quotient_map(q) for g in group.elements() for q in marked))
    fibres: dict[ProjectivePoint, list[ProjectivePoint]] = {}
    for q in marked:
        fibres.setdefault(quotient_map(q), []).append(q)
    report.check("branch points (0:1), (1:0), (1:-1)", set(fibres) == set(BRANCH_POINTS),
                 ", ".join(str(b) for b in fibres))
    report.check("branch index 4 over each branch point",
                 all(len(v) == 4 and all(stabs[q].order == 4 for q in v) for v in fibres.values()))

    if spec is not None:
        try:
            match_abstract_points(spec)
            report.check("abstract marked points match coordinates", True)
        except CurveError as e:
            report.check("abstract marked points match coordinates", False, str(e))

    if subgroup is not None:
        sub = subgroup.group
        h_orbits = orbits_and_stabilizers(sub, lambda h, q: act(subgroup.embedding(h), q), marked)
        report.subgroup_orbit_lengths = sorted(len(o) for o in h_orbits)
        members = set(subgroup.elements)
        wrong = [str(q) for o in h_orbits for q in o.points
                 if subgroup.order // len(members & set(stabs[q].elements)) != len(o)]
        report.check(f"orbits of {{{', '.join(subgroup.labels())}}} have length |H| / |H ∩ Stab(p)|",
                     not wrong and sum(report.subgroup_orbit_lengths) == len(marked),
                     f"mismatch at {', '.join(wrong)}" if wrong else str(report.subgroup_orbit_lengths))
        if subgroup == families.klein_subgroup(group):
            report.check("2-torsion subgroup has 6 orbits of length 2",
                         report.subgroup_orbit_lengths == [2] * 6, str(report.subgroup_orbit_lengths))
    log.info(f"Fermat quartic: {len(marked)} marked points, orbits {report.orbit_lengths}, "
             f"{'PASS' if report.passed else 'FAIL'}")
    return report

