"""
orbifold.py – orbifold surface groups and generating vectors.

T(g′; m₁,…,m_r) = ⟨a₁,b₁,…,a_g′,b_g′,c₁,…,c_r | c_k^m_k, Π[a_i,b_i]·c₁⋯c_r⟩.
A generating vector assigns a group element to every generator; once
validated it is an epimorphism T → G, i.e. a Galois cover of curves with
group G branched over r points.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from finite_group import FiniteGroup, GroupElement, Homomorphism
from fpgroup import Presentation, Word, commutator, word_multiply

log = logging.getLogger("pqw.orbifold")


class BranchDataError(ValueError):
    """Branch data is malformed (negative genus, index < 2, unparsable text)."""


class GeneratingVectorError(ValueError):
    """A generating vector does not define an epimorphism with exact branch orders."""


class RelatorError(GeneratingVectorError):
    pass


class OrderError(GeneratingVectorError):
    pass


class SurjectivityError(GeneratingVectorError):
    pass


class GenusError(ValueError):
    """Riemann–Hurwitz yields a non-integral, negative, or too small genus."""


class UnsupportedError(ValueError):
    """Invariant dimension falls in the range where special divisors matter."""


# ── Branch data ───────────────────────────────────────────────────────────────

_BRANCH_RE = re.compile(r"^\s*\[\s*(\d+)\s*;\s*(.*?)\s*\]\s*$")


@dataclass(frozen=True)
class BranchData:
    """Type [g′; m₁,…,m_r]; indices kept sorted ascending."""

    base_genus: int
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.base_genus) < 0:
            raise BranchDataError(f"base genus must be ≥ 0, got {self.base_genus}")
        idx = tuple(sorted(int(m) for m in self.indices))
        if any(m < 2 for m in idx):
            raise BranchDataError(f"branch indices must be ≥ 2, got {list(idx)}")
        object.__setattr__(self, "base_genus", int(self.base_genus))
        object.__setattr__(self, "indices", idx)

    @property
    def r(self) -> int:
        return len(self.indices)

    @classmethod
    def parse(cls, text: str) -> "BranchData":
        """Accepts "[0; 4,4,4]", "[1; ]" and the shorthand "[0; 2^6]"."""
        m = _BRANCH_RE.match(text)
        if not m:
            raise BranchDataError(f"cannot parse branch data {text!r} (expected \"[g'; m1,...,mr]\")")
        indices: list[int] = []
        for part in filter(None, (p.strip() for p in m.group(2).split(","))):
            base, _, times = part.partition("^")
            try:
                indices.extend([int(base)] * (int(times) if times else 1))
            except ValueError:
                raise BranchDataError(f"bad branch index {part!r} in {text!r}") from None
        return cls(int(m.group(1)), tuple(indices))

    def __str__(self) -> str:
        return f"[{self.base_genus}; {','.join(str(m) for m in self.indices)}]"


# ── Orbifold groups ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class OrbifoldGroup:
    branch: BranchData
    presentation: Presentation

    @property
    def generator_count(self) -> int:
        return self.presentation.generator_count

    def branch_letter(self, k: int) -> int:
        """Letter of c_{k+1} (k is 0-based)."""
        return 2 * self.branch.base_genus + k + 1


def _long_relator(g: int, r: int) -> Word:
    """Π[a_i,b_i]·c₁⋯c_r in generator numbering a_i = 2i−1, b_i = 2i, c_k = 2g′+k."""
    return word_multiply(*(commutator(Word([2 * i + 1]), Word([2 * i + 2])) for i in range(g)),
                         Word(range(2 * g + 1, 2 * g + r + 1)))


def make_orbifold_group(branch: BranchData, suffix: str = "") -> OrbifoldGroup:
    """
    Presentation with generators a1,b1,…,c1,…,cr (each name + suffix) and
    relators c_k^m_k followed by the long relator.  T(0; ) has no relators.
    """
    g, r = branch.base_genus, branch.r
    names = []
    for i in range(1, g + 1):
        names += [f"a{i}{suffix}", f"b{i}{suffix}"]
    names += [f"c{k}{suffix}" for k in range(1, r + 1)]

    relators = [Word([2 * g + k + 1] * m) for k, m in enumerate(branch.indices)]
    long_rel = _long_relator(g, r)
    if long_rel:
        relators.append(long_rel)
    pres = Presentation(tuple(names), tuple(relators), {"orbifold_type": str(branch)})
    return OrbifoldGroup(branch, pres)


# ── Generating vectors ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GeneratingVector:
    """Images of a₁,b₁,…,c₁,…,c_r, in that order."""

    target: FiniteGroup
    images: tuple[GroupElement, ...]

    @classmethod
    def from_labels(cls, group: FiniteGroup, labels: Iterable[str]) -> "GeneratingVector":
        return cls(group, tuple(group.element(lab) for lab in labels))

    def labels(self) -> list[str]:
        return [x.label for x in self.images]

    def indices(self) -> list[int]:
        return [x.index for x in self.images]

    def apply(self, hom: Homomorphism) -> "GeneratingVector":
        """hom ∘ (this vector)"""
        return GeneratingVector(hom.target, tuple(hom(x) for x in self.images))


@dataclass(frozen=True, eq=False)
class OrbifoldEpimorphism:
    """A validated epimorphism T → G, evaluated on words."""

    ogroup: OrbifoldGroup
    vector: GeneratingVector

    @property
    def group(self) -> FiniteGroup:
        return self.vector.target

    def evaluate_index(self, word: Iterable[int]) -> int:
        g = self.group
        imgs = [x.index for x in self.vector.images]
        q = g.identity
        for x in word:
            q = g.mul(q, imgs[x - 1] if x > 0 else g.inv(imgs[-x - 1]))
        return q

    def evaluate(self, word: Iterable[int]) -> GroupElement:
        return GroupElement(self.group, self.evaluate_index(word))

    def branch_image(self, k: int) -> int:
        """Element index of the image of c_{k+1}."""
        return self.vector.images[self.ogroup.branch_letter(k) - 1].index

    def kills_relators(self) -> bool:
        return all(self.evaluate_index(r) == self.group.identity for r in self.ogroup.presentation.relators)


def validate_generating_vector(ogroup: OrbifoldGroup, vector: GeneratingVector) -> OrbifoldEpimorphism:
    """
    Check the three conditions for an epimorphism with exact branch orders:
    the long relator maps to the identity, img(c_k) has order exactly m_k,
    and the images generate the target.
    """
    branch = ogroup.branch
    g = vector.target
    if len(vector.images) != ogroup.generator_count:
        raise GeneratingVectorError(f"type {branch} needs {ogroup.generator_count} images, "
                                    f"got {len(vector.images)}")
    for x in vector.images:
        if x.group is not g:
            raise GeneratingVectorError(f"image {x.label} does not belong to {g.name}")

    epi = OrbifoldEpimorphism(ogroup, vector)
    value = epi.evaluate(_long_relator(branch.base_genus, branch.r))
    if not value.is_identity():
        raise RelatorError(f"long relator Π[a_i,b_i]·c1⋯cr evaluates to {value.label}, not the identity")

    for k, m in enumerate(branch.indices):
        x = g.element(epi.branch_image(k))
        if x.order() != m:
            raise OrderError(f"image of c{k + 1} is {x.label} of order {x.order()}, branch index is {m}")

    if len(g.closure(vector.indices())) != g.order:
        raise SurjectivityError(f"images {vector.labels()} do not generate {g.name}")
    log.debug(f"generating vector {vector.labels()} of type {branch} is valid")
    return epi


# ── Numerical invariants ──────────────────────────────────────────────────────

def riemann_hurwitz_genus(group_order: int, branch: BranchData) -> int:
    """Genus g of the cover: 2g − 2 = N(2g′ − 2) + N·Σ(1 − 1/m_k)."""
    if group_order < 1:
        raise GenusError(f"group order must be ≥ 1, got {group_order}")
    n = group_order
    two_g = Fraction(n * (2 * branch.base_genus - 2)) + sum(
        (Fraction(n * (m - 1), m) for m in branch.indices), Fraction(0)) + 2
    if two_g.denominator != 1 or two_g.numerator % 2 or two_g < 0:
        raise GenusError(f"order {n} with type {branch} gives 2g = {two_g}, not a non-negative even integer")
    return two_g.numerator // 2


def invariant_deformation_dim(branch: BranchData) -> int:
    """
    dim H¹(C, Θ_C)^G as h⁰ of a degree-d divisor on the quotient curve,
    d = 4g′ − 4 + Σ⌊2(1 − 1/m_k)⌋.
    """
    g = branch.base_genus
    d = 4 * g - 4 + sum((2 * (m - 1)) // m for m in branch.indices)
    if d < 0:
        return 0
    if d > 2 * g - 2:
        return d - g + 1
    raise UnsupportedError(f"type {branch}: degree {d} lies in [0, 2g′−2]; h⁰ depends on the divisor")


def invariant_b1_contribution(branch: BranchData) -> int:
    return 2 * branch.base_genus
