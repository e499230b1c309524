"""
pi1.py – fundamental groups of product-quotients via the fiber product.

The orbifold groups T_i of the factors act on the product of universal
covers; 𝔾 ≤ T₁×…×T_n is the preimage of the diagonal of Gⁿ and the
quotient Z/G has π₁ = 𝔾 / ⟨⟨elements with a fixed point⟩⟩.

Pipeline:
    ambient presentation T  →  coset table of 𝔾 from the finite quotient Gⁿ
    →  Reidemeister–Schreier presentation of 𝔾
    →  add rewritten fixed-point elements as relators, Tietze-simplify
    →  abelian invariants, then Todd–Coxeter over the trivial subgroup.

An order is reported only when that last enumeration completes.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from functools import cached_property

from finite_group import FiniteGroup
from fpgroup import (AbelianInvariants, BudgetError, CosetTable, FiniteQuotient, Presentation,
                     SchreierPresentation, TietzeResult, Undetermined, Word, abelianization,
                     canonical_relator, coset_table_from_quotient, dedupe_relators,
                     reidemeister_schreier, tietze_reduce, todd_coxeter, word_invert, word_multiply)
from orbifold import GeneratingVectorError, make_orbifold_group
from product_quotient import Census, ProductQuotientSpec
from settings import Limits

log = logging.getLogger("pqw.pi1")

VERIFIED_MAX_N = 5

CERTIFIED = "certified"
UNDETERMINED = "undetermined"
INFINITE = "infinite"


class UncertifiedError(RuntimeError):
    """A conclusion needs a certified finite π₁ order that is not available."""


# ── Ambient presentation ─────────────────────────────────────────────────────

def _shift(word, offset: int) -> Word:
    return Word._trusted(x + offset if x > 0 else x - offset for x in word)


def build_ambient_presentation(spec: ProductQuotientSpec) -> tuple[Presentation, tuple[int, ...]]:
    """
    T₁×…×T_n with generators named "<gen>_<factor>", plus the letter offset
    of each factor.  Factor relators come first, then one commutator for
    every pair of generators from different factors.
    """
    names: list[str] = []
    relators: list[Word] = []
    offsets = []
    for i, f in enumerate(spec.factors):
        og = make_orbifold_group(f.branch, suffix=f"_{i + 1}")
        offset = len(names)
        offsets.append(offset)
        names.extend(og.presentation.generators)
        relators.extend(_shift(r, offset) for r in og.presentation.relators)
    bounds = list(offsets) + [len(names)]
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            for x in range(bounds[i] + 1, bounds[i + 1] + 1):
                for y in range(bounds[j] + 1, bounds[j + 1] + 1):
                    relators.append(Word._trusted((x, y, -x, -y)))
    p = Presentation(tuple(names), tuple(relators), {"ambient": f"T^{spec.n}"})
    return p, tuple(offsets)


def _diagonal_quotient(spec: ProductQuotientSpec) -> FiniteQuotient:
    """Gⁿ with Δ(G)·q keyed by (q₀⁻¹q₁, …, q₀⁻¹q_{n−1})."""
    g = spec.group
    rows = g.table.tolist()
    inv = [g.inv(x) for x in range(g.order)]
    e = g.identity
    n = spec.n
    images = []
    for i, epi in enumerate(spec.epimorphisms):
        for x in epi.vector.indices():
            images.append(tuple(x if j == i else e for j in range(n)))

    def multiply(p, q):
        return tuple(rows[a][b] for a, b in zip(p, q))

    def invert(q):
        return tuple(inv[a] for a in q)

    def coset_key(q):
        head = inv[q[0]]
        return tuple(rows[head][a] for a in q[1:])

    return FiniteQuotient((e,) * n, images, multiply, invert, coset_key, subgroup="diagonal")


# ── Fiber product ─────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FiberProductGroup:
    spec: ProductQuotientSpec
    ambient: Presentation
    offsets: tuple[int, ...]
    quotient: FiniteQuotient
    table: CosetTable
    schreier: SchreierPresentation
    limits: Limits = field(default_factory=Limits)

    @property
    def index(self) -> int:
        return self.table.index

    @property
    def presentation(self) -> Presentation:
        """Raw Reidemeister–Schreier presentation of 𝔾."""
        return self.schreier.presentation

    @cached_property
    def simplified(self) -> TietzeResult:
        return tietze_reduce(self.presentation, self.limits.max_substitution_length,
                             self.limits.max_relator_length)

    def factor_values(self, word) -> tuple[int, ...]:
        """φ_i of each coordinate of an ambient word."""
        return self.quotient.evaluate(word)

    def contains(self, word) -> bool:
        return self.table.trace(0, word) == 0


def build_fiber_product(spec: ProductQuotientSpec, limits: Limits | None = None,
                        seed: int | None = None) -> FiberProductGroup:
    limits = limits or Limits()
    g = spec.group
    expected = g.order ** (spec.n - 1)
    if expected > limits.max_cosets:
        raise BudgetError(f"fiber product has index {expected} > max_cosets={limits.max_cosets}")

    ambient, offsets = build_ambient_presentation(spec)
    quotient = _diagonal_quotient(spec)
    table = coset_table_from_quotient(ambient, quotient, limits.max_cosets, seed=seed)
    if table.index != expected:
        raise GeneratingVectorError(f"fiber product index {table.index}, expected |G|^(n-1) = {expected}; "
                                     "the factor epimorphisms are inconsistent")

    schreier = reidemeister_schreier(table)
    diagonal = quotient.coset_key(quotient.identity)
    for s in range(1, schreier.presentation.generator_count + 1):
        if quotient.coset_key(quotient.evaluate(schreier.schreier_word(s))) != diagonal:
            raise GeneratingVectorError(f"Schreier generator {schreier.presentation.generators[s - 1]} "
                                     "does not map into the diagonal")
    log.info(f"fiber product: index {table.index}, {schreier.presentation.generator_count} Schreier "
             f"generators, {len(schreier.presentation.relators)} relators")
    return FiberProductGroup(spec, ambient, offsets, quotient, table, schreier, limits)


# ── Elements with fixed points ───────────────────────────────────────────────

def _transversal(group: FiniteGroup, images: list[int]) -> dict[int, Word]:
    """Shortest word δ_g in the factor's own letters with φ(δ_g) = g, for every g."""
    words = {group.identity: Word()}
    frontier = [group.identity]
    letters = [(i + 1, x) for i, x in enumerate(images)] + [(-(i + 1), group.inv(x)) for i, x in enumerate(images)]
    while frontier:
        nxt = []
        for h in frontier:
            for letter, x in letters:
                y = group.mul(h, x)
                if y not in words:
                    words[y] = Word._trusted(words[h] + (letter,))
                    nxt.append(y)
        frontier = nxt
    return words


@dataclass(frozen=True)
class FixChoice:
    """δ·c_k^a·δ⁻¹ in one factor; conjugator is φ(δ)."""

    branch_index: int
    exponent: int
    conjugator: int
    word: Word


@dataclass(frozen=True)
class FixGenerator:
    value: int
    choices: tuple[FixChoice, ...]
    word: Word
    relator: Word

    def describe(self, group: FiniteGroup) -> str:
        parts = [f"c{c.branch_index + 1}^{c.exponent}@{group.label(c.conjugator)}" for c in self.choices]
        return f"{group.label(self.value)}: ({', '.join(parts)})"


def _coset_representatives(group: FiniteGroup, cyclic) -> list[int]:
    """One element per left coset x·⟨c⟩, the identity standing for ⟨c⟩ itself."""
    reps, covered = [], set()
    for x in [group.identity] + [y for y in range(group.order) if y != group.identity]:
        if x in covered:
            continue
        covered.update(group.mul(x, y) for y in cyclic)
        reps.append(x)
    return reps


def _factor_options(fp: FiberProductGroup, i: int) -> dict[int, list[FixChoice]]:
    """Value v ≠ e → choices δ_g·c_k^a·δ_g⁻¹ in factor i with φ_i = v, g up to ⟨img c_k⟩."""
    spec = fp.spec
    g = spec.group
    epi = spec.epimorphisms[i]
    delta = _transversal(g, epi.vector.indices())
    offset = fp.offsets[i]
    out: dict[int, list[FixChoice]] = {}
    for k, m in enumerate(spec.factors[i].branch.indices):
        c = epi.branch_image(k)
        cyclic = g.closure([c])
        letter = epi.ogroup.branch_letter(k) + offset
        reps = _coset_representatives(g, cyclic)
        for a in range(1, m):
            ca = g.power(c, a)
            for x in reps:
                d = _shift(delta[x], offset)
                w = word_multiply(d, Word([letter] * a), word_invert(d))
                out.setdefault(g.conjugate(ca, x), []).append(FixChoice(k, a, x, w))
    return out


def enumerate_fix_generators(fp: FiberProductGroup, reduce_orbits: bool = True,
                             limits: Limits | None = None) -> list[FixGenerator]:
    """
    Normal generators of the fixed-point subgroup of 𝔾.

    An element with a fixed point has every coordinate elliptic in its
    factor.  A trivial coordinate forces the common value to be e, and
    then every coordinate lies in the torsion-free kernel of φ_i, so all
    coordinates are trivial; hence only tuples with every coordinate
    nontrivial and a common value v ≠ e are emitted.  Conjugators run over
    a transversal of φ_i only, since (1,…,u,…,1) with u ∈ ker φ_i lies in
    𝔾.  With reduce_orbits the first coordinate's conjugator is fixed to
    the identity, which a diagonal conjugation by transversal words always
    achieves.
    """
    limits = limits or fp.limits
    spec = fp.spec
    g = spec.group
    options = [_factor_options(fp, i) for i in range(spec.n)]
    values = sorted(set.intersection(*(set(o) for o in options)))

    total = 0
    for v in values:
        first = [c for c in options[0][v] if c.conjugator == g.identity] if reduce_orbits else options[0][v]
        count = len(first)
        for o in options[1:]:
            count *= len(o[v])
        total += count
    if total > limits.max_relators:
        raise BudgetError(f"{total} fixed-point generators exceed max_relators={limits.max_relators}")

    seen: set[Word] = set()
    out: list[FixGenerator] = []
    for v in values:
        first = [c for c in options[0][v] if c.conjugator == g.identity] if reduce_orbits else options[0][v]
        for choice in itertools.product(first, *(o[v] for o in options[1:])):
            word = word_multiply(*(c.word for c in choice))
            relator = canonical_relator(fp.schreier.rewrite(word))
            if not relator or relator in seen:
                continue
            seen.add(relator)
            out.append(FixGenerator(v, choice, word, relator))
    log.info(f"fixed-point generators: {total} tuples over {len(values)} values, {len(out)} distinct relators")
    return out


# ── π₁ ────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Pi1Result:
    spec: ProductQuotientSpec
    status: str
    abelian: AbelianInvariants | None
    order: int | None
    tag: str
    presentation: Presentation
    fiber_product: FiberProductGroup | None = None
    tietze: TietzeResult | None = None
    table: CosetTable | None = None
    reason: str = ""
    counts: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def beyond_verified_range(self) -> bool:
        return self.spec.n > VERIFIED_MAX_N

    def element_of(self, ambient_word) -> Word:
        """An element of 𝔾, given as an ambient word, in the simplified π₁ generators."""
        if self.fiber_product is None or self.tietze is None:
            raise UncertifiedError("no presentation record available")
        return self.tietze.map_word(self.fiber_product.schreier.rewrite(ambient_word))

    def is_trivial(self, ambient_word) -> bool:
        if self.table is None:
            raise UncertifiedError("π₁ order is not certified; no regular coset table")
        return self.table.trace(0, self.element_of(ambient_word)) == 0

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "status": self.status,
            "order": self.order,
            "abelian_invariants": self.abelian.as_dict() if self.abelian else None,
            "isomorphism_type": self.tag,
            "beyond_verified_range": self.beyond_verified_range,
            "presentation": {"generators": self.presentation.generator_count,
                             "relators": len(self.presentation.relators)},
            "diagnostics": dict(self.counts),
        }
        if self.reason:
            out["reason"] = self.reason
        if timing:
            out["timing"] = {k: round(v, 3) for k, v in self.timing.items()}
        return out


def _finish(spec, tz: TietzeResult, fp, limits: Limits, counts: dict, timing: dict) -> Pi1Result:
    p = tz.presentation
    ab = abelianization(p)
    counts.update(generators_simplified=p.generator_count, relators_simplified=len(p.relators))
    if not ab.is_finite:
        log.info(f"π₁ abelianization {ab} is infinite")
        return Pi1Result(spec, INFINITE, ab, None, f"infinite (H1 = {ab})", p, fp, tz,
                         reason="abelianization has positive free rank", counts=counts, timing=timing)

    start = time.perf_counter()
    table = todd_coxeter(p, (), limits.max_cosets, limits.max_deductions)
    timing["enumeration"] = time.perf_counter() - start
    if isinstance(table, Undetermined):
        counts.update(cosets_defined=table.cosets_defined, live_cosets=table.live_cosets)
        return Pi1Result(spec, UNDETERMINED, ab, None, f"H1 only: {ab}", p, fp, tz,
                         reason=table.reason, counts=counts, timing=timing)

    order = table.index
    tag = str(ab) if order == ab.order else f"non-abelian group of order {order}"
    log.info(f"π₁ certified: order {order}, {tag}")
    return Pi1Result(spec, CERTIFIED, ab, order, tag, p, fp, tz, table, counts=counts, timing=timing)


def armstrong_pi1(spec: ProductQuotientSpec, limits: Limits | None = None,
                  seed: int | None = None, reduce_orbits: bool = True) -> Pi1Result:
    """
    π₁ of the quotient.  Resource exhaustion is reported as status
    "undetermined" together with the abelian invariants, never as a
    guessed order.
    """
    limits = limits or Limits()
    timing: dict[str, float] = {}
    counts: dict[str, int] = {}
    start = time.perf_counter()
    try:
        fp = build_fiber_product(spec, limits, seed)
        timing["fiber_product"] = time.perf_counter() - start
        counts.update(index=fp.index, schreier_generators=fp.presentation.generator_count,
                      schreier_relators=len(fp.presentation.relators))

        start = time.perf_counter()
        fix = enumerate_fix_generators(fp, reduce_orbits, limits)
        timing["fix_generators"] = time.perf_counter() - start
        counts["fix_relators"] = len(fix)

        start = time.perf_counter()
        rels = dedupe_relators(list(fp.presentation.relators) + [f.relator for f in fix])
        p = Presentation(fp.presentation.generators, tuple(rels), {"group": "pi1"})
        tz = tietze_reduce(p, limits.max_substitution_length, limits.max_relator_length)
        timing["simplify"] = time.perf_counter() - start
    except BudgetError as e:
        log.warning(f"π₁ undetermined: {e}")
        return Pi1Result(spec, UNDETERMINED, None, None, "undetermined",
                         Presentation((), ()), reason=str(e), counts=counts, timing=timing)
    return _finish(spec, tz, fp, limits, counts, timing)


# ── Universal cover ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class UniversalCoverReport:
    pi1_order: int
    base_singular_points: int
    singular_points: int
    simply_connected: bool

    def as_dict(self) -> dict:
        return {
            "pi1_order": self.pi1_order,
            "base_singular_points": self.base_singular_points,
            "singular_points": self.singular_points,
            "simply_connected": self.simply_connected,
            "projective": {"value": True, "status": "cited",
                           "note": "finite pi1: the universal cover is a finite quasi-etale cover, "
                                   "hence projective"},
            "contractible": {"value": False, "status": "cited",
                             "note": "a compact projective variety has b2 != 0"},
        }


def universal_cover_report(spec: ProductQuotientSpec, pi1: Pi1Result, census: Census) -> UniversalCoverReport:
    if not pi1.certified or pi1.order is None:
        raise UncertifiedError(f"π₁ status is {pi1.status}; the universal cover needs a certified finite order")
    if census.n != spec.n:
        raise ValueError("census does not belong to this specification")
    count = pi1.order * census.singular_points
    return UniversalCoverReport(pi1.order, census.singular_points, count, pi1.order == 1)

