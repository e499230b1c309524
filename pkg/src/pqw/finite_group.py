"""
finite_group.py – finite groups stored as explicit Cayley tables.

Elements are integer indices into an order×order multiplication table.
Labels are canonical strings ("(1,0)" for residue tuples built by
make_abelian_group) so reports stay byte-stable between runs.  Subgroups
carry their own derived table, so every operation here also works on them.

Usage::

    g = make_abelian_group([4, 4])
    a = automorphism_from_matrix(g, [[1, 2], [2, 3]])
    h = subgroup_generated(g, [g.element("(2,0)"), g.element("(0,2)")])
    print(h.order, a(g.element("(1,0)")))      # 4 (1,2)
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

log = logging.getLogger("pqw.group")

DEFAULT_MAX_ORDER = 1_000_000
ASSOCIATIVITY_CHECK_LIMIT = 512
ACTION_CHECK_LIMIT = 1_000_000


class GroupError(ValueError):
    """A table, element or map violates the group axioms."""


# ── Groups ────────────────────────────────────────────────────────────────────

class FiniteGroup:
    """
    A finite group given by its Cayley table.

    table[x][y] is the index of x·y.  The constructor checks the Latin
    square property and the identity, and checks associativity
    exhaustively when order ≤ 512.
    """

    def __init__(self, table, labels: Sequence[str] | None = None,
                 name: str = "G", abelian_factors: Sequence[int] | None = None,
                 coordinates=None, max_order: int = DEFAULT_MAX_ORDER,
                 check: bool = True):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise GroupError(f"Cayley table must be a non-empty square array, got shape {table.shape}")
        order = int(table.shape[0])
        if order > max_order:
            raise GroupError(f"group order {order} exceeds the configured limit {max_order}")

        self.table = table
        self.table.setflags(write=False)
        self.order = order
        self.name = name
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(order))
        if len(self.labels) != order or len(set(self.labels)) != order:
            raise GroupError(f"need {order} distinct element labels, got {len(set(self.labels))}")
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}

        self.abelian_factors = tuple(int(f) for f in abelian_factors) if abelian_factors else None
        self._coords = None
        if coordinates is not None:
            self._coords = np.asarray(coordinates, dtype=np.int64)
            self._coords.setflags(write=False)

        if check:
            self._check_latin_square()
        self.identity = self._find_identity()
        if check and order <= ASSOCIATIVITY_CHECK_LIMIT:
            self._check_associativity()

        self._rows = self.table.tolist()
        self._inverse = [row.index(self.identity) for row in self._rows]

    # -- construction checks --------------------------------------------------

    def _check_latin_square(self) -> None:
        expected = np.arange(self.order)
        if self.table.min() < 0 or self.table.max() >= self.order:
            raise GroupError("Cayley table entries out of range")
        if not np.array_equal(np.sort(self.table, axis=1), np.broadcast_to(expected, self.table.shape)):
            raise GroupError("Cayley table rows are not permutations (not a Latin square)")
        if not np.array_equal(np.sort(self.table, axis=0), np.broadcast_to(expected[:, None], self.table.shape)):
            raise GroupError("Cayley table columns are not permutations (not a Latin square)")

    def _find_identity(self) -> int:
        expected = np.arange(self.order)
        for e in range(self.order):
            if np.array_equal(self.table[e], expected) and np.array_equal(self.table[:, e], expected):
                return e
        raise GroupError("Cayley table has no identity element")

    def _check_associativity(self) -> None:
        t = self.table
        for a in range(self.order):
            # [b, c] -> (a·b)·c  versus  a·(b·c)
            if not np.array_equal(t[t[a]], t[a][t]):
                raise GroupError(f"multiplication is not associative (first failure at x={self.labels[a]})")

    # -- element arithmetic on indices ----------------------------------------

    def mul(self, x: int, y: int) -> int:
        return self._rows[x][y]

    def inv(self, x: int) -> int:
        return self._inverse[x]

    def power(self, x: int, k: int) -> int:
        if k < 0:
            x, k = self.inv(x), -k
        result, base = self.identity, x
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def conjugate(self, x: int, by: int) -> int:
        """by·x·by⁻¹"""
        return self.mul(self.mul(by, x), self.inv(by))

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != self.identity:
            y = self.mul(y, x)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def closure(self, generators: Iterable[int]) -> frozenset[int]:
        gens = [int(g) for g in generators]
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    def generating_set(self) -> list[int]:
        """Small generating set, chosen greedily in index order."""
        gens: list[int] = []
        span = frozenset([self.identity])
        for x in range(self.order):
            if x not in span:
                gens.append(x)
                span = self.closure(gens)
                if len(span) == self.order:
                    break
        return gens

    # -- labels and coordinates -----------------------------------------------

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise GroupError(f"no element labelled {label!r} in {self.name}") from None

    def label(self, x: int) -> str:
        return self.labels[x]

    def element(self, key: int | str) -> "GroupElement":
        idx = self.index_of(key) if isinstance(key, str) else int(key)
        if not 0 <= idx < self.order:
            raise GroupError(f"element index {idx} out of range for {self.name}")
        return GroupElement(self, idx)

    def elements(self) -> list["GroupElement"]:
        return [GroupElement(self, i) for i in range(self.order)]

    def coordinates(self, x: int) -> tuple[int, ...]:
        if self._coords is None:
            raise GroupError(f"{self.name} was not built from invariant factors")
        return tuple(int(c) for c in self._coords[x])

    def from_coordinates(self, coords: Sequence[int]) -> int:
        if self.abelian_factors is None:
            raise GroupError(f"{self.name} was not built from invariant factors")
        idx = 0
        for c, f in zip(coords, self.abelian_factors):
            idx = idx * f + int(c) % f
        return idx

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


@dataclass(frozen=True)
class GroupElement:
    group: FiniteGroup
    index: int

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if other.group is not self.group:
            raise GroupError("cannot multiply elements of different groups")
        return GroupElement(self.group, self.group.mul(self.index, other.index))

    def __pow__(self, k: int) -> "GroupElement":
        return GroupElement(self.group, self.group.power(self.index, k))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group.inv(self.index))

    def order(self) -> int:
        return self.group.element_order(self.index)

    def is_identity(self) -> bool:
        return self.index == self.group.identity

    @property
    def label(self) -> str:
        return self.group.labels[self.index]

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"GroupElement({self.label})"


def _as_index(group: FiniteGroup, x) -> int:
    if isinstance(x, GroupElement):
        if x.group is not group:
            raise GroupError(f"element {x.label} does not belong to {group.name}")
        return x.index
    if isinstance(x, str):
        return group.index_of(x)
    idx = int(x)
    if not 0 <= idx < group.order:
        raise GroupError(f"element index {idx} out of range for {group.name}")
    return idx


def abelian_group_name(factors: Sequence[int]) -> str:
    """Z4^2, Z2 x Z4, or 1 for the trivial group."""
    parts = []
    for f, run in itertools.groupby(f for f in factors if f > 1):
        k = len(list(run))
        parts.append(f"Z{f}" + (f"^{k}" if k > 1 else ""))
    return " x ".join(parts) if parts else "1"


def make_abelian_group(invariant_factors: Sequence[int], max_order: int = DEFAULT_MAX_ORDER,
                       name: str | None = None) -> FiniteGroup:
    """Direct product of cyclic groups, elements labelled by residue tuples."""
    factors = [int(f) for f in invariant_factors] or [1]
    if any(f < 1 for f in factors):
        raise GroupError(f"invariant factors must be positive, got {factors}")
    order = 1
    for f in factors:
        order *= f
        if order > max_order:
            raise GroupError(f"group order {order}+ exceeds the configured limit {max_order}")

    k = len(factors)
    coords = np.array(list(itertools.product(*(range(f) for f in factors))), dtype=np.int64).reshape(order, k)
    mods = np.array(factors, dtype=np.int64)
    weights = np.array([int(np.prod(factors[j + 1:])) for j in range(k)], dtype=np.int64)
    sums = (coords[:, None, :] + coords[None, :, :]) % mods
    table = sums @ weights
    labels = ["(" + ",".join(str(int(c)) for c in row) + ")" for row in coords]
    group = FiniteGroup(table, labels, name=name or abelian_group_name(factors),
                        abelian_factors=factors, coordinates=coords, max_order=max_order)
    log.debug(f"built {group.name} of order {order}")
    return group


# ── Homomorphisms ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Homomorphism:
    """A map source → target given on every element; checked on construction."""

    source: FiniteGroup
    target: FiniteGroup
    images: tuple[int, ...]
    name: str = "f"

    def __post_init__(self):
        if len(self.images) != self.source.order:
            raise GroupError(f"{self.name}: need {self.source.order} images, got {len(self.images)}")
        img = np.asarray(self.images, dtype=np.int64)
        if img.min() < 0 or img.max() >= self.target.order:
            raise GroupError(f"{self.name}: image index out of range")
        lhs = img[self.source.table]
        rhs = self.target.table[img[:, None], img[None, :]]
        if not np.array_equal(lhs, rhs):
            raise GroupError(f"{self.name} does not respect multiplication")

    @classmethod
    def identity(cls, group: FiniteGroup) -> "Homomorphism":
        return cls(group, group, tuple(range(group.order)), name="id")

    def __call__(self, x) -> GroupElement:
        return GroupElement(self.target, self.images[_as_index(self.source, x)])

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """self ∘ inner"""
        if inner.target is not self.source:
            raise GroupError(f"cannot compose {self.name} after {inner.name}: groups differ")
        return Homomorphism(inner.source, self.target,
                            tuple(self.images[i] for i in inner.images),
                            name=f"{self.name}∘{inner.name}")

    def is_bijective(self) -> bool:
        return self.source.order == self.target.order and len(set(self.images)) == self.source.order

    def is_identity(self) -> bool:
        return self.source is self.target and self.images == tuple(range(self.source.order))

    def inverse(self) -> "Homomorphism":
        if not self.is_bijective():
            raise GroupError(f"{self.name} is not bijective")
        inv = [0] * self.source.order
        for x, y in enumerate(self.images):
            inv[y] = x
        return Homomorphism(self.target, self.source, tuple(inv), name=f"{self.name}⁻¹")

    def kernel(self) -> "Subgroup":
        ker = [x for x, y in enumerate(self.images) if y == self.target.identity]
        return _subgroup_from_elements(self.source, ker)


def automorphism_from_matrix(group: FiniteGroup, matrix) -> Homomorphism:
    """
    The automorphism a ↦ M·a (mod m) of a homocyclic group Z_m^k.

    Columns of M are the images of the standard basis vectors.
    """
    factors = group.abelian_factors
    if not factors or len(set(factors)) != 1 or group._coords is None:
        raise GroupError(f"{group.name} is not a homocyclic group built from invariant factors")
    m, k = factors[0], len(factors)
    mat = np.asarray(matrix, dtype=np.int64)
    if mat.shape != (k, k):
        raise GroupError(f"matrix must be {k}×{k}, got shape {mat.shape}")
    mat = mat % m
    image_coords = (group._coords @ mat.T) % m
    images = tuple(group.from_coordinates(row) for row in image_coords.tolist())
    if len(set(images)) != group.order:
        raise GroupError(f"matrix {mat.tolist()} is not invertible mod {m}")
    return Homomorphism(group, group, images, name="A")


# ── Subgroups ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Subgroup:
    """Sorted element set of an ambient group plus its own FiniteGroup."""

    ambient: FiniteGroup
    elements: tuple[int, ...]
    group: FiniteGroup
    embedding: Homomorphism

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.ambient.order // self.order

    def __contains__(self, x) -> bool:
        return _as_index(self.ambient, x) in self._members

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subgroup) and other.ambient is self.ambient
                and other.elements == self.elements)

    def __hash__(self) -> int:
        return hash((id(self.ambient), self.elements))

    @cached_property
    def _members(self) -> frozenset[int]:
        return frozenset(self.elements)

    def contains(self, x) -> bool:
        return x in self

    def is_normal(self) -> bool:
        members = self._members
        amb = self.ambient
        return all(amb.conjugate(h, g) in members for g in amb.generating_set() for h in self.elements)

    def left_coset(self, x) -> frozenset[int]:
        xi = _as_index(self.ambient, x)
        return frozenset(self.ambient.mul(xi, h) for h in self.elements)

    def left_cosets(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        cosets = []
        for x in range(self.ambient.order):
            if x not in seen:
                c = self.left_coset(x)
                seen |= c
                cosets.append(c)
        return cosets

    def restrict(self, ambient_element) -> GroupElement:
        """The subgroup's own element for an ambient element inside it."""
        xi = _as_index(self.ambient, ambient_element)
        try:
            return GroupElement(self.group, self.elements.index(xi))
        except ValueError:
            raise GroupError(f"{self.ambient.label(xi)} is not in the subgroup") from None

    def labels(self) -> list[str]:
        return [self.ambient.label(x) for x in self.elements]

    def __repr__(self) -> str:
        return f"Subgroup({{{', '.join(self.labels())}}} ≤ {self.ambient.name})"


def _subgroup_from_elements(ambient: FiniteGroup, elements: Iterable[int],
                            name: str | None = None) -> Subgroup:
    elems = sorted(set(int(x) for x in elements))
    pos = np.full(ambient.order, -1, dtype=np.int64)
    pos[elems] = np.arange(len(elems))
    sub_table = pos[ambient.table[np.ix_(elems, elems)]]
    if (sub_table < 0).any():
        raise GroupError("element set is not closed under multiplication")
    labels = [ambient.label(x) for x in elems]
    group = FiniteGroup(sub_table, labels, name=name or f"<{','.join(labels)}>", check=False)
    embedding = Homomorphism(group, ambient, tuple(elems), name="incl")
    return Subgroup(ambient, tuple(elems), group, embedding)


def subgroup_generated(group: FiniteGroup, generators: Iterable, name: str | None = None) -> Subgroup:
    """Closure of the generators under multiplication (inverses come for free in a finite group)."""
    gens = [_as_index(group, g) for g in generators]
    return _subgroup_from_elements(group, group.closure(gens), name=name)


def whole_group(group: FiniteGroup) -> Subgroup:
    return _subgroup_from_elements(group, range(group.order), name=group.name)


# ── Actions on finite sets ────────────────────────────────────────────────────

@dataclass(frozen=True)
class Orbit:
    points: tuple
    stabilizers: tuple[Subgroup, ...]

    @property
    def representative(self):
        return self.points[0]

    def __len__(self) -> int:
        return len(self.points)


def orbits_and_stabilizers(group: FiniteGroup, action: Callable[[GroupElement, Hashable], Hashable],
                           points: Iterable[Hashable]) -> list[Orbit]:
    """
    Orbits of a finite action, each point with its stabilizer.

    The action is validated first: the identity must fix every point,
    images must stay inside the set, and g·(h·p) = (gh)·p must hold for
    every g and every generator h (exhaustively when |points|·order is
    within ACTION_CHECK_LIMIT).
    """
    pts = list(dict.fromkeys(points))
    where = {p: i for i, p in enumerate(pts)}
    elements = group.elements()

    perm: list[list[int]] = []
    for g in elements:
        row = []
        for p in pts:
            q = action(g, p)
            if q not in where:
                raise GroupError(f"action maps {p!r} outside the point set under {g.label}")
            row.append(where[q])
        perm.append(row)

    if any(perm[group.identity][i] != i for i in range(len(pts))):
        raise GroupError("identity does not act trivially")
    if len(pts) * group.order <= ACTION_CHECK_LIMIT:
        for g in range(group.order):
            for h in group.generating_set():
                gh = group.mul(g, h)
                for i in range(len(pts)):
                    if perm[gh][i] != perm[g][perm[h][i]]:
                        raise GroupError(f"not an action: ({group.label(g)}·{group.label(h)})·p ≠ "
                                         f"{group.label(g)}·({group.label(h)}·p) at p={pts[i]!r}")

    gens = group.generating_set()
    orbits: list[Orbit] = []
    seen: set[int] = set()
    for i in range(len(pts)):
        if i in seen:
            continue
        members = [i]
        seen.add(i)
        for j in members:
            for h in gens:
                k = perm[h][j]
                if k not in seen:
                    seen.add(k)
                    members.append(k)
        stabs = tuple(_subgroup_from_elements(group, [g for g in range(group.order) if perm[g][j] == j])
                      for j in members)
        orbits.append(Orbit(tuple(pts[j] for j in members), stabs))
    log.debug(f"{len(pts)} points fall into {len(orbits)} orbits under {group.name}")
    return orbits
