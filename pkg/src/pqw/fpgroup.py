"""
fpgroup.py – finitely presented groups.

Words are tuples of signed generator numbers: generator i (1-based) is the
letter i, its inverse is -i.  On top of that this module provides
presentations with a plain-text dump format, coset tables built either by
Todd–Coxeter enumeration or by evaluating words in a known finite quotient,
Reidemeister–Schreier subgroup presentations, Tietze simplification and
abelian invariants via Smith normal form.

Coset-table columns interleave generators and inverses: column 2i is
generator i+1, column 2i+1 its inverse, so the inverse column is c ^ 1.
"""

from __future__ import annotations

import heapq
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from finite_group import abelian_group_name

log = logging.getLogger("pqw.fpgroup")

DEFAULT_MAX_COSETS = 2_000_000
DEFAULT_MAX_DEDUCTIONS = 50_000_000
DEFAULT_MAX_SUBSTITUTION = 12
DEFAULT_MAX_RELATOR_LENGTH = 400


class WordError(ValueError):
    """Bad letters, alphabet mismatch, or a word outside the expected subgroup."""


class PresentationError(ValueError):
    """Malformed presentation, text dump, or coset table."""


class QuotientError(ValueError):
    """A finite-quotient evaluator does not kill the relators or is inconsistent."""


class BudgetError(RuntimeError):
    """A configured size limit would be exceeded."""


# ── Words ─────────────────────────────────────────────────────────────────────

class Word(tuple):
    """A freely reduced word.  Construction reduces; letters are nonzero ints."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        out: list[int] = []
        for x in letters:
            x = int(x)
            if x == 0:
                raise WordError("0 is not a letter")
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return super().__new__(cls, out)

    @classmethod
    def _trusted(cls, letters: Iterable[int]) -> "Word":
        return tuple.__new__(cls, letters)

    def __mul__(self, other) -> "Word":
        return word_multiply(self, other)

    def __invert__(self) -> "Word":
        return word_invert(self)

    def __pow__(self, k: int) -> "Word":
        return word_power(self, k)

    def rank(self) -> int:
        """Largest generator number used."""
        return max((abs(x) for x in self), default=0)

    def __repr__(self) -> str:
        return f"Word({list(self)})"


def free_reduce(letters: Iterable[int]) -> Word:
    return Word(letters)


def _check_alphabet(words: Sequence[Sequence[int]], rank: int | None) -> None:
    if rank is None:
        return
    for w in words:
        for x in w:
            if not 0 < abs(x) <= rank:
                raise WordError(f"letter {x} outside an alphabet of {rank} generators")


def word_multiply(*words: Sequence[int], rank: int | None = None) -> Word:
    _check_alphabet(words, rank)
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return Word._trusted(out) if all(isinstance(w, Word) for w in words) else Word(out)


def word_invert(w: Sequence[int], rank: int | None = None) -> Word:
    _check_alphabet([w], rank)
    return Word([-x for x in reversed(w)])


def word_power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        w, k = word_invert(w), -k
    return word_multiply(*([Word(w)] * k)) if k else Word()


def commutator(x: Sequence[int], y: Sequence[int]) -> Word:
    """[x, y] = x y x⁻¹ y⁻¹"""
    return word_multiply(x, y, word_invert(x), word_invert(y))


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = Word(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return Word._trusted(w[i:j])


def canonical_relator(w: Sequence[int]) -> Word:
    """
    Canonical representative of a relator up to cyclic rotation and inversion:
    the least rotation of the cyclically reduced word or of its inverse.
    """
    w = cyclic_reduce(w)
    if not w:
        return w
    best = None
    for cand in (w, word_invert(w)):
        low = min(cand)
        for i, x in enumerate(cand):
            if x == low:
                rot = cand[i:] + cand[:i]
                if best is None or rot < best:
                    best = rot
    return Word._trusted(best)


# ── Presentations ─────────────────────────────────────────────────────────────

_NAME_RE = re.compile(r"^[^\s^\-][^\s^]*$")
_SYLLABLE_RE = re.compile(r"^(-?)([^\s^\-][^\s^]*?)(?:\^([1-9][0-9]*))?$")


@dataclass(frozen=True)
class Presentation:
    """Generators and relators; relators are stored freely reduced and non-empty."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise PresentationError("generator names must be distinct")
        for name in gens:
            if not _NAME_RE.match(name):
                raise PresentationError(f"bad generator name {name!r}")
        rels = []
        for r in self.relators:
            w = Word(r)
            if not w:
                raise PresentationError("relators must be non-empty after free reduction")
            if w.rank() > len(gens):
                raise PresentationError(f"relator uses generator {w.rank()} of only {len(gens)}")
            rels.append(w)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", tuple(rels))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def generator_count(self) -> int:
        return len(self.generators)

    def with_relators(self, extra: Iterable[Sequence[int]]) -> "Presentation":
        return Presentation(self.generators, self.relators + tuple(Word(r) for r in extra), self.metadata)

    def word_text(self, w: Sequence[int]) -> str:
        parts = []
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and w[j] == w[i]:
                j += 1
            name = self.generators[abs(w[i]) - 1]
            sign = "-" if w[i] < 0 else ""
            parts.append(f"{sign}{name}^{j - i}" if j - i > 1 else f"{sign}{name}")
            i = j
        return " ".join(parts)

    def parse_word(self, text: str) -> Word:
        index = {name: i + 1 for i, name in enumerate(self.generators)}
        letters: list[int] = []
        for syl in text.split():
            m = _SYLLABLE_RE.match(syl)
            if not m or m.group(2) not in index:
                raise PresentationError(f"cannot parse syllable {syl!r}")
            x = index[m.group(2)] * (-1 if m.group(1) else 1)
            letters.extend([x] * int(m.group(3) or 1))
        return Word(letters)

    def to_text(self) -> str:
        lines = ["gens:" + "".join(" " + g for g in self.generators)]
        lines += ["rel: " + self.word_text(r) for r in self.relators]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Presentation":
        gens = None
        rel_texts = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            key, _, rest = line.partition(":")
            if key == "gens" and gens is None:
                gens = tuple(rest.split())
            elif key == "rel" and gens is not None:
                rel_texts.append((lineno, rest))
            else:
                raise PresentationError(f"line {lineno}: expected 'gens:' once, then 'rel:' lines")
        if gens is None:
            raise PresentationError("missing 'gens:' line")
        shell = cls(gens, ())
        rels = []
        for lineno, rest in rel_texts:
            try:
                rels.append(shell.parse_word(rest))
            except PresentationError as e:
                raise PresentationError(f"line {lineno}: {e}") from None
        return cls(gens, tuple(rels))

    def __str__(self) -> str:
        return f"<{', '.join(self.generators)} | {', '.join(self.word_text(r) for r in self.relators)}>"


# ── Abelian invariants and Smith normal form ─────────────────────────────────

@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...]

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t):
            raise ValueError(f"torsion entries must be ≥ 2, got {t}")
        if any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"torsion {t} is not a divisor chain")
        object.__setattr__(self, "torsion", t)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int | None:
        """Group order, or None when infinite."""
        if self.free_rank:
            return None
        n = 1
        for d in self.torsion:
            n *= d
        return n

    def is_elementary_abelian(self, p: int) -> bool:
        return self.free_rank == 0 and all(d == p for d in self.torsion)

    def as_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion), "order": self.order}

    def __str__(self) -> str:
        free = ("Z" + (f"^{self.free_rank}" if self.free_rank > 1 else "")) if self.free_rank else ""
        tors = abelian_group_name(self.torsion)
        if free and tors != "1":
            return f"{free} x {tors}"
        return free or tors


@dataclass(frozen=True)
class SmithForm:
    """left·M·right = D; left_inverse·D·right_inverse = M."""

    diagonal: tuple[int, ...]
    D: list[list[int]]
    left: list[list[int]]
    right: list[list[int]]
    left_inverse: list[list[int]]
    right_inverse: list[list[int]]


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _smith(a: list[list[int]], rows: int, cols: int, track: bool):
    """
    In-place Smith reduction of a dense integer matrix.

    Python ints never overflow, so entry growth is exact.  With track=True
    the unimodular transforms and their inverses are maintained alongside.
    """
    L = _identity(rows) if track else None
    Li = _identity(rows) if track else None
    R = _identity(cols) if track else None
    Ri = _identity(cols) if track else None

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        if track:
            L[i], L[j] = L[j], L[i]
            for row in Li:
                row[i], row[j] = row[j], row[i]

    def row_add(i, t, c):
        # row_i += c·row_t
        ai, at = a[i], a[t]
        for k in range(cols):
            if at[k]:
                ai[k] += c * at[k]
        if track:
            Lrow_i, Lrow_t = L[i], L[t]
            for k in range(rows):
                Lrow_i[k] += c * Lrow_t[k]
            for row in Li:
                row[t] -= c * row[i]

    def row_neg(t):
        a[t] = [-x for x in a[t]]
        if track:
            L[t] = [-x for x in L[t]]
            for row in Li:
                row[t] = -row[t]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        if track:
            for row in R:
                row[i], row[j] = row[j], row[i]
            Ri[i], Ri[j] = Ri[j], Ri[i]

    def col_add(j, t, c):
        # col_j += c·col_t
        for row in a:
            if row[t]:
                row[j] += c * row[t]
        if track:
            for row in R:
                row[j] += c * row[t]
            Ri_t, Ri_j = Ri[t], Ri[j]
            for k in range(cols):
                Ri_t[k] -= c * Ri_j[k]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                row = a[i]
                for j in range(t, cols):
                    v = row[j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, j)
                        if best[0] == 1:
                            break
                if best and best[0] == 1:
                    break
            if best is None:
                break
            _, i, j = best
            if i != t:
                row_swap(i, t)
            if j != t:
                col_swap(j, t)
            p = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // p))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // p))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, rows)
                        if any(a[i][j] % p for j in range(t + 1, cols))), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if a[t][t] < 0:
            row_neg(t)
    return L, R, Li, Ri


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> SmithForm:
    a = [[int(x) for x in row] for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if any(len(row) != cols for row in a):
        raise ValueError("matrix rows have different lengths")
    L, R, Li, Ri = _smith(a, rows, cols, track=True)
    diagonal = tuple(a[i][i] for i in range(min(rows, cols)))
    return SmithForm(diagonal, a, L, R, Li, Ri)


def _abelian_invariants(rows: list[dict[int, int]], ncols: int) -> AbelianInvariants:
    """
    Invariants of Z^ncols / (row span).

    Unit pivots are eliminated sparsely first; the remaining core goes
    through dense Smith reduction without transforms.
    """
    rows = [dict(r) for r in rows if r]
    where: dict[int, set[int]] = {}
    for rid, r in enumerate(rows):
        for c in r:
            where.setdefault(c, set()).add(rid)
    alive = set(range(len(rows)))
    units = 0
    pending = sorted(alive, key=lambda rid: len(rows[rid]))
    while pending:
        nxt: set[int] = set()
        for rid in pending:
            if rid not in alive:
                continue
            r = rows[rid]
            col = min((c for c, v in r.items() if abs(v) == 1), default=None,
                      key=lambda c: len(where[c]))
            if col is None:
                continue
            sign = r[col]
            for other in list(where[col]):
                if other == rid:
                    continue
                s = rows[other]
                f = s[col] * sign
                for c, v in r.items():
                    nv = s.get(c, 0) - f * v
                    if nv:
                        if c not in s:
                            where.setdefault(c, set()).add(other)
                        s[c] = nv
                    elif c in s:
                        del s[c]
                        where[c].discard(other)
                if s:
                    nxt.add(other)
                else:
                    alive.discard(other)
            for c in r:
                where[c].discard(rid)
            alive.discard(rid)
            units += 1
        pending = sorted((rid for rid in nxt if rid in alive), key=lambda rid: len(rows[rid]))

    core_rows = [rows[rid] for rid in sorted(alive) if rows[rid]]
    core_cols = sorted({c for r in core_rows for c in r})
    cidx = {c: k for k, c in enumerate(core_cols)}
    dense = [[0] * len(core_cols) for _ in core_rows]
    for i, r in enumerate(core_rows):
        for c, v in r.items():
            dense[i][cidx[c]] = v
    _smith(dense, len(dense), len(core_cols), track=False)
    diag = [dense[i][i] for i in range(min(len(dense), len(core_cols)))]
    rank = units + sum(1 for d in diag if d)
    torsion = tuple(d for d in diag if d > 1)
    log.debug(f"abelianization: {units} unit pivots, core {len(dense)}×{len(core_cols)}")
    return AbelianInvariants(ncols - rank, torsion)


def relation_matrix(p: Presentation) -> list[dict[int, int]]:
    """Exponent-sum rows, one per relator, as sparse column → value maps (0-based columns)."""
    rows = []
    for r in p.relators:
        cnt: Counter[int] = Counter()
        for x in r:
            cnt[abs(x) - 1] += 1 if x > 0 else -1
        rows.append({c: v for c, v in cnt.items() if v})
    return rows


def abelianization(p: Presentation) -> AbelianInvariants:
    return _abelian_invariants(relation_matrix(p), p.generator_count)


# ── Coset tables ──────────────────────────────────────────────────────────────

def column_of(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (letter < 0)


def letter_of(column: int) -> int:
    return (column // 2 + 1) * (-1 if column & 1 else 1)


@dataclass(frozen=True, eq=False)
class CosetTable:
    """
    A complete coset table.

    tree[β] is the (α, column) edge by which coset β was first reached, so
    transversal[β] = transversal[α] + letter_of(column); tree[0] is None.
    """

    presentation: Presentation
    subgroup: str
    table: list[list[int]]
    transversal: tuple[Word, ...]
    tree: tuple[tuple[int, int] | None, ...]

    @property
    def index(self) -> int:
        return len(self.table)

    def act(self, coset: int, letter: int) -> int:
        return self.table[coset][column_of(letter)]

    def trace(self, coset: int, word: Iterable[int]) -> int:
        rows = self.table
        for x in word:
            coset = rows[coset][2 * (abs(x) - 1) + (x < 0)]
        return coset

    def verify(self) -> None:
        """Raise PresentationError unless the table is a consistent permutation action."""
        ncols = 2 * self.presentation.generator_count
        n = self.index
        for c in range(ncols):
            col = [row[c] for row in self.table]
            if any(not 0 <= v < n for v in col) or len(set(col)) != n:
                raise PresentationError(f"column {c} is not a permutation")
            for alpha, beta in enumerate(col):
                if self.table[beta][c ^ 1] != alpha:
                    raise PresentationError(f"column {c} and its inverse disagree at coset {alpha}")
        for r in self.presentation.relators:
            for alpha in range(n):
                if self.trace(alpha, r) != alpha:
                    raise PresentationError(f"relator {self.presentation.word_text(r)} moves coset {alpha}")
        if self.transversal[0]:
            raise PresentationError("transversal[0] must be the empty word")
        for beta, w in enumerate(self.transversal):
            if self.trace(0, w) != beta:
                raise PresentationError(f"transversal word for coset {beta} lands elsewhere")


@dataclass(frozen=True)
class Undetermined:
    """Enumeration stopped at a resource limit; nothing is known about the index."""

    reason: str
    cosets_defined: int = 0
    live_cosets: int = 0

    def __bool__(self) -> bool:
        return False


def _standardize(raw: list[list[int]], live: list[int], ncols: int,
                 column_order: Sequence[int]) -> tuple[list[list[int]], tuple[Word, ...], tuple]:
    """Renumber live cosets in BFS order from coset 0, recording the spanning tree."""
    new_of = {live[0]: 0}
    order = [live[0]]
    transversal = [Word()]
    tree: list = [None]
    i = 0
    while i < len(order):
        old = order[i]
        for c in column_order:
            tgt = raw[old][c]
            if tgt not in new_of:
                new_of[tgt] = len(order)
                order.append(tgt)
                transversal.append(Word._trusted(transversal[i] + (letter_of(c),)))
                tree.append((i, c))
        i += 1
    table = [[new_of[raw[old][c]] for c in range(ncols)] for old in order]
    return table, tuple(transversal), tuple(tree)


class _Enumerator:
    """HLT coset enumeration with a union-find coincidence queue."""

    def __init__(self, p: Presentation, max_cosets: int, max_deductions: int):
        self.ncols = 2 * p.generator_count
        self.max_cosets = max_cosets
        self.max_deductions = max_deductions
        self.table: list[list[int]] = [[-1] * self.ncols]
        self.parent: list[int] = [0]
        self.steps = 0
        self.relators = [[column_of(x) for x in r] for r in sorted(p.relators, key=len)]

    class Exhausted(Exception):
        pass

    def rep(self, k: int) -> int:
        p = self.parent
        root = k
        while p[root] != root:
            root = p[root]
        while p[k] != root:
            p[k], k = root, p[k]
        return root

    def define(self, alpha: int, c: int) -> None:
        if len(self.table) >= self.max_cosets:
            raise self.Exhausted(f"max_cosets={self.max_cosets} reached")
        self.steps += 1
        if self.steps > self.max_deductions:
            raise self.Exhausted(f"max_deductions={self.max_deductions} reached")
        beta = len(self.table)
        self.table.append([-1] * self.ncols)
        self.parent.append(beta)
        self.table[alpha][c] = beta
        self.table[beta][c ^ 1] = alpha

    def merge(self, k: int, lam: int, queue: list[int]) -> None:
        phi, psi = self.rep(k), self.rep(lam)
        if phi != psi:
            mu, nu = min(phi, psi), max(phi, psi)
            self.parent[nu] = mu
            queue.append(nu)

    def coincidence(self, alpha: int, beta: int) -> None:
        table = self.table
        queue: list[int] = []
        self.merge(alpha, beta, queue)
        i = 0
        while i < len(queue):
            gamma = queue[i]
            i += 1
            for c in range(self.ncols):
                delta = table[gamma][c]
                if delta < 0:
                    continue
                table[delta][c ^ 1] = -1
                mu, nu = self.rep(gamma), self.rep(delta)
                if table[mu][c] >= 0:
                    self.merge(nu, table[mu][c], queue)
                elif table[nu][c ^ 1] >= 0:
                    self.merge(mu, table[nu][c ^ 1], queue)
                else:
                    table[mu][c] = nu
                    table[nu][c ^ 1] = mu

    def scan_and_fill(self, alpha: int, word: list[int]) -> None:
        table = self.table
        f, b = alpha, alpha
        i, j = 0, len(word) - 1
        while True:
            while i <= j and table[f][word[i]] >= 0:
                f = table[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and table[b][word[j] ^ 1] >= 0:
                b = table[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                self.steps += 1
                table[f][word[i]] = b
                table[b][word[i] ^ 1] = f
                return
            self.define(f, word[i])

    def run(self, subgroup_words: list[list[int]]) -> None:
        for w in subgroup_words:
            self.scan_and_fill(0, w)
        alpha = 0
        while alpha < len(self.table):
            if self.parent[alpha] == alpha:
                for w in self.relators:
                    self.scan_and_fill(alpha, w)
                    if self.parent[alpha] != alpha:
                        break
                if self.parent[alpha] == alpha:
                    row = self.table[alpha]
                    for c in range(self.ncols):
                        if row[c] < 0:
                            self.define(alpha, c)
            alpha += 1


def todd_coxeter(p: Presentation, subgroup_generators: Iterable[Sequence[int]] = (),
                 max_cosets: int = DEFAULT_MAX_COSETS,
                 max_deductions: int = DEFAULT_MAX_DEDUCTIONS) -> CosetTable | Undetermined:
    """
    Enumerate the cosets of ⟨subgroup_generators⟩ in p.

    Returns a complete, standardized CosetTable, or Undetermined when a
    limit is hit (which says nothing about finiteness either way).
    """
    if max_cosets < 1 or max_deductions < 1:
        raise ValueError("coset enumeration limits must be positive")
    sub = [Word(w) for w in subgroup_generators]
    _check_alphabet(sub, p.generator_count)
    e = _Enumerator(p, max_cosets, max_deductions)
    try:
        e.run([[column_of(x) for x in w] for w in sub if w])
    except _Enumerator.Exhausted as exc:
        live = sum(1 for k, v in enumerate(e.parent) if k == v)
        log.info(f"coset enumeration undetermined: {exc} ({len(e.table)} defined, {live} live)")
        return Undetermined(str(exc), len(e.table), live)

    live = [k for k, v in enumerate(e.parent) if k == v]
    table, transversal, tree = _standardize(e.table, live, e.ncols, range(e.ncols))
    desc = "trivial" if not any(sub) else "<" + ", ".join(p.word_text(w) or "1" for w in sub) + ">"
    log.info(f"coset enumeration complete: index {len(table)} ({len(e.table)} cosets defined)")
    return CosetTable(p, desc, table, transversal, tree)


# ── Coset tables from a finite quotient ──────────────────────────────────────

def _same(x):
    return x


@dataclass(frozen=True, eq=False)
class FiniteQuotient:
    """
    A word evaluator into a finite group, plus a subgroup of that group.

    images[i] is the image of generator i+1.  coset_key maps a quotient
    element q to a canonical key of the coset S·q, where S is the subgroup
    whose preimage we index; the default key is q itself (S trivial).
    """

    identity: Hashable
    images: Sequence[Hashable]
    multiply: Callable[[Hashable, Hashable], Hashable]
    invert: Callable[[Hashable], Hashable]
    coset_key: Callable[[Hashable], Hashable] = _same
    subgroup: str = "trivial"

    def letter_image(self, letter: int):
        x = self.images[abs(letter) - 1]
        return x if letter > 0 else self.invert(x)

    def evaluate(self, word: Iterable[int]):
        q = self.identity
        for x in word:
            q = self.multiply(q, self.letter_image(x))
        return q


def coset_table_from_quotient(p: Presentation, quotient: FiniteQuotient,
                              max_cosets: int = DEFAULT_MAX_COSETS,
                              seed: int | None = None) -> CosetTable:
    """
    Coset table of the preimage of a subgroup of a finite quotient.

    Cosets are found by BFS on quotient values; seed shuffles the column
    order, which changes the transversal but never the index.
    """
    if len(quotient.images) != p.generator_count:
        raise QuotientError(f"need {p.generator_count} generator images, got {len(quotient.images)}")
    for r in p.relators:
        if quotient.evaluate(r) != quotient.identity:
            raise QuotientError(f"evaluator does not kill relator {p.word_text(r)}")

    ncols = 2 * p.generator_count
    col_images = [quotient.letter_image(letter_of(c)) for c in range(ncols)]
    order = list(range(ncols))
    if seed is not None:
        random.Random(seed).shuffle(order)

    states = [quotient.identity]
    keys = {quotient.coset_key(quotient.identity): 0}
    table = [[-1] * ncols]
    transversal = [Word()]
    tree: list = [None]
    i = 0
    while i < len(states):
        s = states[i]
        row = table[i]
        for c in order:
            if row[c] >= 0:
                continue
            t = quotient.multiply(s, col_images[c])
            k = quotient.coset_key(t)
            j = keys.get(k)
            if j is None:
                j = len(states)
                if j >= max_cosets:
                    raise BudgetError(f"more than max_cosets={max_cosets} cosets")
                keys[k] = j
                states.append(t)
                table.append([-1] * ncols)
                transversal.append(Word._trusted(transversal[i] + (letter_of(c),)))
                tree.append((i, c))
            row[c] = j
            back = table[j][c ^ 1]
            if back not in (-1, i):
                raise QuotientError("coset_key is not constant on subgroup cosets")
            table[j][c ^ 1] = i
        i += 1
    log.info(f"coset table from quotient: {len(states)} cosets, {p.generator_count} generators")
    return CosetTable(p, quotient.subgroup, table, tuple(transversal), tuple(tree))


# ── Reidemeister–Schreier ─────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SchreierPresentation:
    """
    Presentation of a subgroup on its Schreier generators.

    edges[(α, i)] is the Schreier generator number for the non-tree edge
    α --gen i--> β; tree edges are absent (they rewrite to nothing).
    """

    table: CosetTable
    presentation: Presentation
    edges: dict[tuple[int, int], int]

    def rewrite(self, word: Iterable[int], start: int = 0) -> Word:
        """Rewrite a word that fixes coset `start` over the Schreier generators."""
        rows = self.table.table
        edges = self.edges
        out: list[int] = []
        a = start
        for x in word:
            if x > 0:
                s = edges.get((a, x - 1))
                if s:
                    out.append(s)
                a = rows[a][2 * x - 2]
            else:
                b = rows[a][-2 * x - 1]
                s = edges.get((b, -x - 1))
                if s:
                    out.append(-s)
                a = b
        if a != start:
            raise WordError(f"word does not lie in the subgroup (ends at coset {a}, not {start})")
        return Word(out)

    @cached_property
    def generator_edges(self) -> list[tuple[int, int]]:
        out = [(0, 0)] * len(self.edges)
        for edge, s in self.edges.items():
            out[s - 1] = edge
        return out

    def schreier_word(self, s: int) -> Word:
        """Ambient word transversal[α]·x·transversal[β]⁻¹ of Schreier generator s."""
        alpha, i = self.generator_edges[s - 1]
        beta = self.table.table[alpha][2 * i]
        tv = self.table.transversal
        return word_multiply(tv[alpha], Word([i + 1]), word_invert(tv[beta]))


def dedupe_relators(words: Iterable[Sequence[int]]) -> list[Word]:
    """Cyclically reduced, non-empty, one per canonical form, in first-seen order."""
    seen: set[Word] = set()
    out = []
    for w in words:
        w = cyclic_reduce(w)
        if not w:
            continue
        c = canonical_relator(w)
        if c not in seen:
            seen.add(c)
            out.append(w)
    return out


def reidemeister_schreier(table: CosetTable) -> SchreierPresentation:
    p = table.presentation
    n = table.index
    for row in table.table:
        if any(v < 0 for v in row):
            raise PresentationError("coset table is incomplete")

    tree_edges: set[tuple[int, int]] = set()
    for beta, edge in enumerate(table.tree):
        if edge is not None:
            alpha, c = edge
            tree_edges.add((alpha, c))
            tree_edges.add((beta, c ^ 1))

    edges: dict[tuple[int, int], int] = {}
    names: list[str] = []
    for alpha in range(n):
        for i in range(p.generator_count):
            if (alpha, 2 * i) not in tree_edges:
                names.append(f"{p.generators[i]}.{alpha}")
                edges[(alpha, i)] = len(names)

    shell = SchreierPresentation(table, Presentation(tuple(names), ()), edges)
    raw = (shell.rewrite(r, alpha) for alpha in range(n) for r in p.relators)
    relators = dedupe_relators(raw)
    log.info(f"Reidemeister–Schreier: index {n}, {len(names)} generators, {len(relators)} relators")
    return SchreierPresentation(table, Presentation(tuple(names), tuple(relators)), edges)


# ── Tietze simplification ─────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TietzeResult:
    """
    A simplified presentation and the record needed to map old words into it.

    kept[k] is the old generator number behind new generator k+1;
    eliminated lists (old generator, defining word in old generators) in
    elimination order.
    """

    presentation: Presentation
    source: Presentation
    kept: tuple[int, ...]
    eliminated: tuple[tuple[int, Word], ...]

    @cached_property
    def _expansions(self) -> dict[int, Word]:
        exp = {old: Word([k + 1]) for k, old in enumerate(self.kept)}
        for old, definition in reversed(self.eliminated):
            letters: list[int] = []
            for x in definition:
                e = exp[abs(x)]
                letters.extend(e if x > 0 else word_invert(e))
            exp[old] = Word(letters)
        return exp

    def map_word(self, word: Iterable[int]) -> Word:
        exp = self._expansions
        letters: list[int] = []
        for x in word:
            e = exp[abs(x)]
            letters.extend(e if x > 0 else word_invert(e))
        return Word(letters)


class _Tietze:
    def __init__(self, p: Presentation):
        self.rels: dict[int, tuple[Word, Word]] = {}
        self.canon: dict[Word, int] = {}
        self.occ: dict[int, set[int]] = {g: set() for g in range(1, p.generator_count + 1)}
        self.alive = set(self.occ)
        self.eliminated: list[tuple[int, Word]] = []
        self.queue: list[tuple[int, int]] = []
        self._next = 0
        for r in p.relators:
            self.add(r)

    def add(self, w: Sequence[int]) -> None:
        w = cyclic_reduce(w)
        if not w:
            return
        c = canonical_relator(w)
        if c in self.canon:
            return
        rid = self._next
        self._next += 1
        self.rels[rid] = (w, c)
        self.canon[c] = rid
        heapq.heappush(self.queue, (len(w), rid))
        for g in {abs(x) for x in w}:
            self.occ[g].add(rid)

    def remove(self, rid: int) -> Word:
        w, c = self.rels.pop(rid)
        del self.canon[c]
        for g in {abs(x) for x in w}:
            self.occ[g].discard(rid)
        return w

    def eliminate(self, rid: int, x: int) -> None:
        """Solve relator rid for generator x (occurring once) and substitute everywhere."""
        w = self.remove(rid)
        pos = next(i for i, y in enumerate(w) if abs(y) == x)
        rot = w[pos:] + w[:pos]
        rest = Word(rot[1:])
        definition = word_invert(rest) if rot[0] > 0 else rest
        inv_def = word_invert(definition)
        for other in sorted(self.occ[x]):
            old = self.remove(other)
            new: list[int] = []
            for y in old:
                if y == x:
                    new.extend(definition)
                elif y == -x:
                    new.extend(inv_def)
                else:
                    new.append(y)
            self.add(new)
        del self.occ[x]
        self.alive.discard(x)
        self.eliminated.append((x, definition))

    def _candidate(self, rid: int, max_relator_length: int) -> int | None:
        w, _ = self.rels[rid]
        counts = Counter(abs(y) for y in w)
        best = None
        for x, k in counts.items():
            if k != 1:
                continue
            growth = len(w) - 2
            if growth > 0 and any(
                    len(self.rels[o][0]) + growth * sum(1 for y in self.rels[o][0] if abs(y) == x)
                    > max_relator_length
                    for o in self.occ[x] if o != rid):
                continue
            key = (len(self.occ[x]), -x)
            if best is None or key < best[0]:
                best = (key, x)
        return best[1] if best else None

    def run(self, max_substitution_length: int, max_relator_length: int) -> bool:
        """Eliminate through queued relators, shortest first; True if anything changed."""
        changed = False
        while self.queue:
            length, rid = heapq.heappop(self.queue)
            if rid not in self.rels:
                continue
            if length - 1 > max_substitution_length:
                self.queue.clear()
                break
            x = self._candidate(rid, max_relator_length)
            if x is not None:
                self.eliminate(rid, x)
                changed = True
        return changed



def tietze_reduce(p: Presentation, max_substitution_length: int = DEFAULT_MAX_SUBSTITUTION,
                  max_relator_length: int = DEFAULT_MAX_RELATOR_LENGTH) -> TietzeResult:
    """
    Simplify by Tietze moves.

    Relators are cyclically reduced and deduplicated up to rotation and
    inversion.  A generator occurring exactly once in a relator is solved
    for and substituted away, shortest relators first; substitutions longer
    than max_substitution_length or producing relators longer than
    max_relator_length are skipped.
    """
    tz = _Tietze(p)
    while tz.run(max_substitution_length, max_relator_length):
        tz.queue = [(len(w), rid) for rid, (w, _) in tz.rels.items()]
        heapq.heapify(tz.queue)

    kept = tuple(sorted(tz.alive))
    new_of = {old: k + 1 for k, old in enumerate(kept)}
    rels = sorted((w for w, _ in tz.rels.values()), key=lambda w: (len(w), canonical_relator(w)))
    renumbered = tuple(Word._trusted(new_of[abs(x)] * (1 if x > 0 else -1) for x in w) for w in rels)
    simplified = Presentation(tuple(p.generators[old - 1] for old in kept), renumbered, p.metadata)
    log.info(f"simplify: {p.generator_count} generators / {len(p.relators)} relators → "
             f"{simplified.generator_count} / {len(simplified.relators)}")
    return TietzeResult(simplified, p, kept, tuple(tz.eliminated))


def simplify(p: Presentation, max_substitution_length: int = DEFAULT_MAX_SUBSTITUTION,
             max_relator_length: int = DEFAULT_MAX_RELATOR_LENGTH) -> Presentation:
    return tietze_reduce(p, max_substitution_length, max_relator_length).presentation
