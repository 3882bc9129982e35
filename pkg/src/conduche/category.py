"""Small categories with an explicit table backend and graded lazy backends.

Composition is written right to left: ``compose(a, b)`` is the morphism
"b then a" and needs ``source(a) == target(b)``.
"""

from __future__ import annotations

import itertools
import logging
import random
import threading
from abc import ABC, abstractmethod
from collections.abc import Hashable, Iterable, Mapping, Sequence
from typing import Any

import networkx as nx

from conduche.exceptions import (
    ConducheException,
    NotACospan,
    NotAGroup,
    NotAPoset,
    NotComposable,
    UnknownMorphism,
    UnknownObject,
)
from conduche.report import Check, ValidationReport
from conduche.settings import DEFAULT_BUDGET, DEFAULT_SEED, SEARCH_LEVEL

logger = logging.getLogger("conduche")

Obj = Hashable
Morphism = Hashable


class Category(ABC):
    """A small category.

    Explicit backends are finite and put every morphism at level 0. Graded
    backends assign each morphism a natural-number level and can list the
    finitely many morphisms of bounded level into any object.
    """

    is_finite: bool = False

    def __init__(self, name: str = ""):
        self.name = name or type(self).__name__
        self._cache: dict[Hashable, Any] = {}
        self._lock = threading.Lock()

    def _cached(self, key: Hashable, compute: Any) -> Any:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = compute()
        with self._lock:
            return self._cache.setdefault(key, value)

    # -- structure -------------------------------------------------------

    @property
    @abstractmethod
    def objects(self) -> list[Obj]: ...

    @abstractmethod
    def source(self, m: Morphism) -> Obj: ...

    @abstractmethod
    def target(self, m: Morphism) -> Obj: ...

    @abstractmethod
    def identity(self, x: Obj) -> Morphism: ...

    @abstractmethod
    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        """Return ab, the composite of b followed by a.

        Raises:
            NotComposable: If source(a) != target(b)
            UnknownMorphism: If either id is not a morphism
        """

    @abstractmethod
    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        """Morphisms with target x and level at most max_level, in sort order."""

    def level(self, m: Morphism) -> int:
        return 0

    @property
    def completion_search_complete(self) -> bool:
        """Whether failing to find a completion with the search is conclusive."""
        return self.is_finite

    # -- derived helpers -------------------------------------------------

    def is_identity(self, m: Morphism) -> bool:
        return self.identity(self.target(m)) == m

    def has_object(self, x: Obj) -> bool:
        return x in self.objects

    def check_object(self, x: Obj) -> None:
        if not self.has_object(x):
            raise UnknownObject(f"{x!r} is not an object of {self.name}")

    def try_compose(self, a: Morphism, b: Morphism) -> Morphism | None:
        try:
            return self.compose(a, b)
        except ConducheException:
            return None

    def format(self, m: Morphism) -> str:
        return str(m)

    def format_object(self, x: Obj) -> str:
        return str(x)

    def parse(self, text: str) -> Morphism:
        """Look up a morphism by its formatted id.

        Raises:
            UnknownMorphism: If nothing up to the search level formats as text
        """
        text = text.strip()
        for m in self.morphisms(0 if self.is_finite else SEARCH_LEVEL):
            if self.format(m) == text:
                return m
        raise UnknownMorphism(f"{text!r} is not a morphism of {self.name}")

    def parse_object(self, text: str) -> Obj:
        text = text.strip()
        for x in self.objects:
            if self.format_object(x) == text:
                return x
        raise UnknownObject(f"{text!r} is not an object of {self.name}")

    def sort_key(self, m: Morphism) -> tuple[int, bool, str]:
        return (self.level(m), not self.is_identity(m), self.format(m))

    def morphisms(self, max_level: int = 0) -> list[Morphism]:
        found: list[Morphism] = []
        for x in self.objects:
            found.extend(self.morphisms_into(x, max_level))
        return sorted(found, key=self.sort_key)

    def morphisms_from(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        return [m for m in self.morphisms(max_level) if self.source(m) == x]

    def factorizations(self, m: Morphism) -> list[tuple[Morphism, Morphism]]:
        """All pairs (a, b) with ab = m.

        Graded backends only search factors whose level is at most level(m).
        """

        def compute() -> list[tuple[Morphism, Morphism]]:
            bound = self.level(m)
            found: list[tuple[Morphism, Morphism]] = []
            for a in self.morphisms_into(self.target(m), bound):
                for b in self.morphisms_into(self.source(a), bound):
                    if self.source(b) == self.source(m) and self.try_compose(a, b) == m:
                        found.append((a, b))
            return found

        return self._cached(("factorizations", m), compute)

    def solve_left(self, m: Morphism, product: Morphism) -> list[Morphism]:
        """All a with compose(m, a) == product."""
        if self.target(m) != self.target(product):
            return []
        bound = self.level(product)
        return [
            a
            for a in self.morphisms_into(self.source(m), bound)
            if self.source(a) == self.source(product) and self.try_compose(m, a) == product
        ]

    def completions(
        self, m: Morphism, n: Morphism, max_level: int = 0, budget: int = DEFAULT_BUDGET
    ) -> list[tuple[Morphism, Morphism]]:
        """Every commuting square (p, q) with mp = nq, p and q of level <= max_level."""
        if self.target(m) != self.target(n):
            raise NotACospan(
                f"{self.format(m)} and {self.format(n)} do not share a target"
            )
        found: list[tuple[Morphism, Morphism]] = []
        tried = 0
        for p in self.morphisms_into(self.source(m), max_level):
            for q in self.morphisms_into(self.source(n), max_level):
                if self.source(p) != self.source(q):
                    continue
                tried += 1
                if tried > budget:
                    logger.warning(
                        f"Completion enumeration for ({self.format(m)}, {self.format(n)}) hit budget {budget}"
                    )
                    return found
                mp = self.try_compose(m, p)
                if mp is not None and mp == self.try_compose(n, q):
                    found.append((p, q))
        return found

    def canonical_completion(
        self, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
    ) -> tuple[Morphism, Morphism] | None:
        """The deterministic commuting square used everywhere a completion is needed.

        The generic rule is the first square in enumeration order, searched
        level by level on graded backends.

        Returns:
            (p, q) with mp = nq, or None if the bounded search finds nothing
        """
        if self.target(m) != self.target(n):
            raise NotACospan(
                f"{self.format(m)} and {self.format(n)} do not share a target"
            )
        limit = 0 if self.is_finite else SEARCH_LEVEL
        tried = 0
        for level in range(limit + 1):
            for p in self.morphisms_into(self.source(m), level):
                for q in self.morphisms_into(self.source(n), level):
                    if not self.is_finite and max(self.level(p), self.level(q)) != level:
                        continue
                    if self.source(p) != self.source(q):
                        continue
                    tried += 1
                    if tried > budget:
                        logger.warning(
                            f"No completion of ({self.format(m)}, {self.format(n)}) within budget {budget}"
                        )
                        return None
                    mp = self.try_compose(m, p)
                    if mp is not None and mp == self.try_compose(n, q):
                        return p, q
        return None

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class ExplicitCategory(Category):
    """A finite category given by a composition table.

    Composites with an identity on either side are filled in unless the
    table already records them.
    """

    is_finite = True

    def __init__(
        self,
        objects: Sequence[str],
        morphisms: Mapping[str, tuple[str, str]],
        composition: Mapping[tuple[str, str], str],
        identities: Mapping[str, str],
        name: str = "",
    ):
        super().__init__(name)
        self._objects = list(objects)
        self._ends = dict(morphisms)
        self._identities = dict(identities)
        for m, (src, tgt) in self._ends.items():
            for x in (src, tgt):
                if x not in self._objects:
                    raise UnknownObject(f"Morphism {m!r} refers to unknown object {x!r}")
        for x in self._objects:
            if x not in self._identities:
                raise UnknownMorphism(f"Object {x!r} has no identity")
            ident = self._identities[x]
            if self._ends.get(ident) != (x, x):
                raise UnknownMorphism(f"Identity {ident!r} of {x!r} must be a loop at {x!r}")
        self._table: dict[tuple[str, str], str] = dict(composition)
        for m, (src, tgt) in self._ends.items():
            self._table.setdefault((self._identities[tgt], m), m)
            self._table.setdefault((m, self._identities[src]), m)
        self._identity_ids = set(self._identities.values())

    @property
    def objects(self) -> list[Obj]:
        return list(self._objects)

    @property
    def table(self) -> dict[tuple[str, str], str]:
        return dict(self._table)

    def _ends_of(self, m: Morphism) -> tuple[str, str]:
        try:
            return self._ends[m]  # type: ignore[index]
        except (KeyError, TypeError):
            raise UnknownMorphism(f"{m!r} is not a morphism of {self.name}") from None

    def source(self, m: Morphism) -> Obj:
        return self._ends_of(m)[0]

    def target(self, m: Morphism) -> Obj:
        return self._ends_of(m)[1]

    def identity(self, x: Obj) -> Morphism:
        try:
            return self._identities[x]  # type: ignore[index]
        except (KeyError, TypeError):
            raise UnknownObject(f"{x!r} is not an object of {self.name}") from None

    def is_identity(self, m: Morphism) -> bool:
        return m in self._identity_ids

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        if self.source(a) != self.target(b):
            raise NotComposable(f"source of {a!r} is not the target of {b!r}")
        try:
            return self._table[(a, b)]  # type: ignore[index]
        except KeyError:
            raise NotComposable(f"no composite recorded for ({a!r}, {b!r})") from None

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        def compute() -> list[Morphism]:
            return sorted(
                (m for m, (_, tgt) in self._ends.items() if tgt == x), key=self.sort_key
            )

        return self._cached(("into", x), compute)

    def parse(self, text: str) -> Morphism:
        text = text.strip()
        if text not in self._ends:
            raise UnknownMorphism(f"{text!r} is not a morphism of {self.name}")
        return text

    def inverse(self, m: Morphism) -> Morphism | None:
        def compute() -> Morphism | None:
            src, tgt = self._ends_of(m)
            for n in self.morphisms_into(src):
                if (
                    self.source(n) == tgt
                    and self.try_compose(m, n) == self._identities[tgt]
                    and self.try_compose(n, m) == self._identities[src]
                ):
                    return n
            return None

        return self._cached(("inverse", m), compute)

    @property
    def is_groupoid(self) -> bool:
        return self._cached(
            "groupoid", lambda: all(self.inverse(m) is not None for m in self._ends)
        )

    def canonical_completion(
        self, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
    ) -> tuple[Morphism, Morphism] | None:
        # groupoids complete (m, n) to (m⁻¹n, id)
        if self.target(m) != self.target(n):
            raise NotACospan(f"{m!r} and {n!r} do not share a target")
        if self.is_groupoid:
            m_inv = self.inverse(m)
            return self.compose(m_inv, n), self.identity(self.source(n))
        return super().canonical_completion(m, n, budget)

    @property
    def completion_search_complete(self) -> bool:
        return True


class GroupCategory(ExplicitCategory):
    """A group regarded as a one object category."""

    OBJECT = "*"

    def __init__(self, elements: Sequence[str], table: Sequence[Sequence[str]], name: str = ""):
        index = {g: i for i, g in enumerate(elements)}
        unit = _group_unit(elements, table, index)
        composition = {
            (g, h): table[index[g]][index[h]] for g in elements for h in elements
        }
        super().__init__(
            [self.OBJECT],
            {g: (self.OBJECT, self.OBJECT) for g in elements},
            composition,
            {self.OBJECT: unit},
            name=name,
        )
        self.elements = list(elements)
        self.unit = unit


def _group_unit(
    elements: Sequence[str], table: Sequence[Sequence[str]], index: Mapping[str, int]
) -> str:
    n = len(elements)
    if n == 0:
        raise NotAGroup("A group needs at least one element")
    if len(index) != n:
        raise NotAGroup("Group elements must be distinct")
    if len(table) != n or any(len(row) != n for row in table):
        raise NotAGroup(f"Multiplication table must be {n}x{n}")
    for row in table:
        for entry in row:
            if entry not in index:
                raise NotAGroup(f"Table entry {entry!r} is not an element")
    units = [
        e
        for e in elements
        if all(table[index[e]][index[g]] == g and table[index[g]][index[e]] == g for g in elements)
    ]
    if not units:
        raise NotAGroup("No identity element")
    unit = units[0]
    for g, h, k in itertools.product(elements, repeat=3):
        gh = table[index[g]][index[h]]
        hk = table[index[h]][index[k]]
        if table[index[gh]][index[k]] != table[index[g]][index[hk]]:
            raise NotAGroup(
                f"Associativity fails on ({g}, {h}, {k})", {"triple": [g, h, k]}
            )
    for g in elements:
        if not any(table[index[g]][index[h]] == unit for h in elements):
            raise NotAGroup(f"Element {g!r} has no inverse", {"element": g})
    return unit


class PosetCategory(ExplicitCategory):
    """The category of a finite poset; the morphism "p<=q" goes from p to q."""

    def __init__(self, elements: Sequence[str], leq: Iterable[tuple[str, str]], name: str = ""):
        pairs = set(leq)
        morphisms = {self.arrow(p, q): (p, q) for p, q in pairs}
        composition = {
            (self.arrow(q, r), self.arrow(p, q2)): self.arrow(p, r)
            for (q, r) in pairs
            for (p, q2) in pairs
            if q2 == q
        }
        super().__init__(
            list(elements),
            morphisms,
            composition,
            {x: self.arrow(x, x) for x in elements},
            name=name,
        )
        self.elements = list(elements)
        self.leq = pairs

    @staticmethod
    def arrow(p: str, q: str) -> str:
        return f"{p}<={q}"

    def le(self, p: str, q: str) -> bool:
        return (p, q) in self.leq

    def meet(self, p: str, q: str) -> str | None:
        """The greatest lower bound of p and q when it exists."""
        lower = [t for t in self.elements if self.le(t, p) and self.le(t, q)]
        greatest = [t for t in lower if all(self.le(s, t) for s in lower)]
        return greatest[0] if greatest else None

    def canonical_completion(
        self, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
    ) -> tuple[Morphism, Morphism] | None:
        if self.target(m) != self.target(n):
            raise NotACospan(f"{m!r} and {n!r} do not share a target")
        p, q = self.source(m), self.source(n)
        t = self.meet(p, q)  # type: ignore[arg-type]
        if t is None:
            lower = [s for s in self.elements if self.le(s, p) and self.le(s, q)]  # type: ignore[arg-type]
            if not lower:
                return None
            t = lower[0]
        return self.arrow(t, p), self.arrow(t, q)  # type: ignore[arg-type]


class NkMonoid(Category):
    """The additive monoid ℕᵏ as a one object graded category.

    Morphisms are k-tuples of naturals and the level is the largest entry.
    """

    OBJECT = "*"

    def __init__(self, k: int, name: str = ""):
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        super().__init__(name or f"N^{k}")
        self.k = k

    @property
    def objects(self) -> list[Obj]:
        return [self.OBJECT]

    @property
    def completion_search_complete(self) -> bool:
        return True

    def _check(self, m: Morphism) -> tuple[int, ...]:
        if (
            not isinstance(m, tuple)
            or len(m) != self.k  # type: ignore[arg-type]
            or not all(isinstance(v, int) and v >= 0 for v in m)  # type: ignore[union-attr]
        ):
            raise UnknownMorphism(f"{m!r} is not a morphism of {self.name}")
        return m  # type: ignore[return-value]

    def source(self, m: Morphism) -> Obj:
        self._check(m)
        return self.OBJECT

    def target(self, m: Morphism) -> Obj:
        self._check(m)
        return self.OBJECT

    def identity(self, x: Obj) -> Morphism:
        self.check_object(x)
        return (0,) * self.k

    def is_identity(self, m: Morphism) -> bool:
        return not any(self._check(m))

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        return tuple(x + y for x, y in zip(self._check(a), self._check(b)))

    def level(self, m: Morphism) -> int:
        return max(self._check(m))

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        self.check_object(x)
        return self._cached(
            ("into", max_level),
            lambda: sorted(
                itertools.product(range(max_level + 1), repeat=self.k), key=self.sort_key
            ),
        )

    def format(self, m: Morphism) -> str:
        values = self._check(m)
        if self.k == 1:
            return str(values[0])
        return "(" + ",".join(str(v) for v in values) + ")"

    def parse(self, text: str) -> Morphism:
        body = text.strip().removeprefix("(").removesuffix(")")
        try:
            values = tuple(int(part) for part in body.split(","))
        except ValueError:
            raise UnknownMorphism(f"{text!r} is not a morphism of {self.name}") from None
        return self._check(values)

    def join(self, m: Morphism, n: Morphism) -> tuple[int, ...]:
        return tuple(max(x, y) for x, y in zip(self._check(m), self._check(n)))

    def subtract(self, m: Morphism, n: Morphism) -> tuple[int, ...] | None:
        """m - n when it is a natural vector."""
        diff = tuple(x - y for x, y in zip(self._check(m), self._check(n)))
        return diff if all(v >= 0 for v in diff) else None

    def factorizations(self, m: Morphism) -> list[tuple[Morphism, Morphism]]:
        values = self._check(m)
        parts = sorted(
            itertools.product(*(range(v + 1) for v in values)), key=self.sort_key
        )
        return [(p, tuple(v - x for v, x in zip(values, p))) for p in parts]

    def solve_left(self, m: Morphism, product: Morphism) -> list[Morphism]:
        diff = self.subtract(product, m)
        return [] if diff is None else [diff]

    def canonical_completion(
        self, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
    ) -> tuple[Morphism, Morphism] | None:
        # (m ∨ n) - m, (m ∨ n) - n
        j = self.join(m, n)
        return tuple(a - b for a, b in zip(j, m)), tuple(a - b for a, b in zip(j, n))  # type: ignore[arg-type]


class ProductCategory(Category):
    """Componentwise product; the level of a tuple is the largest component level."""

    def __init__(self, factors: Sequence[Category], name: str = ""):
        if not factors:
            raise ValueError("A product needs at least one factor")
        super().__init__(name or " x ".join(f.name for f in factors))
        self.factors = list(factors)
        self.is_finite = all(f.is_finite for f in factors)

    @property
    def completion_search_complete(self) -> bool:
        return all(f.completion_search_complete for f in self.factors)

    def _split(self, m: Morphism) -> tuple[Morphism, ...]:
        if not isinstance(m, tuple) or len(m) != len(self.factors):  # type: ignore[arg-type]
            raise UnknownMorphism(f"{m!r} is not a morphism of {self.name}")
        return m  # type: ignore[return-value]

    @property
    def objects(self) -> list[Obj]:
        return list(itertools.product(*(f.objects for f in self.factors)))

    def source(self, m: Morphism) -> Obj:
        return tuple(f.source(c) for f, c in zip(self.factors, self._split(m)))

    def target(self, m: Morphism) -> Obj:
        return tuple(f.target(c) for f, c in zip(self.factors, self._split(m)))

    def identity(self, x: Obj) -> Morphism:
        if not isinstance(x, tuple) or len(x) != len(self.factors):  # type: ignore[arg-type]
            raise UnknownObject(f"{x!r} is not an object of {self.name}")
        return tuple(f.identity(c) for f, c in zip(self.factors, x))  # type: ignore[arg-type]

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        return tuple(
            f.compose(x, y) for f, x, y in zip(self.factors, self._split(a), self._split(b))
        )

    def level(self, m: Morphism) -> int:
        return max(f.level(c) for f, c in zip(self.factors, self._split(m)))

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        def compute() -> list[Morphism]:
            parts = [
                f.morphisms_into(c, max_level) for f, c in zip(self.factors, x)  # type: ignore[arg-type]
            ]
            return sorted(itertools.product(*parts), key=self.sort_key)

        return self._cached(("into", x, max_level), compute)

    def format(self, m: Morphism) -> str:
        return "<" + "|".join(f.format(c) for f, c in zip(self.factors, self._split(m))) + ">"

    def format_object(self, x: Obj) -> str:
        return "<" + "|".join(f.format_object(c) for f, c in zip(self.factors, x)) + ">"  # type: ignore[arg-type]

    def parse(self, text: str) -> Morphism:
        body = text.strip().removeprefix("<").removesuffix(">")
        parts = body.split("|")
        if len(parts) != len(self.factors):
            raise UnknownMorphism(f"{text!r} is not a morphism of {self.name}")
        return tuple(f.parse(p) for f, p in zip(self.factors, parts))

    def parse_object(self, text: str) -> Obj:
        body = text.strip().removeprefix("<").removesuffix(">")
        parts = body.split("|")
        if len(parts) != len(self.factors):
            raise UnknownObject(f"{text!r} is not an object of {self.name}")
        return tuple(f.parse_object(p) for f, p in zip(self.factors, parts))

    def factorizations(self, m: Morphism) -> list[tuple[Morphism, Morphism]]:
        per_factor = [f.factorizations(c) for f, c in zip(self.factors, self._split(m))]
        pairs = [
            (tuple(a for a, _ in combo), tuple(b for _, b in combo))
            for combo in itertools.product(*per_factor)
        ]
        return sorted(pairs, key=lambda ab: self.sort_key(ab[0]))

    def canonical_completion(
        self, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
    ) -> tuple[Morphism, Morphism] | None:
        ps: list[Morphism] = []
        qs: list[Morphism] = []
        for f, x, y in zip(self.factors, self._split(m), self._split(n)):
            square = f.canonical_completion(x, y, budget)
            if square is None:
                return None
            ps.append(square[0])
            qs.append(square[1])
        return tuple(ps), tuple(qs)


class SliceCategory(Category):
    """The slice C/X.

    Objects are morphisms of C with target X. The morphism (α, γ) has
    range α and source αγ, and (α, γ)(αγ, δ) = (α, γδ). On graded
    categories `objects` lists slice objects up to `depth`.
    """

    def __init__(self, base: Category, x: Obj, depth: int = 3):
        base.check_object(x)
        super().__init__(f"{base.name}/{base.format_object(x)}")
        self.base = base
        self.apex = x
        self.depth = depth
        self.is_finite = base.is_finite

    @property
    def objects(self) -> list[Obj]:
        return list(self.base.morphisms_into(self.apex, self.depth))

    def has_object(self, x: Obj) -> bool:
        try:
            return self.base.target(x) == self.apex
        except ConducheException:
            return False

    def _pair(self, m: Morphism) -> tuple[Morphism, Morphism]:
        if not isinstance(m, tuple) or len(m) != 2:  # type: ignore[arg-type]
            raise UnknownMorphism(f"{m!r} is not a morphism of {self.name}")
        alpha, gamma = m  # type: ignore[misc]
        if self.base.target(alpha) != self.apex or self.base.source(alpha) != self.base.target(gamma):
            raise UnknownMorphism(f"{m!r} is not a morphism of {self.name}")
        return alpha, gamma

    def source(self, m: Morphism) -> Obj:
        alpha, gamma = self._pair(m)
        return self.base.compose(alpha, gamma)

    def target(self, m: Morphism) -> Obj:
        return self._pair(m)[0]

    def identity(self, x: Obj) -> Morphism:
        if not self.has_object(x):
            raise UnknownObject(f"{x!r} is not an object of {self.name}")
        return (x, self.base.identity(self.base.source(x)))

    def is_identity(self, m: Morphism) -> bool:
        return self.base.is_identity(self._pair(m)[1])

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        alpha, gamma = self._pair(a)
        beta, delta = self._pair(b)
        if self.base.compose(alpha, gamma) != beta:
            raise NotComposable(f"{self.format(a)} and {self.format(b)} are not composable")
        return (alpha, self.base.compose(gamma, delta))

    def level(self, m: Morphism) -> int:
        return self.base.level(self._pair(m)[1])

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        if not self.has_object(x):
            raise UnknownObject(f"{x!r} is not an object of {self.name}")
        return sorted(
            ((x, g) for g in self.base.morphisms_into(self.base.source(x), max_level)),
            key=self.sort_key,
        )

    def format(self, m: Morphism) -> str:
        alpha, gamma = self._pair(m)
        return f"({self.base.format(alpha)}, {self.base.format(gamma)})"

    def format_object(self, x: Obj) -> str:
        return self.base.format(x)

    @staticmethod
    def first(m: Morphism) -> Morphism:
        """π₁(α, γ) = α."""
        return m[0]  # type: ignore[index]

    @staticmethod
    def second(m: Morphism) -> Morphism:
        """π₂(α, γ) = γ."""
        return m[1]  # type: ignore[index]


# -- operations ------------------------------------------------------------


def compose(cat: Category, a: Morphism, b: Morphism) -> Morphism:
    return cat.compose(a, b)


def slice(cat: Category, x: Obj, depth: int = 3) -> SliceCategory:  # noqa: A001
    return SliceCategory(cat, x, depth)


def product(cats: Sequence[Category], name: str = "") -> ProductCategory:
    return ProductCategory(cats, name)


def validate_category(
    cat: Category,
    depth: int = 3,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> ValidationReport:
    """Check the category axioms.

    Explicit categories are checked exhaustively; graded ones on every
    morphism of level at most `depth`. Associativity samples `budget`
    triples with a seeded generator when there are more than that.

    Args:
        cat: The category to check
        depth: Level bound for graded backends
        budget: Maximum number of associativity triples
        seed: Seed for triple sampling

    Returns:
        A report with objects, composability, identity and associativity checks
    """
    report = ValidationReport(subject=cat.name)
    level_bound = 0 if cat.is_finite else depth
    check_depth = None if cat.is_finite else depth
    mors = cat.morphisms(level_bound)
    into: dict[Obj, list[Morphism]] = {x: [] for x in cat.objects}
    for m in mors:
        into.setdefault(cat.target(m), []).append(m)

    bad_identities = [
        cat.format_object(x)
        for x in cat.objects
        if cat.source(cat.identity(x)) != x or cat.target(cat.identity(x)) != x
    ]
    report.add(
        Check(
            "identities",
            not bad_identities,
            check_depth,
            detail="every object has an identity loop",
            payload={"bad_objects": bad_identities},
        )
    )

    pairs = [(a, b) for a in mors for b in into.get(cat.source(a), [])]
    closure_failure: dict[str, Any] | None = None
    composites: dict[tuple[Morphism, Morphism], Morphism] = {}
    for a, b in pairs:
        ab = cat.try_compose(a, b)
        if ab is None or cat.target(ab) != cat.target(a) or cat.source(ab) != cat.source(b):
            closure_failure = {"pair": [cat.format(a), cat.format(b)]}
            break
        composites[(a, b)] = ab
    report.add(
        Check(
            "composability",
            closure_failure is None,
            check_depth,
            detail=f"{len(pairs)} composable pairs",
            payload=closure_failure or {},
        )
    )

    identity_failure: dict[str, Any] | None = None
    for a in mors:
        left = cat.try_compose(cat.identity(cat.target(a)), a)
        right = cat.try_compose(a, cat.identity(cat.source(a)))
        if left != a or right != a:
            identity_failure = {"morphism": cat.format(a)}
            break
    report.add(
        Check("identity_laws", identity_failure is None, check_depth, payload=identity_failure or {})
    )

    triples = [(a, b, c) for (a, b) in composites for c in into.get(cat.source(b), [])]
    exhaustive = len(triples) <= budget
    if not exhaustive:
        logger.warning(
            f"Sampling {budget} of {len(triples)} associativity triples in {cat.name}"
        )
        triples = random.Random(seed).sample(triples, budget)
    assoc_failure: dict[str, Any] | None = None
    for a, b, c in triples:
        ab = composites[(a, b)]
        bc = cat.try_compose(b, c)
        lhs = cat.try_compose(ab, c)
        rhs = None if bc is None else cat.try_compose(a, bc)
        if lhs is None or lhs != rhs:
            assoc_failure = {"triple": [cat.format(a), cat.format(b), cat.format(c)]}
            break
    report.add(
        Check(
            "associativity",
            assoc_failure is None,
            check_depth,
            exhaustive=exhaustive,
            detail=f"{len(triples)} triples",
            payload=assoc_failure or {},
        )
    )
    return report


def has_pullbacks(cat: Category) -> bool:
    """Whether every cospan of a finite category has a pullback."""
    if not cat.is_finite:
        raise ValueError(f"{cat.name} is not finite")
    mors = cat.morphisms()
    for m in mors:
        for n in mors:
            if cat.target(m) != cat.target(n):
                continue
            squares = cat.completions(m, n)
            if not any(_is_pullback(cat, square, squares) for square in squares):
                return False
    return True


def _is_pullback(
    cat: Category,
    square: tuple[Morphism, Morphism],
    squares: list[tuple[Morphism, Morphism]],
) -> bool:
    p, q = square
    for p2, q2 in squares:
        mediators = [
            u
            for u in cat.morphisms_into(cat.source(p))
            if cat.try_compose(p, u) == p2 and cat.try_compose(q, u) == q2
        ]
        if len(mediators) != 1:
            return False
    return True


# -- builders ---------------------------------------------------------------


def build_group_category(
    elements: Sequence[str], table: Sequence[Sequence[str]], name: str = ""
) -> GroupCategory:
    """Build the one object category of a group.

    Args:
        elements: Element names
        table: table[i][j] is elements[i] * elements[j]
        name: Display name

    Raises:
        NotAGroup: If closure, identity, associativity or inverses fail
    """
    cat = GroupCategory(elements, table, name or f"group of order {len(elements)}")
    logger.info(f"Built {cat.name} with {len(elements)} elements")
    return cat


def cyclic_group_table(n: int) -> tuple[list[str], list[list[str]]]:
    """Elements e, g, g2, ... of Z/n and their multiplication table."""

    def power(i: int) -> str:
        return "e" if i == 0 else "g" if i == 1 else f"g{i}"

    elements = [power(i) for i in range(n)]
    return elements, [[power((i + j) % n) for j in range(n)] for i in range(n)]


def symmetric_group_table(n: int) -> tuple[list[str], list[list[str]]]:
    """Permutations of 1..n in one-line notation; (στ)(i) = σ(τ(i))."""
    perms = list(itertools.permutations(range(1, n + 1)))
    names = ["".join(str(v) for v in p) for p in perms]
    lookup = {p: name for p, name in zip(perms, names)}
    table = [
        [lookup[tuple(s[t[i] - 1] for i in range(n))] for t in perms] for s in perms
    ]
    return names, table


def build_poset_category(
    elements: Sequence[str] | None, leq: Iterable[Sequence[str]], name: str = ""
) -> PosetCategory:
    """Build the category of a finite poset.

    The relation is closed under reflexivity and transitivity first; what
    remains must be antisymmetric.

    Raises:
        NotAPoset: If the relation has a cycle or mentions unknown elements
    """
    graph = nx.DiGraph()
    relation = [tuple(pair) for pair in leq]
    if elements is not None:
        graph.add_nodes_from(elements)
    for pair in relation:
        if len(pair) != 2:
            raise NotAPoset(f"Relation entry {list(pair)!r} is not a pair")
        p, q = pair
        if elements is not None and (p not in graph or q not in graph):
            raise NotAPoset(f"Relation {p}<={q} mentions an unknown element")
        if p != q:
            graph.add_edge(p, q)
        else:
            graph.add_node(p)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        raise NotAPoset(
            "Relation is not antisymmetric", {"cycle": [list(edge) for edge in cycle]}
        )
    closure = nx.transitive_closure_dag(graph)
    order = list(elements) if elements is not None else sorted(graph.nodes)
    pairs = {(x, x) for x in order} | {(p, q) for p, q in closure.edges}
    return PosetCategory(order, pairs, name or "poset")


def build_pair_groupoid(points: Sequence[str], name: str = "") -> ExplicitCategory:
    """The groupoid with exactly one morphism "x<-y" from y to x for every pair."""
    morphisms = {f"{x}<-{y}": (y, x) for x in points for y in points}
    composition = {
        (f"{x}<-{y}", f"{y}<-{z}"): f"{x}<-{z}" for x in points for y in points for z in points
    }
    return ExplicitCategory(
        list(points),
        morphisms,
        composition,
        {x: f"{x}<-{x}" for x in points},
        name=name or f"pair groupoid on {len(points)} points",
    )


def build_discrete_category(objects: Sequence[str], name: str = "") -> ExplicitCategory:
    ids = {x: f"1_{x}" for x in objects}
    return ExplicitCategory(
        list(objects),
        {m: (x, x) for x, m in ids.items()},
        {},
        ids,
        name=name or f"discrete on {len(objects)} objects",
    )


def build_trivial_category(name: str = "trivial") -> ExplicitCategory:
    return build_discrete_category(["*"], name=name)


def build_nk(k: int) -> NkMonoid:
    return NkMonoid(k)
