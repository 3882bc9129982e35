"""Germ basis arithmetic for the groupoid of a fibration.

Cells Z(μ, ν) are the primary objects: their inverses, inclusions,
intersections and products are computed symbolically. Germs at single
paths exist for finite path spaces and for testing.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

import sympy

from conduche import scalars
from conduche.category import Category, Morphism, NkMonoid, Obj
from conduche.exceptions import (
    NotASpan,
    NotComposable,
    OrbitBudgetExceeded,
    PathSpaceNotFinite,
)
from conduche.fibration import Fibration, lift_factorization, ore_match
from conduche.paths import (
    CylinderSet,
    PathOracle,
    canonical_splitting,
    enumerate_paths,
    ind,
    path_equal,
    res,
)
from conduche.report import Check, Inclusion, Verdict
from conduche.scalars import Scalar, ScalarLike
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH, SEARCH_LEVEL

logger = logging.getLogger("conduche")


@dataclass(frozen=True)
class GermBasisSet:
    """Z(μ, ν): germs [α, β, x] equal to [μ, ν, x]."""

    fibration: Fibration = field(compare=False, hash=False, repr=False)
    mu: Morphism
    nu: Morphism

    def __post_init__(self) -> None:
        E = self.fibration.domain
        if E.source(self.mu) != E.source(self.nu):
            raise NotASpan(f"{E.format(self.mu)} and {E.format(self.nu)} do not share a source")

    @classmethod
    def unit(cls, F: Fibration, x: Obj) -> GermBasisSet:
        ident = F.domain.identity(x)
        return cls(F, ident, ident)

    @property
    def inverse(self) -> GermBasisSet:
        return GermBasisSet(self.fibration, self.nu, self.mu)

    def format(self) -> str:
        E = self.fibration.domain
        return f"Z({E.format(self.mu)},{E.format(self.nu)})"

    def sort_key(self) -> tuple[Any, Any]:
        E = self.fibration.domain
        return (E.sort_key(self.mu), E.sort_key(self.nu))


def invert_basis(cell: GermBasisSet) -> GermBasisSet:
    return cell.inverse


def refine_cell(cell: GermBasisSet, a: Morphism, budget: int = DEFAULT_BUDGET) -> list[GermBasisSet]:
    """Z(μ, ν) as the disjoint union of Z(μγ, νγ) over F(γ) = a."""
    F = cell.fibration
    E = F.domain
    return [
        GermBasisSet(F, E.compose(cell.mu, g), E.compose(cell.nu, g))
        for g in F.fiber(E.source(cell.mu), a, budget)
    ]


def basis_inclusion(
    inner: GermBasisSet, outer: GermBasisSet, budget: int = DEFAULT_BUDGET
) -> Inclusion:
    """Decide Z(μ, ν) ⊂ Z(α, β) or disjointness.

    With a such that F(α)a = F(μ) and F(β)a = F(ν), the cell is inside
    when some γ over a has (αγ, βγ) = (μ, ν) and disjoint otherwise.
    """
    F = inner.fibration
    E, B = F.domain, F.codomain
    if E.target(inner.mu) != E.target(outer.mu) or E.target(inner.nu) != E.target(outer.nu):
        return Inclusion.DISJOINT
    candidates = [
        a
        for a in B.solve_left(F(outer.mu), F(inner.mu))
        if B.try_compose(F(outer.nu), a) == F(inner.nu)
    ]
    if not candidates:
        return Inclusion.UNKNOWN
    for a in candidates:
        for g in F.fiber(E.source(outer.mu), a, budget):
            if E.compose(outer.mu, g) == inner.mu and E.compose(outer.nu, g) == inner.nu:
                return Inclusion.SUBSET
    return Inclusion.DISJOINT


def _common_degree(
    B: Category,
    m1: Morphism,
    n1: Morphism,
    m2: Morphism,
    n2: Morphism,
    budget: int = DEFAULT_BUDGET,
) -> tuple[tuple[Morphism, Morphism] | None, bool]:
    """(c, d) with m1 c = n1 d and m2 c = n2 d.

    Returns:
        The square or None, and whether a None is conclusive
    """
    if B.target(m1) != B.target(n1) or B.target(m2) != B.target(n2):
        return None, True
    canonical = B.canonical_completion(m1, n1, budget)
    if canonical is not None:
        c, d = canonical
        if B.try_compose(m2, c) == B.try_compose(n2, d):
            return canonical, True
    # on N^k a common square exists iff the lags agree, and then the join works
    if isinstance(B, NkMonoid):
        return None, True
    for c, d in B.completions(m1, n1, 0 if B.is_finite else SEARCH_LEVEL, budget):
        if B.try_compose(m2, c) == B.try_compose(n2, d):
            return (c, d), True
    return None, B.is_finite


def intersect_basis(
    first: GermBasisSet, second: GermBasisSet, budget: int = DEFAULT_BUDGET
) -> list[GermBasisSet]:
    """Disjoint cells whose union is Z(α, β) ∩ Z(σ, τ)."""
    F = first.fibration
    E = F.domain
    square, _ = _common_degree(F.codomain, F(first.mu), F(second.mu), F(first.nu), F(second.nu), budget)
    if square is None:
        return []
    c, d = square
    cells: dict[GermBasisSet, None] = {}
    for g in F.fiber(E.source(first.mu), c, budget):
        mu, nu = E.compose(first.mu, g), E.compose(first.nu, g)
        for h in F.fiber(E.source(second.mu), d, budget):
            if E.compose(second.mu, h) == mu and E.compose(second.nu, h) == nu:
                cells[GermBasisSet(F, mu, nu)] = None
    return sorted(cells, key=GermBasisSet.sort_key)


def product_basis(
    first: GermBasisSet, second: GermBasisSet, budget: int = DEFAULT_BUDGET
) -> list[GermBasisSet]:
    """Z(α, β) Z(σ, τ) as the disjoint cells Z(αη, τλ) over ore_match(β, σ)."""
    F = first.fibration
    E = F.domain
    if E.target(first.nu) != E.target(second.mu):
        return []
    cells = {
        GermBasisSet(F, E.compose(first.mu, eta), E.compose(second.nu, lam)): None
        for eta, lam in ore_match(F, first.nu, second.mu, budget=budget)
    }
    return sorted(cells, key=GermBasisSet.sort_key)


def disjoint_refinement(
    terms: Iterable[tuple[GermBasisSet, Scalar]], budget: int = DEFAULT_BUDGET
) -> tuple[dict[GermBasisSet, Scalar], bool]:
    """Rewrite a combination of cells over pairwise disjoint cells.

    Overlapping cells are both refined to a common degree, where cells are
    equal or disjoint, and equal cells are merged. Zero terms are dropped.

    Returns:
        The refined terms and whether every overlap question was decided
    """
    cells: list[tuple[GermBasisSet, Scalar]] = [(c, v) for c, v in terms if not scalars.is_zero(v)]
    conclusive = True
    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                a, va = cells[i]
                b, vb = cells[j]
                if a == b:
                    merged = scalars.add(va, vb)
                    cells = [t for k, t in enumerate(cells) if k not in (i, j)]
                    if not scalars.is_zero(merged):
                        cells.append((a, merged))
                    changed = True
                    break
                F = a.fibration
                B = F.codomain
                # distinct lifts of one base morphism have disjoint cylinders
                if F(a.mu) == F(b.mu) and F(a.nu) == F(b.nu):
                    continue
                square, decided = _common_degree(B, F(a.mu), F(b.mu), F(a.nu), F(b.nu), budget)
                if square is None:
                    conclusive = conclusive and decided
                    continue
                c, d = square
                if B.is_identity(c) and B.is_identity(d):
                    continue
                refined_a = [(cell, va) for cell in refine_cell(a, c, budget)]
                refined_b = [(cell, vb) for cell in refine_cell(b, d, budget)]
                cells = [t for k, t in enumerate(cells) if k not in (i, j)] + refined_a + refined_b
                changed = True
                break
            if changed:
                break
    logger.debug(f"Refined to {len(cells)} disjoint cells in {passes} passes")
    return {cell: value for cell, value in sorted(cells, key=lambda t: t[0].sort_key())}, conclusive


class GroupoidFunction:
    """A finite combination of cell indicators with exact coefficients.

    Supports are kept pairwise disjoint.
    """

    def __init__(
        self,
        fibration: Fibration,
        terms: Mapping[GermBasisSet, ScalarLike] | Iterable[tuple[GermBasisSet, ScalarLike]] = (),
        budget: int = DEFAULT_BUDGET,
    ):
        self.fibration = fibration
        self.budget = budget
        items = terms.items() if isinstance(terms, Mapping) else terms
        self.terms, self.conclusive = disjoint_refinement(
            [(cell, scalars.scalar(value)) for cell, value in items], budget
        )

    @classmethod
    def indicator(cls, F: Fibration, cell: GermBasisSet) -> GroupoidFunction:
        return cls(F, {cell: 1})

    def _new(self, terms: Iterable[tuple[GermBasisSet, Scalar]]) -> GroupoidFunction:
        return GroupoidFunction(self.fibration, list(terms), self.budget)

    def __add__(self, other: GroupoidFunction) -> GroupoidFunction:
        return self._new([*self.terms.items(), *other.terms.items()])

    def __neg__(self) -> GroupoidFunction:
        return self.scale(-1)

    def __sub__(self, other: GroupoidFunction) -> GroupoidFunction:
        return self + (-other)

    def scale(self, factor: ScalarLike) -> GroupoidFunction:
        k = scalars.scalar(factor)
        return self._new((cell, scalars.mul(k, v)) for cell, v in self.terms.items())

    def convolve(self, other: GroupoidFunction) -> GroupoidFunction:
        """f * g, extended bilinearly from product_basis."""
        products: list[tuple[GermBasisSet, Scalar]] = []
        for a, va in self.terms.items():
            for b, vb in other.terms.items():
                coefficient = scalars.mul(va, vb)
                products.extend((cell, coefficient) for cell in product_basis(a, b, self.budget))
        return self._new(products)

    __mul__ = convolve

    def star(self) -> GroupoidFunction:
        return self._new((cell.inverse, scalars.conjugate(v)) for cell, v in self.terms.items())

    def normalized(self) -> GroupoidFunction:
        return self._new(self.terms.items())

    def equals(self, other: GroupoidFunction) -> Verdict:
        """Decide equality through the refinement of the difference.

        A nonzero difference is NOT_EQUAL only when every overlap was
        decided; cells are assumed nonempty.
        """
        difference = self - other
        if not difference.terms:
            return Verdict.EQUAL
        return Verdict.NOT_EQUAL if difference.conclusive else Verdict.UNKNOWN

    def to_dict(self) -> dict[str, Any]:
        E = self.fibration.domain
        terms: list[dict[str, str]] = []
        for cell, value in self.terms.items():
            re, im = scalars.to_parts(value)
            terms.append({"mu": E.format(cell.mu), "nu": E.format(cell.nu), "re": re, "im": im})
        return {"terms": terms, "conclusive": self.conclusive}

    def __repr__(self) -> str:
        body = " + ".join(f"({v})*1_{cell.format()}" for cell, v in self.terms.items())
        return f"<GroupoidFunction {body or '0'}>"


def convolve(f: GroupoidFunction, g: GroupoidFunction) -> GroupoidFunction:
    return f.convolve(g)


# -- germs at single paths -------------------------------------------------------


@dataclass
class GermElement:
    """[μ, ν, x] with x in Z(ν)."""

    mu: Morphism
    nu: Morphism
    path: PathOracle

    def __post_init__(self) -> None:
        F = self.path.fibration
        E = F.domain
        if E.source(self.mu) != E.source(self.nu):
            raise NotASpan(f"{E.format(self.mu)} and {E.format(self.nu)} do not share a source")
        if not CylinderSet(F, self.nu).contains(self.path):
            raise NotComposable(f"{self.path.name} does not pass through {E.format(self.nu)}")

    @property
    def fibration(self) -> Fibration:
        return self.path.fibration

    def cell(self) -> GermBasisSet:
        return GermBasisSet(self.fibration, self.mu, self.nu)

    def format(self) -> str:
        E = self.fibration.domain
        return f"[{E.format(self.mu)},{E.format(self.nu)},{self.path.name}]"


def germ_source(g: GermElement) -> PathOracle:
    return g.path


def germ_range(g: GermElement) -> PathOracle:
    """ind_μ res_ν x."""
    F = g.fibration
    return ind(F, g.mu, res(F, g.nu, g.path))


def invert_germ(g: GermElement) -> GermElement:
    return GermElement(g.nu, g.mu, germ_range(g))


def multiply_germs(
    g: GermElement, h: GermElement, depth: int = DEFAULT_DEPTH
) -> GermElement:
    """[μ, ν, x][σ, τ, y] for x = ind_σ res_τ y.

    With F(ν)a = F(σ)b, x(F(ν)a) = νη = σλ and the product is [μη, τλ, y].

    Raises:
        NotComposable: If the source of g is not the range of h
    """
    F = g.fibration
    E, B = F.domain, F.codomain
    x = g.path
    if not path_equal(x, germ_range(h), depth).equal:
        raise NotComposable(f"{g.format()} and {h.format()} are not composable")
    a, b = B.canonical_completion(F(g.nu), F(h.mu)) or (None, None)
    if a is None:
        raise NotComposable(f"no square completes ({B.format(F(g.nu))}, {B.format(F(h.mu))})")
    psi = x.evaluate(B.compose(F(g.nu), a))
    eta = lift_factorization(F, psi, [F(g.nu), a])[1]
    lam = lift_factorization(F, psi, [F(h.mu), b])[1]
    return GermElement(E.compose(g.mu, eta), E.compose(h.nu, lam), h.path)


@dataclass
class GermEquality:
    verdict: Verdict
    depth: int | None
    conditions: dict[str, bool | None] = field(default_factory=dict)
    squares: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "depth": self.depth,
            "conditions": self.conditions,
            "squares": self.squares,
        }


def _same_local_map(g: GermElement, h: GermElement, a: Morphism, b: Morphism) -> bool:
    """μη = μ'η' for the lifts η, η' of a and b along the path of g."""
    F = g.fibration
    E, B = F.domain, F.codomain
    point = g.path.evaluate(B.compose(F(g.nu), a))
    eta = lift_factorization(F, point, [F(g.nu), a])[1]
    eta2 = lift_factorization(F, point, [F(h.nu), b])[1]
    return E.compose(g.mu, eta) == E.compose(h.mu, eta2)


def equal_germ(g: GermElement, h: GermElement, depth: int = DEFAULT_DEPTH) -> GermEquality:
    """Decide [μ, ν, x] = [μ', ν', x'].

    Same path (checked to `depth`), a common square (a, b) for
    (F(μ), F(μ')) and (F(ν), F(ν')), and equal local maps near x, which
    holds exactly when μη = μ'η' for the lifts η, η' of a and b along x.

    On a base flagged left cancellative one square decides the local maps.
    Otherwise every common square is tried, which covers every refinement
    of the first one; a miss is conclusive only on a finite base and is
    UNKNOWN at `depth` elsewhere.
    """
    F = g.fibration
    E, B = F.domain, F.codomain
    check_depth = None if B.is_finite else depth
    if not path_equal(g.path, h.path, depth).equal:
        return GermEquality(Verdict.NOT_EQUAL, check_depth, {"same_path": False})
    if E.target(g.mu) != E.target(h.mu):
        return GermEquality(Verdict.NOT_EQUAL, check_depth, {"same_path": True, "common_degree": False})
    square, decided = _common_degree(B, F(g.mu), F(h.mu), F(g.nu), F(h.nu))
    if square is None:
        verdict = Verdict.NOT_EQUAL if decided else Verdict.UNKNOWN
        if not decided:
            logger.warning(f"Germ comparison of {g.format()} and {h.format()} is undecided")
        return GermEquality(verdict, check_depth, {"same_path": True, "common_degree": False if decided else None})
    found = {"same_path": True, "common_degree": True}
    if _same_local_map(g, h, *square):
        return GermEquality(Verdict.EQUAL, check_depth, {**found, "same_local_map": True}, squares=1)
    if F.flags.left_cancellative is True:
        return GermEquality(Verdict.NOT_EQUAL, check_depth, {**found, "same_local_map": False}, squares=1)
    tried = 1
    for c, d in B.completions(F(g.mu), F(h.mu), 0 if B.is_finite else depth):
        if (c, d) == square or B.try_compose(F(g.nu), c) != B.try_compose(F(h.nu), d):
            continue
        tried += 1
        if _same_local_map(g, h, c, d):
            return GermEquality(Verdict.EQUAL, check_depth, {**found, "same_local_map": True}, squares=tried)
    if B.is_finite:
        return GermEquality(Verdict.NOT_EQUAL, None, {**found, "same_local_map": False}, squares=tried)
    logger.warning(f"No local match for {g.format()} and {h.format()} within level {depth}")
    return GermEquality(Verdict.UNKNOWN, depth, {**found, "same_local_map": None}, squares=tried)


@dataclass
class GermGroupoid:
    """The germs of a finite path space with their multiplication table."""

    germs: list[GermElement]
    products: dict[tuple[int, int], int]
    inverses: dict[int, int]
    units: list[int]

    def index(self, germ: GermElement) -> int:
        for i, candidate in enumerate(self.germs):
            if equal_germ(candidate, germ).verdict is Verdict.EQUAL:
                return i
        raise KeyError(f"{germ.format()} is not a germ of this groupoid")

    def to_dict(self) -> dict[str, Any]:
        return {
            "germs": [g.format() for g in self.germs],
            "products": [[i, j, k] for (i, j), k in sorted(self.products.items())],
            "inverses": [[i, k] for i, k in sorted(self.inverses.items())],
            "units": self.units,
        }


def _all_paths(F: Fibration, budget: int) -> list[PathOracle]:
    paths: list[PathOracle] = []
    for x in F.domain.objects:
        paths.extend(enumerate_paths(F, x, budget))
    return paths


def enumerate_germs(F: Fibration, budget: int = DEFAULT_BUDGET) -> GermGroupoid:
    """All germs of a finite path space, one per equivalence class.

    Raises:
        PathSpaceNotFinite: If the base is not finite
    """
    E = F.domain
    if not F.codomain.is_finite:
        raise PathSpaceNotFinite(f"{F.name} has an infinite path space")
    paths = _all_paths(F, budget)
    mors = E.morphisms()
    germs: list[GermElement] = []
    for nu in mors:
        for mu in mors:
            if E.source(mu) != E.source(nu):
                continue
            for x in paths:
                if not CylinderSet(F, nu).contains(x):
                    continue
                candidate = GermElement(mu, nu, x)
                if not any(equal_germ(g, candidate).verdict is Verdict.EQUAL for g in germs):
                    germs.append(candidate)
                    if len(germs) > budget:
                        raise PathSpaceNotFinite(f"more than {budget} germs")
    groupoid = GermGroupoid(germs, {}, {}, [])
    for i, g in enumerate(germs):
        groupoid.inverses[i] = groupoid.index(invert_germ(g))
        if E.is_identity(g.mu) and g.mu == g.nu:
            groupoid.units.append(i)
        for j, h in enumerate(germs):
            if path_equal(g.path, germ_range(h)).equal:
                groupoid.products[(i, j)] = groupoid.index(multiply_germs(g, h))
    logger.info(f"{F.name} has {len(germs)} germs over {len(paths)} paths")
    return groupoid


def germ_of_morphism(F: Fibration, gamma: Morphism, depth: int = DEFAULT_DEPTH) -> GermElement:
    """[γ, s(γ), x] for the canonical path x to s(γ)."""
    E = F.domain
    x = canonical_splitting(F, E.source(gamma), depth)
    return GermElement(gamma, E.identity(E.source(gamma)), x)


def germ_lag(F: Fibration, g: GermElement | GermBasisSet) -> tuple[int, ...]:
    """F(μ) - F(ν) on an ℕᵏ base."""
    if not isinstance(F.codomain, NkMonoid):
        raise ValueError(f"lags need an N^k base, not {F.codomain.name}")
    return tuple(a - b for a, b in zip(F(g.mu), F(g.nu)))


def check_etale(cell: GermBasisSet, a: Morphism, budget: int = DEFAULT_BUDGET) -> Check:
    """Distinct subcells of the refinement of `cell` over a have distinct ranges and sources."""
    pieces = refine_cell(cell, a, budget)
    ranges = [p.mu for p in pieces]
    sources = [p.nu for p in pieces]
    ok = len(set(ranges)) == len(ranges) and len(set(sources)) == len(sources)
    return Check(
        "etale",
        ok,
        detail=f"{len(pieces)} subcells of {cell.format()}",
        payload={"subcells": [p.format() for p in pieces]} if not ok else {},
    )


# -- regular representation -----------------------------------------------------------


@dataclass
class RegularRepresentation:
    """L^u on the orbit of u; basis vector i is `orbit[i]`."""

    fibration: Fibration
    orbit: list[PathOracle]
    depth: int

    def _index(self, path: PathOracle) -> int | None:
        for i, candidate in enumerate(self.orbit):
            if path_equal(candidate, path, self.depth).equal:
                return i
        return None

    def cell_matrix(self, cell: GermBasisSet) -> sympy.Matrix:
        F = self.fibration
        n = len(self.orbit)
        matrix = sympy.zeros(n, n)
        through = CylinderSet(F, cell.nu)
        for i, xi in enumerate(self.orbit):
            if not through.contains(xi):
                continue
            j = self._index(ind(F, cell.mu, res(F, cell.nu, xi)))
            if j is not None:
                matrix[j, i] = 1
        return matrix

    def matrix(self, f: GroupoidFunction) -> sympy.Matrix:
        n = len(self.orbit)
        total = sympy.zeros(n, n)
        for cell, value in f.terms.items():
            total += value * self.cell_matrix(cell)
        return total.applyfunc(sympy.expand)


def regular_representation(
    F: Fibration, u: PathOracle, budget: int = DEFAULT_BUDGET, depth: int = DEFAULT_DEPTH
) -> RegularRepresentation:
    """L^u on the orbit of u, for finite path spaces.

    Raises:
        OrbitBudgetExceeded: If the orbit is not known to be finite or exceeds the budget
    """
    E = F.domain
    if not F.codomain.is_finite:
        raise OrbitBudgetExceeded(f"the orbit of {u.name} is not known to be finite")
    orbit = RegularRepresentation(F, [u], depth)
    mors = E.morphisms()
    for nu in mors:
        if not CylinderSet(F, nu).contains(u):
            continue
        for mu in mors:
            if E.source(mu) != E.source(nu):
                continue
            image = ind(F, mu, res(F, nu, u))
            if orbit._index(image) is None:
                orbit.orbit.append(image)
                if len(orbit.orbit) > budget:
                    raise OrbitBudgetExceeded(f"orbit of {u.name} exceeds {budget} paths")
    return orbit
