"""Infinite paths, the res / ind bijections and cylinder sets.

An infinite path x to X is evaluated on objects of the base slice
B/F(X), that is on base morphisms b into F(X). Its values on slice
morphisms follow from unique factorization.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

from conduche.category import Morphism, NkMonoid, Obj
from conduche.exceptions import (
    IncoherentOracle,
    LiftError,
    NoSplittingFound,
    NotComposable,
    PathNotInCylinder,
    PathSpaceNotFinite,
)
from conduche.fibration import Evaluator, Fibration, lift_factorization, ore_complete, ore_match
from conduche.report import Check, ValidationReport
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH

logger = logging.getLogger("conduche")

Completer = Callable[[Morphism, Morphism], tuple[Morphism, Morphism]]

# a chooser that has not covered the requested degree after this many blocks gives up
MAX_BLOCKS = 1000


def _prefix(F: Fibration, value: Morphism, b: Morphism, c: Morphism) -> Morphism:
    """The unique prefix over b of a morphism over bc."""
    return lift_factorization(F, value, [b, c])[0]


def _comparable(F: Fibration, b1: Morphism, b2: Morphism) -> Iterator[Morphism]:
    """Every c with b1 c = b2."""
    yield from F.codomain.solve_left(b1, b2)


def _agrees(F: Fibration, b1: Morphism, v1: Morphism, b2: Morphism, v2: Morphism) -> bool:
    try:
        for c in _comparable(F, b1, b2):
            if _prefix(F, v2, b1, c) != v1:
                return False
        for c in _comparable(F, b2, b1):
            if _prefix(F, v1, b2, c) != v2:
                return False
    except LiftError:
        return False
    return True


class PathOracle:
    """An infinite path as a memoized evaluator on base slice objects.

    Each new value is checked to be a section value, and when
    `check_coherence` is set it is compared against every memoized value
    it extends or is extended by.
    """

    def __init__(
        self,
        fibration: Fibration,
        target: Obj,
        evaluator: Evaluator,
        name: str = "",
        certified_depth: int | None = None,
        check_coherence: bool = True,
    ):
        self.fibration = fibration
        self.target = target
        self.evaluator = evaluator
        self.name = name or f"path to {fibration.domain.format_object(target)}"
        self.certified_depth = certified_depth
        self.check_coherence = check_coherence
        self._memo: dict[Morphism, Morphism] = {}
        self._lock = threading.RLock()

    @property
    def base_target(self) -> Obj:
        return self.fibration.obj(self.target)

    def evaluate(self, b: Morphism) -> Morphism:
        """x(b).

        Raises:
            NotComposable: If b does not end at F(r(x))
            IncoherentOracle: If the evaluator breaks the section or coherence property
        """
        F = self.fibration
        E, B = F.domain, F.codomain
        with self._lock:
            if b in self._memo:
                return self._memo[b]
            if B.target(b) != self.base_target:
                raise NotComposable(
                    f"{B.format(b)} is not an object of the slice over {B.format_object(self.base_target)}"
                )
            value = self.evaluator(b)
            if E.target(value) != self.target or F(value) != b:
                raise IncoherentOracle(
                    f"{self.name} sends {B.format(b)} to {E.format(value)}, which does not lie over it",
                    {"base": B.format(b), "value": E.format(value)},
                )
            if self.check_coherence:
                for other, other_value in self._memo.items():
                    if not _agrees(F, b, value, other, other_value):
                        raise IncoherentOracle(
                            f"{self.name} is not coherent at {B.format(b)} and {B.format(other)}",
                            {
                                "points": [B.format(b), B.format(other)],
                                "values": [E.format(value), E.format(other_value)],
                            },
                        )
            self._memo[b] = value
            logger.debug(f"{self.name}: {B.format(b)} -> {E.format(value)} ({len(self._memo)} memoized)")
            return value

    __call__ = evaluate

    def slice_objects(self, depth: int) -> list[Morphism]:
        B = self.fibration.codomain
        return B.morphisms_into(self.base_target, 0 if B.is_finite else depth)

    def __repr__(self) -> str:
        return f"<PathOracle {self.name}>"


def eval_path(x: PathOracle, b: Morphism) -> Morphism:
    return x.evaluate(b)


def eval_path_morphism(x: PathOracle, a: Morphism, b: Morphism) -> tuple[Morphism, Morphism]:
    """(x(a), x₂(a, b)) for the slice morphism (a, b); the two compose to x(ab)."""
    F = x.fibration
    whole = x.evaluate(F.codomain.compose(a, b))
    head, tail = lift_factorization(F, whole, [a, b])
    if head != x.evaluate(a):
        raise IncoherentOracle(f"{x.name} is not coherent along ({F.codomain.format(a)}, {F.codomain.format(b)})")
    return head, tail


# -- oracle constructors ------------------------------------------------------


def path_from_blocks(
    F: Fibration,
    target: Obj,
    next_block: Callable[[int, Obj], Morphism],
    name: str = "",
) -> PathOracle:
    """A path over ℕᵏ given by an infinite chain of blocks.

    x(d) is the degree d prefix of the first blocks whose total degree
    covers d.
    """
    E, B = F.domain, F.codomain
    if not isinstance(B, NkMonoid):
        raise NoSplittingFound(f"block chains need an N^k base, not {B.name}")
    chain: list[Morphism] = [E.identity(target)]
    lock = threading.Lock()

    def covering(d: Morphism) -> Morphism:
        with lock:
            while B.subtract(F(chain[-1]), d) is None:
                if len(chain) > MAX_BLOCKS:
                    raise NoSplittingFound(f"{name or 'chooser'} never covers degree {B.format(d)}")
                block = next_block(len(chain) - 1, E.source(chain[-1]))
                if E.target(block) != E.source(chain[-1]):
                    raise IncoherentOracle(
                        f"block {E.format(block)} does not continue {E.format(chain[-1])}"
                    )
                chain.append(E.compose(chain[-1], block))
            return chain[-1]

    def evaluate(d: Morphism) -> Morphism:
        if B.is_identity(d):
            return E.identity(target)
        whole = covering(d)
        rest = B.subtract(F(whole), d)
        return _prefix(F, whole, d, rest)

    return PathOracle(F, target, evaluate, name=name)


def min_chooser(F: Fibration) -> Callable[[int, Obj], Morphism]:
    """Pick the first morphism of degree (1, ..., 1) into the current object."""
    B = F.codomain
    if not isinstance(B, NkMonoid):
        raise NoSplittingFound(f"the min chooser needs an N^k base, not {B.name}")
    ones = (1,) * B.k

    def choose(index: int, current: Obj) -> Morphism:
        options = F.fiber(current, ones)
        if not options:
            raise NoSplittingFound(
                f"{F.domain.format_object(current)} receives no morphism of degree {B.format(ones)}"
            )
        return options[0]

    return choose


def staircase_block(index: int, blocks: Sequence[Morphism]) -> Morphism:
    """m1 m2 m1 m2 m2 m1 m2 m2 m2 ... for blocks (m1, m2)."""
    first, second = blocks
    run = 1
    while index > run:
        index -= run + 1
        run += 1
    return first if index == 0 else second


def oracle_from_spec(
    F: Fibration, spec: str, target: Obj | None = None, depth: int = DEFAULT_DEPTH
) -> PathOracle:
    """Build a path from a chooser spec.

    Specs: ``min``, ``canonical``, ``constant:m``, ``periodic:m1,m2,...``
    and ``staircase:m1,m2``. Block choosers take their target from the
    first block when none is given.

    Raises:
        ValueError: If the spec is not recognised
    """
    E = F.domain
    kind, _, argument = spec.partition(":")
    kind = kind.strip()
    if kind in ("min", "canonical"):
        if target is None:
            raise ValueError(f"oracle {spec!r} needs a target object")
        if kind == "min" and isinstance(F.codomain, NkMonoid):
            return path_from_blocks(F, target, min_chooser(F), name="min")
        return canonical_splitting(F, target, depth)

    blocks = [E.parse(part) for part in argument.split(",") if part.strip()]
    if not blocks:
        raise ValueError(f"oracle {spec!r} names no blocks")
    start = E.target(blocks[0]) if target is None else target
    if kind == "constant":
        if len(blocks) != 1:
            raise ValueError(f"oracle {spec!r} needs exactly one block")
        return path_from_blocks(F, start, lambda i, v: blocks[0], name=spec)
    if kind == "periodic":
        return path_from_blocks(F, start, lambda i, v: blocks[i % len(blocks)], name=spec)
    if kind == "staircase":
        if len(blocks) != 2:
            raise ValueError(f"oracle {spec!r} needs exactly two blocks")
        return path_from_blocks(F, start, lambda i, v: staircase_block(i, blocks), name=spec)
    raise ValueError(f"unknown oracle kind {kind!r}")


def oracle_from_values(F: Fibration, target: Obj, values: dict[Morphism, Morphism], name: str = "") -> PathOracle:
    def evaluate(b: Morphism) -> Morphism:
        return values[b]

    return PathOracle(F, target, evaluate, name=name, check_coherence=False)


def _search_sections(
    F: Fibration, target: Obj, budget: int, first_only: bool
) -> list[dict[Morphism, Morphism]]:
    B = F.codomain
    if not B.is_finite:
        raise PathSpaceNotFinite(f"{B.name} is not finite; paths cannot be enumerated")
    points = B.morphisms_into(F.obj(target))
    found: list[dict[Morphism, Morphism]] = []
    assigned: dict[Morphism, Morphism] = {}

    def extend(index: int) -> bool:
        if index == len(points):
            found.append(dict(assigned))
            if len(found) > budget:
                raise PathSpaceNotFinite(f"more than {budget} paths to {F.domain.format_object(target)}")
            return first_only
        b = points[index]
        for value in F.fiber(target, b, budget):
            if all(_agrees(F, b, value, other, v) for other, v in assigned.items()):
                assigned[b] = value
                if extend(index + 1):
                    return True
                del assigned[b]
        return False

    extend(0)
    return found


def enumerate_paths(F: Fibration, target: Obj, budget: int = DEFAULT_BUDGET) -> list[PathOracle]:
    """Every infinite path to `target` over a finite base, by backtracking.

    Raises:
        PathSpaceNotFinite: If the base is not finite or the budget is exceeded
    """
    sections = _search_sections(F, target, budget, first_only=False)
    E = F.domain
    return [
        oracle_from_values(F, target, values, name=f"path {i} to {E.format_object(target)}")
        for i, values in enumerate(sections)
    ]


def canonical_splitting(F: Fibration, target: Obj, depth: int = DEFAULT_DEPTH) -> PathOracle:
    """A path to `target`, certified coherent up to `depth`.

    Builder hooks are used first, then the min chooser on ℕᵏ bases, then a
    backtracking search on finite bases.

    Raises:
        NoSplittingFound: If no candidate is found or certification fails
    """
    E, B = F.domain, F.codomain
    name = f"canonical path to {E.format_object(target)}"
    if F.splitting is not None:
        oracle = PathOracle(F, target, F.splitting(target), name=name)
    elif isinstance(B, NkMonoid):
        oracle = path_from_blocks(F, target, min_chooser(F), name=name)
    elif B.is_finite:
        try:
            sections = _search_sections(F, target, DEFAULT_BUDGET, first_only=True)
        except PathSpaceNotFinite as e:
            raise NoSplittingFound(e.message) from e
        if not sections:
            raise NoSplittingFound(f"no path to {E.format_object(target)} exists")
        oracle = oracle_from_values(F, target, sections[0], name=name)
    else:
        raise NoSplittingFound(f"no splitting strategy for {F.name}")
    try:
        for b in oracle.slice_objects(depth):
            oracle.evaluate(b)
    except (IncoherentOracle, LiftError) as e:
        raise NoSplittingFound(f"{name} fails certification: {e.message}", e.payload) from e
    oracle.certified_depth = None if B.is_finite else depth
    return oracle


# -- res and ind -----------------------------------------------------------------


def res(F: Fibration, mu: Morphism, x: PathOracle) -> PathOracle:
    """res_μ(x), the path to s(μ) left after stripping μ.

    Raises:
        PathNotInCylinder: If x(F(μ)) != μ
    """
    E, B = F.domain, F.codomain
    f_mu = F(mu)
    if x.target != E.target(mu) or x.evaluate(f_mu) != mu:
        raise PathNotInCylinder(f"{x.name} does not pass through {E.format(mu)}")

    def evaluate(a: Morphism) -> Morphism:
        whole = x.evaluate(B.compose(f_mu, a))
        return lift_factorization(F, whole, [f_mu, a])[1]

    return PathOracle(F, E.source(mu), evaluate, name=f"res[{E.format(mu)}]({x.name})", check_coherence=False)


def ind(
    F: Fibration, mu: Morphism, x: PathOracle, completer: Completer | None = None
) -> PathOracle:
    """ind_μ(x), the path to r(μ) through μ.

    The value at d completes (F(μ), d) to F(μ)c = de and takes the degree
    d prefix of μ x(c).

    Raises:
        NotComposable: If x does not end at s(μ)
    """
    E, B = F.domain, F.codomain
    if x.target != E.source(mu):
        raise NotComposable(f"{x.name} does not end at the source of {E.format(mu)}")
    f_mu = F(mu)

    def evaluate(d: Morphism) -> Morphism:
        c, e = completer(f_mu, d) if completer else ore_complete(B, f_mu, d)
        whole = E.compose(mu, x.evaluate(c))
        return _prefix(F, whole, d, e)

    return PathOracle(F, E.target(mu), evaluate, name=f"ind[{E.format(mu)}]({x.name})", check_coherence=False)


# -- cylinders --------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderSet:
    """Z(α): the paths whose value at F(α) is α."""

    fibration: Fibration = field(compare=False, hash=False, repr=False)
    morphism: Morphism

    @classmethod
    def of_object(cls, F: Fibration, x: Obj) -> CylinderSet:
        return cls(F, F.domain.identity(x))

    def contains(self, path: PathOracle) -> bool:
        F = self.fibration
        if path.target != F.domain.target(self.morphism):
            return False
        return path.evaluate(F(self.morphism)) == self.morphism

    def format(self) -> str:
        return f"Z({self.fibration.domain.format(self.morphism)})"


def partition_by_lifts(
    F: Fibration, x: Obj, b: Morphism, budget: int = DEFAULT_BUDGET
) -> list[CylinderSet]:
    """Z(x) split into the disjoint cylinders of the lifts of b."""
    return [CylinderSet(F, beta) for beta in F.fiber(x, b, budget)]


def cylinder_intersection(
    F: Fibration, alpha: Morphism, beta: Morphism, budget: int = DEFAULT_BUDGET
) -> list[Morphism]:
    """The disjoint cells μ with Z(α) ∩ Z(β) the union of the Z(μ)."""
    E = F.domain
    if E.target(alpha) != E.target(beta):
        return []
    cells = {E.compose(alpha, eta) for eta, _ in ore_match(F, alpha, beta, budget=budget)}
    return sorted(cells, key=E.sort_key)


# -- comparison and aperiodicity ----------------------------------------------------


@dataclass
class PathComparison:
    equal: bool
    depth: int | None
    distinguished_at: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"equal": self.equal, "depth": self.depth, "distinguished_at": self.distinguished_at}


def path_equal(x: PathOracle, y: PathOracle, depth: int = DEFAULT_DEPTH) -> PathComparison:
    """Compare two paths on every base slice object up to `depth`."""
    B = x.fibration.codomain
    check_depth = None if B.is_finite else depth
    if x.target != y.target:
        return PathComparison(False, check_depth)
    for b in x.slice_objects(depth):
        if x.evaluate(b) != y.evaluate(b):
            return PathComparison(False, check_depth, B.format(b))
    return PathComparison(True, check_depth)


@dataclass
class PeriodicWitness:
    """Distinct α, β with res_α(x) = res_β(x) up to `depth`."""

    later: Morphism
    earlier: Morphism
    depth: int | None
    text: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {**self.text, "depth": self.depth}


def aperiodicity_scan(F: Fibration, x: PathOracle, depth: int = DEFAULT_DEPTH) -> PeriodicWitness | None:
    """Search α != β with x in Z(α) ∩ Z(β) and res_α(x) = res_β(x) to `depth`.

    A witness proves x periodic. None only means none was found.
    """
    E = F.domain
    points = [x.evaluate(b) for b in x.slice_objects(depth)]
    restricted: dict[Morphism, PathOracle] = {}
    for i, alpha in enumerate(points):
        for beta in points[:i]:
            if alpha == beta or E.source(alpha) != E.source(beta):
                continue
            for m in (alpha, beta):
                if m not in restricted:
                    restricted[m] = res(F, m, x)
            if path_equal(restricted[alpha], restricted[beta], depth).equal:
                logger.debug(f"{x.name} is periodic: res at {E.format(alpha)} and {E.format(beta)} agree")
                return PeriodicWitness(
                    alpha,
                    beta,
                    None if F.codomain.is_finite else depth,
                    {"later": E.format(alpha), "earlier": E.format(beta)},
                )
    return None


# -- restrict / induce identities -----------------------------------------------------


def verify_restrict_induce(
    F: Fibration,
    mu: Morphism,
    nu: Morphism,
    x: PathOracle,
    depth: int = DEFAULT_DEPTH,
    completer: Completer | None = None,
) -> ValidationReport:
    """Check the six res / ind identities for composable μ, ν and x in Z(ν).

    Raises:
        PathNotInCylinder: If x does not pass through ν
        NotComposable: If s(μ) != r(ν)
    """
    E, B = F.domain, F.codomain
    if E.source(mu) != E.target(nu):
        raise NotComposable(f"{E.format(mu)} and {E.format(nu)} are not composable")
    if not CylinderSet(F, nu).contains(x):
        raise PathNotInCylinder(f"{x.name} does not pass through {E.format(nu)}")
    report = ValidationReport(subject=f"res/ind at {E.format(mu)}, {E.format(nu)}")
    check_depth = None if B.is_finite else depth
    mu_nu = E.compose(mu, nu)
    f_mu = F(mu)

    def same(p: PathOracle, q: PathOracle) -> bool:
        return path_equal(p, q, depth).equal

    y = ind(F, mu, x, completer)
    prepend = all(
        y.evaluate(B.compose(f_mu, a)) == E.compose(mu, x.evaluate(a)) for a in x.slice_objects(depth)
    )
    report.add(Check("ind_prepends", prepend, check_depth, detail="ind(x)(F(mu) a) = mu x(a)"))

    report.add(
        Check(
            "mutually_inverse",
            same(res(F, mu, y), x) and same(ind(F, mu, res(F, mu, y), completer), y),
            check_depth,
        )
    )

    ident = E.identity(x.target)
    report.add(Check("identity", same(res(F, ident, x), x) and same(ind(F, ident, x, completer), x), check_depth))

    z = res(F, nu, x)
    w = ind(F, mu_nu, z, completer)
    cylinders = (
        CylinderSet(F, mu_nu).contains(y)
        and CylinderSet(F, nu).contains(res(F, mu, y))
        and CylinderSet(F, mu_nu).contains(w)
    )
    report.add(Check("cylinders", cylinders, check_depth, detail="res_mu Z(mu nu) = Z(nu), ind_mu Z(nu) = Z(mu nu)"))

    report.add(Check("res_composes", same(res(F, nu, res(F, mu, y)), res(F, mu_nu, y)), check_depth))
    report.add(
        Check("ind_composes", same(ind(F, mu, ind(F, nu, z, completer), completer), w), check_depth)
    )
    return report

