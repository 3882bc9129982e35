"""Functors between categories and the lift / Ore kernel built on them."""

from __future__ import annotations

import copy
import logging
import random
import threading
from collections import Counter
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from conduche.category import Category, Morphism, Obj, has_pullbacks
from conduche.exceptions import (
    BadFactorization,
    ConducheException,
    FiberInfinite,
    MissingFlags,
    MultipleLifts,
    NoCompletion,
    NoLift,
    NotACospan,
    NotComposable,
    UnknownMorphism,
    UnknownObject,
)
from conduche.report import Check, ValidationReport
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH, DEFAULT_SEED

logger = logging.getLogger("conduche")

Evaluator = Callable[[Morphism], Morphism]
Splitting = Callable[[Obj], Evaluator]
Factorizer = Callable[[Morphism, Sequence[Morphism]], Sequence[Morphism]]
FiberEnumerator = Callable[[Obj, Morphism], Sequence[Morphism]]

KP_FLAGS = ("dcf", "strongly_right_ore", "locally_split")


@dataclass(frozen=True)
class FibrationFlags:
    """Cached validation status. None means not established."""

    functor_valid: bool | None = None
    dcf: bool | None = None
    row_finite: bool | None = None
    strongly_surjective: bool | None = None
    right_ore: bool | None = None
    strongly_right_ore: bool | None = None
    left_cancellative: bool | None = None
    right_cancellative: bool | None = None
    locally_split: bool | None = None
    depth: int | None = None

    @property
    def is_kp(self) -> bool:
        return all(getattr(self, name) is True for name in KP_FLAGS)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class Fibration:
    """A functor F: E → B.

    The object and morphism maps are callables or dicts keyed by ids.
    Builders that know more than the generic algorithms can pass hooks:

    - `splitting(X)` returns an evaluator for a path to X
    - `factorizer(phi, parts)` returns the lift of a factorization
    - `fiber_enumerator(X, b)` returns the morphisms into X over b
    """

    def __init__(
        self,
        domain: Category,
        codomain: Category,
        object_map: Callable[[Obj], Obj] | Mapping[Any, Obj],
        morphism_map: Callable[[Morphism], Morphism] | Mapping[Any, Morphism],
        name: str = "",
        flags: FibrationFlags | None = None,
        splitting: Splitting | None = None,
        factorizer: Factorizer | None = None,
        fiber_enumerator: FiberEnumerator | None = None,
        document: dict[str, Any] | None = None,
    ):
        self.domain = domain
        self.codomain = codomain
        self.object_map = object_map
        self.morphism_map = morphism_map
        self.name = name or f"{domain.name} -> {codomain.name}"
        self.flags = flags or FibrationFlags()
        self.splitting = splitting
        self.factorizer = factorizer
        self.fiber_enumerator = fiber_enumerator
        self.document = document
        self._fibers: dict[tuple[Obj, Morphism], list[Morphism]] = {}
        self._lock = threading.Lock()

    def obj(self, x: Obj) -> Obj:
        if isinstance(self.object_map, Mapping):
            try:
                return self.object_map[x]
            except KeyError:
                raise UnknownObject(f"{x!r} has no image under {self.name}") from None
        return self.object_map(x)

    def __call__(self, m: Morphism) -> Morphism:
        if isinstance(self.morphism_map, Mapping):
            try:
                return self.morphism_map[m]
            except (KeyError, TypeError):
                raise UnknownMorphism(f"{m!r} has no image under {self.name}") from None
        return self.morphism_map(m)

    def with_flags(self, **changes: Any) -> Fibration:
        """A copy with some flags replaced; caches are shared."""
        other = copy.copy(self)
        other.flags = replace(self.flags, **changes)
        return other

    def fiber(self, x: Obj, b: Morphism, budget: int = DEFAULT_BUDGET) -> list[Morphism]:
        key = (x, b)
        with self._lock:
            if key in self._fibers:
                return self._fibers[key]
        found = _compute_fiber(self, x, b, budget)
        with self._lock:
            return self._fibers.setdefault(key, found)

    def __repr__(self) -> str:
        return f"<Fibration {self.name}>"


def _compute_fiber(F: Fibration, x: Obj, b: Morphism, budget: int) -> list[Morphism]:
    E, B = F.domain, F.codomain
    if B.target(b) != F.obj(x):
        raise NotComposable(
            f"{B.format(b)} does not end at F({E.format_object(x)}) = {B.format_object(F.obj(x))}"
        )
    if F.fiber_enumerator is not None:
        return sorted(F.fiber_enumerator(x, b), key=E.sort_key)
    # graded domains are assumed to put lifts on the level of their image
    candidates = E.morphisms_into(x, 0 if E.is_finite else B.level(b))
    if len(candidates) > budget:
        raise FiberInfinite(
            f"{len(candidates)} candidates over {B.format(b)} exceed budget {budget}",
            {"object": E.format_object(x), "base": B.format(b)},
        )
    found = [a for a in candidates if F(a) == b]
    logger.debug(f"Fiber over {B.format(b)} at {E.format_object(x)}: {len(found)} morphisms")
    return found


def enumerate_fiber(
    F: Fibration, x: Obj, b: Morphism, budget: int = DEFAULT_BUDGET
) -> list[Morphism]:
    """All α with r(α) = x and F(α) = b.

    Raises:
        NotComposable: If b does not end at F(x)
        FiberInfinite: If the candidate set exceeds the budget
    """
    return F.fiber(x, b, budget)


# -- dCF -----------------------------------------------------------------------


@dataclass
class CounterexampleLift:
    """A morphism and a factorization of its image without exactly one lift."""

    phi: Morphism
    left: Morphism
    right: Morphism
    lifts: int
    text: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {**self.text, "lifts": self.lifts}


def _base_bound(B: Category, depth: int) -> int:
    return 0 if B.is_finite else depth


def check_dcf(
    F: Fibration, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET
) -> CounterexampleLift | None:
    """Count lifts of every factorization of F(φ) for φ up to `depth`.

    Returns:
        The first counterexample in enumeration order, or None if every
        tested factorization lifts exactly once
    """
    E, B = F.domain, F.codomain
    bound = _base_bound(B, depth)
    for x in E.objects:
        for b in B.morphisms_into(F.obj(x), bound):
            phis = F.fiber(x, b, budget)
            if not phis:
                continue
            for left, right in B.factorizations(b):
                counts: Counter[Morphism] = Counter()
                for lam in F.fiber(x, left, budget):
                    for rho in F.fiber(E.source(lam), right, budget):
                        counts[E.compose(lam, rho)] += 1
                for phi in phis:
                    if counts[phi] != 1:
                        logger.debug(
                            f"dCF fails at {E.format(phi)} over {B.format(left)}*{B.format(right)}"
                        )
                        return CounterexampleLift(
                            phi,
                            left,
                            right,
                            counts[phi],
                            {
                                "phi": E.format(phi),
                                "left": B.format(left),
                                "right": B.format(right),
                            },
                        )
    return None


def _compose_parts(B: Category, parts: Sequence[Morphism]) -> Morphism:
    total = parts[-1]
    for part in reversed(parts[:-1]):
        total = B.compose(part, total)
    return total


def _lift_pair(
    F: Fibration, phi: Morphism, left: Morphism, right: Morphism, budget: int
) -> tuple[Morphism, Morphism]:
    E = F.domain
    found = [
        (lam, rho)
        for lam in F.fiber(E.target(phi), left, budget)
        for rho in F.fiber(E.source(lam), right, budget)
        if E.try_compose(lam, rho) == phi
    ]
    if not found:
        raise NoLift(f"{E.format(phi)} has no lift of the given factorization")
    if len(found) > 1:
        raise MultipleLifts(
            f"{E.format(phi)} has {len(found)} lifts",
            {"lifts": [[E.format(a), E.format(b)] for a, b in found]},
        )
    return found[0]


def lift_factorization(
    F: Fibration, phi: Morphism, parts: Sequence[Morphism], budget: int = DEFAULT_BUDGET
) -> list[Morphism]:
    """Lift a factorization of F(φ) to a factorization of φ.

    Raises:
        BadFactorization: If the parts do not compose to F(φ)
        NoLift: If no lift exists
        MultipleLifts: If more than one lift exists
    """
    E, B = F.domain, F.codomain
    if not parts:
        raise BadFactorization("A factorization needs at least one part")
    try:
        product = _compose_parts(B, parts)
    except ConducheException as e:
        raise BadFactorization(f"parts do not compose: {e.message}") from e
    if product != F(phi):
        raise BadFactorization(
            f"parts compose to {B.format(product)}, not F({E.format(phi)}) = {B.format(F(phi))}"
        )
    if len(parts) == 1:
        return [phi]
    if F.factorizer is not None:
        return list(F.factorizer(phi, parts))
    head, rest = _lift_pair(F, phi, parts[0], _compose_parts(B, parts[1:]), budget)
    return [head, *lift_factorization(F, rest, parts[1:], budget)]


def check_identities_lift(F: Fibration, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> Check:
    """Every φ over an identity is an identity, up to `depth`."""
    E, B = F.domain, F.codomain
    offenders = [
        E.format(phi)
        for x in E.objects
        for phi in F.fiber(x, B.identity(F.obj(x)), budget)
        if not E.is_identity(phi)
    ]
    return Check(
        "identities_lift",
        not offenders,
        None if B.is_finite else depth,
        payload={"non_identities": offenders[:10]},
    )


# -- functor laws and surjectivity ----------------------------------------------


def validate_functor(
    F: Fibration,
    depth: int = DEFAULT_DEPTH,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> ValidationReport:
    """Check that F respects ends, identities and composition up to `depth`."""
    E, B = F.domain, F.codomain
    report = ValidationReport(subject=F.name)
    check_depth = None if E.is_finite else depth
    bound = 0 if E.is_finite else depth

    bad_objects: list[str] = []
    for x in E.objects:
        try:
            if not B.has_object(F.obj(x)):
                bad_objects.append(E.format_object(x))
        except ConducheException:
            bad_objects.append(E.format_object(x))
    report.add(Check("objects", not bad_objects, check_depth, payload={"bad_objects": bad_objects}))

    mors = E.morphisms(bound)
    ends_failure: dict[str, Any] = {}
    for m in mors:
        try:
            fm = F(m)
            ok = B.source(fm) == F.obj(E.source(m)) and B.target(fm) == F.obj(E.target(m))
        except ConducheException as e:
            ok = False
            ends_failure["error"] = e.message
        if not ok:
            ends_failure["morphism"] = E.format(m)
            break
    report.add(Check("source_target", not ends_failure, check_depth, payload=ends_failure))

    bad_identities: list[str] = []
    for x in E.objects:
        try:
            ok = F(E.identity(x)) == B.identity(F.obj(x))
        except ConducheException:
            ok = False
        if not ok:
            bad_identities.append(E.format_object(x))
    report.add(Check("identities", not bad_identities, check_depth, payload={"bad_objects": bad_identities}))

    into: dict[Obj, list[Morphism]] = {}
    for m in mors:
        into.setdefault(E.target(m), []).append(m)
    pairs = [(a, b) for a in mors for b in into.get(E.source(a), [])]
    exhaustive = len(pairs) <= budget
    if not exhaustive:
        logger.warning(f"Sampling {budget} of {len(pairs)} composable pairs of {E.name}")
        pairs = random.Random(seed).sample(pairs, budget)
    composition_failure: dict[str, Any] = {}
    for a, b in pairs:
        try:
            ok = F(E.compose(a, b)) == B.compose(F(a), F(b))
        except ConducheException:
            ok = False
        if not ok:
            composition_failure = {"pair": [E.format(a), E.format(b)]}
            break
    report.add(
        Check(
            "composition",
            not composition_failure,
            check_depth,
            exhaustive=exhaustive,
            detail=f"{len(pairs)} pairs",
            payload=composition_failure,
        )
    )
    return report


def check_row_finite(F: Fibration, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> Check:
    """Every fiber up to `depth` enumerates within `budget`."""
    E, B = F.domain, F.codomain
    bound = _base_bound(B, depth)
    largest = 0
    for x in E.objects:
        for b in B.morphisms_into(F.obj(x), bound):
            try:
                largest = max(largest, len(F.fiber(x, b, budget)))
            except FiberInfinite as e:
                return Check("row_finite", False, depth, detail=e.message, payload=e.payload)
    return Check(
        "row_finite",
        True,
        None if B.is_finite else depth,
        exhaustive=B.is_finite,
        detail=f"largest fiber has {largest} morphisms",
    )


def check_strong_surjectivity(
    F: Fibration, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET
) -> Check:
    """Surjective on objects and every fiber up to `depth` is nonempty."""
    E, B = F.domain, F.codomain
    bound = _base_bound(B, depth)
    hit = {F.obj(x) for x in E.objects}
    missed = [B.format_object(y) for y in B.objects if y not in hit]
    if missed:
        return Check("strongly_surjective", False, depth, detail="not surjective on objects", payload={"missed": missed})
    for x in E.objects:
        for b in B.morphisms_into(F.obj(x), bound):
            if not F.fiber(x, b, budget):
                return Check(
                    "strongly_surjective",
                    False,
                    None if B.is_finite else depth,
                    detail="empty fiber",
                    payload={"object": E.format_object(x), "base": B.format(b)},
                )
    return Check("strongly_surjective", True, None if B.is_finite else depth, exhaustive=B.is_finite)


# -- morphism properties and Ore conditions ------------------------------------


@dataclass
class MorphismProperties:
    monic: dict[str, bool]
    epi: dict[str, bool]
    left_cancellative: bool
    right_cancellative: bool
    depth: int | None
    exhaustive: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def morphism_properties(cat: Category, depth: int = DEFAULT_DEPTH) -> MorphismProperties:
    """Decide monic / epi for every morphism up to `depth` by exhaustive search.

    α is monic when αβ = αγ forces β = γ and epi when βα = γα does.
    """
    bound = 0 if cat.is_finite else depth
    mors = cat.morphisms(bound)
    monic: dict[str, bool] = {}
    epi: dict[str, bool] = {}
    for a in mors:
        right_images = [cat.compose(a, b) for b in cat.morphisms_into(cat.source(a), bound)]
        monic[cat.format(a)] = len(set(right_images)) == len(right_images)
        left_images = [
            cat.compose(b, a) for b in mors if cat.source(b) == cat.target(a)
        ]
        epi[cat.format(a)] = len(set(left_images)) == len(left_images)
    return MorphismProperties(
        monic=monic,
        epi=epi,
        left_cancellative=all(monic.values()),
        right_cancellative=all(epi.values()),
        depth=None if cat.is_finite else depth,
        exhaustive=cat.is_finite,
    )


def ore_complete(
    cat: Category, m: Morphism, n: Morphism, budget: int = DEFAULT_BUDGET
) -> tuple[Morphism, Morphism]:
    """The canonical commuting square (p, q) with mp = nq.

    Raises:
        NotACospan: If m and n do not share a target
        NoCompletion: If the bounded search finds nothing
    """
    square = cat.canonical_completion(m, n, budget)
    if square is None:
        raise NoCompletion(
            f"no completion of ({cat.format(m)}, {cat.format(n)}) found",
            {"cospan": [cat.format(m), cat.format(n)]},
        )
    return square


@dataclass
class OreReport:
    right_ore: bool | None
    strongly_right_ore: bool | None
    via: str
    fast_paths: list[str]
    exhaustive: bool
    depth: int | None
    counterexample: dict[str, Any] = field(default_factory=dict)
    agrees: bool | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _cospans(cat: Category, bound: int) -> list[tuple[Morphism, Morphism]]:
    return [
        (m, n)
        for x in cat.objects
        for m in cat.morphisms_into(x, bound)
        for n in cat.morphisms_into(x, bound)
    ]


def _exhaustive_strong(cat: Category, budget: int) -> tuple[bool, dict[str, Any]]:
    for m, n in _cospans(cat, 0):
        squares = cat.completions(m, n, budget=budget)
        for p1, q1 in squares:
            for p2, q2 in squares:
                joint = [
                    (a, b)
                    for a, b in cat.completions(p1, p2, budget=budget)
                    if cat.try_compose(q1, a) == cat.try_compose(q2, b)
                ]
                if not joint:
                    return False, {
                        "cospan": [cat.format(m), cat.format(n)],
                        "completions": [
                            [cat.format(p1), cat.format(q1)],
                            [cat.format(p2), cat.format(q2)],
                        ],
                    }
    return True, {}


def check_ore(cat: Category, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> OreReport:
    """Decide right Ore and strongly right Ore up to `depth`.

    Every applicable sufficient condition is reported: pullbacks (finite
    categories only) and left cancellative plus right Ore. Finite
    categories also get the exhaustive strong check so the two can be
    compared.
    """
    bound = 0 if cat.is_finite else depth
    right_ore: bool | None = True
    counterexample: dict[str, Any] = {}
    for m, n in _cospans(cat, bound):
        if cat.canonical_completion(m, n, budget) is None:
            if cat.completion_search_complete:
                right_ore = False
                counterexample = {"cospan": [cat.format(m), cat.format(n)]}
                break
            right_ore = None
            logger.warning(f"Ore search on {cat.name} is inconclusive at ({cat.format(m)}, {cat.format(n)})")

    fast_paths: list[str] = []
    if cat.is_finite and has_pullbacks(cat):
        fast_paths.append("pullbacks")
    if right_ore and morphism_properties(cat, depth).left_cancellative:
        fast_paths.append("left_cancellative")

    strong: bool | None
    exhaustive_strong: bool | None = None
    if right_ore is False:
        strong = False
    elif cat.is_finite:
        exhaustive_strong, strong_counterexample = _exhaustive_strong(cat, budget)
        strong = exhaustive_strong
        counterexample = counterexample or strong_counterexample
    else:
        strong = True if fast_paths else None

    agrees: bool | None = None
    if fast_paths and exhaustive_strong is not None:
        agrees = exhaustive_strong is True
    if fast_paths:
        via = fast_paths[0]
    elif exhaustive_strong is not None or right_ore is False:
        via = "exhaustive"
    else:
        via = "none"
    return OreReport(
        right_ore=right_ore,
        strongly_right_ore=strong,
        via=via,
        fast_paths=fast_paths,
        exhaustive=cat.is_finite,
        depth=None if cat.is_finite else depth,
        counterexample=counterexample,
        agrees=agrees,
    )


def ore_match(
    F: Fibration,
    beta: Morphism,
    sigma: Morphism,
    completion: tuple[Morphism, Morphism] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[tuple[Morphism, Morphism]]:
    """All (η, λ) over the completion (a, b) of (F(β), F(σ)) with βη = σλ.

    Raises:
        NotACospan: If β and σ do not share a target
    """
    E, B = F.domain, F.codomain
    if E.target(beta) != E.target(sigma):
        raise NotACospan(f"{E.format(beta)} and {E.format(sigma)} do not share a target")
    a, b = completion or ore_complete(B, F(beta), F(sigma), budget)
    etas = F.fiber(E.source(beta), a, budget)
    lams = F.fiber(E.source(sigma), b, budget)
    by_composite: dict[Morphism, list[Morphism]] = {}
    for lam in lams:
        by_composite.setdefault(E.compose(sigma, lam), []).append(lam)
    return [
        (eta, lam)
        for eta in etas
        for lam in by_composite.get(E.compose(beta, eta), [])
    ]


# -- image, identity and composites ---------------------------------------------


class ImageCategory(Category):
    """The subcategory F(E) of the codomain."""

    def __init__(self, F: Fibration, budget: int = DEFAULT_BUDGET):
        super().__init__(f"image of {F.name}")
        self.fibration = F
        self.base = F.codomain
        self.budget = budget
        self.is_finite = self.base.is_finite
        self._objects = list(dict.fromkeys(F.obj(x) for x in F.domain.objects))

    @property
    def objects(self) -> list[Obj]:
        return list(self._objects)

    @property
    def completion_search_complete(self) -> bool:
        return self.base.completion_search_complete

    def source(self, m: Morphism) -> Obj:
        return self.base.source(m)

    def target(self, m: Morphism) -> Obj:
        return self.base.target(m)

    def identity(self, x: Obj) -> Morphism:
        self.check_object(x)
        return self.base.identity(x)

    def compose(self, a: Morphism, b: Morphism) -> Morphism:
        return self.base.compose(a, b)

    def level(self, m: Morphism) -> int:
        return self.base.level(m)

    def is_identity(self, m: Morphism) -> bool:
        return self.base.is_identity(m)

    def format(self, m: Morphism) -> str:
        return self.base.format(m)

    def format_object(self, x: Obj) -> str:
        return self.base.format_object(x)

    def parse(self, text: str) -> Morphism:
        return self.base.parse(text)

    def _hit(self, b: Morphism) -> bool:
        F = self.fibration
        return any(
            F.fiber(x, b, self.budget)
            for x in F.domain.objects
            if F.obj(x) == self.base.target(b)
        )

    def morphisms_into(self, x: Obj, max_level: int = 0) -> list[Morphism]:
        self.check_object(x)
        return self._cached(
            ("into", x, max_level),
            lambda: [b for b in self.base.morphisms_into(x, max_level) if self._hit(b)],
        )


def restrict_to_image(F: Fibration, budget: int = DEFAULT_BUDGET) -> Fibration:
    """Replace the codomain by F(E); the result is strongly surjective.

    Raises:
        MissingFlags: If F is not flagged as a Kumjian-Pask fibration
    """
    if F.flags.strongly_surjective:
        return F
    if not F.flags.is_kp:
        missing = [name for name in KP_FLAGS if getattr(F.flags, name) is not True]
        raise MissingFlags(f"{F.name} is not flagged as a KP fibration", {"missing": missing})
    image = ImageCategory(F, budget)
    return Fibration(
        F.domain,
        image,
        F.object_map,
        F.morphism_map,
        name=f"{F.name} onto its image",
        flags=replace(F.flags, strongly_surjective=True),
        splitting=F.splitting,
        factorizer=F.factorizer,
        fiber_enumerator=F.fiber_enumerator,
    )


def identity_fibration(cat: Category) -> Fibration:
    """Id_B. Its unique path to X sends each b to itself."""
    return Fibration(
        cat,
        cat,
        object_map=lambda x: x,
        morphism_map=lambda m: m,
        name=f"Id on {cat.name}",
        flags=FibrationFlags(
            functor_valid=True,
            dcf=True,
            row_finite=True,
            strongly_surjective=True,
            locally_split=True,
        ),
        splitting=lambda x: (lambda b: b),
        factorizer=lambda phi, parts: list(parts),
        fiber_enumerator=lambda x, b: [b],
    )


def compose_fibrations(G: Fibration, F: Fibration) -> Fibration:
    """G∘F. Only functor validity carries over; the rest must be revalidated."""
    if F.codomain is not G.domain:
        raise NotComposable(f"{F.name} does not land in the domain of {G.name}")
    return Fibration(
        F.domain,
        G.codomain,
        object_map=lambda x: G.obj(F.obj(x)),
        morphism_map=lambda m: G(F(m)),
        name=f"{G.name} . {F.name}",
        flags=FibrationFlags(
            functor_valid=True if F.flags.functor_valid and G.flags.functor_valid else None
        ),
    )
