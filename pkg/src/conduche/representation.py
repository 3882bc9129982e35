"""Concrete operator assignments and the Cuntz-Krieger relation checker."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import sympy

from conduche import scalars
from conduche.category import GroupCategory, Morphism, NkMonoid, Obj
from conduche.exceptions import (
    DimensionMismatch,
    IncompleteAssignment,
    PathSpaceNotFinite,
    SchemaError,
)
from conduche.fibration import Fibration, lift_factorization
from conduche.paths import PathOracle, enumerate_paths, ind, path_equal
from conduche.report import Check, ValidationReport
from conduche.settings import DEFAULT_BUDGET, DEFAULT_TOLERANCE, RELATION6_DEFAULT_LEVEL

logger = logging.getLogger("conduche")


@dataclass
class RepAssignment:
    """Projections Q_X and partial isometries T_α on one finite-dimensional space.

    With `exact` set the matrices are compared entry by entry in sympy and
    the tolerance is ignored.
    """

    projections: dict[Obj, sympy.Matrix]
    isometries: dict[Morphism, sympy.Matrix]
    tolerance: float = DEFAULT_TOLERANCE
    exact: bool = True
    approximate: bool = False
    basis: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        shapes = {m.shape for m in [*self.projections.values(), *self.isometries.values()]}
        if any(rows != cols for rows, cols in shapes) or len(shapes) > 1:
            raise DimensionMismatch(
                "matrices must be square and share one dimension",
                {"shapes": sorted(list(s) for s in shapes)},
            )

    @property
    def dimension(self) -> int:
        for m in [*self.projections.values(), *self.isometries.values()]:
            return m.shape[0]
        return 0


def _matrix(rows: Any, where: str) -> sympy.Matrix:
    if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
        raise SchemaError(f"{where} must be a list of rows", {"field": where})
    try:
        return sympy.Matrix([[scalars.scalar(entry) for entry in row] for row in rows])
    except ValueError as e:
        raise SchemaError(f"{where}: {e}", {"field": where}) from e


def load_rep_assignment(
    F: Fibration, document: Mapping[str, Any], tolerance: float = DEFAULT_TOLERANCE
) -> RepAssignment:
    """Read `{"projections": {X: rows}, "isometries": {α: rows}}`.

    Entries are strings such as "1/2" or "I". A tolerance of 0 selects
    exact comparison.

    Raises:
        SchemaError: If the document is malformed
        DimensionMismatch: If the matrices do not share one square shape
    """
    E = F.domain
    for key in ("projections", "isometries"):
        if not isinstance(document.get(key), dict):
            logger.error(f"Representation document lacks a {key!r} object")
            raise SchemaError(f"missing {key!r} object", {"field": key})
    projections = {
        E.parse_object(name): _matrix(rows, f"projections.{name}")
        for name, rows in document["projections"].items()
    }
    isometries = {
        E.parse(name): _matrix(rows, f"isometries.{name}") for name, rows in document["isometries"].items()
    }
    return RepAssignment(projections, isometries, tolerance=tolerance, exact=tolerance == 0)


class _Arithmetic:
    """Matrix operations in exact (sympy) or float (numpy) mode."""

    def __init__(self, rep: RepAssignment):
        self.exact = rep.exact
        self.n = rep.dimension

    def convert(self, m: sympy.Matrix) -> Any:
        if self.exact:
            return m
        return np.array(m.evalf(), dtype=complex)

    def zero(self) -> Any:
        return sympy.zeros(self.n, self.n) if self.exact else np.zeros((self.n, self.n), dtype=complex)

    def mul(self, a: Any, b: Any) -> Any:
        return a * b if self.exact else a @ b

    def adjoint(self, m: Any) -> Any:
        return m.H if self.exact else m.conj().T

    def deviation(self, a: Any, b: Any) -> float:
        if self.exact:
            difference = (a - b).applyfunc(sympy.simplify)
            if difference.is_zero_matrix:
                return 0.0
            return max(float(abs(sympy.N(entry))) for entry in difference)
        return float(np.max(np.abs(a - b))) if self.n else 0.0


@dataclass
class _Relation:
    name: str
    deviation: float = 0.0
    failures: list[str] = field(default_factory=list)
    evaluated: int = 0

    def record(self, label: str, deviation: float, tolerance: float) -> None:
        self.evaluated += 1
        self.deviation = max(self.deviation, deviation)
        if deviation > tolerance:
            self.failures.append(label)


def _require(rep: RepAssignment, keys: Sequence[Morphism], F: Fibration, what: str) -> None:
    missing = [F.domain.format(k) for k in keys if k not in rep.isometries]
    if missing:
        raise IncompleteAssignment(f"{what} needs matrices for {', '.join(missing)}", {"missing": missing})


def check_ck_relations(
    F: Fibration,
    rep: RepAssignment,
    degrees: Sequence[Morphism] | None = None,
) -> ValidationReport:
    """Check relations (1) to (6) of a Cuntz-Krieger system.

    Relation 6 is checked for each listed base degree; by default every
    base morphism of a finite base, and every one up to level 2 otherwise.
    Approximate assignments only assert relations 1 and 3.

    Raises:
        DimensionMismatch: If the assignment mixes shapes
        IncompleteAssignment: If a check needs a matrix the assignment lacks
    """
    E, B = F.domain, F.codomain
    ops = _Arithmetic(rep)
    tolerance = 0.0 if rep.exact else rep.tolerance
    P = {x: ops.convert(m) for x, m in rep.projections.items()}
    S = {a: ops.convert(m) for a, m in rep.isometries.items()}
    objects = E.objects if E.is_finite else list(rep.projections)
    missing_objects = [E.format_object(x) for x in objects if x not in P]
    if missing_objects:
        raise IncompleteAssignment(
            f"no projection for {', '.join(missing_objects)}", {"missing": missing_objects}
        )
    if E.is_finite:
        _require(rep, E.morphisms(), F, "a finite category")
    mors = sorted(S, key=E.sort_key)
    fmt = E.format

    orthogonal = _Relation("relation_1")
    for i, x in enumerate(objects):
        for y in objects[i + 1 :]:
            label = f"P_{E.format_object(x)} P_{E.format_object(y)} = 0"
            orthogonal.record(label, ops.deviation(ops.mul(P[x], P[y]), ops.zero()), tolerance)

    multiplicative = _Relation("relation_2")
    for a in mors:
        for b in mors:
            ab = E.try_compose(a, b)
            if ab is None or ab not in S:
                continue
            label = f"S_{fmt(ab)} = S_{fmt(a)} S_{fmt(b)}"
            multiplicative.record(label, ops.deviation(S[ab], ops.mul(S[a], S[b])), tolerance)

    units = _Relation("relation_3")
    identities = [E.identity(x) for x in objects]
    _require(rep, identities, F, "relation 3")
    for x, ident in zip(objects, identities):
        name = E.format_object(x)
        units.record(f"P_{name} = S_{fmt(ident)}", ops.deviation(P[x], S[ident]), tolerance)
        units.record(f"P_{name} = S*_{fmt(ident)}", ops.deviation(P[x], ops.adjoint(S[ident])), tolerance)

    isometric = _Relation("relation_4")
    for a in mors:
        y = E.source(a)
        if y in P:
            label = f"S*_{fmt(a)} S_{fmt(a)} = P_{E.format_object(y)}"
            isometric.record(label, ops.deviation(ops.mul(ops.adjoint(S[a]), S[a]), P[y]), tolerance)

    orthogonal_ranges = _Relation("relation_5")
    for a in mors:
        for b in mors:
            if a != b and F(a) == F(b):
                label = f"S*_{fmt(b)} S_{fmt(a)} = 0"
                orthogonal_ranges.record(label, ops.deviation(ops.mul(ops.adjoint(S[b]), S[a]), ops.zero()), tolerance)

    covering = _Relation("relation_6")
    if degrees is None:
        degrees = B.morphisms(0 if B.is_finite else RELATION6_DEFAULT_LEVEL)
    for x in objects:
        for b in degrees:
            if B.target(b) != F.obj(x):
                continue
            lifts = F.fiber(x, b)
            if rep.approximate and any(a not in S for a in lifts):
                continue
            _require(rep, lifts, F, f"relation 6 at {B.format(b)}")
            total = ops.zero()
            for a in lifts:
                total = total + ops.mul(S[a], ops.adjoint(S[a]))
            label = f"sum over F(a) = {B.format(b)} into {E.format_object(x)}"
            covering.record(label, ops.deviation(total, P[x]), tolerance)

    report = ValidationReport(subject=f"Cuntz-Krieger relations for {F.name}")
    for relation in (orthogonal, multiplicative, units, isometric, orthogonal_ranges, covering):
        asserted = not rep.approximate or relation.name in ("relation_1", "relation_3")
        passed = not relation.failures if asserted else None
        report.add(
            Check(
                relation.name,
                passed,
                exhaustive=E.is_finite and B.is_finite,
                detail=f"{relation.evaluated} instances" + ("" if asserted else ", approximate"),
                payload={"max_deviation": relation.deviation, "failures": relation.failures[:10]},
            )
        )
        if relation.failures and asserted:
            logger.debug(f"{relation.name} fails at {relation.failures[0]}")
    return report


# -- canonical assignments ------------------------------------------------------------


def _diagonal(mask: Sequence[bool]) -> sympy.Matrix:
    matrix = sympy.zeros(len(mask), len(mask))
    for i, on in enumerate(mask):
        if on:
            matrix[i, i] = 1
    return matrix


def _finite_path_basis(F: Fibration, budget: int) -> list[PathOracle]:
    basis: list[PathOracle] = []
    for x in F.domain.objects:
        basis.extend(enumerate_paths(F, x, budget))
    return basis


def _truncated_basis(F: Fibration, truncation: int) -> tuple[list[Morphism], tuple[int, ...]]:
    B = F.codomain
    if not isinstance(B, NkMonoid):
        raise PathSpaceNotFinite(f"no truncation scheme for {B.name}")
    degree = tuple([truncation] * B.k)
    E = F.domain
    basis = [m for x in E.objects for m in E.morphisms_into(x, truncation) if F(m) == degree]
    return basis, degree


def path_representation(
    F: Fibration, budget: int = DEFAULT_BUDGET, truncation: int | None = None
) -> RepAssignment:
    """T_μ x = ind_μ x on paths through s(μ), Q_X the paths ending at X.

    With a finite base the assignment is exact on the whole path space. A
    truncation on an ℕᵏ base stands each path in for its cylinder at degree
    (n, ..., n) and is labeled approximate.

    Raises:
        PathSpaceNotFinite: If the base is infinite and no truncation is given
    """
    E, B = F.domain, F.codomain
    if B.is_finite:
        paths = _finite_path_basis(F, budget)
        n = len(paths)

        def index_of(p: PathOracle) -> int:
            return next(i for i, q in enumerate(paths) if path_equal(p, q).equal)

        projections = {x: _diagonal([p.target == x for p in paths]) for x in E.objects}
        isometries: dict[Morphism, sympy.Matrix] = {}
        for mu in E.morphisms():
            matrix = sympy.zeros(n, n)
            for i, p in enumerate(paths):
                if p.target == E.source(mu):
                    matrix[index_of(ind(F, mu, p)), i] = 1
            isometries[mu] = matrix
        logger.info(f"Path representation of {F.name} on {n} paths")
        return RepAssignment(projections, isometries, tolerance=0.0, exact=True, basis=[p.name for p in paths])
    if truncation is None:
        raise PathSpaceNotFinite(f"{F.name} has an infinite path space; pass a truncation")
    cells, degree = _truncated_basis(F, truncation)
    n = len(cells)
    position = {m: i for i, m in enumerate(cells)}
    objects = sorted({E.target(m) for m in cells}, key=str)
    projections = {x: _diagonal([E.target(m) == x for m in cells]) for x in objects}
    isometries = {}
    for mu in E.morphisms(truncation):
        matrix = sympy.zeros(n, n)
        for i, lam in enumerate(cells):
            if E.target(lam) == E.source(mu):
                whole = E.compose(mu, lam)
                head = lift_factorization(F, whole, [degree, B.subtract(F(whole), degree)])[0]
                matrix[position[head], i] = 1
        isometries[mu] = matrix
    logger.warning(f"Path representation of {F.name} truncated at degree {degree}")
    return RepAssignment(
        projections, isometries, tolerance=0.0, exact=True, approximate=True, basis=[E.format(m) for m in cells]
    )


def regular_group_representation(cat: GroupCategory) -> RepAssignment:
    """Left regular permutation matrices: S_g e_h = e_{gh}."""
    elements = list(cat.elements)
    n = len(elements)
    position = {g: i for i, g in enumerate(elements)}
    isometries = {}
    for g in elements:
        matrix = sympy.zeros(n, n)
        for h in elements:
            matrix[position[cat.compose(g, h)], position[h]] = 1
        isometries[g] = matrix
    return RepAssignment({cat.OBJECT: sympy.eye(n)}, isometries, tolerance=0.0, exact=True, basis=elements)
