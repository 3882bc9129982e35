"""Exceptions for the conduche library."""

from __future__ import annotations

from typing import Any


class ConducheException(Exception):
    """Base exception for all category, fibration and algebra errors."""

    def __init__(self, message: str, payload: dict[str, Any] | None = None):
        self.message = message
        self.payload = payload or {}
        super().__init__(f"{type(self).__name__}: {message}")


class NotComposable(ConducheException):
    """Raised when the source of the left morphism is not the target of the right one."""

    pass


class UnknownMorphism(ConducheException):
    """Raised when a morphism id does not belong to the category."""

    pass


class UnknownObject(ConducheException):
    """Raised when an object id does not belong to the category."""

    pass


class NotAGroup(ConducheException):
    """Raised when a multiplication table fails the group axioms."""

    pass


class NotAPoset(ConducheException):
    """Raised when a relation is not a partial order."""

    pass


class InconsistentSquares(ConducheException):
    """Raised when k-graph factorization squares are not bijections."""

    pass


class DanglingEdge(ConducheException):
    """Raised when an edge or square refers to an unknown vertex or edge."""

    pass


class NonFunctorialRestriction(ConducheException):
    """Raised when presheaf restriction maps do not compose."""

    pass


class BaseNotOre(ConducheException):
    """Raised when a construction needs a right Ore base and does not get one."""

    pass


class LiftError(ConducheException):
    """A factorization did not lift to exactly one factorization."""

    pass


class NoLift(LiftError):
    """Raised when a factorization has no lift."""

    pass


class MultipleLifts(LiftError):
    """Raised when a factorization has more than one lift."""

    pass


class BadFactorization(ConducheException):
    """Raised when the given parts do not compose to the image of the morphism."""

    pass


class FiberInfinite(ConducheException):
    """Raised when fiber enumeration exceeds its budget."""

    pass


class NotACospan(ConducheException):
    """Raised when two morphisms do not share a target."""

    pass


class NoCompletion(ConducheException):
    """Raised when a bounded search finds no commuting square."""

    pass


class MissingFlags(ConducheException):
    """Raised when an operation needs validation flags that are not set."""

    pass


class IncoherentOracle(ConducheException):
    """Raised when a path oracle is not a coherent section."""

    pass


class NoSplittingFound(ConducheException):
    """Raised when the bounded splitting search fails.

    This is not a proof that no splitting exists.
    """

    pass


class PathNotInCylinder(ConducheException):
    """Raised when a path does not pass through the required morphism."""

    pass


class PathSpaceNotFinite(ConducheException):
    """Raised when an operation needs a finite path space."""

    pass


class OrbitBudgetExceeded(ConducheException):
    """Raised when a groupoid orbit is larger than the allowed budget."""

    pass


class DimensionMismatch(ConducheException):
    """Raised when representation matrices are not square of a shared size."""

    pass


class IncompleteAssignment(ConducheException):
    """Raised when a representation lacks a matrix needed by a relation check."""

    pass


class SchemaError(ConducheException):
    """Raised when an input document does not match the expected layout."""

    pass


class NotASpan(ConducheException):
    """Raised when two morphisms do not share a source."""

    pass
