"""Symbolic *-algebra on the spanning words s_α s_β*."""

from __future__ import annotations

import logging
import re
from collections.abc import Callable, Iterable, Mapping, Sequence
from typing import Any

from conduche import scalars
from conduche.category import Morphism, Obj
from conduche.exceptions import MissingFlags, NotComposable, SchemaError
from conduche.fibration import Fibration, ore_match
from conduche.groupoid import GermBasisSet, GroupoidFunction
from conduche.report import Check, ValidationReport, Verdict
from conduche.scalars import Scalar, ScalarLike
from conduche.settings import DEFAULT_BUDGET, DEFAULT_DEPTH

logger = logging.getLogger("conduche")

Word = tuple[Morphism, Morphism]
Completer = Callable[[Morphism, Morphism], tuple[Morphism, Morphism]]


class AlgebraElement:
    """A finite combination of words s_α s_β* with s(α) = s(β)."""

    def __init__(self, fibration: Fibration, terms: Mapping[Word, ScalarLike] | Iterable[tuple[Word, ScalarLike]] = ()):
        self.fibration = fibration
        E = fibration.domain
        merged: dict[Word, Scalar] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (alpha, beta), value in items:
            if E.source(alpha) != E.source(beta):
                raise NotComposable(f"s({E.format(alpha)}) s({E.format(beta)})* needs a shared source")
            merged[(alpha, beta)] = scalars.add(merged.get((alpha, beta), scalars.ZERO), scalars.scalar(value))
        self.terms: dict[Word, Scalar] = {
            word: value
            for word, value in sorted(merged.items(), key=lambda t: (E.sort_key(t[0][0]), E.sort_key(t[0][1])))
            if not scalars.is_zero(value)
        }

    def _new(self, terms: Iterable[tuple[Word, Scalar]]) -> AlgebraElement:
        return AlgebraElement(self.fibration, list(terms))

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        return self._new([*self.terms.items(), *other.terms.items()])

    def __neg__(self) -> AlgebraElement:
        return self.scale(-1)

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self + (-other)

    def __mul__(self, other: AlgebraElement) -> AlgebraElement:
        return multiply(self, other)

    def scale(self, factor: ScalarLike) -> AlgebraElement:
        k = scalars.scalar(factor)
        return self._new((word, scalars.mul(k, v)) for word, v in self.terms.items())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def format(self) -> str:
        E = self.fibration.domain
        if not self.terms:
            return "0"
        parts = []
        for (alpha, beta), value in self.terms.items():
            factors = []
            if not E.is_identity(alpha) or E.is_identity(beta):
                factors.append(f"s({E.format(alpha)})")
            if not E.is_identity(beta):
                factors.append(f"s({E.format(beta)})^*")
            parts.append(f"({value})*{'*'.join(factors)}" if value != 1 else "*".join(factors))
        return " + ".join(parts)

    def to_dict(self) -> dict[str, Any]:
        E = self.fibration.domain
        terms = []
        for (alpha, beta), value in self.terms.items():
            re_part, im_part = scalars.to_parts(value)
            terms.append({"alpha": E.format(alpha), "beta": E.format(beta), "re": re_part, "im": im_part})
        return {"terms": terms}

    def __repr__(self) -> str:
        return f"<AlgebraElement {self.format()}>"


def projection(F: Fibration, x: Obj) -> AlgebraElement:
    """p_X = s_{Id_X}."""
    ident = F.domain.identity(x)
    return AlgebraElement(F, {(ident, ident): 1})


def generator(F: Fibration, alpha: Morphism) -> AlgebraElement:
    """s_α = s_α s_{s(α)}*."""
    E = F.domain
    return AlgebraElement(F, {(alpha, E.identity(E.source(alpha))): 1})


def adjoint_generator(F: Fibration, alpha: Morphism) -> AlgebraElement:
    E = F.domain
    return AlgebraElement(F, {(E.identity(E.source(alpha)), alpha): 1})


def word(F: Fibration, alpha: Morphism, beta: Morphism, coefficient: ScalarLike = 1) -> AlgebraElement:
    return AlgebraElement(F, {(alpha, beta): coefficient})


def multiply(
    a: AlgebraElement,
    b: AlgebraElement,
    completer: Completer | None = None,
    budget: int = DEFAULT_BUDGET,
) -> AlgebraElement:
    """a b, expanding s_β* s_σ as the sum of s_η s_λ* over ore_match(β, σ).

    `completer` replaces the canonical Ore completion of (F(β), F(σ)).
    """
    F = a.fibration
    E = F.domain
    products: list[tuple[Word, Scalar]] = []
    for (alpha, beta), va in a.terms.items():
        for (sigma, tau), vb in b.terms.items():
            if E.target(beta) != E.target(sigma):
                continue
            square = completer(F(beta), F(sigma)) if completer else None
            coefficient = scalars.mul(va, vb)
            for eta, lam in ore_match(F, beta, sigma, completion=square, budget=budget):
                products.append(((E.compose(alpha, eta), E.compose(tau, lam)), coefficient))
    return AlgebraElement(F, products)


def involute(a: AlgebraElement) -> AlgebraElement:
    return a._new(((beta, alpha), scalars.conjugate(v)) for (alpha, beta), v in a.terms.items())


def refine(a: AlgebraElement, c: Morphism, budget: int = DEFAULT_BUDGET) -> AlgebraElement:
    """Rewrite every s_α s_β* as the sum of s_{αγ} s_{βγ}* over F(γ) = c.

    Raises:
        NotComposable: If c does not end at F(s(α)) for some word
    """
    F = a.fibration
    E, B = F.domain, F.codomain
    refined: list[tuple[Word, Scalar]] = []
    for (alpha, beta), value in a.terms.items():
        x = E.source(alpha)
        if B.target(c) != F.obj(x):
            raise NotComposable(f"{B.format(c)} does not end at F({E.format_object(x)})")
        refined.extend(
            ((E.compose(alpha, g), E.compose(beta, g)), value) for g in F.fiber(x, c, budget)
        )
    return a._new(refined)


def upsilon(a: AlgebraElement, budget: int = DEFAULT_BUDGET) -> GroupoidFunction:
    """s_α s_β* ↦ 1_{Z(α, β)}, extended linearly."""
    F = a.fibration
    return GroupoidFunction(F, [(GermBasisSet(F, alpha, beta), v) for (alpha, beta), v in a.terms.items()], budget)


def equal(a: AlgebraElement, b: AlgebraElement, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Compare through a common refinement of both sides."""
    if a.terms == b.terms:
        return Verdict.EQUAL
    verdict = upsilon(a, budget).equals(upsilon(b, budget))
    if verdict is Verdict.UNKNOWN:
        logger.warning(f"Could not decide {a.format()} = {b.format()}")
    return verdict


# -- expression parsing ------------------------------------------------------------

_FACTOR = re.compile(r"^(s|p)\((.+)\)(\^[*'])?$")


def _split_top(text: str, separators: str) -> list[tuple[str, str]]:
    """Split at separators outside parentheses; each piece keeps the separator before it."""
    pieces: list[tuple[str, str]] = []
    depth = 0
    start = 0
    sign = ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in separators and (i == 0 or text[i - 1] != "^"):
            if text[start:i]:
                pieces.append((sign, text[start:i]))
            sign, start = ch, i + 1
    if text[start:]:
        pieces.append((sign, text[start:]))
    return pieces


def parse_expression(F: Fibration, text: str) -> AlgebraElement:
    """Parse sums of products such as `2*s(a)*s(b)^*` or `s(e1)*s(e1)^' - p(v)`.

    Raises:
        SchemaError: If a factor is neither a coefficient, s(..), s(..)^* nor p(..)
    """
    E = F.domain
    total = AlgebraElement(F)
    for sign, term in _split_top(text.replace(" ", ""), "+-"):
        factors = [piece for _, piece in _split_top(term, "*")]
        product: AlgebraElement | None = None
        coefficient = scalars.scalar(-1 if sign == "-" else 1)
        for factor in factors:
            match = _FACTOR.match(factor)
            if match is None:
                try:
                    coefficient = scalars.mul(coefficient, scalars.scalar(factor))
                except ValueError as e:
                    raise SchemaError(f"Cannot read {factor!r} in {text!r}", {"field": "expression"}) from e
                continue
            kind, name, star = match.groups()
            if kind == "p":
                element = projection(F, E.parse_object(name))
            elif star:
                element = adjoint_generator(F, E.parse(name))
            else:
                element = generator(F, E.parse(name))
            product = element if product is None else multiply(product, element)
        if product is None:
            raise SchemaError(f"Term {term!r} has no generator", {"field": "expression"})
        total = total + product.scale(coefficient)
    return total


# -- injectivity --------------------------------------------------------------------


def injectivity_probe(
    F: Fibration,
    pairs: Sequence[tuple[Morphism, Morphism]],
    depth: int = DEFAULT_DEPTH,
    budget: int = DEFAULT_BUDGET,
) -> ValidationReport:
    """Check that distinct generators stay distinct.

    With a right cancellative base every distinct pair must compare
    not_equal. Otherwise a collapse witness a with F(α)a = F(β)a is
    searched and reported.

    Raises:
        MissingFlags: If the base is not flagged left cancellative
    """
    E, B = F.domain, F.codomain
    if F.flags.left_cancellative is not True:
        raise MissingFlags(f"{F.name} needs a base flagged left cancellative", {"flag": "left_cancellative"})
    right_cancellative = F.flags.right_cancellative is True
    report = ValidationReport(subject=f"injectivity of {F.name}")
    for alpha, beta in pairs:
        name = f"s({E.format(alpha)}) vs s({E.format(beta)})"
        verdict = equal(generator(F, alpha), generator(F, beta), budget)
        if alpha == beta:
            report.add(Check(name, verdict is Verdict.EQUAL, detail=verdict.value))
            continue
        if right_cancellative:
            report.add(Check(name, verdict is Verdict.NOT_EQUAL, detail=verdict.value))
            continue
        fa, fb = F(alpha), F(beta)
        witness = None
        if fa != fb and B.source(fa) == B.source(fb):
            witness = next(
                (
                    a
                    for a in B.morphisms_into(B.source(fa), 0 if B.is_finite else depth)
                    if B.compose(fa, a) == B.compose(fb, a)
                ),
                None,
            )
        payload = {"collapse": B.format(witness)} if witness is not None else {}
        report.add(
            Check(
                name,
                witness is None and verdict is not Verdict.EQUAL,
                None if B.is_finite else depth,
                exhaustive=B.is_finite,
                detail=verdict.value,
                payload=payload,
            )
        )
    return report
