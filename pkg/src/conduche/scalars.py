"""Exact scalar coefficients.

Coefficients are sympy expressions built from rationals, `I` and, when a
caller asks for them, named roots of unity. No floats enter the algebraic
core.
"""

from __future__ import annotations

from typing import Union

import sympy

Scalar = sympy.Expr
ScalarLike = Union[int, str, sympy.Expr]

ZERO: Scalar = sympy.Integer(0)
ONE: Scalar = sympy.Integer(1)


def scalar(value: ScalarLike) -> Scalar:
    """Coerce an int, a string such as "1/2" or "3 - I", or an expression.

    Raises:
        ValueError: If the value is a float or does not parse
    """
    if isinstance(value, float):
        raise ValueError(f"Refusing float coefficient {value!r}; use a rational string")
    if isinstance(value, sympy.Expr):
        return sympy.expand(value)
    try:
        parsed = sympy.sympify(value, rational=True)
    except (sympy.SympifyError, TypeError) as e:
        raise ValueError(f"Cannot parse coefficient {value!r}") from e
    if not isinstance(parsed, sympy.Expr) or parsed.free_symbols:
        raise ValueError(f"Coefficient {value!r} is not a number")
    return sympy.expand(parsed)


def root_of_unity(n: int, k: int = 1) -> Scalar:
    """exp(2πik/n) as an exact expression."""
    return sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(k, n))


def add(a: Scalar, b: Scalar) -> Scalar:
    return sympy.expand(a + b)


def mul(a: Scalar, b: Scalar) -> Scalar:
    return sympy.expand(a * b)


def conjugate(a: Scalar) -> Scalar:
    return sympy.expand(sympy.conjugate(a))


def is_zero(a: Scalar) -> bool:
    a = sympy.expand(a)
    if a == 0:
        return True
    if a.is_Number:
        return False
    return bool(a.equals(0))


def to_parts(a: Scalar) -> tuple[str, str]:
    """Real and imaginary parts as strings, for JSON dumps."""
    re, im = sympy.expand(a).as_real_imag()
    return str(re), str(im)


def from_parts(re: str, im: str = "0") -> Scalar:
    return scalar(f"({re}) + ({im})*I")
