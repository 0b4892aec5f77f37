"""Exact scalars: rationals extended by declared formal symbols.

tau stands for 2*pi*i and is the only invertible symbol. Values are stored as a
polynomial numerator over QQ and a non-negative tau shift k, meaning
numerator * tau**(-k), normalized so that equal values share one form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import cmath
import logging
from typing import Any, Mapping

import sympy
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring


logger = logging.getLogger(__name__)

TAU = "tau"
XI = "xi"
U = "u"
RESERVED = (TAU, XI, U)
DEFAULT_SYMBOLS = ("rho", "log_lambda", "log_mu")
TAU_INDEX = 0
XI_INDEX = 1
U_INDEX = 2


@lru_cache(maxsize=None)
def _ring_for(symbols: tuple[str, ...]):
    names = [sympy.Symbol(name) for name in RESERVED + symbols]
    poly_ring, *_ = ring(names, QQ, lex)
    return poly_ring


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...] = DEFAULT_SYMBOLS

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name in self.symbols:
            if not name.isidentifier():
                raise ValueError(f"symbol name {name!r} is not an identifier")
            if name in RESERVED:
                raise ValueError(f"symbol name {name!r} is reserved")
            if name in seen:
                raise ValueError(f"symbol {name!r} declared twice")
            seen.add(name)

    @property
    def ring(self):
        return _ring_for(self.symbols)

    def extended(self, *names: str) -> Alphabet:
        extra = tuple(name for name in names if name not in self.symbols)
        return Alphabet(self.symbols + extra)

    def index(self, name: str) -> int:
        if name in RESERVED:
            return RESERVED.index(name)
        if name not in self.symbols:
            raise ValueError(f"undeclared symbol {name!r}")
        return len(RESERVED) + self.symbols.index(name)

    @property
    def zero(self) -> Scalar:
        return Scalar(self, self.ring.zero)

    @property
    def one(self) -> Scalar:
        return Scalar(self, self.ring.one)

    @property
    def tau(self) -> Scalar:
        return Scalar(self, self.ring.gens[TAU_INDEX])

    def symbol(self, name: str) -> Scalar:
        if name in (XI, U):
            raise ValueError(f"{name!r} is an edge variable, not a scalar symbol")
        return Scalar(self, self.ring.gens[self.index(name)])

    def scalar(self, value: Any) -> Scalar:
        if isinstance(value, LaurentPoly):
            return Scalar._coerce_from(self, value)
        if isinstance(value, str):
            return self.parse(value)
        fraction = Fraction(value)
        return Scalar(self, self.ring.ground_new(QQ(fraction.numerator, fraction.denominator)))

    def parse(self, text: str) -> Scalar:
        """Parse strings such as "7*rho/156" or "rho/tau" into a Scalar."""
        names = {name: sympy.Symbol(name) for name in RESERVED + self.symbols}
        try:
            expr = sympy.sympify(text.replace("^", "**"), locals=names)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse scalar {text!r}") from exc
        unknown = {str(s) for s in expr.free_symbols} - set(self.symbols) - {TAU}
        if unknown:
            raise ValueError(f"undeclared symbol(s) {sorted(unknown)} in {text!r}")
        numerator, denominator = sympy.fraction(sympy.together(expr))
        try:
            num = Scalar(self, self.ring.from_expr(sympy.expand(numerator)))
            den = Scalar(self, self.ring.from_expr(sympy.expand(denominator)))
        except (ValueError, sympy.polys.polyerrors.CoercionFailed) as exc:
            raise ValueError(f"cannot parse scalar {text!r}") from exc
        return num / den


def _coeff_fraction(coeff) -> Fraction:
    return Fraction(int(coeff.numerator), int(coeff.denominator))


class LaurentPoly:
    """Polynomial over QQ in (tau, xi, u, symbols...) with tau-Laurent shift."""

    __slots__ = ("alphabet", "poly", "shift")
    _rank = 0

    def __init__(self, alphabet: Alphabet, poly, shift: int = 0) -> None:
        if poly.ring is not alphabet.ring:
            poly = alphabet.ring.from_dict(dict(poly.items()))
        if poly.is_zero:
            shift = 0
        elif shift < 0:
            poly = _tau_multiply(poly, -shift)
            shift = 0
        elif shift > 0:
            lowest = min(monom[TAU_INDEX] for monom in poly.keys())
            cancel = min(lowest, shift)
            if cancel:
                poly = _tau_multiply(poly, -cancel)
                shift -= cancel
        self.alphabet = alphabet
        self.poly = poly
        self.shift = shift
        self._validate()

    def _validate(self) -> None:
        pass

    @classmethod
    def _coerce_from(cls, alphabet: Alphabet, value: LaurentPoly):
        if value.alphabet != alphabet:
            raise ValueError("mixing scalars from different alphabets")
        return cls(alphabet, value.poly, value.shift)

    def _coerce(self, other: Any) -> LaurentPoly | None:
        if isinstance(other, LaurentPoly):
            if other.alphabet != self.alphabet:
                raise ValueError("mixing scalars from different alphabets")
            return other
        if isinstance(other, (int, Fraction)):
            return self.alphabet.scalar(other)
        return None

    def _build(self, other: LaurentPoly, poly, shift: int) -> LaurentPoly:
        cls = type(self) if self._rank >= other._rank else type(other)
        return cls(self.alphabet, poly, shift)

    def _aligned(self, other: LaurentPoly):
        shift = max(self.shift, other.shift)
        left = _tau_multiply(self.poly, shift - self.shift)
        right = _tau_multiply(other.poly, shift - other.shift)
        return left, right, shift

    def __add__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right, shift = self._aligned(other)
        return self._build(other, left + right, shift)

    __radd__ = __add__

    def __sub__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right, shift = self._aligned(other)
        return self._build(other, left - right, shift)

    def __rsub__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self):
        return type(self)(self.alphabet, -self.poly, self.shift)

    def __mul__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._build(other, self.poly * other.poly, self.shift + other.shift)

    __rmul__ = __mul__

    def unit_parts(self) -> tuple[Fraction, int] | None:
        """(c, k) when the value is c * tau**k, else None."""
        if len(self.poly) != 1:
            return None
        (monom, coeff), = self.poly.items()
        if any(monom[1:]):
            return None
        return _coeff_fraction(coeff), monom[TAU_INDEX] - self.shift

    def is_unit(self) -> bool:
        return self.unit_parts() is not None

    def __truediv__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by zero Scalar")
        parts = other.unit_parts()
        if parts is None:
            raise ValueError(f"division by non-unit Scalar {other}")
        coeff, power = parts
        inverse = QQ(coeff.denominator, coeff.numerator)
        return type(self)(self.alphabet, self.poly * inverse, self.shift + power)

    def __rtruediv__(self, other: Any):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, exponent: int):
        if exponent < 0:
            return (self.alphabet.one / self) ** (-exponent)
        return type(self)(self.alphabet, self.poly**exponent, self.shift * exponent)

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    def __bool__(self) -> bool:
        return not self.poly.is_zero

    def is_rational(self) -> bool:
        return self.poly.is_zero or (self.poly.is_ground and self.shift == 0)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational number")
        if self.poly.is_zero:
            return Fraction(0)
        return _coeff_fraction(next(iter(self.poly.values())))

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, LaurentPoly):
            if other.alphabet != self.alphabet:
                return False
        elif isinstance(other, (int, Fraction)):
            other = self.alphabet.scalar(other)
        else:
            return NotImplemented
        return self.shift == other.shift and self.poly == other.poly

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.to_fraction())
        return hash((self.alphabet.symbols, frozenset(self.poly.items()), self.shift))

    def terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Monomials with the tau exponent already shifted (may be negative)."""
        out = []
        for monom, coeff in sorted(self.poly.items()):
            out.append(((monom[TAU_INDEX] - self.shift,) + tuple(monom[1:]), _coeff_fraction(coeff)))
        return out

    def as_expr(self):
        expr = self.poly.as_expr()
        if self.shift:
            expr = expr * sympy.Symbol(TAU) ** (-self.shift)
        return expr

    def __str__(self) -> str:
        return sympy.sstr(self.as_expr())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"

    def subs(self, name: str, value: Any):
        """Substitute a symbol (not tau) by another value of the same alphabet."""
        index = self.alphabet.index(name)
        if index == TAU_INDEX:
            raise ValueError("tau cannot be substituted")
        replacement = self._coerce(value)
        gens = self.alphabet.ring.gens
        result = type(self)(self.alphabet, self.alphabet.ring.zero)
        for monom, coeff in self.terms():
            kept = dict(enumerate(monom))
            power = kept.pop(index)
            term_poly = self.alphabet.ring.ground_new(QQ(coeff.numerator, coeff.denominator))
            for position, exp in kept.items():
                if position != TAU_INDEX and exp:
                    term_poly = term_poly * gens[position] ** exp
            term = type(self)(self.alphabet, term_poly, -kept[TAU_INDEX])
            result = result + term * replacement**power
        return result

    def evaluate(self, values: Mapping[str, complex] | None = None) -> complex:
        """Numeric value with tau = 2*pi*i and the given symbol values."""
        values = dict(values or {})
        tau_value = 2j * cmath.pi
        names = RESERVED + self.alphabet.symbols
        total = 0j
        for monom, coeff in self.terms():
            term = complex(coeff) * tau_value ** monom[TAU_INDEX]
            for position, exp in enumerate(monom[1:], start=1):
                if not exp:
                    continue
                name = names[position]
                if name not in values:
                    raise ValueError(f"no numeric value for symbol {name!r}")
                term *= complex(values[name]) ** exp
            total += term
        return total


def _tau_multiply(poly, power: int):
    if power == 0:
        return poly
    if power > 0:
        return poly * poly.ring.gens[TAU_INDEX] ** power
    moved = {}
    for monom, coeff in poly.items():
        moved[(monom[TAU_INDEX] + power,) + tuple(monom[1:])] = coeff
    return poly.ring.from_dict(moved)


class Scalar(LaurentPoly):
    __slots__ = ()
    _rank = 0

    def _validate(self) -> None:
        for monom in self.poly.keys():
            if monom[XI_INDEX] or monom[U_INDEX]:
                raise ValueError("a Scalar cannot depend on the edge variables xi or u")


DEFAULT_ALPHABET = Alphabet()


def scalar_normalize(value: LaurentPoly) -> Scalar:
    """Return the canonical form of a Scalar; idempotent."""
    normal = Scalar(value.alphabet, value.poly, value.shift)
    logger.debug("normalized %s", normal)
    return normal


def to_scalar(value: Any, alphabet: Alphabet = DEFAULT_ALPHABET) -> Scalar:
    if isinstance(value, Scalar):
        return value
    return alphabet.scalar(value)
