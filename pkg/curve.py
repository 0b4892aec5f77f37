"""Plane curve singularities given by branch combinatorics."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import json
import logging
from math import gcd, lcm, prod
from pathlib import Path
import re
from typing import Any, Iterable

import sympy


logger = logging.getLogger(__name__)

X, Y = sympy.symbols("x y")
FRACTION_PATTERN = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


class SpecParseError(ValueError):
    pass


PuiseuxPairs = list[tuple[int, int]]


def parse_fraction(text: Any) -> Fraction:
    if isinstance(text, bool):
        raise SpecParseError(f"not a fraction: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not FRACTION_PATTERN.match(text):
        raise SpecParseError(f"fractions must be written as 'a/b', got {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad fraction {text!r}") from exc


@dataclass(frozen=True)
class BranchSpec:
    exponents: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        exponents = tuple(Fraction(e) for e in self.exponents)
        object.__setattr__(self, "exponents", exponents)
        previous = Fraction(1)
        denominators = 1
        for exponent in exponents:
            if exponent <= previous:
                raise ValueError(
                    f"non-characteristic exponent sequence: {exponent} does not exceed {previous}"
                )
            new_lcm = lcm(denominators, exponent.denominator)
            if new_lcm == denominators:
                raise ValueError(
                    f"non-characteristic exponent sequence: {exponent} adds no new denominator factor"
                )
            previous = exponent
            denominators = new_lcm

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> BranchSpec:
        return cls(exponents_from_pairs(list(pairs)))

    @property
    def is_smooth(self) -> bool:
        return not self.exponents

    @property
    def multiplicity(self) -> int:
        """Lcm of the exponent denominators, i.e. the branch multiplicity."""
        return lcm(1, *(e.denominator for e in self.exponents))

    def characteristic(self) -> list[int]:
        """The integers beta_1 < ... < beta_g with beta_i = m * e_i."""
        m = self.multiplicity
        return [int(e * m) for e in self.exponents]

    def to_json(self) -> dict[str, Any]:
        return {"exponents": [f"{e.numerator}/{e.denominator}" for e in self.exponents]}


def puiseux_pairs_from_exponents(branch: BranchSpec) -> PuiseuxPairs:
    pairs: PuiseuxPairs = []
    previous_lcm = 1
    for exponent in branch.exponents:
        new_lcm = lcm(previous_lcm, exponent.denominator)
        pairs.append((new_lcm // previous_lcm, int(exponent * new_lcm)))
        previous_lcm = new_lcm
    return pairs


def exponents_from_pairs(pairs: PuiseuxPairs) -> tuple[Fraction, ...]:
    exponents = []
    running = 1
    for m_i, n_i in pairs:
        if m_i < 2 or n_i < 1:
            raise ValueError(f"non-characteristic exponent sequence: bad pair ({m_i}, {n_i})")
        if gcd(m_i, n_i) != 1:
            raise ValueError(f"non-characteristic exponent sequence: pair ({m_i}, {n_i}) not coprime")
        running *= m_i
        exponents.append(Fraction(n_i, running))
    branch = BranchSpec(tuple(exponents))
    if puiseux_pairs_from_exponents(branch) != list(pairs):
        raise ValueError(f"non-characteristic exponent sequence: pairs {pairs} do not round-trip")
    return branch.exponents


@dataclass(frozen=True)
class MonstranceData:
    m: int
    k: int

    @property
    def order(self) -> int:
        return self.m * self.k

    @property
    def flagged(self) -> bool:
        """k <= m on a singular branch, outside the m < k setting."""
        return self.m > 1 and self.k <= self.m


def monstrance_order(branch: BranchSpec) -> MonstranceData:
    pairs = puiseux_pairs_from_exponents(branch)
    if not pairs:
        return MonstranceData(1, 1)
    m = prod(m_i for m_i, _ in pairs)
    k = pairs[0][1] * prod(m_i for m_i, _ in pairs[1:])
    if k <= m:
        logger.warning("branch %s has k=%d <= m=%d; monstrance taken as written", branch.exponents, k, m)
    return MonstranceData(m, k)


def semigroup_generators(branch: BranchSpec) -> list[int]:
    """Minimal generators of the value semigroup, starting with the multiplicity."""
    m = branch.multiplicity
    betas = branch.characteristic()
    if not betas:
        return [1]
    pairs = puiseux_pairs_from_exponents(branch)
    generators = [m, betas[0]]
    for i in range(1, len(betas)):
        m_i = pairs[i - 1][0]
        generators.append(m_i * generators[-1] - betas[i - 1] + betas[i])
    return generators


def parse_polynomial(text: str):
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={"x": X, "y": Y})
        poly = sympy.Poly(expr, X, Y, domain="QQ")
    except (sympy.SympifyError, SyntaxError, TypeError, sympy.polys.polyerrors.PolynomialError) as exc:
        raise SpecParseError(f"cannot parse polynomial {text!r}") from exc
    if poly.is_zero:
        raise SpecParseError("polynomial is zero")
    return poly


def is_reduced(poly) -> bool:
    """Square-free test: p, dp/dx and dp/dy share no factor of positive degree."""
    common = sympy.gcd(poly, sympy.gcd(poly.diff(X), poly.diff(Y)))
    return common.total_degree() == 0


@dataclass(frozen=True)
class CurveSpec:
    branches: tuple[BranchSpec, ...]
    intersections: tuple[tuple[int, ...], ...] = ()
    polynomial: str | None = None
    _poly: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", tuple(self.branches))
        r = len(self.branches)
        if r == 0:
            raise ValueError("a curve needs at least one branch")
        matrix = tuple(tuple(int(v) for v in row) for row in self.intersections)
        if not matrix:
            matrix = tuple(tuple(0 for _ in range(r)) for _ in range(r))
        object.__setattr__(self, "intersections", matrix)
        if len(matrix) != r or any(len(row) != r for row in matrix):
            raise ValueError(f"intersection matrix must be {r}x{r}")
        for i in range(r):
            for j in range(r):
                if matrix[i][j] != matrix[j][i]:
                    raise ValueError(f"intersection matrix not symmetric at ({i}, {j})")
                if i != j and matrix[i][j] < 1:
                    raise ValueError(f"intersection multiplicity I[{i}][{j}] must be >= 1")
        if self.polynomial is not None:
            poly = parse_polynomial(self.polynomial)
            if not is_reduced(poly):
                raise ValueError("polynomial is not reduced (square-free)")
            object.__setattr__(self, "_poly", poly)

    @property
    def r(self) -> int:
        return len(self.branches)

    @property
    def poly(self):
        return self._poly

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "branches": [b.to_json() for b in self.branches],
            "intersections": [list(row) for row in self.intersections],
        }
        if self.polynomial is not None:
            data["polynomial"] = self.polynomial
        return data

    @classmethod
    def from_json(cls, data: Any) -> CurveSpec:
        if not isinstance(data, dict) or "branches" not in data:
            raise SpecParseError("curve spec must be an object with a 'branches' list")
        try:
            branches = tuple(
                BranchSpec(tuple(parse_fraction(e) for e in item.get("exponents", [])))
                for item in data["branches"]
            )
            intersections = tuple(tuple(int(v) for v in row) for row in data.get("intersections", []))
        except SpecParseError:
            raise
        except (AttributeError, TypeError, ValueError) as exc:
            raise SpecParseError(f"malformed curve spec: {exc}") from exc
        polynomial = data.get("polynomial")
        if polynomial is not None and not isinstance(polynomial, str):
            raise SpecParseError("polynomial must be a string")
        try:
            return cls(branches, intersections, polynomial)
        except SpecParseError:
            raise
        except ValueError as exc:
            raise SpecParseError(str(exc)) from exc


def load_curve(path: Path) -> CurveSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecParseError(f"cannot read curve spec {path}: {exc}") from exc
    return CurveSpec.from_json(data)


def milnor_from_branch_data(curve: CurveSpec) -> int:
    # resolution imports this module; import lazily
    from resolution import delta_invariant, shared_depths

    shared_depths(curve)
    total_delta = sum(delta_invariant(b) for b in curve.branches)
    contacts = sum(curve.intersections[i][j] for i in range(curve.r) for j in range(i + 1, curve.r))
    mu = 2 * (total_delta + contacts) - curve.r + 1
    logger.info("milnor number from branch data: %d", mu)
    return mu


def node() -> CurveSpec:
    return CurveSpec((BranchSpec(), BranchSpec()), ((0, 1), (1, 0)), "x*y")


def cusp() -> CurveSpec:
    return CurveSpec((BranchSpec((Fraction(3, 2),)),), ((0,),), "y^2-x^3")


def tacnode() -> CurveSpec:
    return CurveSpec((BranchSpec(), BranchSpec()), ((0, 2), (2, 0)), "y^2-x^4")


def f_lambda() -> CurveSpec:
    """The branch x^(3/2) + sqrt(lambda) x^(7/4), polynomial at lambda = 1."""
    return CurveSpec(
        (BranchSpec((Fraction(3, 2), Fraction(7, 4))),),
        ((0,),),
        "(y^2-x^3)^2-4*x^5*y-x^7",
    )
