"""Milnor number oracle: colength of the Jacobian ideal by linear algebra on jets."""

from __future__ import annotations

import logging
import os

import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from curve import X, Y, parse_polynomial


logger = logging.getLogger(__name__)

MILNOR_DEGREE_CAP = int(os.environ.get("MILNOR_DEGREE_CAP", "512"))


def _monomials(degree: int) -> dict[tuple[int, int], int]:
    index = {}
    for total in range(degree + 1):
        for i in range(total, -1, -1):
            index[(i, total - i)] = len(index)
    return index


def jet_colength(generators: list[sympy.Poly], degree: int) -> int:
    """dim of O / (generators + m^(degree+1)), computed on degree-truncated jets."""
    columns = _monomials(degree)
    rows: dict[int, dict[int, object]] = {}
    for generator in generators:
        terms = [(monom, QQ.from_sympy(coeff)) for monom, coeff in generator.terms() if coeff != 0]
        if not terms:
            continue
        order = min(i + j for (i, j), _ in terms)
        for (a, b) in _monomials(degree - order):
            row = {}
            for (i, j), coeff in terms:
                if i + a + j + b <= degree:
                    row[columns[(i + a, j + b)]] = coeff
            if row:
                rows[len(rows)] = row
    if not rows:
        return len(columns)
    matrix = DomainMatrix(rows, (len(rows), len(columns)), QQ)
    return len(columns) - matrix.rank()


def milnor_number_poly(p: sympy.Poly | str, cap: int = MILNOR_DEGREE_CAP) -> int:
    poly = parse_polynomial(p) if isinstance(p, str) else p
    if poly.eval({X: 0, Y: 0}) != 0:
        raise ValueError("the origin is not on the curve")
    partials = [poly.diff(X), poly.diff(Y)]
    degree = max(2 * poly.total_degree(), 2)
    previous = None
    while degree <= cap:
        value = jet_colength(partials, degree)
        logger.debug("jet degree %d: colength %d", degree, value)
        if value == previous:
            return value
        previous = value
        degree *= 2
    raise ValueError(f"non-isolated or cap exceeded (degree cap {cap})")
