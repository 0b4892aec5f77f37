"""Numeric epsilon-integrals near one double point, checked against the exact calculus.

Local picture: h(x, y) = x*y, D_k = {y = 0} with coordinate x, D_l = {x = 0}
with coordinate y. The form is

    rho dx/x + psi_k(x) dx       on D_k
    -rho dy/y + psi_l(y) dy      on D_l
    H(xi, u) dxi, H = -rho u + h0(xi)   on the edge

and the path runs along D_k for tau in [-1, 0], then along D_l for tau in
[0, 1]. The truncated integral at eps replaces the crossing by the integral of
H over xi with u read in coordinates adapted to the base vector, so a path
whose approach derivatives multiply to lambda is a path over lambda d/dt.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
import os
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import integrate

from paths import PeriodValue
from scalar import DEFAULT_ALPHABET, Alphabet


logger = logging.getLogger(__name__)


def parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as exc:
        raise ValueError(f"bad epsilon grid {text!r}") from exc
    if not grid or any(not 0 < eps < 1 for eps in grid):
        raise ValueError(f"epsilon grid entries must lie in (0, 1): {text!r}")
    return grid


EPSILON_GRID = parse_grid(os.environ.get("EPSILON_GRID", "1e-2,1e-3,1e-4,1e-5"))
EPSILON_TOLERANCE = float(os.environ.get("EPSILON_TOLERANCE", "1e-6"))

QUAD_OPTIONS = {"limit": 200, "epsabs": 1e-13, "epsrel": 1e-12}

K_ANCHOR = ("arc", 0, 0)
L_ANCHOR = ("arc", 1, 0)


def _fractions(values: Sequence[Any]) -> tuple[Fraction, ...]:
    return tuple(Fraction(str(v)) if isinstance(v, str) else Fraction(v) for v in values)


def _poly(coefficients: Sequence[Fraction]) -> Callable[[float], float]:
    floats = [float(c) for c in coefficients]
    return lambda z: sum(c * z**j for j, c in enumerate(floats))


def _poly_integral(coefficients: Sequence[Fraction], a: float, b: float) -> float:
    return sum(float(c) * (b ** (j + 1) - a ** (j + 1)) / (j + 1) for j, c in enumerate(coefficients))


@dataclass(frozen=True)
class LocalScenario:
    """Coefficients are ascending powers: psi_k = sum psi_k[j] x^j, and so on."""

    rho: Fraction = Fraction(1)
    psi_k: tuple[Fraction, ...] = ()
    psi_l: tuple[Fraction, ...] = ()
    h0: tuple[Fraction, ...] = ()

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> LocalScenario:
        unknown = set(data) - {"rho", "psi_k", "psi_l", "h0"}
        if unknown:
            raise ValueError(f"unknown local scenario keys: {sorted(unknown)}")
        try:
            return cls(
                _fractions([data.get("rho", 1)])[0],
                _fractions(data.get("psi_k", [])),
                _fractions(data.get("psi_l", [])),
                _fractions(data.get("h0", [])),
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed local scenario: {exc}") from exc

    @property
    def crossing_constant(self) -> Fraction:
        """int_0^1 h0(xi) dxi."""
        return sum((c / (j + 1) for j, c in enumerate(self.h0)), Fraction(0))

    def omega_k(self, x: float) -> float:
        return float(self.rho) / x + _poly(self.psi_k)(x)

    def omega_l(self, y: float) -> float:
        return -float(self.rho) / y + _poly(self.psi_l)(y)

    def h(self, xi: float, u: float) -> float:
        return -float(self.rho) * u + _poly(self.h0)(xi)


@dataclass(frozen=True)
class NumericPath:
    x: Callable[[float], float]
    dx: Callable[[float], float]
    y: Callable[[float], float]
    dy: Callable[[float], float]
    label: str = ""

    @property
    def approach(self) -> tuple[float, float]:
        return -self.dx(0.0), self.dy(0.0)

    @property
    def start(self) -> float:
        return self.x(-1.0)

    @property
    def end(self) -> float:
        return self.y(1.0)

    def check(self) -> None:
        a, b = self.approach
        if a <= 0 or b <= 0:
            raise ValueError(f"one-sided derivatives must point into the double point, got a={a}, b={b}")

    @classmethod
    def linear(cls, a: float = 1.0, b: float = 1.0) -> NumericPath:
        return cls(lambda t: -a * t, lambda t: -a, lambda t: b * t, lambda t: b, f"linear(a={a}, b={b})")

    @classmethod
    def over(cls, lam: float) -> NumericPath:
        """Unit endpoints with approach derivatives multiplying to lam: a path over lam d/dt."""
        if lam <= 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        return cls(
            lambda t: -lam * t - (lam - 1) * t * t,
            lambda t: -lam - 2 * (lam - 1) * t,
            lambda t: t,
            lambda t: 1.0,
            f"over(lambda={lam})",
        )

    @classmethod
    def reparametrized(cls, a: float = 1.0, b: float = 1.0, kappa: float = 0.5) -> NumericPath:
        """Same endpoints and one-sided derivatives as linear(a, b), bent by kappa >= 0."""
        return cls(
            lambda t: -a * t + kappa * t * t * (1 + t),
            lambda t: -a + kappa * (2 * t + 3 * t * t),
            lambda t: b * t + kappa * t * t * (1 - t),
            lambda t: b + kappa * (2 * t - 3 * t * t),
            f"bent(a={a}, b={b}, kappa={kappa})",
        )


def _quad(function: Callable[[float], float], lower: float, upper: float) -> float:
    value, _, _info, *rest = integrate.quad(function, lower, upper, full_output=1, **QUAD_OPTIONS)
    if rest:
        raise ValueError(f"quadrature did not converge on [{lower}, {upper}]: {rest[0]}")
    return value


def numeric_epsilon_integral(scenario: LocalScenario, path: NumericPath, eps: float) -> float:
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    path.check()
    a, b = path.approach
    on_k = _quad(lambda t: scenario.omega_k(path.x(t)) * path.dx(t), -1.0, -eps)
    on_l = _quad(lambda t: scenario.omega_l(path.y(t)) * path.dy(t), eps, 1.0)
    u = math.log(path.x(-eps) * path.y(eps)) - math.log(a * b)
    crossing = _quad(lambda xi: scenario.h(xi, u), 0.0, 1.0)
    return on_k + crossing + on_l


def symbolic_value(scenario: LocalScenario, alphabet: Alphabet = DEFAULT_ALPHABET) -> PeriodValue:
    """Crossing constant plus rho log(lambda) plus the two arc periods."""
    crossing = PeriodValue.constant(scenario.crossing_constant, alphabet)
    shift = PeriodValue.constant(alphabet.symbol("rho") * alphabet.symbol("log_lambda"), alphabet)
    arcs = PeriodValue.symbol(K_ANCHOR, ("omega_k",), alphabet) + PeriodValue.symbol(L_ANCHOR, ("omega_l",), alphabet)
    return crossing + shift + arcs


def arc_periods(scenario: LocalScenario, path: NumericPath) -> dict[tuple, float]:
    """Arc periods regularized at the unit tangent vectors of the double point."""
    rho = float(scenario.rho)
    return {
        (K_ANCHOR, ("omega_k",)): -rho * math.log(path.start) + _poly_integral(scenario.psi_k, path.start, 0.0),
        (L_ANCHOR, ("omega_l",)): -rho * math.log(path.end) + _poly_integral(scenario.psi_l, 0.0, path.end),
    }


def symbolic_limit(scenario: LocalScenario, path: NumericPath, alphabet: Alphabet = DEFAULT_ALPHABET) -> float:
    a, b = path.approach
    value = symbolic_value(scenario, alphabet).evaluate(
        arc_periods(scenario, path),
        {"rho": float(scenario.rho), "log_lambda": math.log(a * b)},
    )
    return value.real


def extrapolate(grid: Sequence[float], values: Sequence[float]) -> float:
    """eps -> 0 limit of a fit in 1, eps, eps log eps, eps^2."""
    eps = np.asarray(grid, dtype=float)
    columns = [np.ones_like(eps), eps, eps * np.log(eps), eps**2][: max(1, len(eps))]
    design = np.column_stack(columns)
    solution, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)
    return float(solution[0])


@dataclass
class ValidationReport:
    path: str
    grid: tuple[float, ...]
    values: tuple[float, ...]
    extrapolated: float
    symbolic: float
    tolerance: float
    notes: list[str] = field(default_factory=list)

    @property
    def error(self) -> float:
        return abs(self.extrapolated - self.symbolic) / max(1.0, abs(self.symbolic))

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance

    def to_json(self) -> dict[str, Any]:
        return {
            "path": self.path,
            "grid": list(self.grid),
            "values": list(self.values),
            "extrapolated": self.extrapolated,
            "symbolic": self.symbolic,
            "relative_error": self.error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": self.notes,
        }


def validate(
    scenario: LocalScenario,
    path: NumericPath,
    grid: Sequence[float] | None = None,
    jobs: int = 1,
    tolerance: float | None = None,
) -> ValidationReport:
    grid = tuple(EPSILON_GRID if grid is None else grid)
    tolerance = EPSILON_TOLERANCE if tolerance is None else tolerance
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        values = tuple(executor.map(lambda eps: numeric_epsilon_integral(scenario, path, eps), grid))
    report = ValidationReport(path.label, grid, values, extrapolate(grid, values), symbolic_limit(scenario, path), tolerance)
    for eps, value in zip(grid, values):
        logger.debug("eps=%g: %.15g", eps, value)
    if not report.passed:
        report.notes.append(f"relative error {report.error:.3g} above tolerance {tolerance:g}")
        logger.warning("numeric validation failed for %s: %s", path.label, report.notes[-1])
    return report
