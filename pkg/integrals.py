"""Exact regularized line and iterated integrals along path words.

A path word is cut into segments (crossings, windings, arcs and genus
loops). Each segment integrates a word of atoms to a PeriodValue, and
segments compose by

    int_{a*b} w1...wr = sum_m int_a w1...wm * int_b w(m+1)...wr.

Crossings see only the constant-u part of the dxi coefficient; the log
endpoint terms cancel in adapted coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
import logging
from math import factorial
from typing import Any, Iterable, Sequence

from bar_chen import BarTensor, FormalConnection, apply_lambda_N, fpsc_curvature, is_chen_closed, reduce_normal_form
from dga_model import DgaElement, apply_N, compat_check, d, puncture_value, split_exact
from paths import Arc, Cross, CycleLoop, PathWord, PeriodValue, Position, Wind, root_puncture


logger = logging.getLogger(__name__)

Segment = tuple


def segments(path: PathWord, graph) -> list[Segment]:
    """Elementary segments; genus loops become arc, loop power, arc back."""
    out: list[Segment] = []
    positions = path.positions(graph)
    for event, (component, puncture) in zip(path.events, positions):
        if isinstance(event, Cross):
            if not event.tangent_matching:
                raise ValueError(f"crossing of e{event.edge} is not over the base tangent vector")
            out.append(("cross", event.edge, event.direction))
        elif isinstance(event, Wind):
            if event.turns:
                out.append(("wind", event.component, event.edge, event.turns))
        elif isinstance(event, Arc):
            out.append(("arc", event.component, event.source, event.target))
        elif isinstance(event, CycleLoop):
            root = root_puncture(graph, component)
            sign = 1 if event.turns > 0 else -1
            out.append(("arc", component, puncture, root))
            out.extend(("cycle", component, event.generator, sign) for _ in range(abs(event.turns)))
            out.append(("arc", component, root, puncture))
    return out


class SegmentIntegrator:
    """Caches single-segment values of atom words for one model."""

    def __init__(self, model) -> None:
        self.model = model
        self.alphabet = model.alphabet
        self._cache: dict[tuple, PeriodValue] = {}

    def __call__(self, segment: Segment, word: tuple) -> PeriodValue:
        key = (segment, word)
        if key not in self._cache:
            self._cache[key] = self._evaluate(segment, word)
        return self._cache[key]

    def _evaluate(self, segment: Segment, word: tuple) -> PeriodValue:
        one = PeriodValue.constant(1, self.alphabet)
        if not word:
            return one
        kind = segment[0]
        if kind == "cross":
            return self._cross(segment[1], segment[2], word)
        if kind == "wind":
            return self._wind(segment[1], segment[2], segment[3], word)
        if kind == "arc":
            return self._arc(segment[1], segment[2], segment[3], word)
        return self._cycle(segment[1], segment[2], segment[3], word)

    def _cross(self, edge: int, direction: int, word: tuple) -> PeriodValue:
        if direction < 0:
            return self._cross(edge, 1, tuple(reversed(word))) * (-1) ** len(word)
        value = self.alphabet.one
        total = 0
        for atom in word:
            if atom[0] != "e" or atom[1] != edge or atom[2] != ("dxi",) or atom[4] != 0:
                return PeriodValue(self.alphabet)
            total += atom[3] + 1
            value = value / total
        return PeriodValue.constant(value, self.alphabet)

    def _surface_names(self, component: int, word: tuple) -> tuple | None:
        names = []
        for atom in word:
            if atom[0] != "s" or atom[1] != component:
                return None
            names.append(atom[2])
        return tuple(names)

    def _wind(self, component: int, edge: int, turns: int, word: tuple) -> PeriodValue:
        names = self._surface_names(component, word)
        if names is None:
            return PeriodValue(self.alphabet)
        comp = self.model.components[component]
        value = (self.alphabet.tau * turns) ** len(word) / factorial(len(word))
        for name in names:
            value = value * self.model.scalar(comp.residue(name, edge))
        return PeriodValue.constant(value, self.alphabet)

    def _period(self, anchor: tuple, names: tuple) -> PeriodValue:
        if not names:
            return PeriodValue.constant(1, self.alphabet)
        if anchor[0] == "arc" and anchor[2] == root_puncture(self.model.graph, anchor[1]):
            return PeriodValue(self.alphabet)
        return PeriodValue.symbol(anchor, names, self.alphabet)

    def _arc(self, component: int, source: int, target: int, word: tuple) -> PeriodValue:
        names = self._surface_names(component, word)
        if names is None:
            return PeriodValue(self.alphabet)
        total = PeriodValue(self.alphabet)
        for m in range(len(names) + 1):
            back = self._period(("arc", component, source), tuple(reversed(names[:m])))
            forward = self._period(("arc", component, target), names[m:])
            total = total + back * forward * (-1) ** m
        return total

    def _cycle(self, component: int, generator: str, sign: int, word: tuple) -> PeriodValue:
        names = self._surface_names(component, word)
        if names is None:
            return PeriodValue(self.alphabet)
        if sign < 0:
            return self._period(("cycle", component, generator), tuple(reversed(names))) * (-1) ** len(names)
        return self._period(("cycle", component, generator), names)


def compose_segments(integrator: SegmentIntegrator, parts: Sequence[Segment], word: tuple) -> PeriodValue:
    alphabet = integrator.alphabet
    zero = PeriodValue(alphabet)
    prefix = [PeriodValue.constant(1, alphabet)] + [zero] * len(word)
    for segment in parts:
        current = []
        for i in range(len(word) + 1):
            total = zero
            for h in range(i + 1):
                if prefix[h].is_zero:
                    continue
                piece = integrator(segment, word[h:i])
                if not piece.is_zero:
                    total = total + prefix[h] * piece
            current.append(total)
        prefix = current
    return prefix[len(word)]


def integrate_tensor(t: BarTensor, path: PathWord, integrator: SegmentIntegrator | None = None) -> PeriodValue:
    """Raw segment-wise iterated integral of every word, without reduction."""
    integrator = integrator or SegmentIntegrator(t.model)
    parts = segments(path, t.model.graph)
    total = PeriodValue(t.model.alphabet)
    for word, coeff in t.terms.items():
        value = compose_segments(integrator, parts, word)
        if not value.is_zero:
            total = total + value * coeff
    return total


def _function_value(function: DgaElement, position: Position):
    component, puncture = position
    return puncture_value(function, component, puncture)


def integrate_closed(phi: DgaElement, path: PathWord) -> PeriodValue:
    if phi.degree != 1:
        raise ValueError("line integrals take a 1-form")
    if not d(phi).is_zero:
        raise ValueError("line integral of a non-closed form is undefined")
    problems = compat_check(phi)
    if problems:
        raise ValueError(f"form is not compatible: {problems[0]}")
    graph = phi.model.graph
    path.validate(graph)
    bar, function = split_exact(phi)
    value = PeriodValue(phi.model.alphabet)
    if not bar.is_zero:
        value = integrate_tensor(BarTensor.of(bar), path)
    positions = path.positions(graph)
    return value + (_function_value(function, positions[-1]) - _function_value(function, positions[0]))


def iterated_integral(t: BarTensor, path: PathWord) -> PeriodValue:
    path.validate(t.model.graph)
    if not is_chen_closed(t):
        raise ValueError("iterated integral of a tensor that is not Chen-closed")
    return integrate_tensor(reduce_normal_form(t), path)


# transport

@dataclass
class TransportSeries:
    """Non-commutative series in X_1..X_s truncated at `bound`: word -> PeriodValue."""

    alphabet: Any
    bound: int
    coefficients: dict[tuple[int, ...], PeriodValue] = field(default_factory=dict)

    def coefficient(self, word: Sequence[int]) -> PeriodValue:
        return self.coefficients.get(tuple(word), PeriodValue(self.alphabet))

    def __mul__(self, other: TransportSeries) -> TransportSeries:
        bound = min(self.bound, other.bound)
        out: dict[tuple[int, ...], PeriodValue] = {}
        for w1, c1 in self.coefficients.items():
            for w2, c2 in other.coefficients.items():
                if len(w1) + len(w2) > bound:
                    continue
                value = out.get(w1 + w2, PeriodValue(self.alphabet)) + c1 * c2
                if value.is_zero:
                    out.pop(w1 + w2, None)
                else:
                    out[w1 + w2] = value
        return TransportSeries(self.alphabet, bound, out)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, TransportSeries):
            return NotImplemented
        return self.bound == other.bound and self.coefficients == other.coefficients

    __hash__ = None

    @classmethod
    def identity(cls, alphabet, bound: int) -> TransportSeries:
        return cls(alphabet, bound, {(): PeriodValue.constant(1, alphabet)})


def transport(connection: FormalConnection, path: PathWord, bound: int | None = None) -> TransportSeries:
    """1 + sum over words I of X_I * int_path (connection tensor of I)."""
    if fpsc_curvature(connection):
        raise ValueError("transport needs a flat connection (kappa != 0)")
    model = connection.model
    bound = connection.length if bound is None else bound
    letters = sorted({x for word in connection.coefficients for x in word})
    integrator = SegmentIntegrator(model)
    series = TransportSeries.identity(model.alphabet, bound)
    for length in range(1, bound + 1):
        for word in product(letters, repeat=length):
            tensor = connection.tensor(word)
            if tensor.is_zero:
                continue
            value = integrate_tensor(tensor, path, integrator)
            if not value.is_zero:
                series.coefficients[word] = value
    return series


# pairing with the augmentation ideal

def _composite(paths: Sequence[PathWord]) -> PathWord:
    total = PathWord()
    for path in paths:
        total = total.compose(path)
    return total


def groupring_pairing(t: BarTensor, combo: Iterable[tuple[Any, Sequence[PathWord]]]) -> PeriodValue:
    """<t, sum c (g1 - 1)...(gs - 1)> with every g a based loop."""
    reduced = reduce_normal_form(t)
    integrator = SegmentIntegrator(t.model)
    total = PeriodValue(t.model.alphabet)
    for coeff, loops in combo:
        loops = list(loops)
        for loop in loops:
            loop.validate(t.model.graph)
        s = len(loops)
        for size in range(s + 1):
            for chosen in combinations(range(s), size):
                sign = (-1) ** (s - size)
                value = integrate_tensor(reduced, _composite([loops[i] for i in chosen]), integrator)
                total = total + value * (sign * t.model.scalar(coeff))
    return total


# tangent variation

def lambda_power(phi: DgaElement, log_lambda: Any) -> DgaElement:
    """lambda^N phi = sum_k (log lambda)^k / k! N^k phi."""
    scale = phi.model.scalar(log_lambda)
    total, term, k = phi, phi, 0
    while True:
        k += 1
        term = apply_N(term)
        if term.is_zero:
            return total
        total = total + term * (scale**k / factorial(k))


def vary_tangent(argument: DgaElement | BarTensor, path: PathWord, log_lambda: Any = "log_lambda") -> PeriodValue:
    """The integral along the path over lambda times the base tangent vector."""
    if isinstance(argument, BarTensor):
        return iterated_integral(apply_lambda_N(argument, argument.model.scalar(log_lambda)), path)
    return integrate_closed(lambda_power(argument, log_lambda), path)


def monodromy_shift(argument: DgaElement | BarTensor, path: PathWord) -> PeriodValue:
    """int (exp(-tau N) - 1) argument: the change after one full loop of the tangent vector."""
    model = argument.model
    minus_tau = -model.alphabet.tau
    if isinstance(argument, BarTensor):
        return vary_tangent(argument, path, minus_tau) - iterated_integral(argument, path)
    return vary_tangent(argument, path, minus_tau) - integrate_closed(argument, path)
