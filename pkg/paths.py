"""Combinatorial paths on the central fiber and the period algebra they integrate into.

A position is (component, puncture): the component the path is on and the
double point (edge id) it currently sits next to. A based path starts and ends
at the puncture of disk 0.

Within-component integrals are not computed; they become period symbols
P[anchor; g1, ..., gr] where the anchor is either an arc from the root
puncture of a component to another puncture, or a genus loop based at the
root puncture. Symbols on one anchor multiply by the shuffle product.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
import logging
from typing import Any, Iterable, Mapping, Union

from marked_graph import MarkedGraph
from scalar import DEFAULT_ALPHABET, Alphabet, Scalar


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cross:
    edge: int
    direction: int = 1
    tangent_matching: bool = True

    def inverse(self) -> Cross:
        return replace(self, direction=-self.direction)


@dataclass(frozen=True)
class Wind:
    component: int
    edge: int
    turns: int = 1

    def inverse(self) -> Wind:
        return replace(self, turns=-self.turns)


@dataclass(frozen=True)
class Arc:
    component: int
    source: int
    target: int

    def inverse(self) -> Arc:
        return Arc(self.component, self.target, self.source)


@dataclass(frozen=True)
class CycleLoop:
    component: int
    generator: str
    turns: int = 1

    def inverse(self) -> CycleLoop:
        return replace(self, turns=-self.turns)


Event = Union[Cross, Wind, Arc, CycleLoop]
Position = tuple[int, int]


def base_position(graph: MarkedGraph) -> Position:
    root = graph.root()
    incident = graph.incident_edges(root)
    if not incident:
        raise ValueError(f"disk D{root} has no puncture")
    return root, incident[0].id


def root_puncture(graph: MarkedGraph, component: int) -> int:
    incident = graph.incident_edges(component)
    if not incident:
        raise ValueError(f"D{component} has no punctures")
    return min(e.id for e in incident)


def _genus_index(generator: str) -> int:
    if len(generator) < 2 or generator[0] not in "ab" or not generator[1:].isdigit():
        raise ValueError(f"bad genus generator {generator!r}")
    return int(generator[1:])


def step(graph: MarkedGraph, position: Position, event: Event) -> Position:
    """The position after `event`, or ValueError when it does not start at `position`."""
    component, puncture = position
    if isinstance(event, Cross):
        edge = graph.edge(event.edge)
        if event.direction not in (1, -1):
            raise ValueError(f"crossing direction must be +1 or -1, got {event.direction}")
        source, target = (edge.k, edge.l) if event.direction == 1 else (edge.l, edge.k)
        if (component, puncture) != (source, edge.id):
            raise ValueError(f"cross e{edge.id} must start at D{source} next to e{edge.id}, path is at D{component}/e{puncture}")
        return target, edge.id
    if isinstance(event, Wind):
        if (event.component, event.edge) != position:
            raise ValueError(f"wind at D{event.component}/e{event.edge} but path is at D{component}/e{puncture}")
        return position
    if isinstance(event, Arc):
        if (event.component, event.source) != position:
            raise ValueError(f"arc from D{event.component}/e{event.source} but path is at D{component}/e{puncture}")
        punctures = {e.id for e in graph.incident_edges(event.component)}
        if event.target not in punctures:
            raise ValueError(f"e{event.target} is not a puncture of D{event.component}")
        return event.component, event.target
    if isinstance(event, CycleLoop):
        if event.component != component:
            raise ValueError(f"cycle loop on D{event.component} but path is on D{component}")
        index = _genus_index(event.generator)
        if not 1 <= index <= graph.vertex(component).genus:
            raise ValueError(f"D{component} has no genus generator {event.generator}")
        return position
    raise ValueError(f"unknown path event {event!r}")


@dataclass(frozen=True)
class PathWord:
    """A word of path events; `start` None means based at disk 0."""

    events: tuple = ()
    start: Position | None = None

    def origin(self, graph: MarkedGraph) -> Position:
        return base_position(graph) if self.start is None else tuple(self.start)

    def positions(self, graph: MarkedGraph) -> list[Position]:
        """Position before each event, then the end position."""
        current = self.origin(graph)
        out = [current]
        for n, event in enumerate(self.events):
            try:
                current = step(graph, current, event)
            except ValueError as exc:
                raise ValueError(f"invalid path at event {n}: {exc}") from exc
            out.append(current)
        return out

    def end(self, graph: MarkedGraph) -> Position:
        return self.positions(graph)[-1]

    def validate(self, graph: MarkedGraph, based: bool | None = None) -> None:
        positions = self.positions(graph)
        based = self.start is None if based is None else based
        if based and (positions[0] != base_position(graph) or positions[-1] != base_position(graph)):
            raise ValueError("based path must start and end at the disk 0 puncture")

    def inverse(self, graph: MarkedGraph | None = None) -> PathWord:
        events = tuple(event.inverse() for event in reversed(self.events))
        if self.start is None:
            return PathWord(events)
        if graph is None:
            raise ValueError("inverting an open path needs the graph")
        return PathWord(events, self.end(graph))

    def compose(self, other: PathWord) -> PathWord:
        """self followed by other; endpoints are checked by validate."""
        return PathWord(self.events + other.events, self.start)

    def __len__(self) -> int:
        return len(self.events)

    def to_json(self) -> list[dict[str, Any]]:
        return [event_to_json(event) for event in self.events]

    @classmethod
    def from_json(cls, data: Iterable[Mapping[str, Any]], start: Position | None = None) -> PathWord:
        return cls(tuple(event_from_json(item) for item in data), start)


def event_to_json(event: Event) -> dict[str, Any]:
    if isinstance(event, Cross):
        out = {"ev": "cross", "edge": event.edge, "dir": event.direction}
        if not event.tangent_matching:
            out["tangent_matching"] = False
        return out
    if isinstance(event, Wind):
        return {"ev": "wind", "comp": event.component, "edge": event.edge, "n": event.turns}
    if isinstance(event, Arc):
        return {"ev": "arc", "comp": event.component, "from": event.source, "to": event.target}
    return {"ev": "cycle", "comp": event.component, "gen": event.generator, "n": event.turns}


def event_from_json(item: Mapping[str, Any]) -> Event:
    try:
        kind = item["ev"]
        if kind == "cross":
            return Cross(int(item["edge"]), int(item.get("dir", 1)), bool(item.get("tangent_matching", True)))
        if kind == "wind":
            return Wind(int(item["comp"]), int(item["edge"]), int(item.get("n", 1)))
        if kind == "arc":
            return Arc(int(item["comp"]), int(item["from"]), int(item["to"]))
        if kind == "cycle":
            return CycleLoop(int(item["comp"]), str(item["gen"]), int(item.get("n", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed path event {dict(item)!r}") from exc
    raise ValueError(f"unknown path event kind {item.get('ev')!r}")


# homotopy moves

@dataclass(frozen=True)
class InsertBacktrack:
    index: int
    event: Event


@dataclass(frozen=True)
class RemoveBacktrack:
    index: int


@dataclass(frozen=True)
class MergeWinds:
    index: int


@dataclass(frozen=True)
class RecutArc:
    """Split the arc at `index` through `via`; with via None, join it with the next arc."""

    index: int
    via: int | None = None


Move = Union[InsertBacktrack, RemoveBacktrack, MergeWinds, RecutArc]


def homotopy_move(path: PathWord, move: Move, graph: MarkedGraph) -> PathWord:
    events = list(path.events)
    positions = path.positions(graph)
    n = len(events)
    if isinstance(move, InsertBacktrack):
        if not 0 <= move.index <= n:
            raise ValueError(f"inapplicable move: index {move.index} outside 0..{n}")
        try:
            step(graph, positions[move.index], move.event)
        except ValueError as exc:
            raise ValueError(f"inapplicable move: {exc}") from exc
        events[move.index : move.index] = [move.event, move.event.inverse()]
    elif isinstance(move, RemoveBacktrack):
        i = move.index
        if not 0 <= i < n - 1 or events[i + 1] != events[i].inverse():
            raise ValueError(f"inapplicable move: no backtrack at {i}")
        del events[i : i + 2]
    elif isinstance(move, MergeWinds):
        i = move.index
        if not 0 <= i < n - 1:
            raise ValueError(f"inapplicable move: no wind pair at {i}")
        first, second = events[i], events[i + 1]
        if not (isinstance(first, Wind) and isinstance(second, Wind)) or (first.component, first.edge) != (
            second.component,
            second.edge,
        ):
            raise ValueError(f"inapplicable move: events {i}, {i + 1} are not winds at one puncture")
        turns = first.turns + second.turns
        events[i : i + 2] = [replace(first, turns=turns)] if turns else []
    elif isinstance(move, RecutArc):
        i = move.index
        if not 0 <= i < n or not isinstance(events[i], Arc):
            raise ValueError(f"inapplicable move: no arc at {i}")
        arc = events[i]
        if move.via is None:
            if i + 1 >= n or not isinstance(events[i + 1], Arc) or events[i + 1].component != arc.component:
                raise ValueError(f"inapplicable move: no arc pair at {i}")
            events[i : i + 2] = [Arc(arc.component, arc.source, events[i + 1].target)]
        else:
            if move.via not in {e.id for e in graph.incident_edges(arc.component)}:
                raise ValueError(f"inapplicable move: e{move.via} is not a puncture of D{arc.component}")
            events[i : i + 1] = [Arc(arc.component, arc.source, move.via), Arc(arc.component, move.via, arc.target)]
    else:
        raise ValueError(f"inapplicable move: unknown move {move!r}")
    return PathWord(tuple(events), path.start)


# period algebra

Anchor = tuple
Monomial = tuple


def shuffle(left: tuple, right: tuple) -> dict[tuple, int]:
    """Shuffle product of two words as word -> multiplicity."""
    if not left:
        return {right: 1}
    if not right:
        return {left: 1}
    out: dict[tuple, int] = {}
    for word, count in shuffle(left[:-1], right).items():
        key = word + (left[-1],)
        out[key] = out.get(key, 0) + count
    for word, count in shuffle(left, right[:-1]).items():
        key = word + (right[-1],)
        out[key] = out.get(key, 0) + count
    return out


def _monomial_product(first: Monomial, second: Monomial) -> dict[Monomial, int]:
    words_a, words_b = dict(first), dict(second)
    anchors = sorted(set(words_a) | set(words_b))
    options = []
    for anchor in anchors:
        if anchor in words_a and anchor in words_b:
            options.append([(anchor, w, c) for w, c in shuffle(words_a[anchor], words_b[anchor]).items()])
        else:
            options.append([(anchor, words_a.get(anchor, words_b.get(anchor)), 1)])
    out: dict[Monomial, int] = {}
    for combo in product(*options):
        key = tuple((anchor, word) for anchor, word, _ in combo)
        count = 1
        for _, _, c in combo:
            count *= c
        out[key] = out.get(key, 0) + count
    return out


def anchor_label(anchor: Anchor) -> str:
    kind, component, where = anchor
    if kind == "arc":
        return f"D{component}:e{where}"
    return f"D{component}:{where}"


class PeriodValue:
    """Scalar combination of shuffle-normalized products of period symbols."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: Alphabet = DEFAULT_ALPHABET, terms: Mapping[Monomial, Any] | None = None) -> None:
        self.alphabet = alphabet
        self.terms: dict[Monomial, Scalar] = {}
        for monomial, coeff in (terms or {}).items():
            self._add(monomial, alphabet.scalar(coeff))

    def _add(self, monomial: Monomial, coeff: Scalar) -> None:
        if coeff.is_zero:
            return
        total = self.terms.get(monomial)
        total = coeff if total is None else total + coeff
        if total.is_zero:
            self.terms.pop(monomial, None)
        else:
            self.terms[monomial] = total

    @classmethod
    def constant(cls, value: Any, alphabet: Alphabet = DEFAULT_ALPHABET) -> PeriodValue:
        return cls(alphabet, {(): value})

    @classmethod
    def symbol(cls, anchor: Anchor, word: tuple, alphabet: Alphabet = DEFAULT_ALPHABET) -> PeriodValue:
        if not word:
            return cls.constant(1, alphabet)
        return cls(alphabet, {((anchor, tuple(word)),): 1})

    def _coerce(self, other: Any) -> PeriodValue:
        if isinstance(other, PeriodValue):
            return other
        return PeriodValue.constant(other, self.alphabet)

    def __add__(self, other: Any) -> PeriodValue:
        other = self._coerce(other)
        out = PeriodValue(self.alphabet, self.terms)
        for monomial, coeff in other.terms.items():
            out._add(monomial, coeff)
        return out

    __radd__ = __add__

    def __neg__(self) -> PeriodValue:
        return PeriodValue(self.alphabet, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Any) -> PeriodValue:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> PeriodValue:
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> PeriodValue:
        if not isinstance(other, PeriodValue):
            factor = self.alphabet.scalar(other)
            return PeriodValue(self.alphabet, {m: c * factor for m, c in self.terms.items()})
        out = PeriodValue(self.alphabet)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                for monomial, count in _monomial_product(m1, m2).items():
                    out._add(monomial, c1 * c2 * count)
        return out

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> PeriodValue:
        factor = self.alphabet.scalar(other)
        return PeriodValue(self.alphabet, {m: c / factor for m, c in self.terms.items()})

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, PeriodValue):
            return self.terms == other.terms
        try:
            return self == self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_scalar(self) -> bool:
        return all(not monomial for monomial in self.terms)

    def scalar_value(self) -> Scalar:
        if not self.is_scalar:
            raise ValueError(f"period value {self} contains period symbols")
        return self.terms.get((), self.alphabet.zero)

    def symbols(self) -> set[tuple[Anchor, tuple]]:
        return {factor for monomial in self.terms for factor in monomial}

    def evaluate(
        self,
        periods: Mapping[tuple[Anchor, tuple], complex] | None = None,
        values: Mapping[str, complex] | None = None,
    ) -> complex:
        """Numeric value; every period symbol present needs an entry in `periods`."""
        periods = periods or {}
        total = 0j
        for monomial, coeff in self.terms.items():
            term = coeff.evaluate(values)
            for factor in monomial:
                if factor not in periods:
                    raise ValueError(f"no numeric value for period {format_symbol(factor)}")
                term *= complex(periods[factor])
            total += term
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for monomial, coeff in sorted(self.terms.items(), key=lambda item: item[0]):
            if not monomial:
                parts.append(f"({coeff})")
            else:
                parts.append(f"({coeff})*" + "*".join(format_symbol(f) for f in monomial))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PeriodValue({self})"

    def to_json(self) -> list[list]:
        return [
            [str(coeff), [[anchor_label(anchor), list(word)] for anchor, word in monomial]]
            for monomial, coeff in sorted(self.terms.items(), key=lambda item: item[0])
        ]


def format_symbol(factor: tuple[Anchor, tuple]) -> str:
    anchor, word = factor
    return f"P[{anchor_label(anchor)}; {', '.join(word)}]"
