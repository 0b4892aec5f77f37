"""Finite model of the log de Rham DGA of a semistable central fiber.

An element is a finite sum of atoms with Scalar coefficients. Atoms are
either surface generators ("s", component, name) declared by a component
model, or edge monomials ("e", edge, mono, a, b) meaning xi^a u^b times the
exterior monomial `mono` in dxi, dx (= dx/x), dy (= dy/y). On an edge
(k, l) the variable xi is 0 at D_k and 1 at D_l, and u stands for log t.

Sign table: exterior monomials are sorted in the order dxi, dx, dy, so
dx ^ dxi = -dxi ^ dx. N = -d/du on every edge, M_i the same on the edge of
disk i only.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
import logging
import os
from typing import Any, Iterable, Mapping

import sympy

from marked_graph import MarkedGraph
from scalar import DEFAULT_ALPHABET, U_INDEX, XI_INDEX, Alphabet, LaurentPoly, Scalar


logger = logging.getLogger(__name__)

EDGE_XI_DEGREE_CAP = int(os.environ.get("EDGE_XI_DEGREE_CAP", "64"))
EDGE_U_DEGREE_CAP = int(os.environ.get("EDGE_U_DEGREE_CAP", "32"))

DIFFERENTIALS = ("dxi", "dx", "dy")
MONOMIALS = {
    "P": (),
    "K": ("dx",),
    "L": ("dy",),
    "H": ("dxi",),
    "R": ("dxi", "dx"),
    "S": ("dxi", "dy"),
    "T": ("dx", "dy"),
    "U": ("dxi", "dx", "dy"),
}
UNIT = "1"

Atom = tuple


class EdgePoly(LaurentPoly):
    """Polynomial in xi and u with Scalar coefficients."""

    __slots__ = ()
    _rank = 1


def edge_poly(value: Any, alphabet: Alphabet = DEFAULT_ALPHABET) -> EdgePoly:
    if isinstance(value, EdgePoly):
        return value
    if isinstance(value, LaurentPoly):
        return EdgePoly(alphabet, value.poly, value.shift)
    if isinstance(value, str):
        names = {name: sympy.Symbol(name) for name in ("tau", "xi", "u") + alphabet.symbols}
        try:
            expr = sympy.sympify(value.replace("^", "**"), locals=names)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse edge polynomial {value!r}") from exc
        unknown = {str(s) for s in expr.free_symbols} - set(names)
        if unknown:
            raise ValueError(f"undeclared symbol(s) {sorted(unknown)} in {value!r}")
        numerator, denominator = sympy.fraction(sympy.together(expr))
        num = EdgePoly(alphabet, alphabet.ring.from_expr(sympy.expand(numerator)))
        den = EdgePoly(alphabet, alphabet.ring.from_expr(sympy.expand(denominator)))
        return num / den
    value = alphabet.scalar(value)
    return EdgePoly(alphabet, value.poly, value.shift)


def _split_edge_poly(p: LaurentPoly) -> dict[tuple[int, int], Scalar]:
    ring = p.alphabet.ring
    groups: dict[tuple[int, int], dict] = {}
    for monom, coeff in p.poly.items():
        key = (monom[XI_INDEX], monom[U_INDEX])
        stripped = list(monom)
        stripped[XI_INDEX] = stripped[U_INDEX] = 0
        groups.setdefault(key, {})[tuple(stripped)] = coeff
    return {key: Scalar(p.alphabet, ring.from_dict(group), p.shift) for key, group in groups.items()}


def _join_edge_poly(alphabet: Alphabet, parts: Mapping[tuple[int, int], Scalar]) -> EdgePoly:
    gens = alphabet.ring.gens
    total = EdgePoly(alphabet, alphabet.ring.zero)
    for (a, b), coeff in parts.items():
        total = total + EdgePoly(alphabet, gens[XI_INDEX] ** a * gens[U_INDEX] ** b) * coeff
    return total


def wedge_monomials(left: tuple[str, ...], right: tuple[str, ...]) -> tuple[int, tuple[str, ...]]:
    """Sign and sorted product of two exterior monomials; sign 0 if it vanishes."""
    combined = list(left) + list(right)
    if len(set(combined)) != len(combined):
        return 0, ()
    order = [DIFFERENTIALS.index(name) for name in combined]
    sign = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sign = -sign
    return sign, tuple(sorted(combined, key=DIFFERENTIALS.index))


def atom_degree(model: DgaModel, atom: Atom) -> int:
    if atom[0] == "s":
        return model.components[atom[1]].generators[atom[2]].degree
    return len(atom[2])


def atom_label(atom: Atom) -> str:
    if atom[0] == "s":
        return f"{atom[2]}@D{atom[1]}"
    _, edge, mono, a, b = atom
    factors = []
    if a:
        factors.append("xi" if a == 1 else f"xi^{a}")
    if b:
        factors.append("u" if b == 1 else f"u^{b}")
    factors.extend(mono)
    return ("*".join(factors) or "1") + f"@e{edge}"


@dataclass
class Generator:
    name: str
    degree: int
    w_level: int = 0
    f_level: int = 0
    differential: dict[str, Scalar] = field(default_factory=dict)
    residues: dict[int, Scalar] = field(default_factory=dict)
    values: dict[int, Scalar] = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        return not any(self.differential.values())


@dataclass
class ComponentModel:
    vertex: int
    kind: str
    edges: tuple[int, ...]
    generators: dict[str, Generator] = field(default_factory=dict)
    wedges: dict[tuple[str, str], dict[str, Scalar]] = field(default_factory=dict)
    undeclared_zero: bool = True

    def add(self, generator: Generator) -> None:
        if generator.name in self.generators and generator.name != UNIT:
            raise ValueError(f"generator {generator.name!r} declared twice on D{self.vertex}")
        self.generators[generator.name] = generator

    def declare_wedge(self, a: str, b: str, value: Mapping[str, Scalar]) -> None:
        self.wedges[(a, b)] = dict(value)

    def product(self, a: str, b: str) -> dict[str, Scalar]:
        left, right = self.generators[a], self.generators[b]
        if a == UNIT:
            return {b: 1}
        if b == UNIT:
            return {a: 1}
        if left.degree + right.degree > 2:
            return {}
        if a == b and left.degree % 2:
            return {}
        if (a, b) in self.wedges:
            return self.wedges[(a, b)]
        if (b, a) in self.wedges:
            sign = -1 if left.degree * right.degree % 2 else 1
            return {name: sign * value for name, value in self.wedges[(b, a)].items()}
        if self.undeclared_zero:
            return {}
        raise ValueError(f"missing wedge declaration: {a} ^ {b} on D{self.vertex}")

    def value(self, name: str, edge: int):
        if name == UNIT:
            return 1
        return self.generators[name].values.get(edge, 0)

    def residue(self, name: str, edge: int):
        return self.generators[name].residues.get(edge, 0)


def default_component(graph: MarkedGraph, vertex_id: int, alphabet: Alphabet = DEFAULT_ALPHABET) -> ComponentModel:
    vertex = graph.vertex(vertex_id)
    edges = tuple(sorted(e.id for e in graph.incident_edges(vertex_id)))
    one = alphabet.one
    model = ComponentModel(vertex_id, vertex.kind, edges)
    model.add(Generator(UNIT, 0, 0, 0, values={e: one for e in edges}))
    if vertex.is_disk:
        for e in edges:
            model.add(Generator(f"res[{e}]", 1, 1, 1, residues={e: one}))
        return model
    for j in range(1, vertex.genus + 1):
        model.add(Generator(f"omega{j}", 1, 1, 1))
        model.add(Generator(f"omegabar{j}", 1, 1, 0))
    model.add(Generator("vol", 2, 2, 1))
    for e in edges:
        model.add(Generator(f"res[{e}]", 1, 1, 1, differential={"vol": one}, residues={e: one}))
    for j in range(1, vertex.genus + 1):
        model.declare_wedge(f"omega{j}", f"omegabar{j}", {"vol": one})
    return model


class DgaModel:
    def __init__(
        self,
        graph: MarkedGraph,
        components: Mapping[int, ComponentModel] | None = None,
        alphabet: Alphabet = DEFAULT_ALPHABET,
    ) -> None:
        self.graph = graph
        self.alphabet = alphabet
        self.components = {v.id: default_component(graph, v.id, alphabet) for v in graph.vertices}
        self.components.update(components or {})
        self.tree = graph.spanning_tree()
        self.root = graph.root()
        self._echelons: dict[int, list] = {}
        for vertex_id in self.components:
            self._check_component(vertex_id)

    def scalar(self, value: Any) -> Scalar:
        if isinstance(value, Scalar):
            return value
        return self.alphabet.scalar(value)

    def _check_component(self, vertex_id: int) -> None:
        comp = self.components[vertex_id]
        gens = comp.generators
        for gen in gens.values():
            for name in gen.differential:
                if name not in gens or gens[name].degree != gen.degree + 1:
                    raise ValueError(f"bad differential of {gen.name} on D{vertex_id}: {name}")
        if comp.kind != "disk":
            forms = [g for g in gens.values() if g.degree == 1]
            two_forms = [g.name for g in gens.values() if g.degree == 2]
            rows = [[g.differential.get(t, 0) for g in forms] for t in two_forms]
            sums = [sum((self.scalar(v) for v in g.residues.values()), self.alphabet.zero) for g in forms]
            if forms and any(not s.is_zero for s in sums):
                base = sympy.Matrix([[self.scalar(v).as_expr() for v in row] for row in rows]) if rows else sympy.zeros(0, len(forms))
                stacked = base.col_join(sympy.Matrix([[s.as_expr() for s in sums]]))
                if stacked.rank() != base.rank():
                    raise ValueError(f"residue theorem violated on D{vertex_id}")
        for gen in gens.values():
            if gen.degree != 0 or gen.name == UNIT:
                continue
            second: dict[str, Scalar] = {}
            residues: dict[int, Scalar] = {}
            for name, coeff in gen.differential.items():
                for target, value in gens[name].differential.items():
                    second[target] = second.get(target, self.alphabet.zero) + self.scalar(coeff) * self.scalar(value)
                for edge, value in gens[name].residues.items():
                    residues[edge] = residues.get(edge, self.alphabet.zero) + self.scalar(coeff) * self.scalar(value)
            if any(not v.is_zero for v in second.values()):
                raise ValueError(f"d^2 != 0 for {gen.name} on D{vertex_id}")
            if any(not v.is_zero for v in residues.values()):
                raise ValueError(f"exact form d{gen.name} has residues on D{vertex_id}")

    # construction helpers

    def element(
        self,
        degree: int,
        surface: Mapping[int, Mapping[str, Any]] | None = None,
        edges: Mapping[int, Mapping[str, Any]] | None = None,
    ) -> DgaElement:
        terms: dict[Atom, Scalar] = {}
        for vertex_id, parts in (surface or {}).items():
            for name, coeff in parts.items():
                _accumulate(terms, ("s", vertex_id, name), self.scalar(coeff))
        for edge_id, parts in (edges or {}).items():
            for key, value in parts.items():
                mono = MONOMIALS[key] if key in MONOMIALS else tuple(key)
                for (a, b), coeff in _split_edge_poly(edge_poly(value, self.alphabet)).items():
                    _accumulate(terms, ("e", edge_id, mono, a, b), coeff)
        return DgaElement(self, degree, terms)

    def zero(self, degree: int) -> DgaElement:
        return DgaElement(self, degree, {})

    def generator(self, vertex_id: int, name: str) -> DgaElement:
        gen = self.components[vertex_id].generators[name]
        return DgaElement(self, gen.degree, {("s", vertex_id, name): self.alphabet.one})

    def constant_on(self, values: Mapping[int, Any]) -> DgaElement:
        """Locally constant function, linearly interpolated across every edge."""
        terms: dict[Atom, Scalar] = {}
        for vertex_id, value in values.items():
            _accumulate(terms, ("s", vertex_id, UNIT), self.scalar(value))
        for edge in self.graph.edges:
            at_k = self.scalar(values.get(edge.k, 0))
            at_l = self.scalar(values.get(edge.l, 0))
            _accumulate(terms, ("e", edge.id, (), 0, 0), at_k)
            _accumulate(terms, ("e", edge.id, (), 1, 0), at_l - at_k)
        return DgaElement(self, 0, terms)

    def one(self) -> DgaElement:
        return self.constant_on({v.id: 1 for v in self.graph.vertices})

    def log_t(self, edge_id: int) -> DgaElement:
        return DgaElement(self, 0, {("e", edge_id, (), 0, 1): self.alphabet.one})

    def dxi(self, edge_id: int, coeff: Any = 1) -> DgaElement:
        return DgaElement(self, 1, {("e", edge_id, ("dxi",), 0, 0): self.scalar(coeff)})

    def echelon(self, vertex_id: int) -> list[tuple[str, dict[str, Scalar], dict[str, Scalar]]]:
        """Reduced rows (pivot, d-combination, function combination) of exact surface forms."""
        if vertex_id in self._echelons:
            return self._echelons[vertex_id]
        comp = self.components[vertex_id]
        order = list(comp.generators)
        rows: list[tuple[str, dict[str, Scalar], dict[str, Scalar]]] = []
        for gen in comp.generators.values():
            if gen.degree != 0 or gen.name == UNIT:
                continue
            row = {n: self.scalar(c) for n, c in gen.differential.items() if not self.scalar(c).is_zero}
            combo = {gen.name: self.alphabet.one}
            for pivot, prow, pcombo in rows:
                factor = row.get(pivot)
                if factor:
                    row = _axpy(row, prow, -factor)
                    combo = _axpy(combo, pcombo, -factor)
            pivot = next((n for n in order if n in row and row[n].is_unit()), None)
            if pivot is None:
                if row:
                    raise ValueError(f"exact forms on D{vertex_id} need a unit pivot")
                continue
            scale = row[pivot]
            row = {n: c / scale for n, c in row.items()}
            combo = {n: c / scale for n, c in combo.items()}
            reduced = []
            for other_pivot, orow, ocombo in rows:
                factor = orow.get(pivot)
                if factor:
                    orow = _axpy(orow, row, -factor)
                    ocombo = _axpy(ocombo, combo, -factor)
                reduced.append((other_pivot, orow, ocombo))
            rows = reduced + [(pivot, row, combo)]
        self._echelons[vertex_id] = rows
        return rows

    def pivots(self, vertex_id: int) -> set[str]:
        return {pivot for pivot, _, _ in self.echelon(vertex_id)}


def _accumulate(terms: dict[Atom, Scalar], atom: Atom, value: Scalar) -> None:
    if value.is_zero:
        return
    total = terms.get(atom)
    total = value if total is None else total + value
    if total.is_zero:
        terms.pop(atom, None)
    else:
        terms[atom] = total


def _axpy(target: Mapping[str, Scalar], source: Mapping[str, Scalar], factor: Scalar) -> dict[str, Scalar]:
    out = dict(target)
    for name, value in source.items():
        total = out.get(name, 0) + factor * value
        if total == 0:
            out.pop(name, None)
        else:
            out[name] = total
    return out


class DgaElement:
    __slots__ = ("model", "degree", "terms")

    def __init__(self, model: DgaModel, degree: int, terms: Mapping[Atom, Scalar]) -> None:
        if not 0 <= degree <= 3:
            raise ValueError(f"degree {degree} out of range 0..3")
        clean = {}
        for atom, coeff in terms.items():
            if coeff.is_zero:
                continue
            if atom_degree(model, atom) != degree:
                raise ValueError(f"atom {atom_label(atom)} has the wrong degree for a degree-{degree} element")
            if atom[0] == "e" and (atom[3] > EDGE_XI_DEGREE_CAP or atom[4] > EDGE_U_DEGREE_CAP):
                raise ValueError(f"edge polynomial degree cap exceeded at {atom_label(atom)}")
            clean[atom] = coeff
        self.model = model
        self.degree = degree
        self.terms = clean

    def _check(self, other: DgaElement) -> None:
        if other.model is not self.model or other.degree != self.degree:
            raise ValueError("elements of different models or degrees")

    def __add__(self, other: DgaElement) -> DgaElement:
        self._check(other)
        terms = dict(self.terms)
        for atom, coeff in other.terms.items():
            _accumulate(terms, atom, coeff)
        return DgaElement(self.model, self.degree, terms)

    def __neg__(self) -> DgaElement:
        return DgaElement(self.model, self.degree, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: DgaElement) -> DgaElement:
        return self + (-other)

    def __mul__(self, factor: Any) -> DgaElement:
        if isinstance(factor, DgaElement):
            return NotImplemented
        factor = self.model.scalar(factor)
        return DgaElement(self.model, self.degree, {a: c * factor for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, DgaElement):
            return NotImplemented
        return other.model is self.model and other.degree == self.degree and other.terms == self.terms

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def surface_part(self, vertex_id: int) -> dict[str, Scalar]:
        return {a[2]: c for a, c in self.terms.items() if a[0] == "s" and a[1] == vertex_id}

    def edge_part(self, edge_id: int) -> dict[str, EdgePoly]:
        """Polynomials keyed by monomial letter (P, K, L, H, R, S, T, U)."""
        names = {mono: key for key, mono in MONOMIALS.items()}
        grouped: dict[str, dict[tuple[int, int], Scalar]] = {}
        for atom, coeff in self.terms.items():
            if atom[0] == "e" and atom[1] == edge_id:
                grouped.setdefault(names[atom[2]], {})[(atom[3], atom[4])] = coeff
        return {key: _join_edge_poly(self.model.alphabet, parts) for key, parts in grouped.items()}

    def atoms(self) -> list[tuple[Atom, Scalar]]:
        return sorted(self.terms.items(), key=lambda item: item[0])

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{atom_label(a)}" for a, c in self.atoms())

    def __repr__(self) -> str:
        return f"DgaElement(deg {self.degree}: {self})"

    def to_json(self) -> dict[str, Any]:
        return {"degree": self.degree, "terms": [[list(_jsonable(a)), str(c)] for a, c in self.atoms()]}


def _jsonable(atom: Atom) -> list:
    return [list(x) if isinstance(x, tuple) else x for x in atom]


def element_from_json(model: DgaModel, data: Mapping[str, Any]) -> DgaElement:
    terms: dict[Atom, Scalar] = {}
    for raw, coeff in data["terms"]:
        atom = tuple(tuple(x) if isinstance(x, list) else x for x in raw)
        _accumulate(terms, atom, model.alphabet.parse(coeff))
    return DgaElement(model, int(data["degree"]), terms)


def single(model: DgaModel, atom: Atom, coeff: Any = 1) -> DgaElement:
    return DgaElement(model, atom_degree(model, atom), {atom: model.scalar(coeff)})


# differential and products

def d(element: DgaElement) -> DgaElement:
    model = element.model
    if element.degree == 3:
        return model.zero(3)
    terms: dict[Atom, Scalar] = {}
    for atom, coeff in element.terms.items():
        if atom[0] == "s":
            gen = model.components[atom[1]].generators[atom[2]]
            for name, value in gen.differential.items():
                _accumulate(terms, ("s", atom[1], name), coeff * model.scalar(value))
            continue
        _, edge, mono, a, b = atom
        if a:
            sign, new = wedge_monomials(("dxi",), mono)
            if sign:
                _accumulate(terms, ("e", edge, new, a - 1, b), coeff * (sign * a))
        if b:
            for letter in ("dx", "dy"):
                sign, new = wedge_monomials((letter,), mono)
                if sign:
                    _accumulate(terms, ("e", edge, new, a, b - 1), coeff * (sign * b))
    return DgaElement(model, element.degree + 1, terms)


def wedge(left: DgaElement, right: DgaElement) -> DgaElement:
    if left.model is not right.model:
        raise ValueError("elements of different models")
    degree = left.degree + right.degree
    if degree > 3:
        raise ValueError(f"wedge of degrees {left.degree} and {right.degree} exceeds 3")
    model = left.model
    terms: dict[Atom, Scalar] = {}
    for atom_a, coeff_a in left.terms.items():
        for atom_b, coeff_b in right.terms.items():
            if atom_a[0] != atom_b[0] or atom_a[1] != atom_b[1]:
                continue
            if atom_a[0] == "s":
                comp = model.components[atom_a[1]]
                for name, value in comp.product(atom_a[2], atom_b[2]).items():
                    _accumulate(terms, ("s", atom_a[1], name), coeff_a * coeff_b * model.scalar(value))
            else:
                sign, mono = wedge_monomials(atom_a[2], atom_b[2])
                if sign:
                    _accumulate(
                        terms,
                        ("e", atom_a[1], mono, atom_a[3] + atom_b[3], atom_a[4] + atom_b[4]),
                        coeff_a * coeff_b * sign,
                    )
    if degree == 3:
        terms = {a: c for a, c in terms.items() if a[0] == "e"}
    return DgaElement(model, degree, terms)


# compatibility

def residue(element: DgaElement, vertex_id: int, edge_id: int) -> Scalar:
    comp = element.model.components[vertex_id]
    total = element.model.alphabet.zero
    for name, coeff in element.surface_part(vertex_id).items():
        total = total + coeff * comp.residue(name, edge_id)
    return total


def puncture_value(element: DgaElement, vertex_id: int, edge_id: int) -> Scalar:
    comp = element.model.components[vertex_id]
    total = element.model.alphabet.zero
    for name, coeff in element.surface_part(vertex_id).items():
        total = total + coeff * comp.value(name, edge_id)
    return total


def restrict_edge(element: DgaElement, edge_id: int, mono: tuple[str, ...], xi_value: int) -> dict[int, Scalar]:
    """The u-polynomial (power -> coefficient) of the `mono` part at xi = 0 or 1."""
    out: dict[int, Scalar] = {}
    for atom, coeff in element.terms.items():
        if atom[0] == "e" and atom[1] == edge_id and atom[2] == mono:
            if xi_value == 0 and atom[3] != 0:
                continue
            out[atom[4]] = out.get(atom[4], element.model.alphabet.zero) + coeff
    return {power: value for power, value in out.items() if not value.is_zero}


def _matches(poly: dict[int, Scalar], constant: Scalar) -> bool:
    expected = {} if constant.is_zero else {0: constant}
    return poly == expected


def compat_check(element: DgaElement) -> list[str]:
    model = element.model
    problems: list[str] = []
    known = {e.id for e in model.graph.edges}
    for atom in element.terms:
        if atom[0] == "e" and atom[1] not in known:
            problems.append(f"unknown edge {atom[1]}")
        if atom[0] == "s" and atom[1] not in model.components:
            problems.append(f"unknown component {atom[1]}")
    if problems:
        return problems
    for edge in model.graph.edges:
        if element.degree == 0:
            if not _matches(restrict_edge(element, edge.id, (), 0), puncture_value(element, edge.k, edge.id)):
                problems.append(f"A⁰ mismatch at ξ=0 on edge {edge.id} (side k=D{edge.k})")
            if not _matches(restrict_edge(element, edge.id, (), 1), puncture_value(element, edge.l, edge.id)):
                problems.append(f"A⁰ mismatch at ξ=1 on edge {edge.id} (side l=D{edge.l})")
        elif element.degree == 1:
            res_k = residue(element, edge.k, edge.id)
            res_l = residue(element, edge.l, edge.id)
            if not _matches(restrict_edge(element, edge.id, ("dx",), 0), res_k):
                problems.append(f"A¹ K(0,u) ≠ Res on edge {edge.id} (side k=D{edge.k})")
            if restrict_edge(element, edge.id, ("dy",), 0):
                problems.append(f"A¹ L(0,u) ≠ 0 on edge {edge.id} (side k=D{edge.k})")
            if restrict_edge(element, edge.id, ("dx",), 1):
                problems.append(f"A¹ K(1,u) ≠ 0 on edge {edge.id} (side l=D{edge.l})")
            if not _matches(restrict_edge(element, edge.id, ("dy",), 1), res_l):
                problems.append(f"A¹ L(1,u) ≠ Res on edge {edge.id} (side l=D{edge.l})")
        elif element.degree == 2:
            if restrict_edge(element, edge.id, ("dx", "dy"), 0):
                problems.append(f"A² T(0,u) ≠ 0 on edge {edge.id} (side k=D{edge.k})")
            if restrict_edge(element, edge.id, ("dx", "dy"), 1):
                problems.append(f"A² T(1,u) ≠ 0 on edge {edge.id} (side l=D{edge.l})")
    return problems


# operators and filtrations

def _derive_u(element: DgaElement, edges: set[int] | None) -> DgaElement:
    terms: dict[Atom, Scalar] = {}
    for atom, coeff in element.terms.items():
        if atom[0] != "e" or atom[4] == 0 or (edges is not None and atom[1] not in edges):
            continue
        _, edge, mono, a, b = atom
        _accumulate(terms, ("e", edge, mono, a, b - 1), coeff * (-b))
    return DgaElement(element.model, element.degree, terms)


def apply_N(element: DgaElement) -> DgaElement:
    return _derive_u(element, None)


def disk_edge(model: DgaModel, branch: int) -> int:
    disk = model.graph.disk(branch)
    incident = model.graph.incident_edges(disk.id)
    if not incident:
        raise ValueError(f"branch {branch} has no disk edge")
    return incident[0].id


def apply_M(element: DgaElement, branch: int) -> DgaElement:
    return _derive_u(element, {disk_edge(element.model, branch)})


def atom_levels(model: DgaModel, atom: Atom) -> tuple[int, int]:
    """(W-level, F-level) of a single atom."""
    if atom[0] == "s":
        gen = model.components[atom[1]].generators[atom[2]]
        return gen.w_level, gen.f_level
    _, _, mono, _, b = atom
    logs = sum(1 for name in mono if name != "dxi")
    return 2 * b + logs - mono.count("dxi"), b + logs


def weight_level(element: DgaElement) -> int | None:
    if element.is_zero:
        return None
    return max(atom_levels(element.model, a)[0] for a in element.terms)


def hodge_level(element: DgaElement) -> int | None:
    if element.is_zero:
        return None
    return min(atom_levels(element.model, a)[1] for a in element.terms)


def augmentation(function: DgaElement) -> Scalar:
    if function.degree != 0:
        raise ValueError("augmentation is defined on degree 0")
    try:
        disk = function.model.graph.disk(0)
    except ValueError as exc:
        raise ValueError("no disk 0") from exc
    return function.surface_part(disk.id).get(UNIT, function.model.alphabet.zero)


def make_theta(model: DgaModel, edge_id: int, balanced: bool = False) -> DgaElement:
    """(1 - xi) dx/x - xi dy/y - u dxi on one edge."""
    one = model.alphabet.one
    terms = {
        ("e", edge_id, ("dx",), 0, 0): one,
        ("e", edge_id, ("dx",), 1, 0): -one,
        ("e", edge_id, ("dy",), 1, 0): -one,
        ("e", edge_id, ("dxi",), 0, 1): -one,
    }
    if balanced:
        edge = model.graph.edge(edge_id)
        terms[("s", edge.k, f"res[{edge_id}]")] = one
        terms[("s", edge.l, f"res[{edge_id}]")] = -one
    return DgaElement(model, 1, terms)


# exact parts

def is_normal_atom(model: DgaModel, atom: Atom) -> bool:
    """True when split_exact leaves the degree-1 atom unchanged."""
    if atom[0] == "s":
        return atom[2] not in model.pivots(atom[1])
    _, edge, mono, a, b = atom
    if mono != ("dxi",):
        return True
    return a == 0 and not (b == 0 and edge in model.tree)


def split_exact(phi: DgaElement) -> tuple[DgaElement, DgaElement]:
    """phi = phi_bar + dF with phi_bar in the fixed complement of exact forms.

    F vanishes on disk 0, so its augmentation is zero.
    """
    if phi.degree != 1:
        raise ValueError("split_exact takes a degree-1 element")
    model = phi.model
    zero = model.alphabet.zero
    functions: dict[int, dict[str, Scalar]] = {}
    for vertex_id in model.components:
        surface = phi.surface_part(vertex_id)
        for pivot, row, combo in model.echelon(vertex_id):
            c = surface.get(pivot)
            if not c:
                continue
            surface = _axpy(surface, row, -c)
            functions[vertex_id] = _axpy(functions.get(vertex_id, {}), combo, c)

    def value_at(vertex_id: int, edge_id: int) -> Scalar:
        comp = model.components[vertex_id]
        total = zero
        for name, coeff in functions.get(vertex_id, {}).items():
            total = total + coeff * comp.value(name, edge_id)
        return total

    edge_terms: dict[Atom, Scalar] = {}
    jumps: dict[int, Scalar] = {}
    for edge in model.graph.edges:
        integral: dict[int, Scalar] = {}
        for atom, coeff in phi.terms.items():
            if atom[0] != "e" or atom[1] != edge.id or atom[2] != ("dxi",):
                continue
            _, _, _, a, b = atom
            share = coeff / (a + 1)
            _accumulate(edge_terms, ("e", edge.id, (), a + 1, b), share)
            integral[b] = integral.get(b, zero) + share
        for b, value in integral.items():
            _accumulate(edge_terms, ("e", edge.id, (), 1, b), -value)
        at_k, at_l = value_at(edge.k, edge.id), value_at(edge.l, edge.id)
        _accumulate(edge_terms, ("e", edge.id, (), 0, 0), at_k)
        _accumulate(edge_terms, ("e", edge.id, (), 1, 0), at_l - at_k)
        jumps[edge.id] = integral.get(0, zero) - (at_l - at_k)

    constants = tree_potentials(model, jumps)
    terms = dict(edge_terms)
    for vertex_id, parts in functions.items():
        for name, coeff in parts.items():
            _accumulate(terms, ("s", vertex_id, name), coeff)
    primitive = DgaElement(model, 0, terms) + model.constant_on(constants)
    return phi - d(primitive), primitive


def tree_potentials(model: DgaModel, jumps: Mapping[int, Scalar]) -> dict[int, Scalar]:
    """Constants c_v with c_root = 0 and c_l - c_k = jump on every spanning-tree edge."""
    zero = model.alphabet.zero
    potentials = {model.root: zero}
    adjacency: dict[int, list] = {}
    for edge in model.graph.edges:
        if edge.id in model.tree:
            adjacency.setdefault(edge.k, []).append(edge)
            adjacency.setdefault(edge.l, []).append(edge)
    queue = deque([model.root])
    while queue:
        vertex_id = queue.popleft()
        for edge in adjacency.get(vertex_id, []):
            jump = jumps.get(edge.id, zero)
            if edge.k == vertex_id and edge.l not in potentials:
                potentials[edge.l] = potentials[vertex_id] + jump
                queue.append(edge.l)
            elif edge.l == vertex_id and edge.k not in potentials:
                potentials[edge.k] = potentials[vertex_id] - jump
                queue.append(edge.k)
    return {v: c for v, c in potentials.items() if not c.is_zero}


def is_exact(phi: DgaElement) -> bool:
    return split_exact(phi)[0].is_zero


# cohomology basis

@dataclass
class H1Basis:
    w0: list[tuple[str, DgaElement]]
    w1: list[tuple[str, DgaElement]]
    w2: list[tuple[str, DgaElement]]

    def all(self) -> list[tuple[str, DgaElement]]:
        return self.w0 + self.w1 + self.w2

    def __len__(self) -> int:
        return len(self.w0) + len(self.w1) + len(self.w2)


def theta_chain(model: DgaModel, signed_edges: Iterable[tuple[int, int]]) -> DgaElement:
    total = model.zero(1)
    for edge_id, sign in signed_edges:
        total = total + make_theta(model, edge_id, balanced=True) * sign
    return total


def dxi_chain(model: DgaModel, signed_edges: Iterable[tuple[int, int]]) -> DgaElement:
    total = model.zero(1)
    for edge_id, sign in signed_edges:
        total = total + model.dxi(edge_id, sign)
    return total


def h1_basis(model: DgaModel) -> H1Basis:
    graph = model.graph
    inverse_tau = model.alphabet.one / model.alphabet.tau
    cycles = graph.fundamental_cycles()
    w0 = [(f"dxi-cycle[{n}]", dxi_chain(model, cycle)) for n, cycle in enumerate(cycles)]
    w1 = []
    for vertex in graph.compact_vertices():
        for j in range(1, vertex.genus + 1):
            w1.append((f"omega{j}@D{vertex.id}", model.generator(vertex.id, f"omega{j}")))
            w1.append((f"omegabar{j}@D{vertex.id}", model.generator(vertex.id, f"omegabar{j}")))
    w2 = [(f"theta-cycle[{n}]", theta_chain(model, cycle) * inverse_tau) for n, cycle in enumerate(cycles)]
    disks = graph.disks()
    for disk in disks[1:]:
        path = graph.tree_path(disks[0].id, disk.id)
        w2.append((f"theta-path[0->{disk.branch}]", theta_chain(model, path) * inverse_tau))
    return H1Basis(w0, w1, w2)
