"""Declared scenarios for the bar construction: primitives and the Omega witness.

The witness on a genus-carrying component D with chosen omega, omegabar:

    omega ^ omegabar = -rho vol on D
    Omega = omega (x) omega (x) omegabar + omega (x) phi23,   d phi23 = rho vol

where phi23 is completed by residue corrections along the tree path from D to
disk 0. [N(Omega)] and [M(Omega)] are read off as multiples of [omega].
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Any, Mapping

from bar_chen import (
    BarTensor,
    apply_M_bar,
    apply_N_bar,
    extend_closed_family,
    is_chen_closed,
    reduce_normal_form,
)
from dga_model import (
    DgaElement,
    DgaModel,
    _accumulate,
    compat_check,
    d,
    default_component,
    make_theta,
    residue,
)
from marked_graph import MarkedGraph
from scalar import DEFAULT_ALPHABET, Alphabet, Scalar
from semistable import CentralFiberGraph, chain_graph


logger = logging.getLogger(__name__)

REFERENCE_L = "-32*rho/156"
DEFAULT_SCENARIO: dict[str, Any] = {
    "chain_length": 7,
    "end_genus": 1,
    "rho": "rho",
    "d": 156,
    "mk": 24,
    "wedges": [],
}


def _surface_pivot(model: DgaModel, vertex_id: int, two_form: str) -> tuple[str, Scalar] | None:
    for gen in model.components[vertex_id].generators.values():
        if gen.degree != 1:
            continue
        nonzero = {n: model.scalar(c) for n, c in gen.differential.items() if not model.scalar(c).is_zero}
        if list(nonzero) == [two_form] and nonzero[two_form].is_unit():
            return gen.name, nonzero[two_form]
    return None


def find_primitive(beta: DgaElement) -> DgaElement:
    """A compatible 1-form psi with d psi = beta.

    Surface parts use the first 1-form generator whose differential is a unit
    multiple of the 2-form. Edge parts integrate the (R, S, T) coefficients;
    the residue mismatch is then pushed along the spanning tree to disk 0 with
    Theta terms and absorbed on each component by res[e] combinations.
    """
    if beta.degree != 2:
        raise ValueError("find_primitive takes a 2-form")
    model = beta.model
    zero = model.alphabet.zero
    terms: dict = {}
    for vertex_id in model.components:
        for name, coeff in beta.surface_part(vertex_id).items():
            pivot = _surface_pivot(model, vertex_id, name)
            if pivot is None:
                raise ValueError(f"primitive unavailable: no surface primitive for {name} on D{vertex_id}")
            gen_name, unit = pivot
            _accumulate(terms, ("s", vertex_id, gen_name), coeff / unit)

    jumps: dict[int, Scalar] = {}
    for edge in model.graph.edges:
        jump = _edge_primitive(beta, edge.id, terms)
        if not jump.is_zero:
            jumps[edge.id] = jump

    partial = DgaElement(model, 1, terms)
    flows = _residue_flow(model, partial, jumps)
    for vertex_id, comp in model.components.items():
        for edge_id in comp.edges:
            edge = model.graph.edge(edge_id)
            if vertex_id == edge.k:
                required = flows.get(edge_id, zero)
            else:
                required = jumps.get(edge_id, zero) - flows.get(edge_id, zero)
            missing = required - residue(partial, vertex_id, edge_id)
            if missing.is_zero:
                continue
            name = f"res[{edge_id}]"
            if name not in comp.generators:
                raise ValueError(f"primitive unavailable: D{vertex_id} has no {name}")
            _accumulate(terms, ("s", vertex_id, name), missing)
    psi = DgaElement(model, 1, terms)
    for edge_id, x in sorted(flows.items()):
        if not x.is_zero:
            psi = psi + make_theta(model, edge_id) * x
    if d(psi) != beta:
        raise ValueError("primitive unavailable: residue flow does not close up (2-form not exact?)")
    problems = compat_check(psi)
    if problems:
        raise ValueError(f"primitive unavailable: {problems[0]}")
    return psi


def _edge_primitive(beta: DgaElement, edge: int, terms: dict) -> Scalar:
    """Add a primitive of the edge part of beta to `terms`; return L(1) of it.

    With du = dx + dy the 2-form reads S dxi^du + ((R - S) dxi - T du) ^ dx.
    A = int_0^xi S and g = int_0^xi (R - S) + int_0^u -T(0, .) give the
    primitive (A + g) dx + A dy; an exact correction then clears K(1, u).
    """
    zero = beta.model.alphabet.zero
    k_poly: dict[tuple[int, int], Scalar] = {}
    l_poly: dict[tuple[int, int], Scalar] = {}
    for atom, coeff in beta.terms.items():
        if atom[0] != "e" or atom[1] != edge:
            continue
        _, _, mono, a, b = atom
        if mono == ("dxi", "dx"):
            k_poly[(a + 1, b)] = k_poly.get((a + 1, b), zero) + coeff / (a + 1)
        elif mono == ("dxi", "dy"):
            l_poly[(a + 1, b)] = l_poly.get((a + 1, b), zero) + coeff / (a + 1)
        elif mono == ("dx", "dy"):
            if a == 0:
                k_poly[(0, b + 1)] = k_poly.get((0, b + 1), zero) - coeff / (b + 1)
        else:
            raise ValueError(f"primitive unavailable: unexpected edge monomial {mono}")
    at_one: dict[int, Scalar] = {}
    for (a, b), coeff in k_poly.items():
        _accumulate(terms, ("e", edge, ("dx",), a, b), coeff)
        at_one[b] = at_one.get(b, zero) + coeff
    l_at_one: dict[int, Scalar] = {}
    for (a, b), coeff in l_poly.items():
        _accumulate(terms, ("e", edge, ("dy",), a, b), coeff)
        l_at_one[b] = l_at_one.get(b, zero) + coeff
    for b, coeff in at_one.items():
        # minus coeff * d(xi u^(b+1) / (b+1))
        _accumulate(terms, ("e", edge, ("dx",), 1, b), -coeff)
        _accumulate(terms, ("e", edge, ("dy",), 1, b), -coeff)
        _accumulate(terms, ("e", edge, ("dxi",), 0, b + 1), -coeff / (b + 1))
        l_at_one[b] = l_at_one.get(b, zero) - coeff
    return l_at_one.get(0, zero)


def _residue_flow(model: DgaModel, partial: DgaElement, jumps: Mapping[int, Scalar]) -> dict[int, Scalar]:
    """Theta coefficients on tree edges balancing the residue sums of compact components."""
    graph = model.graph
    zero = model.alphabet.zero
    parent: dict[int, int] = {}
    order = [model.root]
    queue = deque([model.root])
    while queue:
        vertex_id = queue.popleft()
        for edge in graph.incident_edges(vertex_id):
            other = edge.other(vertex_id)
            if edge.id in model.tree and other != model.root and other not in parent:
                parent[other] = edge.id
                order.append(other)
                queue.append(other)
    flows: dict[int, Scalar] = {}
    for vertex_id in reversed(order[1:]):
        up = graph.edge(parent[vertex_id])
        if graph.vertex(vertex_id).is_disk:
            flows[up.id] = zero
            continue
        comp = model.components[vertex_id]
        total = sum((residue(partial, vertex_id, e) for e in comp.edges), zero)
        others = zero
        for edge in graph.incident_edges(vertex_id):
            if edge.id == up.id:
                continue
            x = flows.get(edge.id, zero)
            others = others + (x if edge.k == vertex_id else jumps.get(edge.id, zero) - x)
        needed = total - others
        flows[up.id] = needed if up.k == vertex_id else jumps.get(up.id, zero) - needed
    return flows


@dataclass
class OmegaReport:
    component: int
    d: int
    mk: int
    rho: Scalar
    path_length: int
    omega: BarTensor
    chen_closed: bool
    n_class: BarTensor
    m_class: BarTensor
    n_value: Scalar
    m_value: Scalar
    l_value: Scalar
    branch: int = 0

    @property
    def verdict(self) -> str:
        if self.rho.is_zero:
            return "degenerate input"
        return "nonzero" if not self.l_value.is_zero else "zero"

    def to_json(self) -> dict[str, Any]:
        return {
            "component": self.component,
            "d": self.d,
            "mk": self.mk,
            "branch": self.branch,
            "path_length": self.path_length,
            "chen_closed": self.chen_closed,
            "N": str(self.n_value),
            "M": str(self.m_value),
            "L": str(self.l_value),
            "L_reference": REFERENCE_L,
            "verdict": self.verdict,
        }


def witness_model(
    graph: MarkedGraph,
    component: int,
    rho: Scalar,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    wedges: list[Mapping[str, Any]] | None = None,
) -> DgaModel:
    vertex = graph.vertex(component)
    if vertex.is_disk or vertex.genus < 1:
        raise ValueError(f"D{component} carries no genus generators")
    comp = default_component(graph, component, alphabet)
    comp.undeclared_zero = False
    comp.declare_wedge("omega1", "omegabar1", {"vol": -rho})
    for edge_id in comp.edges:
        comp.declare_wedge("omega1", f"res[{edge_id}]", {})
        comp.declare_wedge("omegabar1", f"res[{edge_id}]", {})
    for item in wedges or []:
        try:
            value = {name: alphabet.parse(str(c)) for name, c in item.get("value", {}).items()}
            comp.declare_wedge(item["a"], item["b"], value)
        except (KeyError, AttributeError) as exc:
            raise ValueError(f"malformed wedge declaration {item!r}") from exc
    return DgaModel(graph, {component: comp}, alphabet)


def omega_witness(
    fiber: CentralFiberGraph | MarkedGraph,
    component: int,
    mk: int,
    d: int,
    *,
    branch: int = 0,
    rho: Any = "rho",
    alphabet: Alphabet = DEFAULT_ALPHABET,
    wedges: list[Mapping[str, Any]] | None = None,
) -> OmegaReport:
    graph = fiber.graph if isinstance(fiber, CentralFiberGraph) else fiber
    rho_value = alphabet.scalar(rho)
    model = witness_model(graph, component, rho_value, alphabet, wedges)
    omega = model.generator(component, "omega1")
    omegabar = model.generator(component, "omegabar1")
    tensor, _ = extend_closed_family([omega, omega, omegabar], find_primitive)
    closed = is_chen_closed(tensor)
    if not closed:
        logger.warning("Omega on D%d is not Chen-closed under the declared wedge table", component)
    n_class = reduce_normal_form(apply_N_bar(tensor))
    m_class = reduce_normal_form(apply_M_bar(tensor, branch))
    atom = ("s", component, "omega1")
    for name, cls in (("N", n_class), ("M", m_class)):
        extra = [w for w in cls.terms if w != (atom,)]
        if extra:
            logger.warning("[%s(Omega)] has components off [omega]: %s", name, extra)
    n_value = n_class.coefficient(atom)
    m_value = m_class.coefficient(atom)
    l_value = n_value / d - m_value / mk
    path = graph.tree_path(graph.root(), component)
    report = OmegaReport(
        component, d, mk, rho_value, len(path), tensor, closed, n_class, m_class, n_value, m_value, l_value, branch
    )
    logger.info("witness on D%d: N=%s M=%s L=%s", component, n_value, m_value, l_value)
    return report


def load_scenario(path: Path | None) -> dict[str, Any]:
    scenario = dict(DEFAULT_SCENARIO)
    if path is None:
        return scenario
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("scenario must be a JSON object")
    unknown = set(data) - set(DEFAULT_SCENARIO)
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    scenario.update(data)
    return scenario


def scenario_omega(scenario: Mapping[str, Any] | None = None, alphabet: Alphabet = DEFAULT_ALPHABET) -> OmegaReport:
    """The chain D_0 - ... - D_n with the witness on the genus-carrying end."""
    settings = dict(DEFAULT_SCENARIO)
    settings.update(scenario or {})
    n = int(settings["chain_length"])
    fiber = chain_graph(n, int(settings["end_genus"]), int(settings["d"]))
    report = omega_witness(
        fiber,
        n,
        int(settings["mk"]),
        int(settings["d"]),
        rho=str(settings["rho"]),
        alphabet=alphabet,
        wedges=settings.get("wedges"),
    )
    reference = alphabet.parse(REFERENCE_L)
    if report.l_value != reference and not report.rho.is_zero:
        logger.warning("[L(Omega)] = %s differs from the reference value %s", report.l_value, REFERENCE_L)
    return report
