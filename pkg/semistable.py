"""Semistable reduction: base change of degree d, normalization, chain insertion."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from math import gcd, lcm
from typing import Any

from marked_graph import COMPACT, DISK, Edge, MarkedGraph, Vertex, validate_graph
from resolution import EXCEPTIONAL, ResolutionGraph, lcm_d


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeLocalData:
    point_count: int
    n_p: int

    @property
    def chain_length(self) -> int:
        return self.n_p - 1


@dataclass(frozen=True)
class CoverData:
    component_count: int
    genus: int
    sheets: int
    euler: int


@dataclass(frozen=True)
class CentralFiberGraph:
    graph: MarkedGraph
    d: int
    provenance: dict[int, tuple] = field(default_factory=dict)
    edge_local: tuple[tuple[tuple[int, int], EdgeLocalData], ...] = ()

    @property
    def r(self) -> int:
        return len(self.graph.disks())

    def to_json(self) -> dict[str, Any]:
        data = self.graph.to_json()
        data["d"] = self.d
        data["provenance"] = {str(k): list(v) for k, v in sorted(self.provenance.items())}
        data["edge_local"] = [
            {"edge": index, "sides": list(sides), "points": local.point_count, "n_p": local.n_p}
            for index, (sides, local) in enumerate(self.edge_local)
        ]
        return data


def edge_chain_data(e_k: int, e_l: int, d: int) -> EdgeLocalData:
    if d % e_k or d % e_l:
        raise ValueError(f"d not a common multiple: {d} vs ({e_k}, {e_l})")
    return EdgeLocalData(gcd(e_k, e_l), d // lcm(e_k, e_l))


def cover_components(e: int, neighbors: list[int], d: int) -> CoverData:
    """Cyclic e-sheeted cover of a rational component branched at its neighbours."""
    if d % e or any(d % n for n in neighbors):
        raise ValueError(f"d not a common multiple: {d} vs {[e, *neighbors]}")
    count = gcd(e, *neighbors)
    euler = e * (2 - len(neighbors)) + sum(gcd(e, n) for n in neighbors)
    if euler % (2 * count):
        raise ValueError(f"internal consistency error: euler characteristic {euler} over {count} components")
    return CoverData(count, 1 - euler // (2 * count), e, euler)


def semistable_reduce(
    resolution: ResolutionGraph,
    d: int | None = None,
    *,
    allow_multi_edges: bool = False,
) -> CentralFiberGraph:
    d = lcm_d(resolution) if d is None else d
    r = resolution.r
    vertices: list[Vertex] = []
    provenance: dict[int, tuple] = {}
    covers: dict[int, list[int]] = {}

    for i in range(r):
        strict = resolution.strict(i)
        vertices.append(Vertex(i, 0, DISK, i))
        provenance[i] = ("disk", i)
        covers[strict.id] = [i]

    for vertex in resolution.exceptionals():
        neighbors = [resolution.vertex(n).multiplicity for n in resolution.neighbors(vertex.id)]
        data = cover_components(vertex.multiplicity, neighbors, d)
        logger.debug("E_%d: e=%d, %d components of genus %d", vertex.id, vertex.multiplicity, data.component_count, data.genus)
        ids = []
        for index in range(data.component_count):
            new_id = len(vertices)
            vertices.append(Vertex(new_id, data.genus, COMPACT))
            provenance[new_id] = ("cover", vertex.id, index)
            ids.append(new_id)
        covers[vertex.id] = ids

    edges: list[Edge] = []
    edge_local = []

    def connect(a: int, b: int) -> None:
        edges.append(Edge(len(edges), min(a, b), max(a, b)))

    for a, b in resolution.edges:
        e_a, e_b = resolution.vertex(a).multiplicity, resolution.vertex(b).multiplicity
        local = edge_chain_data(e_a, e_b, d)
        edge_local.append(((a, b), local))
        for point in range(local.point_count):
            left = covers[a][point % len(covers[a])]
            right = covers[b][point % len(covers[b])]
            previous = left
            for position in range(local.chain_length):
                new_id = len(vertices)
                vertices.append(Vertex(new_id, 0, COMPACT))
                provenance[new_id] = ("chain", a, b, point, position)
                connect(previous, new_id)
                previous = new_id
            connect(previous, right)

    graph = MarkedGraph(tuple(vertices), tuple(edges))
    diagnostics = validate_graph(graph)
    multiple = [item for item in diagnostics if item.startswith("multiple edge")]
    if multiple and not allow_multi_edges:
        raise ValueError(f"normal crossings assumption violated: {multiple[0]}")
    other = [item for item in diagnostics if not item.startswith("multiple edge")]
    if other:
        raise ValueError(f"semistable reduction produced an invalid graph: {other}")
    logger.info("central fiber: %d components, %d double points, d=%d", len(vertices), len(edges), d)
    return CentralFiberGraph(graph, d, provenance, tuple(edge_local))


@dataclass(frozen=True)
class H1Report:
    dimension: int
    mu: int

    @property
    def passed(self) -> bool:
        return self.dimension == self.mu

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"dim H1 = {self.dimension}, mu = {self.mu}: {verdict}"


def h1_dimension(graph: MarkedGraph, r: int) -> int:
    return r + 1 + sum(2 * v.genus - 2 for v in graph.vertices) + 2 * len(graph.edges)


def verify_h1_dimension(fiber: CentralFiberGraph | MarkedGraph, mu: int, r: int) -> H1Report:
    graph = fiber.graph if isinstance(fiber, CentralFiberGraph) else fiber
    return H1Report(h1_dimension(graph, r), mu)


def euler_characteristic(fiber: CentralFiberGraph | MarkedGraph) -> int:
    """Euler characteristic of the nearby fiber glued from punctured components."""
    graph = fiber.graph if isinstance(fiber, CentralFiberGraph) else fiber
    total = 0
    for vertex in graph.vertices:
        degree = graph.degree(vertex.id)
        if vertex.is_disk:
            total += 1 - degree
        else:
            total += 2 - 2 * vertex.genus - degree
    return total


def chain_graph(n: int, end_genus: int = 1, d: int = 1) -> CentralFiberGraph:
    """Chain D_0 - D_1 - ... - D_n with a disk D_0 and genus `end_genus` on D_n."""
    if n < 1:
        raise ValueError("a chain needs at least one edge")
    vertices = [Vertex(0, 0, DISK, 0)]
    vertices += [Vertex(i, end_genus if i == n else 0, COMPACT) for i in range(1, n + 1)]
    edges = [Edge(i, i, i + 1) for i in range(n)]
    provenance = {v.id: ("chain", v.id) for v in vertices}
    return CentralFiberGraph(MarkedGraph(tuple(vertices), tuple(edges)), d, provenance)
