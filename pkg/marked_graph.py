from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import logging
from typing import Any, Iterable

import networkx as nx


logger = logging.getLogger(__name__)

DISK = "disk"
COMPACT = "compact"


@dataclass(frozen=True)
class Vertex:
    id: int
    genus: int = 0
    kind: str = COMPACT
    branch: int | None = None

    @property
    def is_disk(self) -> bool:
        return self.kind == DISK


@dataclass(frozen=True)
class Edge:
    id: int
    k: int
    l: int

    def other(self, vertex: int) -> int:
        if vertex == self.k:
            return self.l
        if vertex == self.l:
            return self.k
        raise ValueError(f"vertex {vertex} is not an end of edge {self.id}")


@dataclass(frozen=True)
class MarkedGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    _index: dict[int, Vertex] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "_index", {v.id: v for v in self.vertices})

    def vertex(self, vertex_id: int) -> Vertex:
        return self._index[vertex_id]

    def edge(self, edge_id: int) -> Edge:
        for edge in self.edges:
            if edge.id == edge_id:
                return edge
        raise ValueError(f"no edge with id {edge_id}")

    def incident_edges(self, vertex_id: int) -> list[Edge]:
        return [e for e in self.edges if vertex_id in (e.k, e.l)]

    def degree(self, vertex_id: int) -> int:
        return sum((e.k == vertex_id) + (e.l == vertex_id) for e in self.edges)

    def disks(self) -> list[Vertex]:
        return sorted((v for v in self.vertices if v.is_disk), key=lambda v: v.branch)

    def disk(self, branch: int) -> Vertex:
        for vertex in self.vertices:
            if vertex.is_disk and vertex.branch == branch:
                return vertex
        raise ValueError(f"no disk for branch {branch}")

    def compact_vertices(self) -> list[Vertex]:
        return [v for v in self.vertices if not v.is_disk]

    def total_genus(self) -> int:
        return sum(v.genus for v in self.vertices)

    def as_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        for vertex in self.vertices:
            graph.add_node(vertex.id, genus=vertex.genus, kind=vertex.kind, branch=vertex.branch)
        for edge in self.edges:
            graph.add_edge(edge.k, edge.l, key=edge.id, eid=edge.id)
        return graph

    def root(self) -> int:
        disks = self.disks()
        if disks:
            return disks[0].id
        return min(v.id for v in self.vertices)

    def spanning_tree(self) -> set[int]:
        """Edge ids of the spanning tree picked by lowest edge id first."""
        graph = nx.Graph()
        graph.add_nodes_from(v.id for v in self.vertices)
        for edge in sorted(self.edges, key=lambda e: e.id):
            if not graph.has_edge(edge.k, edge.l):
                graph.add_edge(edge.k, edge.l, eid=edge.id)
        tree = nx.minimum_spanning_tree(graph, weight="eid", algorithm="kruskal")
        return {data["eid"] for _, _, data in tree.edges(data=True)}

    def tree_path(self, source: int, target: int) -> list[tuple[int, int]]:
        """Signed edges (edge id, +1 if traversed k->l) along the spanning tree."""
        tree_ids = self.spanning_tree()
        graph = nx.Graph()
        graph.add_nodes_from(v.id for v in self.vertices)
        for edge in self.edges:
            if edge.id in tree_ids:
                graph.add_edge(edge.k, edge.l, eid=edge.id)
        nodes = nx.shortest_path(graph, source, target)
        path = []
        for a, b in zip(nodes, nodes[1:]):
            eid = graph.edges[a, b]["eid"]
            path.append((eid, 1 if self.edge(eid).k == a else -1))
        return path

    def fundamental_cycles(self) -> list[list[tuple[int, int]]]:
        """One signed cycle per non-tree edge, traversed along that edge k->l."""
        tree_ids = self.spanning_tree()
        cycles = []
        for edge in sorted(self.edges, key=lambda e: e.id):
            if edge.id in tree_ids:
                continue
            cycles.append([(edge.id, 1)] + self.tree_path(edge.l, edge.k))
        return cycles

    def to_json(self) -> dict[str, Any]:
        vertices = []
        for vertex in self.vertices:
            item: dict[str, Any] = {"id": vertex.id, "genus": vertex.genus, "kind": vertex.kind}
            if vertex.branch is not None:
                item["branch"] = vertex.branch
            vertices.append(item)
        return {
            "vertices": vertices,
            "edges": [{"id": e.id, "k": e.k, "l": e.l} for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> MarkedGraph:
        try:
            vertices = [
                Vertex(int(v["id"]), int(v.get("genus", 0)), str(v.get("kind", COMPACT)), v.get("branch"))
                for v in data["vertices"]
            ]
            edges = [Edge(int(e["id"]), int(e["k"]), int(e["l"])) for e in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed graph JSON: {exc}") from exc
        return cls(tuple(vertices), tuple(edges))

    def to_dot(self, name: str = "central_fiber", labels: dict[int, str] | None = None) -> str:
        labels = labels or {}
        lines = [f"graph {name} {{"]
        for vertex in self.vertices:
            if vertex.is_disk:
                label = labels.get(vertex.id, f"D{vertex.id} (branch {vertex.branch})")
                lines.append(f'  v{vertex.id} [shape=box, label="{label}"];')
            else:
                label = labels.get(vertex.id, f"g={vertex.genus}")
                lines.append(f'  v{vertex.id} [shape=circle, label="{label}"];')
        for edge in self.edges:
            lines.append(f'  v{edge.k} -- v{edge.l} [label="{edge.id}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def make_graph(vertices: Iterable[tuple], edges: Iterable[tuple[int, int, int]]) -> MarkedGraph:
    """Shorthand: vertices as (id, genus, kind[, branch]), edges as (id, k, l)."""
    return MarkedGraph(tuple(Vertex(*v) for v in vertices), tuple(Edge(*e) for e in edges))


def validate_graph(graph: MarkedGraph) -> list[str]:
    diagnostics: list[str] = []
    ids = [v.id for v in graph.vertices]
    for vertex_id, count in Counter(ids).items():
        if count > 1:
            diagnostics.append(f"duplicate vertex id {vertex_id}")
    for edge_id, count in Counter(e.id for e in graph.edges).items():
        if count > 1:
            diagnostics.append(f"duplicate edge id {edge_id}")

    known = set(ids)
    for edge in graph.edges:
        if edge.k not in known or edge.l not in known:
            diagnostics.append(f"edge {edge.id} references an unknown vertex")
            continue
        if edge.k == edge.l:
            diagnostics.append(f"self-loop at vertex {edge.k} (edge {edge.id})")
        elif edge.k > edge.l:
            diagnostics.append(f"edge {edge.id} is not oriented k < l")

    pairs = Counter(frozenset((e.k, e.l)) for e in graph.edges if e.k != e.l)
    for pair, count in sorted(pairs.items(), key=lambda item: sorted(item[0])):
        if count > 1:
            a, b = sorted(pair)
            edge_ids = sorted(e.id for e in graph.edges if frozenset((e.k, e.l)) == pair)
            diagnostics.append(f"multiple edge between {a} and {b} (edges {edge_ids})")

    for vertex in graph.vertices:
        if vertex.genus < 0:
            diagnostics.append(f"negative genus at vertex {vertex.id}")
        if vertex.kind not in (DISK, COMPACT):
            diagnostics.append(f"unknown kind {vertex.kind!r} at vertex {vertex.id}")
        if vertex.is_disk:
            if graph.degree(vertex.id) != 1:
                diagnostics.append(f"disk degree ≠ 1 at vertex {vertex.id}")
            if vertex.genus != 0:
                diagnostics.append(f"disk genus ≠ 0 at vertex {vertex.id}")

    branches = sorted(v.branch for v in graph.vertices if v.is_disk and v.branch is not None)
    if any(v.is_disk and v.branch is None for v in graph.vertices):
        diagnostics.append("disk without branch index")
    if branches != list(range(len(branches))):
        diagnostics.append(f"disk branch indices {branches} are not 0..r-1")

    if graph.vertices and all(e.k in known and e.l in known for e in graph.edges):
        if not nx.is_connected(graph.as_networkx()):
            diagnostics.append("graph is not connected")
    elif not graph.vertices:
        diagnostics.append("graph has no vertices")

    if diagnostics:
        logger.debug("graph diagnostics: %s", diagnostics)
    return diagnostics
