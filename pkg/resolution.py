"""Minimal embedded resolution via the cluster of infinitely near points.

Each branch contributes its multiplicity sequence; branches share their first
c_ij points, where c_ij is read off the intersection multiplicity by Noether's
formula. Exceptional components are indexed by blown-up points in the order
(depth, lowest branch through the point).
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from math import lcm
from typing import Any

import networkx as nx

from curve import BranchSpec, CurveSpec


logger = logging.getLogger(__name__)

EXCEPTIONAL = "exceptional"
STRICT = "strict"


class IncompatibleContactError(ValueError):
    pass


def _euclid_multiplicities(branch: BranchSpec) -> list[int]:
    m = branch.multiplicity
    betas = branch.characteristic()
    if not betas:
        return [1]
    sequence: list[int] = []
    previous_beta = 0
    divisor = m
    for beta in betas:
        a, b = beta - previous_beta, divisor
        while b:
            q, rest = divmod(a, b)
            sequence.extend([b] * q)
            a, b = b, rest
        divisor = a
        previous_beta = beta
    return sequence


def branch_multiplicities(branch: BranchSpec, length: int) -> list[int]:
    """Multiplicities at the first `length` infinitely near points (padded with 1s)."""
    sequence = _euclid_multiplicities(branch)
    return (sequence + [1] * length)[:length]


def multiplicity_sequence(branch: BranchSpec) -> tuple[int, ...]:
    sequence = list(_euclid_multiplicities(branch))
    while len(sequence) > 1 and sequence[-1] == 1:
        sequence.pop()
    return tuple(sequence)


def delta_invariant(branch: BranchSpec) -> int:
    return sum(m * (m - 1) // 2 for m in _euclid_multiplicities(branch))


def proximities(sequence: list[int]) -> list[set[int]]:
    """prox[t] = depths (1-based) that point t is proximate to; index 0 unused."""
    prox: list[set[int]] = [set() for _ in range(len(sequence) + 1)]
    for depth, m in enumerate(sequence, start=1):
        total = 0
        follower = depth + 1
        while total < m and follower <= len(sequence):
            prox[follower].add(depth)
            total += sequence[follower - 1]
            follower += 1
        if follower <= len(sequence) and total != m:
            raise ValueError(f"proximity equality fails at point {depth} of {sequence}")
    return prox


def resolution_length(branch: BranchSpec) -> int:
    """Blow-ups needed to make the branch smooth and transverse to the exceptional divisor."""
    sequence = branch_multiplicities(branch, len(_euclid_multiplicities(branch)) + 4)
    prox = proximities(sequence)
    n = 0
    while True:
        if (
            sequence[n] == 1
            and (n == 0 and not prox[1] or prox[n + 1] == {n})
            and prox[n + 2] == {n + 1}
        ):
            return n
        n += 1


def shared_depths(curve: CurveSpec) -> list[list[int]]:
    """Depth c_ij of the common cluster of branches i and j (Noether's formula)."""
    r = curve.r
    depths = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1, r):
            target = curve.intersections[i][j]
            seq_i = branch_multiplicities(curve.branches[i], target + 2)
            seq_j = branch_multiplicities(curve.branches[j], target + 2)
            total, depth = 0, 0
            while total < target:
                total += seq_i[depth] * seq_j[depth]
                depth += 1
            if total != target:
                raise IncompatibleContactError(
                    f"incompatible contact data: I[{i}][{j}]={target} is not a Noether sum"
                )
            prox_i, prox_j = proximities(seq_i), proximities(seq_j)
            if any(prox_i[t] != prox_j[t] for t in range(1, depth + 1)):
                raise IncompatibleContactError(
                    f"incompatible contact data: branches {i} and {j} disagree on shared proximities"
                )
            if depth + 1 < len(seq_i) and (prox_i[depth + 1] & prox_j[depth + 1]) - {depth}:
                raise IncompatibleContactError(
                    f"incompatible contact data: branches {i} and {j} cannot separate after depth {depth}"
                )
            depths[i][j] = depths[j][i] = depth
    for i in range(r):
        for j in range(r):
            for k in range(r):
                if len({i, j, k}) == 3 and depths[i][j] < min(depths[i][k], depths[k][j]):
                    raise IncompatibleContactError(
                        f"incompatible contact data: contacts of branches {i}, {j}, {k} are not ultrametric"
                    )
    return depths


@dataclass(frozen=True)
class ResolutionVertex:
    id: int
    multiplicity: int
    kind: str
    branch: int | None = None
    center: tuple[int, int] | None = None


@dataclass(frozen=True)
class ResolutionGraph:
    vertices: tuple[ResolutionVertex, ...]
    edges: tuple[tuple[int, int], ...]
    proximity: tuple[tuple[int, ...], ...]
    self_intersection: tuple[int, ...]
    point_multiplicities: tuple[tuple[int, ...], ...]
    r: int

    def exceptionals(self) -> list[ResolutionVertex]:
        return [v for v in self.vertices if v.kind == EXCEPTIONAL]

    def strict(self, branch: int) -> ResolutionVertex:
        for vertex in self.vertices:
            if vertex.kind == STRICT and vertex.branch == branch:
                return vertex
        raise ValueError(f"no strict transform for branch {branch}")

    def vertex(self, vertex_id: int) -> ResolutionVertex:
        return self.vertices[vertex_id]

    def neighbors(self, vertex_id: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == vertex_id:
                out.append(b)
            elif b == vertex_id:
                out.append(a)
        return sorted(out)

    def as_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for vertex in self.vertices:
            graph.add_node(vertex.id, multiplicity=vertex.multiplicity, kind=vertex.kind)
        graph.add_edges_from(self.edges)
        return graph

    def to_json(self) -> dict[str, Any]:
        vertices = []
        for vertex in self.vertices:
            item: dict[str, Any] = {"id": vertex.id, "kind": vertex.kind, "multiplicity": vertex.multiplicity}
            if vertex.branch is not None:
                item["branch"] = vertex.branch
            if vertex.kind == EXCEPTIONAL:
                item["self_intersection"] = self.self_intersection[vertex.id]
            vertices.append(item)
        return {
            "vertices": vertices,
            "edges": [{"id": index, "k": a, "l": b} for index, (a, b) in enumerate(self.edges)],
            "proximity": [list(row) for row in self.proximity],
        }

    def to_dot(self, name: str = "resolution") -> str:
        lines = [f"graph {name} {{"]
        for vertex in self.vertices:
            if vertex.kind == EXCEPTIONAL:
                lines.append(f'  v{vertex.id} [shape=circle, label="E_{vertex.id} (e={vertex.multiplicity})"];')
            else:
                lines.append(f'  v{vertex.id} [shape=box, label="S_{vertex.branch} (e=1)"];')
        for a, b in self.edges:
            lines.append(f"  v{a} -- v{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_resolution_graph(curve: CurveSpec) -> ResolutionGraph:
    r = curve.r
    depths = shared_depths(curve)
    lengths = []
    for i, branch in enumerate(curve.branches):
        contact = max((depths[i][j] for j in range(r) if j != i), default=0)
        lengths.append(max(resolution_length(branch), contact, 1))
    longest = max(lengths) + 3
    sequences = [branch_multiplicities(b, longest) for b in curve.branches]
    proxes = [proximities(s) for s in sequences]

    def representative(i: int, depth: int) -> int:
        return min([i] + [j for j in range(r) if j != i and depths[i][j] >= depth])

    points = sorted({(t, representative(i, t)) for i in range(r) for t in range(1, lengths[i] + 1)})
    index = {point: n for n, point in enumerate(points)}
    n = len(points)
    through = [[0] * r for _ in range(n)]
    proximate: list[set[int]] = [set() for _ in range(n)]
    for i in range(r):
        for t in range(1, lengths[i] + 1):
            here = index[(t, representative(i, t))]
            through[here][i] = sequences[i][t - 1]
            for s in proxes[i][t]:
                proximate[here].add(index[(s, representative(i, s))])

    multiplicities = [0] * n
    for p in range(n):
        multiplicities[p] = sum(through[p]) + sum(multiplicities[q] for q in proximate[p])

    edges = set()
    for p in range(n):
        for q in proximate[p]:
            if not any(p in proximate[x] and q in proximate[x] for x in range(n)):
                edges.add((min(p, q), max(p, q)))
    vertices = [
        ResolutionVertex(p, multiplicities[p], EXCEPTIONAL, None, points[p]) for p in range(n)
    ]
    for i in range(r):
        strict_id = n + i
        vertices.append(ResolutionVertex(strict_id, 1, STRICT, i, None))
        edges.add((index[(lengths[i], representative(i, lengths[i]))], strict_id))

    proximity = tuple(tuple(1 if q in proximate[p] else 0 for q in range(n)) for p in range(n))
    self_intersection = tuple(-1 - sum(1 for x in range(n) if p in proximate[x]) for p in range(n))
    graph = ResolutionGraph(
        tuple(vertices),
        tuple(sorted(edges)),
        proximity,
        self_intersection,
        tuple(tuple(row) for row in through),
        r,
    )
    logger.info("resolution: %d exceptional components, d=%d", n, lcm_d(graph))
    return graph


def lcm_d(graph: ResolutionGraph) -> int:
    return lcm(*(v.multiplicity for v in graph.vertices))


def mu_from_resolution(graph: ResolutionGraph, r: int) -> int:
    total = 0
    for row in graph.point_multiplicities:
        m = sum(row)
        total += m * (m - 1)
    return total - r + 1


def total_transform_defects(graph: ResolutionGraph) -> list[str]:
    """Check -E_P^2 * e_P = sum of neighbour multiplicities for every exceptional."""
    defects = []
    for vertex in graph.exceptionals():
        around = sum(graph.vertex(v).multiplicity for v in graph.neighbors(vertex.id))
        if -graph.self_intersection[vertex.id] * vertex.multiplicity != around:
            defects.append(f"E_{vertex.id}: {graph.self_intersection[vertex.id]}*{vertex.multiplicity} vs {around}")
    return defects


def minimality_violations(graph: ResolutionGraph) -> list[str]:
    """Contractible (-1)-curves other than the blow-up of the origin itself."""
    violations = []
    for vertex in graph.exceptionals():
        if vertex.center == (1, 0):
            continue
        neighbors = graph.neighbors(vertex.id)
        strict = [v for v in neighbors if graph.vertex(v).kind == STRICT]
        if graph.self_intersection[vertex.id] == -1 and len(neighbors) <= 2 and len(strict) < 2:
            violations.append(f"E_{vertex.id} is a contractible (-1)-curve of degree {len(neighbors)}")
    return violations
