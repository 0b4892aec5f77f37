"""Mixed Hodge data of H^1 read off the central fiber graph.

Basis order is (w0, w1, w2): dxi-cycle classes, then omega_j / omegabar_j per
compact component, then the Theta classes of the fundamental cycles followed
by the Theta classes of the tree paths disk 0 -> disk i. In the lattice basis
the w2 vectors carry a factor 1/tau.
Matrices are sympy matrices in tau; serialized entries go through Scalar
canonical form.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import logging
from typing import Any

import sympy

from curve import CurveSpec, MonstranceData, monstrance_order
from marked_graph import MarkedGraph
from resolution import build_resolution_graph, mu_from_resolution
from scalar import DEFAULT_ALPHABET, Alphabet, Scalar
from semistable import CentralFiberGraph, semistable_reduce, verify_h1_dimension


logger = logging.getLogger(__name__)

TAU = sympy.Symbol("tau")
LOG_LAMBDA = sympy.Symbol("log_lambda")
LOG_MU = sympy.Symbol("log_mu")


def _graph(fiber: CentralFiberGraph | MarkedGraph) -> MarkedGraph:
    return fiber.graph if isinstance(fiber, CentralFiberGraph) else fiber


@dataclass(frozen=True)
class MhsSummary:
    gr_dims: tuple[int, int, int]
    gr2_alt: int
    hodge_split: tuple[int, int]
    labels: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]] = ((), (), ())

    @property
    def w0(self) -> int:
        return self.gr_dims[0]

    @property
    def w1(self) -> int:
        return self.gr_dims[1]

    @property
    def w2(self) -> int:
        return self.gr_dims[2]

    @property
    def total(self) -> int:
        return sum(self.gr_dims)

    @property
    def gr2_discrepancy(self) -> bool:
        return self.w2 != self.gr2_alt

    def to_json(self) -> dict[str, Any]:
        return {
            "gr_dims": list(self.gr_dims),
            "gr2_alt": self.gr2_alt,
            "gr2_discrepancy": self.gr2_discrepancy,
            "hodge_split": list(self.hodge_split),
            "labels": {f"w{n}": list(names) for n, names in enumerate(self.labels)},
        }


def _edge_set(cycle: list[tuple[int, int]]) -> str:
    return "{" + ", ".join(f"{'+' if sign > 0 else '-'}e{edge}" for edge, sign in cycle) + "}"


def weight_graded_dims(fiber: CentralFiberGraph | MarkedGraph) -> MhsSummary:
    graph = _graph(fiber)
    betti = len(graph.edges) - len(graph.vertices) + 1
    genus = graph.total_genus()
    w2 = len(graph.edges) - len(graph.compact_vertices())
    cycles = graph.fundamental_cycles()
    w0_labels = tuple(f"dxi{_edge_set(c)}" for c in cycles)
    w1_labels = tuple(
        f"{name}{j}@D{v.id}"
        for v in graph.compact_vertices()
        for j in range(1, v.genus + 1)
        for name in ("omega", "omegabar")
    )
    disks = graph.disks()
    w2_labels = tuple(f"theta{_edge_set(c)}/tau" for c in cycles) + tuple(
        f"theta{_edge_set(graph.tree_path(disks[0].id, d.id))}/tau" for d in disks[1:]
    )
    summary = MhsSummary((betti, 2 * genus, w2), betti, (genus, genus), (w0_labels, w1_labels, w2_labels))
    if summary.gr2_discrepancy:
        logger.warning("Gr2 formulas disagree: #edges - #compact = %d, #edges - #vertices + 1 = %d", w2, betti)
    return summary


def tree_test(fiber: CentralFiberGraph | MarkedGraph) -> bool:
    graph = _graph(fiber)
    return len(graph.edges) == len(graph.vertices) - 1


@dataclass
class NilpotentOps:
    dims: tuple[int, int, int]
    labels: list[str]
    N: sympy.Matrix
    M: list[sympy.Matrix]
    T: sympy.Matrix
    T_de_rham: sympy.Matrix
    L: sympy.Matrix
    d: int
    monstrance: list[MonstranceData] = field(default_factory=list)

    @property
    def size(self) -> int:
        return sum(self.dims)

    def to_json(self, alphabet: Alphabet = DEFAULT_ALPHABET) -> dict[str, Any]:
        return {
            "basis": self.labels,
            "N": matrix_rows(self.N, alphabet),
            "M": [matrix_rows(m, alphabet) for m in self.M],
            "T": matrix_rows(self.T, alphabet),
            "T_de_rham": matrix_rows(self.T_de_rham, alphabet),
            "L": matrix_rows(self.L, alphabet),
        }


def matrix_rows(matrix: sympy.Matrix, alphabet: Alphabet = DEFAULT_ALPHABET) -> list[list[str]]:
    """Entries in Scalar canonical form."""
    return [[str(value) for value in row] for row in scalar_matrix(matrix, alphabet)]


def lattice_scaling(dims: tuple[int, int, int]) -> sympy.Matrix:
    """Columns express the lattice basis in the de Rham basis (w2 scaled by 1/tau)."""
    w0, w1, w2 = dims
    return sympy.diag(*([1] * (w0 + w1) + [1 / TAU] * w2))


def nilpotent_matrices(
    fiber: CentralFiberGraph,
    monstrance: list[MonstranceData],
) -> NilpotentOps:
    graph = fiber.graph
    disks = graph.disks()
    if len(monstrance) != len(disks):
        raise ValueError(f"branch count mismatch: {len(monstrance)} monstrance entries for {len(disks)} disks")
    summary = weight_graded_dims(graph)
    w0, w1, _ = summary.gr_dims
    w2 = len(summary.labels[2])
    size = w0 + w1 + w2
    cycles = graph.fundamental_cycles()
    N = sympy.zeros(size, size)
    for n in range(len(cycles)):
        N[n, w0 + w1 + n] = 1
    if cycles:
        vectors = [_signed_vector(c) for c in cycles]
        gram = sympy.Matrix([[_pair(a, b) for b in vectors] for a in vectors])
        for n, disk in enumerate(disks[1:]):
            path = _signed_vector(graph.tree_path(disks[0].id, disk.id))
            coords = gram.LUsolve(sympy.Matrix([_pair(path, z) for z in vectors]))
            fractional = [c for c in coords if not c.is_integer]
            if fractional:
                logger.error(
                    "dxi class of the path D%d -> D%d has coordinates %s in the cycle basis",
                    disks[0].id,
                    disk.id,
                    list(coords),
                )
                raise ValueError(
                    f"non-integral monodromy: N of the disk-{disk.branch} class has entry {fractional[0]}"
                )
            for i in range(len(cycles)):
                N[i, w0 + w1 + len(cycles) + n] = int(coords[i])
    M = [sympy.zeros(size, size) for _ in disks]
    T_de_rham = sympy.eye(size) - TAU * N
    scale = lattice_scaling((w0, w1, w2))
    T = (scale.inv() * T_de_rham * scale).applyfunc(sympy.simplify)
    L = N / fiber.d
    for m_i, data in zip(M, monstrance):
        L = L - m_i / data.order
    if (N * N) != sympy.zeros(size, size):
        raise ValueError("internal consistency error: N^2 != 0")
    return NilpotentOps(
        (w0, w1, w2),
        [*summary.labels[0], *summary.labels[1], *summary.labels[2]],
        N,
        M,
        T,
        T_de_rham,
        L,
        fiber.d,
        list(monstrance),
    )


def _signed_vector(cycle: list[tuple[int, int]]) -> dict[int, int]:
    out: dict[int, int] = {}
    for edge, sign in cycle:
        out[edge] = out.get(edge, 0) + sign
    return out


def _pair(a: dict[int, int], b: dict[int, int]) -> int:
    return sum(value * b.get(edge, 0) for edge, value in a.items())


def lattice_transport(ops: NilpotentOps, log_lambda: Any = LOG_LAMBDA, log_mu: Any = LOG_MU) -> sympy.Matrix:
    """lambda^(-N) mu^(M) = (I - log(lambda) N)(I + log(mu) M), both squares being zero."""
    size = ops.size
    total_m = sympy.zeros(size, size)
    for m_i in ops.M:
        total_m = total_m + m_i
    result = (sympy.eye(size) - log_lambda * ops.N) * (sympy.eye(size) + log_mu * total_m)
    return result.applyfunc(sympy.expand)


def is_identity(matrix: sympy.Matrix) -> bool:
    return (matrix - sympy.eye(matrix.rows)).applyfunc(sympy.simplify).is_zero_matrix


@dataclass(frozen=True)
class OrbitDescriptor:
    """mult formal tangent vectors zeta^nu * w, permuted cyclically."""

    mult: int
    label: str = ""

    @property
    def angles(self) -> list[Fraction]:
        return [Fraction(nu, self.mult) for nu in range(self.mult)]

    def act(self, nu: int, steps: int = 1) -> int:
        return (nu + steps) % self.mult

    def to_json(self) -> dict[str, Any]:
        return {"mult": self.mult, "label": self.label}


def inverse_star(mult: int, label: str = "") -> OrbitDescriptor:
    if mult < 1:
        raise ValueError(f"orbit multiplicity must be >= 1, got {mult}")
    return OrbitDescriptor(mult, label)


def tensor_graded_dims(dims: tuple[int, int, int], s: int) -> list[list[int]]:
    """Weight-graded dims of (H^1)^{tensor k} for k = 1..s."""
    x = sympy.Symbol("x")
    base = sympy.Poly(dims[0] + dims[1] * x + dims[2] * x**2, x)
    out = []
    power = sympy.Poly(1, x)
    for _ in range(s):
        power = power * base
        coeffs = power.all_coeffs()[::-1]
        out.append([int(c) for c in coeffs])
    return out


@dataclass
class InvariantSummary:
    d: int
    orbit_sizes: list[int]
    summand_count: int
    graded_dims: list[int]
    tensor_dims: list[list[int]]
    mhs: MhsSummary
    ops: NilpotentOps
    tree: bool
    constant: bool
    s: int
    mu: int
    witnesses: dict[tuple[int, int], Any] = field(default_factory=dict)
    orbits: list[OrbitDescriptor] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "s": self.s,
            "d": self.d,
            "mu": self.mu,
            "orbit_sizes": {"tangent": self.d, "monstrance": self.orbit_sizes},
            "orbits": [orbit.to_json() for orbit in self.orbits],
            "summand_count": self.summand_count,
            "graded_dims": self.graded_dims,
            "mhs": self.mhs.to_json(),
            "operators": self.ops.to_json(),
            "tree": self.tree,
            "constant": self.constant,
            "witnesses": {f"D{v}/branch{b}": str(w.l_value) for (v, b), w in sorted(self.witnesses.items())},
        }


def assemble_invariant(
    curve: CurveSpec,
    s: int,
    *,
    jobs: int = 1,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> InvariantSummary:
    """Orbit data, graded dimensions and operators of the invariant at depth s.

    Below s = 3 the invariant is constant exactly when the fiber is a tree. From
    s = 3 on a tree, an Omega witness is built on every positive-genus component
    for every branch, with that branch's monstrance order; the invariant is
    constant when all [L(Omega)] vanish. A fiber with cycles is never constant.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    resolution = build_resolution_graph(curve)
    fiber = semistable_reduce(resolution)
    mu = mu_from_resolution(resolution, curve.r)
    report = verify_h1_dimension(fiber, mu, curve.r)
    if not report.passed:
        logger.warning("dimension identity failed: %s", report)
    monstrance = [monstrance_order(branch) for branch in curve.branches]
    mhs = weight_graded_dims(fiber)
    ops = nilpotent_matrices(fiber, monstrance)
    tensor_dims = tensor_graded_dims((mhs.w0, mhs.w1, mhs.w2), s)
    width = max(len(row) for row in tensor_dims)
    graded = [sum(row[n] for row in tensor_dims if n < len(row)) for n in range(width)]
    tree = tree_test(fiber)
    constant = tree
    witnesses: dict[tuple[int, int], Any] = {}
    if tree and s >= 3:
        # deferred import: scenario pulls in the whole dga stack
        from scenario import omega_witness

        targets = [
            (v.id, branch)
            for v in fiber.graph.compact_vertices()
            if v.genus > 0
            for branch in range(curve.r)
        ]

        def run(target: tuple[int, int]):
            vertex_id, branch = target
            order = monstrance[branch].order
            return target, omega_witness(fiber, vertex_id, order, fiber.d, branch=branch, alphabet=alphabet)

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
            for target, witness in executor.map(run, targets):
                witnesses[target] = witness
        constant = all(w.l_value.is_zero for w in witnesses.values())
    orbits = [inverse_star(fiber.d, "tangent")]
    orbits += [inverse_star(m.order, f"monstrance D{disk.id}") for m, disk in zip(monstrance, fiber.graph.disks())]
    summary = InvariantSummary(
        fiber.d,
        [orbit.mult for orbit in orbits[1:]],
        fiber.d * sum(m.order for m in monstrance),
        graded,
        tensor_dims,
        mhs,
        ops,
        tree,
        constant,
        s,
        mu,
        witnesses,
        orbits,
    )
    logger.info("invariant at s=%d: %d summands, constant=%s", s, summary.summand_count, constant)
    return summary


def scalar_matrix(matrix: sympy.Matrix, alphabet: Alphabet = DEFAULT_ALPHABET) -> list[list[Scalar]]:
    return [[alphabet.parse(sympy.sstr(matrix[i, j])) for j in range(matrix.cols)] for i in range(matrix.rows)]
