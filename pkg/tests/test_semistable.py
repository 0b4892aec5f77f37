from itertools import product
from math import gcd
import random
import unittest

from curve import BranchSpec, CurveSpec, cusp, f_lambda, milnor_from_branch_data, node, tacnode
from resolution import EXCEPTIONAL, STRICT, ResolutionGraph, ResolutionVertex, build_resolution_graph, mu_from_resolution
from semistable import (
    chain_graph,
    cover_components,
    edge_chain_data,
    euler_characteristic,
    semistable_reduce,
    verify_h1_dimension,
)


def reduce(curve):
    resolution = build_resolution_graph(curve)
    return semistable_reduce(resolution), mu_from_resolution(resolution, curve.r)


def doubled_edge_resolution():
    # E_0 (e=2) - E_1 (e=2), each carrying two strict transforms
    vertices = (
        ResolutionVertex(0, 2, EXCEPTIONAL, None, (1, 0)),
        ResolutionVertex(1, 2, EXCEPTIONAL, None, (2, 0)),
        ResolutionVertex(2, 1, STRICT, 0),
        ResolutionVertex(3, 1, STRICT, 1),
        ResolutionVertex(4, 1, STRICT, 2),
        ResolutionVertex(5, 1, STRICT, 3),
    )
    edges = ((0, 1), (0, 2), (0, 3), (1, 4), (1, 5))
    return ResolutionGraph(vertices, edges, ((0, 0), (1, 0)), (-2, -2), ((1, 1, 0, 0), (0, 0, 1, 1)), 4)


def random_branch(rng, max_pairs=2, multiplicities=(2, 3)):
    m1 = rng.choice(multiplicities)
    n1 = rng.choice([n for n in range(m1 + 1, 2 * m1 + 2) if gcd(n, m1) == 1])
    pairs = [(m1, n1)]
    if max_pairs > 1 and rng.random() < 0.4:
        low = 2 * n1 + 1
        pairs.append((2, rng.choice([n for n in range(low, low + 4 * m1) if gcd(n, 2 * m1) == 1])))
    return BranchSpec.from_pairs(pairs)


def random_curve(rng):
    """A single branch, smooth branches with ultrametric contact, or transverse singular and smooth branches."""
    family = rng.randrange(3)
    if family == 0:
        return CurveSpec((random_branch(rng),))
    singular = []
    if family == 2:
        count = rng.randint(1, 2)
        singular = [random_branch(rng, 1, (2,) if count == 2 else (2, 3)) for _ in range(count)]
    # a smooth branch is a truncated series y = sum c_j x^j; contact is 1 + the common prefix
    smooth_count = rng.randint(2, 4) if family == 1 else rng.randint(0, 2)
    series = rng.sample(list(product(range(3), repeat=3)), smooth_count)
    branches = singular + [BranchSpec() for _ in series]
    r = len(branches)
    matrix = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1, r):
            if i < len(singular):
                contact = branches[i].multiplicity * branches[j].multiplicity
            else:
                a, b = series[i - len(singular)], series[j - len(singular)]
                prefix = next(n for n in range(3) if a[n] != b[n])
                contact = 1 + prefix
            matrix[i][j] = matrix[j][i] = contact
    return CurveSpec(tuple(branches), tuple(tuple(row) for row in matrix))


class SemistableTests(unittest.TestCase):
    def test_local_data(self):
        self.assertEqual(edge_chain_data(2, 6, 6).point_count, 2)
        self.assertEqual(edge_chain_data(2, 1, 4).chain_length, 1)
        cover = cover_components(6, [2, 3, 1], 6)
        self.assertEqual((cover.component_count, cover.genus), (1, 1))
        with self.assertRaises(ValueError):
            edge_chain_data(4, 3, 6)

    def test_node_is_disk_sphere_disk(self):
        fiber, mu = reduce(node())
        graph = fiber.graph
        self.assertEqual([(v.kind, v.genus) for v in graph.vertices], [("disk", 0), ("disk", 0), ("compact", 0)])
        self.assertEqual([(e.k, e.l) for e in graph.edges], [(0, 2), (1, 2)])
        self.assertTrue(verify_h1_dimension(fiber, mu, 2).passed)

    def test_cusp_has_genus_one_center(self):
        fiber, mu = reduce(cusp())
        graph = fiber.graph
        self.assertEqual(fiber.d, 6)
        self.assertEqual(graph.total_genus(), 1)
        center = [v for v in graph.vertices if v.genus == 1][0]
        self.assertEqual(graph.degree(center.id), 6)
        self.assertEqual(len(graph.vertices), 7)
        self.assertTrue(verify_h1_dimension(fiber, mu, 1).passed)

    def test_euler_characteristic_is_one_minus_mu(self):
        for curve in (node(), cusp(), tacnode(), f_lambda()):
            fiber, mu = reduce(curve)
            self.assertEqual(euler_characteristic(fiber), 1 - mu)
            report = verify_h1_dimension(fiber, mu, curve.r)
            self.assertTrue(report.passed, str(report))

    def test_dimension_matches_milnor_number_on_random_curves(self):
        rng = random.Random(1729)
        for trial in range(210):
            curve = random_curve(rng)
            with self.subTest(trial=trial, curve=curve.to_json()):
                fiber, mu = reduce(curve)
                self.assertEqual(mu, milnor_from_branch_data(curve))
                self.assertTrue(verify_h1_dimension(fiber, mu, curve.r).passed)
                self.assertEqual(euler_characteristic(fiber), 1 - mu)

    def test_base_change_multiple_inserts_chains(self):
        resolution = build_resolution_graph(node())
        fiber = semistable_reduce(resolution, d=4)
        self.assertEqual(len(fiber.graph.vertices), 5)
        self.assertEqual(euler_characteristic(fiber), 0)

    def test_multiple_edges_violate_normal_crossings(self):
        resolution = doubled_edge_resolution()
        with self.assertRaisesRegex(ValueError, "normal crossings assumption violated"):
            semistable_reduce(resolution)
        fiber = semistable_reduce(resolution, allow_multi_edges=True)
        self.assertEqual(len(fiber.graph.edges), 6)

    def test_h1_report_text(self):
        fiber, mu = reduce(cusp())
        self.assertEqual(str(verify_h1_dimension(fiber, mu, 1)), "dim H1 = 2, mu = 2: PASS")
        self.assertIn("FAIL", str(verify_h1_dimension(fiber, mu + 1, 1)))

    def test_chain_graph(self):
        fiber = chain_graph(7, d=156)
        graph = fiber.graph
        self.assertEqual(len(graph.edges), 7)
        self.assertEqual(graph.vertex(7).genus, 1)
        self.assertTrue(graph.vertex(0).is_disk)
        self.assertEqual(graph.tree_path(0, 7), [(i, 1) for i in range(7)])
        with self.assertRaises(ValueError):
            chain_graph(0)

    def test_json_carries_provenance(self):
        fiber, _ = reduce(node())
        data = fiber.to_json()
        self.assertEqual(data["d"], 2)
        self.assertEqual(data["provenance"]["2"], ["cover", 0, 0])


if __name__ == "__main__":
    unittest.main()
