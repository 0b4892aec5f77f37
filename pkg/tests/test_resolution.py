import unittest

from curve import BranchSpec, CurveSpec, cusp, f_lambda, node, tacnode
from resolution import (
    EXCEPTIONAL,
    IncompatibleContactError,
    branch_multiplicities,
    build_resolution_graph,
    delta_invariant,
    lcm_d,
    minimality_violations,
    mu_from_resolution,
    multiplicity_sequence,
    proximities,
    shared_depths,
    total_transform_defects,
)


class ResolutionTests(unittest.TestCase):
    def test_multiplicity_sequences(self):
        self.assertEqual(multiplicity_sequence(cusp().branches[0]), (2,))
        self.assertEqual(multiplicity_sequence(f_lambda().branches[0]), (4, 2, 2))
        self.assertEqual(branch_multiplicities(cusp().branches[0], 5), [2, 1, 1, 1, 1])
        self.assertEqual(delta_invariant(f_lambda().branches[0]), 8)
        self.assertEqual(delta_invariant(BranchSpec()), 0)

    def test_proximities_of_the_cusp(self):
        prox = proximities([2, 1, 1, 1])
        self.assertEqual(prox[2], {1})
        self.assertEqual(prox[3], {1, 2})
        self.assertEqual(prox[4], {3})

    def test_node(self):
        graph = build_resolution_graph(node())
        self.assertEqual([v.multiplicity for v in graph.exceptionals()], [2])
        self.assertEqual(lcm_d(graph), 2)
        self.assertEqual(mu_from_resolution(graph, 2), 1)

    def test_cusp(self):
        graph = build_resolution_graph(cusp())
        self.assertEqual([v.multiplicity for v in graph.exceptionals()], [2, 3, 6])
        self.assertEqual(lcm_d(graph), 6)
        self.assertEqual(graph.neighbors(2), [0, 1, 3])
        self.assertEqual(graph.self_intersection, (-3, -2, -1))
        self.assertEqual(total_transform_defects(graph), [])
        self.assertEqual(minimality_violations(graph), [])

    def test_tacnode(self):
        graph = build_resolution_graph(tacnode())
        self.assertEqual([v.multiplicity for v in graph.exceptionals()], [2, 4])
        self.assertEqual(shared_depths(tacnode()), [[0, 2], [2, 0]])
        self.assertEqual(mu_from_resolution(graph, 2), 3)

    def test_f_lambda(self):
        graph = build_resolution_graph(f_lambda())
        self.assertEqual(lcm_d(graph), 156)
        self.assertEqual(mu_from_resolution(graph, 1), 16)
        self.assertEqual(total_transform_defects(graph), [])
        self.assertTrue(all(v.kind == EXCEPTIONAL for v in graph.exceptionals()))

    def test_incompatible_contact_data(self):
        cusp_branch = cusp().branches[0]
        curve = CurveSpec((cusp_branch, cusp_branch), ((0, 3), (3, 0)))
        with self.assertRaises(IncompatibleContactError):
            build_resolution_graph(curve)

    def test_json_and_dot(self):
        graph = build_resolution_graph(cusp())
        data = graph.to_json()
        self.assertEqual(len(data["vertices"]), 4)
        self.assertEqual(data["vertices"][3]["kind"], "strict")
        self.assertIn("v2 -- v3;", graph.to_dot())


if __name__ == "__main__":
    unittest.main()
