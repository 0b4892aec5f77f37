import unittest

from marked_graph import MarkedGraph, make_graph, validate_graph


def triangle():
    # disk 0 on a triangle of spheres 1, 2, 3
    return make_graph(
        [(0, 0, "disk", 0), (1, 0, "compact"), (2, 0, "compact"), (3, 1, "compact")],
        [(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 1, 3)],
    )


class MarkedGraphTests(unittest.TestCase):
    def test_spanning_tree_prefers_low_edge_ids(self):
        graph = triangle()
        self.assertEqual(graph.spanning_tree(), {0, 1, 2})
        self.assertEqual(graph.root(), 0)
        self.assertEqual(graph.total_genus(), 1)

    def test_fundamental_cycle_runs_along_the_extra_edge(self):
        graph = triangle()
        self.assertEqual(graph.fundamental_cycles(), [[(3, 1), (2, -1), (1, -1)]])

    def test_tree_path_signs(self):
        graph = triangle()
        self.assertEqual(graph.tree_path(0, 3), [(0, 1), (1, 1), (2, 1)])
        self.assertEqual(graph.tree_path(3, 1), [(2, -1), (1, -1)])

    def test_json_round_trip_and_dot(self):
        graph = triangle()
        self.assertEqual(MarkedGraph.from_json(graph.to_json()), graph)
        dot = graph.to_dot()
        self.assertIn('v1 -- v3 [label="3"];', dot)
        self.assertIn("D0 (branch 0)", dot)
        with self.assertRaises(ValueError):
            MarkedGraph.from_json({"vertices": [{"genus": 0}], "edges": []})

    def test_validate_graph_diagnostics(self):
        self.assertEqual(validate_graph(triangle()), [])
        bad = make_graph(
            [(0, 0, "disk", 0), (1, 0, "compact"), (2, -1, "compact")],
            [(0, 0, 1), (1, 1, 2), (2, 1, 2), (3, 2, 1)],
        )
        diagnostics = validate_graph(bad)
        self.assertIn("edge 3 is not oriented k < l", diagnostics)
        self.assertIn("multiple edge between 1 and 2 (edges [1, 2, 3])", diagnostics)
        self.assertIn("negative genus at vertex 2", diagnostics)

    def test_disk_must_have_degree_one(self):
        graph = make_graph([(0, 0, "disk", 0), (1, 0, "compact")], [(0, 0, 1), (1, 0, 1)])
        self.assertIn("disk degree ≠ 1 at vertex 0", validate_graph(graph))


if __name__ == "__main__":
    unittest.main()
