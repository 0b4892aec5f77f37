import unittest

from curve import cusp, node
from dga_model import (
    ComponentModel,
    DgaModel,
    Generator,
    UNIT,
    apply_M,
    apply_N,
    augmentation,
    compat_check,
    d,
    element_from_json,
    h1_basis,
    hodge_level,
    is_exact,
    make_theta,
    split_exact,
    theta_chain,
    wedge,
    weight_level,
)
from marked_graph import make_graph
from resolution import build_resolution_graph
from semistable import h1_dimension, semistable_reduce


def triangle():
    return make_graph(
        [(0, 0, "disk", 0), (1, 0, "compact"), (2, 0, "compact"), (3, 1, "compact")],
        [(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 1, 3)],
    )


def fiber_graph(curve):
    return semistable_reduce(build_resolution_graph(curve)).graph


class DgaModelTests(unittest.TestCase):
    def setUp(self):
        self.model = DgaModel(triangle())

    def test_d_squared_is_zero(self):
        f = self.model.element(0, edges={1: {"P": "xi^2*u + rho*xi*u^2"}})
        phi = self.model.element(1, edges={1: {"K": "xi*u", "H": "u^2", "L": "xi^3*u"}})
        self.assertFalse(d(f).is_zero)
        self.assertTrue(d(d(f)).is_zero)
        self.assertTrue(d(d(phi)).is_zero)

    def test_wedge_signs_and_leibniz(self):
        dx = self.model.element(1, edges={0: {"K": 1}})
        self.assertEqual(wedge(dx, self.model.dxi(0)), self.model.element(2, edges={0: {"R": -1}}))
        self.assertTrue(wedge(dx, dx).is_zero)
        f = self.model.element(0, edges={0: {"P": "xi*u"}})
        theta = make_theta(self.model, 0)
        self.assertTrue(d(theta).is_zero)
        self.assertEqual(d(wedge(f, theta)), wedge(d(f), theta))

    def test_monodromy_logarithm_on_theta(self):
        self.assertEqual(apply_N(make_theta(self.model, 2)), self.model.dxi(2))
        self.assertTrue(apply_N(apply_N(make_theta(self.model, 2))).is_zero)
        self.assertTrue(apply_N(self.model.one()).is_zero)

    def test_local_monodromy_acts_on_the_disk_edge_only(self):
        model = DgaModel(fiber_graph(node()))
        both = make_theta(model, 0) + make_theta(model, 1)
        self.assertEqual(apply_M(both, 0), model.dxi(0))
        self.assertEqual(apply_M(both, 1), model.dxi(1))

    def test_compatibility(self):
        self.assertEqual(compat_check(self.model.one()), [])
        problems = compat_check(make_theta(self.model, 0))
        self.assertIn("A¹ K(0,u) ≠ Res on edge 0 (side k=D0)", problems)
        self.assertIn("A¹ L(1,u) ≠ Res on edge 0 (side l=D1)", problems)
        self.assertEqual(compat_check(make_theta(self.model, 0, balanced=True)), [])

    def test_exactness_needs_a_bridge_edge(self):
        self.assertTrue(is_exact(self.model.dxi(0)))
        self.assertFalse(is_exact(self.model.dxi(1)))
        self.assertFalse(is_exact(self.model.dxi(3)))
        # dxi1 = d(F) - dxi3 around the cycle 1, 2, 3
        bar, function = split_exact(self.model.dxi(1))
        self.assertEqual(bar, self.model.dxi(3, -1))
        self.assertEqual(bar + d(function), self.model.dxi(1))

    def test_split_exact(self):
        phi = self.model.dxi(1, 3) + self.model.dxi(3) + theta_chain(self.model, [(3, 1), (2, -1), (1, -1)])
        bar, function = split_exact(phi)
        self.assertEqual(bar + d(function), phi)
        self.assertEqual(augmentation(function), 0)
        self.assertEqual(split_exact(bar)[0], bar)

    def test_h1_basis_matches_the_dimension_count(self):
        for graph, r in ((fiber_graph(node()), 2), (fiber_graph(cusp()), 1), (triangle(), 1)):
            model = DgaModel(graph)
            basis = h1_basis(model)
            self.assertEqual(len(basis), h1_dimension(graph, r))
            for name, form in basis.all():
                self.assertTrue(d(form).is_zero, name)
                self.assertEqual(compat_check(form), [], name)

    def test_filtration_levels(self):
        omega = self.model.generator(3, "omega1")
        omegabar = self.model.generator(3, "omegabar1")
        self.assertEqual((weight_level(omega), hodge_level(omega)), (1, 1))
        self.assertEqual(hodge_level(omegabar), 0)
        self.assertIsNone(weight_level(self.model.zero(1)))

    def test_residue_theorem_is_enforced(self):
        graph = make_graph([(0, 0, "disk", 0), (1, 0, "compact")], [(0, 0, 1)])
        component = ComponentModel(1, "compact", (0,))
        component.add(Generator(UNIT, 0, values={0: 1}))
        component.add(Generator("res[0]", 1, 1, 1, residues={0: 1}))
        with self.assertRaisesRegex(ValueError, "residue theorem violated"):
            DgaModel(graph, {1: component})

    def test_degree_cap_and_json(self):
        with self.assertRaises(ValueError):
            self.model.element(0, edges={0: {"P": "u^40"}})
        phi = self.model.element(1, surface={3: {"omega1": "rho"}}, edges={2: {"H": "xi*u"}})
        self.assertEqual(element_from_json(self.model, phi.to_json()), phi)


if __name__ == "__main__":
    unittest.main()
