import unittest

from curve import cusp, f_lambda, node, tacnode
from milnor import jet_colength, milnor_number_poly


class MilnorTests(unittest.TestCase):
    def test_fixture_polynomials(self):
        self.assertEqual(milnor_number_poly("x*y"), 1)
        self.assertEqual(milnor_number_poly(cusp().poly), 2)
        self.assertEqual(milnor_number_poly(tacnode().poly), 3)
        self.assertEqual(milnor_number_poly(f_lambda().poly), 16)
        self.assertEqual(milnor_number_poly(node().poly), 1)

    def test_simple_singularities(self):
        self.assertEqual(milnor_number_poly("y^2-x^5"), 4)
        self.assertEqual(milnor_number_poly("x^3+y^4"), 6)
        self.assertEqual(milnor_number_poly("x^2*y-y^4"), 5)

    def test_origin_must_lie_on_the_curve(self):
        with self.assertRaises(ValueError):
            milnor_number_poly("x*y+1")

    def test_non_isolated_singularity_hits_the_cap(self):
        with self.assertRaises(ValueError):
            milnor_number_poly("x^2*y^2", cap=16)

    def test_jet_colength_of_maximal_ideal(self):
        poly = cusp().poly
        self.assertEqual(jet_colength([poly.diff(poly.gens[0]), poly.diff(poly.gens[1])], 6), 2)


if __name__ == "__main__":
    unittest.main()
