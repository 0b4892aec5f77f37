from fractions import Fraction
import math
import unittest

from numeric_integrals import (
    K_ANCHOR,
    L_ANCHOR,
    LocalScenario,
    NumericPath,
    ValidationReport,
    arc_periods,
    extrapolate,
    numeric_epsilon_integral,
    parse_grid,
    symbolic_limit,
    symbolic_value,
    validate,
)


GRID = (1e-2, 1e-3, 1e-4, 1e-5)


class NumericIntegralTests(unittest.TestCase):
    def setUp(self):
        # crossing constant 1/2, arcs -1 and 2 on unit endpoints
        self.scenario = LocalScenario.from_json({"rho": 1, "psi_k": [1], "psi_l": [2], "h0": [0, 1]})

    def test_scenario_parsing(self):
        self.assertEqual(self.scenario.crossing_constant, Fraction(1, 2))
        self.assertEqual(LocalScenario.from_json({"h0": ["1/2", 3]}).crossing_constant, Fraction(2))
        with self.assertRaisesRegex(ValueError, "unknown local scenario keys"):
            LocalScenario.from_json({"sigma": 1})
        with self.assertRaisesRegex(ValueError, "malformed"):
            LocalScenario.from_json({"psi_k": ["x"]})

    def test_parse_grid(self):
        self.assertEqual(parse_grid("1e-2, 1e-3"), (0.01, 0.001))
        for text in ("0,1e-3", "1e-3,2", "", "a"):
            with self.assertRaises(ValueError):
                parse_grid(text)

    def test_paths(self):
        self.assertEqual(NumericPath.over(2.0).approach, (2.0, 1.0))
        self.assertAlmostEqual(NumericPath.over(2.0).start, 1.0)
        bent = NumericPath.reparametrized()
        self.assertEqual(bent.approach, NumericPath.linear().approach)
        self.assertAlmostEqual(bent.end, 1.0)
        with self.assertRaises(ValueError):
            NumericPath.over(0)
        with self.assertRaisesRegex(ValueError, "one-sided derivatives"):
            numeric_epsilon_integral(self.scenario, NumericPath.linear(a=-1.0), 1e-3)
        with self.assertRaises(ValueError):
            numeric_epsilon_integral(self.scenario, NumericPath.linear(), 1.5)

    def test_symbolic_side(self):
        value = symbolic_value(self.scenario)
        self.assertFalse(value.is_scalar)
        self.assertEqual(value.symbols(), {(K_ANCHOR, ("omega_k",)), (L_ANCHOR, ("omega_l",))})
        periods = arc_periods(self.scenario, NumericPath.linear())
        self.assertAlmostEqual(periods[(K_ANCHOR, ("omega_k",))], -1.0)
        self.assertAlmostEqual(periods[(L_ANCHOR, ("omega_l",))], 2.0)
        self.assertAlmostEqual(symbolic_limit(self.scenario, NumericPath.linear()), 1.5)
        self.assertAlmostEqual(symbolic_limit(self.scenario, NumericPath.over(2.0)), 1.5 + math.log(2.0))

    def test_small_epsilon_approaches_the_limit(self):
        self.assertAlmostEqual(numeric_epsilon_integral(self.scenario, NumericPath.linear(), 1e-6), 1.5, places=4)

    def test_extrapolate(self):
        values = [3 + 2 * eps + eps * math.log(eps) - eps**2 for eps in GRID]
        self.assertAlmostEqual(extrapolate(GRID, values), 3.0, places=8)
        self.assertAlmostEqual(extrapolate((0.1,), (4.0,)), 4.0)

    def test_validation_passes_on_every_path(self):
        for path in (NumericPath.linear(), NumericPath.reparametrized(), NumericPath.over(2.0)):
            report = validate(self.scenario, path, GRID, tolerance=1e-6)
            self.assertTrue(report.passed, report.to_json())

    def test_tangent_rescaling_shifts_by_rho_log_lambda(self):
        scenario = LocalScenario.from_json({"rho": "3/2", "psi_k": [1], "psi_l": [2], "h0": [0, 1]})
        base = validate(scenario, NumericPath.linear(), GRID)
        scaled = validate(scenario, NumericPath.over(2.0), GRID, jobs=2)
        self.assertAlmostEqual(scaled.extrapolated - base.extrapolated, 1.5 * math.log(2.0), places=6)

    def test_report(self):
        report = ValidationReport("p", (0.1,), (1.0,), 1.1, 1.0, 1e-6)
        self.assertAlmostEqual(report.error, 0.1)
        self.assertFalse(report.passed)
        self.assertEqual(report.to_json()["path"], "p")


if __name__ == "__main__":
    unittest.main()
