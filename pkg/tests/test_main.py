import io
import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import main


class MainTests(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()
        self.out = Path(self.tempdir.name) / "out"

    def tearDown(self):
        self.tempdir.cleanup()

    def run_main(self, *argv):
        with patch("sys.stdout", new_callable=io.StringIO) as stdout, patch("sys.stderr", new_callable=io.StringIO) as stderr:
            code = main.main([*argv, "--out", str(self.out)])
        return code, stdout.getvalue(), stderr.getvalue()

    def read_json(self, name):
        return json.loads((self.out / name).read_text(encoding="utf-8"))

    def write_spec(self, data):
        path = Path(self.tempdir.name) / "spec.json"
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
        return str(path)

    def test_resolve_cusp(self):
        code, stdout, _ = self.run_main("resolve", "--input", "cusp", "--dot")
        self.assertEqual(code, main.EXIT_OK)
        report = self.read_json("resolution_report.json")
        self.assertEqual(report["e"], [2, 3, 6])
        self.assertEqual((report["d"], report["mu"], report["mu_branch_data"], report["mu_polynomial"]), (6, 2, 2, 2))
        self.assertIn("vertices", self.read_json("resolution.json"))
        self.assertTrue((self.out / "resolution.dot").exists())
        self.assertIn("d = 6, mu = 2", stdout)

    def test_semistable_and_hodge(self):
        code, stdout, _ = self.run_main("semistable", "--input", "cusp")
        self.assertEqual(code, main.EXIT_OK)
        fiber = self.read_json("central_fiber.json")
        self.assertTrue(fiber["h1"]["passed"])
        self.assertEqual(fiber["euler_characteristic"], -1)
        self.assertIn("PASS", stdout)
        code, _, _ = self.run_main("hodge", "--input", "node")
        self.assertEqual(code, main.EXIT_OK)
        data = self.read_json("hodge.json")
        self.assertTrue(data["tree"])
        self.assertTrue(data["T_is_identity"])

    def test_spec_files(self):
        code, _, _ = self.run_main("resolve", "--input", self.write_spec({"branches": [{"exponents": ["3/2"]}], "intersections": [[0]]}))
        self.assertEqual(code, main.EXIT_OK)
        code, _, stderr = self.run_main("resolve", "--input", self.write_spec("{"))
        self.assertEqual(code, main.EXIT_PARSE)
        self.assertIn("parse error", stderr)
        code, _, _ = self.run_main("resolve", "--input", self.write_spec({"branches": [{"exponents": ["3/2", "5/2"]}]}))
        self.assertEqual(code, main.EXIT_PARSE)
        two_cusps = {"branches": [{"exponents": ["3/2"]}, {"exponents": ["3/2"]}], "intersections": [[0, 3], [3, 0]]}
        code, _, stderr = self.run_main("resolve", "--input", self.write_spec(two_cusps))
        self.assertEqual(code, main.EXIT_CONTACT)
        self.assertIn("incompatible contact data", stderr)

    def test_argument_errors(self):
        self.assertEqual(self.run_main("resolve")[0], main.EXIT_PARSE)
        self.assertEqual(self.run_main("invariant", "--input", "node", "--s", "0")[0], main.EXIT_PARSE)
        with self.assertRaises(SystemExit):
            self.run_main("integrate-demo", "--epsilon-grid", "0,1")

    def test_invariant(self):
        code, stdout, _ = self.run_main("invariant", "--input", "node", "--s", "2")
        self.assertEqual(code, main.EXIT_OK)
        data = self.read_json("invariant.json")
        self.assertEqual((data["d"], data["mu"], data["s"]), (2, 1, 2))
        self.assertTrue(data["tree"])
        self.assertTrue(data["constant"])
        self.assertEqual(data["orbits"][0], {"mult": 2, "label": "tangent"})
        self.assertEqual([o["label"] for o in data["orbits"][1:]], ["monstrance D0", "monstrance D1"])
        self.assertIn("monstrance D1", stdout)
        self.assertIn("nilpotent orbit constant: true", stdout)

    def test_bar_demo(self):
        code, stdout, _ = self.run_main("bar-demo")
        self.assertEqual(code, main.EXIT_OK)
        data = self.read_json("omega.json")
        self.assertEqual(data["L"], "rho/312")
        self.assertIn("verdict: nonzero", stdout)
        code, _, stderr = self.run_main("bar-demo", "--scenario", self.write_spec({"sigma": 1}))
        self.assertEqual(code, main.EXIT_ERROR)
        self.assertIn("unknown scenario keys", stderr)

    def test_integrate_demo(self):
        code, _, _ = self.run_main("integrate-demo", "--epsilon-grid", "1e-2,1e-3,1e-4,1e-5")
        self.assertEqual(code, main.EXIT_OK)
        shift = self.read_json("integrate_demo.json")["tangent_shift"]
        self.assertAlmostEqual(shift["observed"], shift["expected"], places=6)


if __name__ == "__main__":
    unittest.main()
