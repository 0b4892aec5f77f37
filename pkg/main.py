#!/usr/bin/env python3

import argparse
import json
import logging
import math
import os
from pathlib import Path
import sys
from typing import Any

from tabulate import tabulate


ROOT = Path(__file__).resolve().parent

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_CONTACT = 3


def load_dotenv(path: Path = ROOT / ".env") -> None:
    if not path.exists():
        return
    for raw_line in path.read_text(encoding="utf-8").splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        name, value = line.split("=", 1)
        name = name.strip()
        value = value.strip().strip('"').strip("'")
        if name and name not in os.environ:
            os.environ[name] = value


# module constants read the environment at import time
load_dotenv()

from curve import SpecParseError, cusp, f_lambda, load_curve, milnor_from_branch_data, monstrance_order, node, tacnode  # noqa: E402
from hodge_graph import TAU, assemble_invariant, is_identity, lattice_transport, nilpotent_matrices, tree_test, weight_graded_dims  # noqa: E402
from milnor import milnor_number_poly  # noqa: E402
from numeric_integrals import EPSILON_GRID, LocalScenario, NumericPath, parse_grid, validate  # noqa: E402
from resolution import IncompatibleContactError, build_resolution_graph, lcm_d, mu_from_resolution  # noqa: E402
from scenario import load_scenario, scenario_omega  # noqa: E402
from semistable import euler_characteristic, semistable_reduce, verify_h1_dimension  # noqa: E402


logger = logging.getLogger(__name__)

FIXTURES = {"node": node, "cusp": cusp, "tacnode": tacnode, "f_lambda": f_lambda}


def read_curve(source: str):
    if source in FIXTURES and not Path(source).exists():
        return FIXTURES[source]()
    return load_curve(Path(source))


def write_json(out: Path, name: str, data: Any) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_text(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def print_table(rows: list[list[Any]], headers: list[str]) -> None:
    print(tabulate(rows, headers=headers, tablefmt="rst", stralign="right"))


def cmd_resolve(args) -> int:
    curve = read_curve(args.input)
    graph = build_resolution_graph(curve)
    d = lcm_d(graph)
    mu = mu_from_resolution(graph, curve.r)
    report: dict[str, Any] = {
        "r": curve.r,
        "e": [v.multiplicity for v in graph.exceptionals()],
        "d": d,
        "mu": mu,
        "mu_branch_data": milnor_from_branch_data(curve),
    }
    if curve.poly is not None:
        report["mu_polynomial"] = milnor_number_poly(curve.poly)
    write_json(args.out, "resolution.json", graph.to_json())
    write_json(args.out, "resolution_report.json", report)
    if args.dot:
        write_text(args.out, "resolution.dot", graph.to_dot())
    print_table([[v.id, v.kind, v.multiplicity] for v in graph.vertices], ["vertex", "kind", "e"])
    print(f"\nd = {d}, mu = {mu}")
    return EXIT_OK


def cmd_semistable(args) -> int:
    curve = read_curve(args.input)
    resolution = build_resolution_graph(curve)
    fiber = semistable_reduce(resolution)
    mu = mu_from_resolution(resolution, curve.r)
    h1 = verify_h1_dimension(fiber, mu, curve.r)
    chi = euler_characteristic(fiber)
    data = fiber.to_json()
    data["h1"] = {"dimension": h1.dimension, "mu": mu, "passed": h1.passed}
    data["euler_characteristic"] = chi
    write_json(args.out, "central_fiber.json", data)
    if args.dot:
        write_text(args.out, "central_fiber.dot", fiber.graph.to_dot())
    rows = [[v.id, v.kind, v.genus, fiber.graph.degree(v.id)] for v in fiber.graph.vertices]
    print_table(rows, ["component", "kind", "genus", "degree"])
    print(f"\n{h1}; euler characteristic {chi} (1 - mu = {1 - mu})")
    return EXIT_OK if h1.passed else EXIT_ERROR


def cmd_hodge(args) -> int:
    curve = read_curve(args.input)
    fiber = semistable_reduce(build_resolution_graph(curve))
    mhs = weight_graded_dims(fiber)
    ops = nilpotent_matrices(fiber, [monstrance_order(b) for b in curve.branches])
    full_loop = lattice_transport(ops, TAU, 0)
    data = {
        "mhs": mhs.to_json(),
        "operators": ops.to_json(),
        "tree": tree_test(fiber),
        "full_loop_matches_T": is_identity(full_loop * ops.T_de_rham.inv()),
        "T_is_identity": is_identity(ops.T),
    }
    write_json(args.out, "hodge.json", data)
    print_table([[f"Gr_{2 * n}^W", dim] for n, dim in enumerate(mhs.gr_dims)], ["graded piece", "dim"])
    if mhs.gr2_discrepancy:
        print(f"\nwarning: Gr_2 formulas disagree ({mhs.w2} vs {mhs.gr2_alt})")
    return EXIT_OK


def cmd_invariant(args) -> int:
    curve = read_curve(args.input)
    summary = assemble_invariant(curve, args.s, jobs=args.jobs)
    write_json(args.out, "invariant.json", summary.to_json())
    print_table(
        [[n, dim] for n, dim in enumerate(summary.graded_dims)],
        ["weight", "dim"],
    )
    print()
    print_table([[orbit.label, orbit.mult] for orbit in summary.orbits], ["orbit", "size"])
    print(f"\nsummands: {summary.summand_count}, tree: {str(summary.tree).lower()}")
    print(f"nilpotent orbit constant: {str(summary.constant).lower()}")
    return EXIT_OK


def cmd_bar_demo(args) -> int:
    scenario = load_scenario(args.scenario)
    report = scenario_omega(scenario)
    write_json(args.out, "omega.json", report.to_json())
    print_table(
        [["[N(Omega)]", str(report.n_value)], ["[M(Omega)]", str(report.m_value)], ["[L(Omega)]", str(report.l_value)]],
        ["class", "multiple of [omega]"],
    )
    print(f"\nverdict: {report.verdict}")
    return EXIT_OK


def cmd_integrate_demo(args) -> int:
    if args.scenario is not None:
        try:
            local = LocalScenario.from_json(json.loads(Path(args.scenario).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read local scenario {args.scenario}: {exc}") from exc
    else:
        local = LocalScenario.from_json({"psi_k": [1], "psi_l": [2], "h0": [0, 1]})
    grid = args.epsilon_grid or EPSILON_GRID
    base = validate(local, NumericPath.linear(), grid, args.jobs)
    bent = validate(local, NumericPath.reparametrized(), grid, args.jobs)
    scaled = validate(local, NumericPath.over(2.0), grid, args.jobs)
    shift = scaled.extrapolated - base.extrapolated
    expected = float(local.rho) * math.log(2.0)
    reports = [base, bent, scaled]
    data = {
        "reports": [r.to_json() for r in reports],
        "tangent_shift": {"lambda": 2.0, "observed": shift, "expected": expected},
    }
    write_json(args.out, "integrate_demo.json", data)
    print_table([[r.path, f"{r.extrapolated:.12g}", f"{r.symbolic:.12g}", f"{r.error:.2e}"] for r in reports],
                ["path", "extrapolated", "symbolic", "rel. error"])
    print(f"\nshift under lambda=2: {shift:.12g} (expected {expected:.12g})")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ERROR


COMMANDS = {
    "resolve": cmd_resolve,
    "semistable": cmd_semistable,
    "hodge": cmd_hodge,
    "invariant": cmd_invariant,
    "bar-demo": cmd_bar_demo,
    "integrate-demo": cmd_integrate_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Plane curve singularities: resolution, nearby fibers and their invariants")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--input", help="Curve spec JSON, or one of: " + ", ".join(sorted(FIXTURES)))
    parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory")
    parser.add_argument("--s", type=int, default=2, help="Truncation J/J^(s+1)")
    parser.add_argument("--epsilon-grid", type=parse_grid, help="Comma separated epsilons, e.g. 1e-2,1e-3")
    parser.add_argument("--scenario", type=Path, help="Scenario JSON for bar-demo or integrate-demo")
    parser.add_argument("--dot", action="store_true", help="Also write Graphviz DOT files")
    parser.add_argument("--jobs", type=int, default=1, help="Worker threads")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("resolve", "semistable", "hodge", "invariant") and not args.input:
        print(f"error: {args.command} needs --input", file=sys.stderr)
        return EXIT_PARSE
    if args.s < 1:
        print("error: --s must be >= 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args)
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except IncompatibleContactError as exc:
        print(f"incompatible contact data: {exc}", file=sys.stderr)
        return EXIT_CONTACT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
