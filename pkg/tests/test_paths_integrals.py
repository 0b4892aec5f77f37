import random
import unittest

from bar_chen import BarTensor, FormalConnection, reduce_normal_form, relation_element
from curve import cusp, node
from dga_model import DgaModel, h1_basis, split_exact, theta_chain
from integrals import (
    SegmentIntegrator,
    groupring_pairing,
    integrate_closed,
    integrate_tensor,
    iterated_integral,
    monodromy_shift,
    segments,
    transport,
    vary_tangent,
)
from paths import (
    Arc,
    Cross,
    CycleLoop,
    InsertBacktrack,
    MergeWinds,
    PathWord,
    PeriodValue,
    RecutArc,
    RemoveBacktrack,
    Wind,
    base_position,
    homotopy_move,
    shuffle,
)
from resolution import build_resolution_graph
from scalar import DEFAULT_ALPHABET
from semistable import chain_graph, semistable_reduce


def node_model():
    # disks D0, D1 on the sphere D2; e0 = (0, 2), e1 = (1, 2)
    return DgaModel(semistable_reduce(build_resolution_graph(node())).graph)


THROUGH = PathWord((Cross(0), Arc(2, 0, 1), Cross(1, -1)), (0, 0))
AROUND = PathWord((Cross(0), CycleLoop(1, "a1"), Cross(0, -1)))


def genus_loop(graph, component, generator="a1"):
    """Out along the spanning tree, once around a genus generator, and back."""
    here, puncture = base_position(graph)
    events = []
    for edge_id, sign in graph.tree_path(here, component):
        if puncture != edge_id:
            events.append(Arc(here, puncture, edge_id))
        events.append(Cross(edge_id, sign))
        edge = graph.edge(edge_id)
        here, puncture = (edge.l if sign == 1 else edge.k), edge_id
    back = tuple(event.inverse() for event in reversed(events))
    return PathWord(tuple(events) + (CycleLoop(component, generator),) + back)


def random_move(path, graph, rng):
    events, positions = path.events, path.positions(graph)
    i = rng.randrange(len(events) + 1)
    component, puncture = positions[i]
    edge = graph.edge(puncture)
    inserts = [Cross(puncture, 1 if edge.k == component else -1), Wind(component, puncture, rng.choice((1, -1)))]
    inserts += [Arc(component, puncture, e.id) for e in graph.incident_edges(component)]
    moves = [InsertBacktrack(i, event) for event in inserts]
    for j, event in enumerate(events):
        if isinstance(event, Arc):
            moves += [RecutArc(j, e.id) for e in graph.incident_edges(event.component)]
        if j + 1 == len(events):
            continue
        following = events[j + 1]
        if following == event.inverse():
            moves.append(RemoveBacktrack(j))
        if isinstance(event, Arc) and isinstance(following, Arc) and following.component == event.component:
            moves.append(RecutArc(j))
        if isinstance(event, Wind) and isinstance(following, Wind) and (event.component, event.edge) == (
            following.component,
            following.edge,
        ):
            moves.append(MergeWinds(j))
    return rng.choice(moves)


class PathWordTests(unittest.TestCase):
    def setUp(self):
        self.graph = node_model().graph

    def test_positions_and_basing(self):
        self.assertEqual(THROUGH.end(self.graph), (1, 1))
        THROUGH.validate(self.graph)
        with self.assertRaisesRegex(ValueError, "based path"):
            PathWord(THROUGH.events).validate(self.graph)
        with self.assertRaisesRegex(ValueError, "invalid path at event 0"):
            PathWord((Cross(1),)).positions(self.graph)

    def test_inverse_and_json(self):
        loop = PathWord((Cross(0), Wind(2, 0, 2), Cross(0, -1)))
        inverse = loop.inverse()
        self.assertEqual(inverse.events, (Cross(0, 1), Wind(2, 0, -2), Cross(0, -1)))
        inverse.validate(self.graph)
        self.assertEqual(PathWord.from_json(loop.to_json()), loop)
        self.assertEqual(THROUGH.inverse(self.graph).origin(self.graph), (1, 1))
        with self.assertRaises(ValueError):
            PathWord.from_json([{"ev": "jump"}])

    def test_homotopy_moves(self):
        moved = homotopy_move(THROUGH, InsertBacktrack(1, Arc(2, 0, 1)), self.graph)
        self.assertEqual(len(moved), 5)
        self.assertEqual(homotopy_move(moved, RemoveBacktrack(1), self.graph), THROUGH)
        recut = homotopy_move(THROUGH, RecutArc(1, via=1), self.graph)
        self.assertEqual(recut.events[1:3], (Arc(2, 0, 1), Arc(2, 1, 1)))
        self.assertEqual(homotopy_move(recut, RecutArc(1), self.graph), THROUGH)
        with self.assertRaisesRegex(ValueError, "inapplicable move"):
            homotopy_move(THROUGH, RemoveBacktrack(0), self.graph)
        with self.assertRaisesRegex(ValueError, "inapplicable move"):
            homotopy_move(THROUGH, InsertBacktrack(0, Wind(2, 0)), self.graph)

    def test_shuffle(self):
        self.assertEqual(shuffle(("a",), ("b",)), {("a", "b"): 1, ("b", "a"): 1})
        self.assertEqual(shuffle(("a",), ("a",)), {("a", "a"): 2})
        self.assertEqual(sum(shuffle(("a", "b"), ("c", "d")).values()), 6)

    def test_period_products(self):
        anchor = ("arc", 2, 1)
        x = PeriodValue.symbol(anchor, ("x",))
        y = PeriodValue.symbol(anchor, ("y",))
        expected = PeriodValue.symbol(anchor, ("x", "y")) + PeriodValue.symbol(anchor, ("y", "x"))
        self.assertEqual(x * y, expected)
        self.assertEqual(PeriodValue.symbol(anchor, ()), 1)
        value = (x * 3 + 2).evaluate({(anchor, ("x",)): 0.5})
        self.assertAlmostEqual(value.real, 3.5)
        with self.assertRaises(ValueError):
            y.evaluate({})
        with self.assertRaises(ValueError):
            x.scalar_value()


class IntegralTests(unittest.TestCase):
    def setUp(self):
        self.model = node_model()
        self.rho = DEFAULT_ALPHABET.symbol("rho")
        self.log_lambda = DEFAULT_ALPHABET.symbol("log_lambda")
        self.theta = theta_chain(self.model, [(0, 1), (1, -1)])

    def test_crossings(self):
        cross = PathWord((Cross(0),), (0, 0))
        self.assertEqual(integrate_closed(self.model.dxi(0, "rho"), cross), self.rho)
        self.assertEqual(integrate_tensor(BarTensor.of(self.model.dxi(0, 3), self.model.dxi(0, 3)), cross), 9 * DEFAULT_ALPHABET.one / 2)
        xi_squared = self.model.element(1, edges={0: {"H": "xi^2"}})
        self.assertEqual(integrate_tensor(BarTensor.of(xi_squared), cross), DEFAULT_ALPHABET.one / 3)
        backwards = PathWord((Cross(0, -1),), (2, 0))
        self.assertEqual(integrate_tensor(BarTensor.of(self.model.dxi(0)), backwards), -1)

    def test_winding_pairs_the_weight_two_class_to_one(self):
        form = h1_basis(self.model).w2[0][1]
        self.assertEqual(integrate_closed(form, PathWord((Wind(0, 0, 1),))), 1)
        twice = PathWord((Wind(0, 0, 1), Wind(0, 0, 2)))
        merged = homotopy_move(twice, MergeWinds(0), self.model.graph)
        self.assertEqual(merged.events, (Wind(0, 0, 3),))
        self.assertEqual(integrate_closed(form, twice), 3)
        self.assertEqual(integrate_closed(form, merged), 3)
        self.assertEqual(integrate_closed(self.theta * self.rho, PathWord((Wind(0, 0, 1),))), self.rho * DEFAULT_ALPHABET.tau)

    def test_backtracks_do_not_change_integrals(self):
        moved = homotopy_move(THROUGH, InsertBacktrack(1, Arc(2, 0, 1)), self.model.graph)
        value = integrate_closed(self.theta, THROUGH)
        self.assertFalse(value.is_scalar)
        self.assertEqual(integrate_closed(self.theta, moved), value)

    def test_non_closed_forms_are_rejected(self):
        with self.assertRaisesRegex(ValueError, "non-closed"):
            integrate_closed(self.model.generator(2, "res[0]"), THROUGH)
        with self.assertRaises(ValueError):
            segments(PathWord((Cross(0, 1, False),), (0, 0)), self.model.graph)

    def test_tangent_variation(self):
        shift = vary_tangent(self.theta, THROUGH) - integrate_closed(self.theta, THROUGH)
        self.assertEqual(shift, self.log_lambda * 2)
        self.assertEqual(monodromy_shift(self.theta, THROUGH), DEFAULT_ALPHABET.tau * -2)

    def test_relation_elements_pair_to_zero(self):
        form = h1_basis(self.model).w2[0][1]
        relation = relation_element([form], self.model.constant_on({2: 1}), 1)
        loop = PathWord((Wind(0, 0, 1),))
        self.assertTrue(groupring_pairing(relation, [(1, [loop])]).is_zero)


class HomotopyInvarianceTests(unittest.TestCase):
    def check_random_moves(self, model, path, tensors, seed, sequences=500):
        rng = random.Random(seed)
        integrator = SegmentIntegrator(model)
        expected = [integrate_tensor(t, path, integrator) for t in tensors]
        for sequence in range(sequences):
            moved = path
            for _ in range(rng.randint(1, 6)):
                moved = homotopy_move(moved, random_move(moved, model.graph, rng), model.graph)
            self.assertEqual(moved.end(model.graph), path.end(model.graph))
            with self.subTest(sequence=sequence, path=moved.to_json()):
                self.assertEqual([integrate_tensor(t, moved, integrator) for t in tensors], expected)

    def test_moves_on_the_cusp_fiber(self):
        model = DgaModel(semistable_reduce(build_resolution_graph(cusp())).graph)
        center = [v.id for v in model.graph.vertices if v.genus == 1][0]
        omega = model.generator(center, "omega1")
        loop = genus_loop(model.graph, center)
        loop.validate(model.graph)
        self.assertEqual(integrate_closed(omega, loop), PeriodValue.symbol(("cycle", center, "a1"), ("omega1",)))
        self.check_random_moves(model, loop, [BarTensor.of(omega), BarTensor.of(omega, omega)], seed=2718)

    def test_moves_on_an_open_path(self):
        model = node_model()
        bar, _ = split_exact(theta_chain(model, [(0, 1), (1, -1)]))
        self.check_random_moves(model, THROUGH, [BarTensor.of(bar)], seed=1618)


class GenusLoopTests(unittest.TestCase):
    def setUp(self):
        self.model = DgaModel(chain_graph(1).graph)
        self.omega = self.model.generator(1, "omega1")
        self.omegabar = self.model.generator(1, "omegabar1")
        self.period = PeriodValue.symbol(("cycle", 1, "a1"), ("omega1",))

    def random_loop(self, rng):
        events = []
        for _ in range(rng.randint(1, 3)):
            events.append(Cross(0))
            for _ in range(rng.randint(1, 2)):
                events.append(CycleLoop(1, rng.choice(("a1", "b1")), rng.choice((-2, -1, 1, 2))))
            events.append(Cross(0, -1))
        return PathWord(tuple(events))

    def test_exact_first_factor_splits_off_the_crossing(self):
        tensor = BarTensor.of(self.model.dxi(0), self.omega)
        crossing = PathWord((Cross(0),), (0, 0))
        self.assertEqual(iterated_integral(tensor, AROUND), self.period)
        self.assertEqual(
            iterated_integral(tensor, AROUND),
            integrate_closed(self.model.dxi(0), crossing) * integrate_closed(self.omega, AROUND),
        )

    def test_composition_sums_over_cut_points(self):
        rng = random.Random(31337)
        loops = [AROUND, AROUND.inverse(), PathWord((Cross(0), CycleLoop(1, "b1", 2), Cross(0, -1)))]

        def integral(factors, path):
            if not factors:
                return PeriodValue.constant(1)
            return integrate_tensor(BarTensor.of(*factors), path)

        for _ in range(40):
            word = [rng.choice((self.omega, self.omegabar)) for _ in range(rng.randint(1, 3))]
            alpha, beta = rng.choice(loops), rng.choice(loops)
            expected = PeriodValue()
            for m in range(len(word) + 1):
                expected = expected + integral(word[:m], alpha) * integral(word[m:], beta)
            self.assertEqual(integral(word, alpha.compose(beta)), expected)

    def test_relation_elements_vanish_on_random_loops(self):
        rng = random.Random(4099)
        for trial in range(100):
            u = [rng.choice((self.omega, self.omegabar)) for _ in range(rng.randint(1, 2))]
            low = rng.randint(-3, 3)
            function = self.model.constant_on({0: low, 1: low + rng.choice((-2, -1, 1, 2))})
            position = rng.randint(1, len(u) + 1)
            relation = relation_element(u, function, position)
            with self.subTest(trial=trial, position=position):
                self.assertTrue(reduce_normal_form(relation).is_zero)
                self.assertTrue(integrate_tensor(relation, self.random_loop(rng)).is_zero)

    def test_genus_loop_gives_a_period_symbol(self):
        self.assertEqual(integrate_closed(self.omega, AROUND), self.period)
        self.assertEqual(integrate_closed(self.omega, AROUND.inverse()), -self.period)
        with self.assertRaises(ValueError):
            integrate_closed(self.omega, PathWord((Cross(0), CycleLoop(1, "a2"), Cross(0, -1))))

    def test_iterated_integrals_shuffle(self):
        square = iterated_integral(BarTensor.of(self.omega, self.omega), AROUND)
        self.assertEqual(square * 2, self.period * self.period)
        with self.assertRaises(ValueError):
            iterated_integral(BarTensor.of(self.omega, self.model.generator(1, "omegabar1")), AROUND)

    def test_augmentation_ideal_filtration(self):
        once = BarTensor.of(self.omega)
        twice = BarTensor.of(self.omega, self.omega)
        self.assertEqual(groupring_pairing(once, [(1, [AROUND])]), self.period)
        self.assertTrue(groupring_pairing(once, [(1, [AROUND, AROUND])]).is_zero)
        self.assertEqual(groupring_pairing(twice, [(1, [AROUND, AROUND])]), self.period * self.period)

    def test_transport_is_multiplicative(self):
        connection = FormalConnection(self.model, {(1,): self.omega})
        single = transport(connection, AROUND, bound=2)
        double = transport(connection, AROUND.compose(AROUND), bound=2)
        self.assertEqual(single.coefficient((1,)), self.period)
        self.assertEqual(double, single * single)
        curved = FormalConnection(self.model, {(1,): self.omega, (2,): self.model.generator(1, "omegabar1")})
        with self.assertRaisesRegex(ValueError, "flat"):
            transport(curved, AROUND)


if __name__ == "__main__":
    unittest.main()
