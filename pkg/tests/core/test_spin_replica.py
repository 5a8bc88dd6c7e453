# stdlib
from datetime import datetime, timezone
import unittest

# 3p
import numpy as np

# project
from backtester import TradePosition
from market_data import SyntheticModel, generate_synthetic
from spin_replica import (
    Replica,
    ReplicaError,
    ReplicaSystem,
    ReplicaTracker,
    append_replica,
    boltzmann_weights,
    fuzzy_spin,
    hilbert_distance,
    merge_spin_histograms,
    replica_coords,
    shift_replicas,
    spin_from_trade,
    spin_histograms,
    store_replica,
    trade_spins,
)

T0 = datetime(2010, 7, 15, tzinfo=timezone.utc)


def _filled(value, spin, shape=(2, 3)):
    return Replica(np.full(shape, value), spin)


class TestSpin(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(spin_from_trade(1.3005, 1.3002), 1)
        self.assertEqual(spin_from_trade(1.3000, 1.3002), -1)
        self.assertEqual(spin_from_trade(1.3002, 1.3002), -1)

    def test_bad_prices(self):
        self.assertRaises(ReplicaError, spin_from_trade, 0.0, 1.3)
        self.assertRaises(ReplicaError, Replica, np.zeros((2, 3)), 0)

    def test_trade_spins(self):
        winner = TradePosition(1, 'long', 1000, 0, T0, 1.3)
        winner.realized_pnl = 0.5
        winner.close_tau = 12
        loser = TradePosition(2, 'short', 1000, 4, T0, 1.3)
        loser.realized_pnl = 0.0
        loser.close_tau = 7
        self.assertEqual(trade_spins([winner, loser]), [(12, 1), (3, -1)])


class TestDistance(unittest.TestCase):

    def test_example(self):
        self.assertEqual(hilbert_distance(np.zeros((2, 3)), np.ones((2, 3)), 1, 2, 1), 3.0)

    def test_metric(self):
        rng = np.random.default_rng(0)
        for p in (1, 2):
            for _ in range(1000):
                a, b, c = (rng.standard_normal((2, 6)) for _ in range(3))
                ab = hilbert_distance(a, b, p, 5, 1)
                self.assertEqual(hilbert_distance(a, a, p, 5, 1), 0.0)
                self.assertGreaterEqual(ab, 0.0)
                self.assertAlmostEqual(ab, hilbert_distance(b, a, p, 5, 1), delta=1e-12)
                self.assertLessEqual(ab, hilbert_distance(a, c, p, 5, 1) + hilbert_distance(c, b, p, 5, 1) + 1e-12)

    def test_fractional_exponent(self):
        rng = np.random.default_rng(3)
        a, b, c = (rng.standard_normal((2, 6)) for _ in range(3))
        ab = hilbert_distance(a, b, 3.5, 5, 1)
        self.assertAlmostEqual(ab, hilbert_distance(b, a, 3.5, 5, 1), delta=1e-12)
        self.assertLessEqual(ab, hilbert_distance(a, c, 3.5, 5, 1) + hilbert_distance(c, b, 3.5, 5, 1) + 1e-12)

    def test_shape_mismatch(self):
        self.assertRaises(ReplicaError, hilbert_distance, np.zeros((2, 3)), np.zeros((2, 4)), 1, 2, 1)
        self.assertRaises(ReplicaError, hilbert_distance, np.zeros((2, 3)), np.zeros((2, 3)), 0.5, 2, 1)


class TestWeights(unittest.TestCase):

    def test_example(self):
        weights = boltzmann_weights([1.0, 3.0], 1.0)
        self.assertAlmostEqual(weights[0], 0.7311, places=4)
        self.assertAlmostEqual(weights[1], 0.2689, places=4)

    def test_uniform(self):
        np.testing.assert_allclose(boltzmann_weights([1.0, 5.0, 2.0], 0.0), [1 / 3.0] * 3)
        np.testing.assert_allclose(boltzmann_weights([0.0, 0.0], 1.0), [0.5, 0.5])

    def test_normalized(self):
        rng = np.random.default_rng(1)
        weights = boltzmann_weights(rng.random(50) * 10, 2.5)
        self.assertAlmostEqual(float(np.sum(weights)), 1.0, delta=1e-12)
        self.assertTrue(np.all(weights > 0))

    def test_errors(self):
        self.assertRaises(ReplicaError, boltzmann_weights, [], 1.0)
        self.assertRaises(ReplicaError, boltzmann_weights, [1.0, -0.5], 1.0)


class TestFuzzySpin(unittest.TestCase):

    def _system(self, *replicas):
        system = ReplicaSystem(h_op=2, h_cl=3)
        for replica in replicas:
            append_replica(system, replica)
        return system

    def test_example(self):
        # distances 1 and 3 from the zero query; the newest replica sits past N_red
        system = self._system(_filled(1 / 3.0, 1), _filled(1.0, -1), _filled(0.0, -1))
        self.assertEqual(system.N_red, 1)
        self.assertAlmostEqual(fuzzy_spin(system, np.zeros((2, 3))), 0.4621, places=4)

    def test_unanimous(self):
        system = self._system(_filled(0.1, 1), _filled(0.7, 1), _filled(0.3, 1))
        self.assertAlmostEqual(fuzzy_spin(system, np.zeros((2, 3))), 1.0, delta=1e-12)

    def test_balanced(self):
        system = self._system(_filled(0.5, 1), _filled(0.5, -1), _filled(0.0, 1))
        self.assertAlmostEqual(fuzzy_spin(system, np.zeros((2, 3))), 0.0, delta=1e-12)

    def test_not_enough_replicas(self):
        self.assertRaises(ReplicaError, fuzzy_spin, self._system(), np.zeros((2, 3)))
        self.assertRaises(ReplicaError, fuzzy_spin, self._system(_filled(0.0, 1)), np.zeros((2, 3)))

    def test_query_shape(self):
        system = self._system(_filled(0.1, 1), _filled(0.2, 1))
        self.assertRaises(ReplicaError, fuzzy_spin, system, np.zeros((2, 4)))

    def _random_system(self, rng, p=1):
        capacity = int(rng.integers(2, 9))
        system = ReplicaSystem(h_op=2, h_cl=3, p=p, c_D=float(rng.random() * 5), capacity=capacity)
        for _ in range(capacity):
            append_replica(system, Replica(rng.standard_normal((2, 3)), int(rng.choice([-1, 1]))))
        return system

    def test_bounded(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            system = self._random_system(rng)
            self.assertLessEqual(abs(fuzzy_spin(system, rng.standard_normal((2, 3)))), 1.0)

    def test_distance_rescaling(self):
        rng = np.random.default_rng(6)
        for p in (1, 2):
            for _ in range(100):
                system = self._random_system(rng, p=p)
                query = rng.standard_normal((2, 3))
                factor = float(rng.uniform(0.1, 10.0))
                scaled = ReplicaSystem(h_op=2, h_cl=3, p=p, c_D=system.c_D, capacity=system.capacity)
                for replica in system.replicas:
                    append_replica(scaled, Replica(replica.coords * factor, replica.spin))
                self.assertAlmostEqual(fuzzy_spin(scaled, query * factor), fuzzy_spin(system, query), delta=1e-12)


class TestReplicaSystem(unittest.TestCase):

    def test_validation(self):
        self.assertRaises(ReplicaError, ReplicaSystem, 0, 5)
        self.assertRaises(ReplicaError, ReplicaSystem, 5, 5)
        self.assertRaises(ReplicaError, ReplicaSystem, 2, 5, p=0.5)
        self.assertRaises(ReplicaError, ReplicaSystem, 2, 5, capacity=0)

    def test_fill_then_shift(self):
        system = ReplicaSystem(h_op=2, h_cl=3, capacity=3)
        for value in range(3):
            self.assertRaises(ReplicaError, shift_replicas, system, _filled(9.0, 1))
            append_replica(system, _filled(float(value), 1))
        self.assertTrue(system.full)
        self.assertRaises(ReplicaError, append_replica, system, _filled(9.0, 1))

        shift_replicas(system, _filled(3.0, -1))
        self.assertEqual(len(system), 3)
        self.assertEqual([r.coords[0, 0] for r in system.replicas], [1.0, 2.0, 3.0])
        self.assertEqual([r.spin for r in system.replicas], [1, 1, -1])

    def test_k_fold_shift(self):
        rng = np.random.default_rng(4)
        capacity = 8
        system = ReplicaSystem(h_op=2, h_cl=3, capacity=capacity)
        for _ in range(capacity):
            append_replica(system, Replica(rng.random((2, 3)), 1))
        for k in range(1, capacity + 1):
            before = list(system.replicas)
            fresh = [Replica(rng.random((2, 3)), int(rng.choice([-1, 1]))) for _ in range(k)]
            for replica in fresh:
                shift_replicas(system, replica)
                self.assertEqual(len(system), capacity)
            # slot n now holds what slot n + k held, the top k slots the fresh replicas
            for n in range(capacity - k):
                self.assertIs(system.replicas[n], before[n + k])
            for stored, replica in zip(system.replicas[capacity - k:], fresh):
                self.assertIs(stored, replica)

    def test_store_replica(self):
        system = ReplicaSystem(h_op=2, h_cl=3, capacity=2)
        for value in range(5):
            store_replica(system, _filled(float(value), 1))
            self.assertEqual(len(system), min(value + 1, 2))
        self.assertEqual([r.coords[0, 0] for r in system.replicas], [3.0, 4.0])

    def test_shift_checks_shape(self):
        system = ReplicaSystem(h_op=2, h_cl=3, capacity=1)
        append_replica(system, _filled(0.0, 1))
        self.assertRaises(ReplicaError, shift_replicas, system, _filled(0.0, 1, shape=(2, 4)))
        self.assertRaises(ReplicaError, shift_replicas, system, np.zeros((2, 3)))
        self.assertRaises(ReplicaError, append_replica, ReplicaSystem(h_op=2, h_cl=3), np.zeros((2, 3)))

    def test_replica_is_read_only(self):
        replica = _filled(0.0, 1)
        with self.assertRaises(ValueError):
            replica.coords[0, 0] = 1.0


class TestSpinHistograms(unittest.TestCase):

    def test_peaks(self):
        h_plus, h_minus = spin_histograms([(10, 1), (10, 1), (12, 1), (12, -1)])
        self.assertEqual(list(h_plus.items()), [(10.0, 1.0), (12.0, 0.5)])
        self.assertEqual(list(h_minus.items()), [(12.0, 1.0)])
        self.assertEqual(merge_spin_histograms(h_plus, h_minus), [(10.0, 1.0, 0.0), (12.0, 0.5, 1.0)])

    def test_empty_class(self):
        h_plus, h_minus = spin_histograms([(5, -1)])
        self.assertEqual(len(h_plus), 0)
        self.assertEqual(list(h_minus.values()), [1.0])

    def test_bad_spin(self):
        self.assertRaises(ReplicaError, spin_histograms, [(5, 0)])


class TestReplicaTracker(unittest.TestCase):

    def test_coords(self):
        bids = 1.3 + 0.0001 * np.sin(np.arange(11))
        coords = replica_coords(bids, bids + 0.0002)
        self.assertEqual(coords.shape, (2, 11))
        self.assertEqual(coords[0, 0], 0.0)

    def test_run(self):
        stream = generate_synthetic(5, 200, SyntheticModel.RANDOM_WALK,
                                    {'start': 1.3, 'volatility': 0.0001, 'spread': 0.0002})
        system = ReplicaSystem(h_op=10, h_cl=20, capacity=64)
        predictions = ReplicaTracker(system, stride=5).run(stream)
        # t = 20, 25, ..., 195
        self.assertEqual(len(predictions), 36)
        self.assertEqual(len(system), 36)
        self.assertEqual([p.tau for p in predictions[:3]], [0, 5, 10])

        bids, asks = stream.bids(), stream.asks()
        for prediction in predictions:
            self.assertEqual(prediction.spin, spin_from_trade(bids[prediction.tau + 20], asks[prediction.tau + 10]))
        # N_red >= 0 needs 11 stored replicas
        self.assertEqual([p.fuzzy_spin is None for p in predictions], [True] * 11 + [False] * 25)
        for prediction in predictions[11:]:
            self.assertTrue(-1.0 <= prediction.fuzzy_spin <= 1.0)

    def test_needs_one_dimension(self):
        self.assertRaises(ReplicaError, ReplicaTracker, ReplicaSystem(2, 3, d_X=2))
