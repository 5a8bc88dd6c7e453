# stdlib
import math
import unittest

# 3p
import numpy as np

# project
from evaluator import (
    ClosedTradeLedgerView,
    EvaluatorError,
    NoDefinedScore,
    SharpeScore,
    ShadowLedger,
    select_optimal,
    sharpe_ratio,
    skewness,
    undefined_score,
    volatility_sharpe,
)


def _score(set_id, ratio):
    if ratio is None:
        return undefined_score(set_id, 1e-5)
    return SharpeScore(set_id, ratio, 1.0, ratio, 1e-5, True)


class TestSharpeRatio(unittest.TestCase):

    def test_single_position(self):
        score = sharpe_ratio(ClosedTradeLedgerView.from_lengths([2]), 0.1)
        self.assertAlmostEqual(score.excess_mean, 0.3, delta=1e-12)
        self.assertAlmostEqual(score.sigma, 0.3, delta=1e-12)
        self.assertAlmostEqual(score.ratio, 1.0, delta=1e-12)
        self.assertTrue(score.defined)

    def test_two_positions(self):
        score = sharpe_ratio(ClosedTradeLedgerView.from_lengths([2, 3]), 0.1)
        self.assertAlmostEqual(score.excess_mean, 0.45, delta=1e-12)
        self.assertAlmostEqual(score.sigma, math.sqrt((0.09 + 0.36) / 2), delta=1e-12)
        self.assertAlmostEqual(score.ratio, 0.9487, places=4)

    def test_zero_penalty_undefined(self):
        score = sharpe_ratio(ClosedTradeLedgerView.from_lengths([2, 3]), 0.0)
        self.assertFalse(score.defined)
        self.assertIsNone(score.ratio)
        self.assertEqual(score.excess_mean, 0.0)

    def test_empty_ledger(self):
        self.assertRaises(EvaluatorError, sharpe_ratio, ClosedTradeLedgerView([]), 0.1)
        self.assertRaises(EvaluatorError, ClosedTradeLedgerView, [[]])

    def test_independent_of_increments(self):
        rng = np.random.default_rng(0)
        a = ClosedTradeLedgerView([rng.standard_normal(t) for t in (3, 7, 1)])
        b = ClosedTradeLedgerView([rng.standard_normal(t) for t in (3, 7, 1)])
        self.assertEqual(sharpe_ratio(a, 1e-5), sharpe_ratio(b, 1e-5))

    def test_scale_free_in_penalty(self):
        ledger = ClosedTradeLedgerView.from_lengths([4, 9, 2, 2])
        base = sharpe_ratio(ledger, 1e-5).ratio
        for a in (0.5, 3.0, 1e4):
            self.assertAlmostEqual(sharpe_ratio(ledger, 1e-5 * a).ratio, base, delta=1e-12)


class TestVolatilitySharpe(unittest.TestCase):

    def test_examples(self):
        ledger = ClosedTradeLedgerView.from_lengths([2, 3])
        self.assertAlmostEqual(volatility_sharpe(ledger, 0.1, 0.9).ratio, 0.5, delta=1e-12)
        self.assertFalse(volatility_sharpe(ledger, 0.1, 0.0).defined)
        plain = sharpe_ratio(ledger, 0.1)
        self.assertAlmostEqual(volatility_sharpe(ledger, 0.1, plain.sigma).ratio, plain.ratio, delta=1e-12)

    def test_negative_sigma(self):
        self.assertRaises(EvaluatorError, volatility_sharpe, ClosedTradeLedgerView.from_lengths([2]), 0.1, -1.0)


class TestSkewness(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(skewness([0.3, 0.4, 0.5]), 0.0, delta=1e-12)
        self.assertAlmostEqual(skewness([0, 0, 1]), 0.7071, places=4)

    def test_errors(self):
        self.assertRaises(EvaluatorError, skewness, [0.4, 0.4, 0.4])
        self.assertRaises(EvaluatorError, skewness, [0.1, 0.2])


class TestSelectOptimal(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(select_optimal([_score(0, 0.2), _score(1, 0.9), _score(2, 0.5)]), 1)
        self.assertEqual(select_optimal([_score(0, 0.5), _score(1, 0.5)]), 0)
        self.assertEqual(select_optimal([_score(0, None), _score(1, -0.3), _score(2, None)]), 1)

    def test_all_undefined(self):
        self.assertRaises(NoDefinedScore, select_optimal, [_score(0, None), _score(1, None)])

    def test_monotone_invariance(self):
        rng = np.random.default_rng(2)
        ratios = rng.random(16)
        expected = select_optimal([_score(i, r) for i, r in enumerate(ratios)])
        for transform in (np.exp, lambda x: 3 * x + 1, lambda x: x ** 3):
            self.assertEqual(select_optimal([_score(i, float(transform(r))) for i, r in enumerate(ratios)]), expected)


class TestShadowLedger(unittest.TestCase):

    def test_round_trip(self):
        ledger = ShadowLedger([1, 0, -1], max_hold=100)
        self.assertEqual(ledger.total_closed(1), 0)
        self.assertEqual(ledger.total_closed(2), 1)
        self.assertEqual(ledger.view(1).N, 0)
        self.assertEqual(ledger.view(2).T, [2])
        # the opposing signal opens the other side
        self.assertTrue(ledger.is_open(2))
        self.assertEqual(ledger.final_side, -1)
        self.assertEqual(ledger.final_open_tau, 2)

    def test_same_side_keeps_position(self):
        ledger = ShadowLedger([1, 1, 1, 0, 0], max_hold=10)
        self.assertEqual(ledger.total_closed(4), 0)
        self.assertTrue(ledger.is_open(0))
        self.assertTrue(ledger.is_open(4))

    def test_max_hold(self):
        ledger = ShadowLedger([-1, 0, 0, 0], max_hold=3)
        self.assertTrue(ledger.is_open(2))
        self.assertEqual(ledger.view(2).N, 0)
        self.assertEqual(ledger.view(3).T, [3])
        self.assertFalse(ledger.is_open(3))
        self.assertIsNone(ledger.final_open_tau)

    def test_expiry_before_next_signal(self):
        ledger = ShadowLedger([1, 0, 0, 0, 0, 0, -1], max_hold=2)
        np.testing.assert_array_equal(ledger.close_taus, [2])
        self.assertEqual(ledger.view(1).N, 0)
        self.assertEqual(ledger.view(2).T, [2])
        self.assertFalse(ledger.is_open(4))
        self.assertTrue(ledger.is_open(6))

    def test_expiry_past_the_stream_stays_open(self):
        ledger = ShadowLedger([0, 0, 1, 0], max_hold=5)
        self.assertEqual(len(ledger.close_taus), 0)
        self.assertFalse(ledger.is_open(1))
        self.assertTrue(ledger.is_open(3))

    def test_window(self):
        ledger = ShadowLedger([1] * 10, max_hold=1, window=2)
        self.assertEqual(ledger.total_closed(9), 9)
        self.assertEqual(ledger.view(9).T, [1, 1])
        self.assertEqual(ledger.view(1).T, [1])
        self.assertTrue(ledger.is_open(9))

    def test_rejects_zero_hold(self):
        self.assertRaises(EvaluatorError, ShadowLedger, [1, 0], 0)
