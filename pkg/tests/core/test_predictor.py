# stdlib
from datetime import datetime, timedelta, timezone
import time
import unittest

# 3p
import numpy as np
import pytest

# project
from backtester import StrategyConfig, run_backtest
from market_data import SyntheticModel, TickQuote, TickStream, generate_synthetic
from predictor import (
    PMBCSModel,
    PredictorError,
    PredictorState,
    TradeCommand,
    aggregate,
    momentum_histograms,
    update_and_signal,
)
from string_core import GRID_M, GRID_PHASE, MomentumRecord, StringParams, momentum_matrix, parameter_grid

PARAMS = StringParams(10, 1, 2)


def _record(value, params=PARAMS, usable=True):
    return MomentumRecord(0, params, value, usable)


def _warm_state(warmup=5, **kwargs):
    state = PredictorState(PARAMS, warmup=warmup, adaptive_band=False, **kwargs)
    for _ in range(warmup):
        update_and_signal(state, _record(0.9), 1)
    return state


class TestUpdateAndSignal(unittest.TestCase):

    def test_learning_gate(self):
        state = PredictorState(PARAMS, warmup=3)
        self.assertEqual(update_and_signal(state, _record(0.35), 1), 0)
        self.assertEqual(update_and_signal(state, _record(0.35), 1), 0)
        self.assertEqual(update_and_signal(state, _record(0.35), 1), 0)
        self.assertTrue(state.warmed_up)

    def test_in_band_follows_direction(self):
        state = _warm_state()
        self.assertEqual(update_and_signal(state, _record(0.35), 1), 1)
        self.assertEqual(update_and_signal(state, _record(0.35), -1), -1)
        self.assertEqual(update_and_signal(state, _record(0.35), 0), 0)

    def test_out_of_band(self):
        state = _warm_state()
        self.assertEqual(update_and_signal(state, _record(0.95), 1), 0)

    def test_degenerate_is_silent(self):
        state = _warm_state()
        observed = state.observed
        self.assertEqual(update_and_signal(state, _record(float('nan'), usable=False), 1), 0)
        self.assertEqual(state.observed, observed)

    def test_mismatched_params(self):
        state = _warm_state()
        with self.assertRaises(PredictorError):
            update_and_signal(state, _record(0.35, StringParams(12, 1, 2)), 1)
        with self.assertRaises(PredictorError):
            update_and_signal(state, _record(1.5), 1)

    def test_adaptive_band(self):
        state = PredictorState(PARAMS, warmup=100, band_quantiles=(0.3, 0.4))
        for value in np.linspace(0.0, 1.0, 100):
            update_and_signal(state, _record(float(value)), 1)
        lo, hi = state.learned_band
        self.assertAlmostEqual(lo, 0.3, places=6)
        self.assertAlmostEqual(hi, 0.4, places=6)
        self.assertTrue(0.0 <= lo < hi <= 1.0)

    def test_bad_band(self):
        self.assertRaises(PredictorError, PredictorState, PARAMS, band=(0.4, 0.3))


class TestPredictorState(unittest.TestCase):

    def _stepped(self, values, **kwargs):
        state = PredictorState(PARAMS, **kwargs)
        fires = [update_and_signal(state, _record(float(v)), 1) == 1 for v in values]
        return state, fires

    def test_replay_matches_observation(self):
        rng = np.random.default_rng(11)
        values = rng.beta(2.0, 3.0, 700)
        for options in (dict(warmup=25, history_size=40, band_refresh=7),
                        dict(warmup=100, history_size=5000, band_refresh=100),
                        dict(warmup=3, history_size=1, band_refresh=1),
                        dict(warmup=50, adaptive_band=False)):
            stepped, expected = self._stepped(values, **options)
            replayed = PredictorState(PARAMS, **options)
            fires = replayed.replay(values)
            self.assertEqual(fires.tolist(), expected, options)
            self.assertEqual(replayed.observed, stepped.observed)
            np.testing.assert_allclose(replayed.learned_band, stepped.learned_band, rtol=1e-12)
            np.testing.assert_array_equal(replayed.momentum_history, stepped.momentum_history)

    def test_replay_then_observe(self):
        rng = np.random.default_rng(12)
        values = rng.random(90)
        stepped, _ = self._stepped(values, warmup=10, history_size=16, band_refresh=5)
        replayed = PredictorState(PARAMS, warmup=10, history_size=16, band_refresh=5)
        replayed.replay(values[:60])
        for v in values[60:]:
            replayed.observe(float(v))
        np.testing.assert_allclose(replayed.learned_band, stepped.learned_band, rtol=1e-12)
        np.testing.assert_array_equal(replayed.momentum_history, stepped.momentum_history)

    def test_replay_needs_fresh_state(self):
        state = PredictorState(PARAMS, warmup=2)
        state.observe(0.5)
        self.assertRaises(PredictorError, state.replay, [0.5])
        self.assertRaises(PredictorError, PredictorState(PARAMS).replay, [0.5, 1.5])
        self.assertEqual(len(PredictorState(PARAMS).replay([])), 0)

    def test_history_is_bounded(self):
        state = PredictorState(PARAMS, warmup=1, history_size=3, adaptive_band=False)
        for v in (0.1, 0.2, 0.3, 0.4, 0.5):
            state.observe(v)
        np.testing.assert_allclose(state.momentum_history, [0.3, 0.4, 0.5])
        self.assertEqual(state.observed, 5)
        self.assertRaises(PredictorError, PredictorState, PARAMS, history_size=0)


class TestAggregate(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(aggregate([1, 1, 0, 0], 4).summary, 0.5)
        self.assertEqual(aggregate([0, 0, 0]).summary, 0.0)
        command = aggregate([1] * 7 + [-1] + [0] * 8, 16, tau=12)
        self.assertEqual(command.summary, 0.375)
        self.assertEqual(command.tau, 12)
        self.assertEqual(len(command.per_set), 16)

    def test_errors(self):
        self.assertRaises(PredictorError, aggregate, [1, 0], 3)
        self.assertRaises(PredictorError, aggregate, [2, 0])
        self.assertRaises(PredictorError, aggregate, [])

    def test_command_defaults(self):
        command = TradeCommand(0, [1], 1.0)
        self.assertEqual(command.exits, ())
        self.assertTrue(command.open_allowed)
        self.assertIsNone(command.set_id)


class TestMomentumHistograms(unittest.TestCase):

    def test_identical(self):
        values = [0.1, 0.35, 0.8]
        h1, h2 = momentum_histograms(values, values, 10)
        self.assertEqual(h1, h2)

    def test_single_bin(self):
        h1, _ = momentum_histograms([0.35] * 5, [], 10)
        self.assertEqual(h1[3], (0.3, 1.0))

    def test_uniform(self):
        rng = np.random.default_rng(0)
        h1, _ = momentum_histograms(rng.random(1000), [], 10)
        self.assertAlmostEqual(sum(m for _, m in h1), 1.0)
        for _, mass in h1:
            self.assertTrue(0.05 <= mass <= 0.15)


class TestPMBCSModel(unittest.TestCase):

    def _stream(self, seed=1, n=1500):
        return generate_synthetic(seed, n, SyntheticModel.RANDOM_WALK,
                                  {'start': 1.3, 'volatility': 0.0001, 'spread': 0.0002})

    def _model(self, **kwargs):
        params = [StringParams(20, m, q) for m in (0, 1) for q in (1, 4)]
        options = dict(warmup=50, evaluation_interval=100, history_size=500)
        options.update(kwargs)
        return PMBCSModel(params, **options)

    def test_simple_needs_one_set(self):
        self.assertRaises(PredictorError, PMBCSModel, [PARAMS, StringParams(12, 1, 2)], self_learning=False)
        self.assertRaises(PredictorError, PMBCSModel, [])

    def test_commands_bounded(self):
        stream = self._stream()
        model = self._model()
        model.prepare(stream)
        account = None
        for quote in stream:
            command = model.command(quote, account)
            self.assertEqual(len(command.per_set), 4)
            self.assertTrue(abs(command.summary) <= 1.0)
            if quote.index < 20 + 50:
                # nothing before the first full window plus warm-up
                self.assertEqual(command.summary, 0.0)

    def test_selects_a_set(self):
        stream = self._stream()
        model = self._model()
        run_backtest(stream, model, StrategyConfig(max_hold=40))
        self.assertIsNotNone(model.optimal)
        self.assertTrue(0 <= model.optimal < 4)
        self.assertEqual(len(model.scores), 4)
        self.assertGreater(model.incoming.count, 0)
        self.assertLessEqual(model.outgoing.count, model.incoming.count)

    def test_degenerate_stream_never_trades(self):
        t0 = datetime(2010, 7, 15, tzinfo=timezone.utc)
        quotes = [TickQuote(i, t0 + timedelta(seconds=i), 1.3, 1.3002) for i in range(400)]
        model = self._model()
        account = run_backtest(TickStream(quotes), model, StrategyConfig())
        self.assertEqual(account.reports, [])
        self.assertEqual(model.incoming.count, 0)

    def test_deterministic(self):
        a = self._model()
        b = self._model()
        a.prepare(self._stream(seed=4))
        b.prepare(self._stream(seed=4))
        for quote in self._stream(seed=4):
            self.assertEqual(a.command(quote, None), b.command(quote, None))

    def test_signals_match_streaming_rule(self):
        stream = self._stream(seed=7, n=800)
        options = dict(warmup=30, history_size=40, band_refresh=7)
        model = self._model(**options)
        model.prepare(stream)

        mids = stream.mids()
        momenta = momentum_matrix(mids, model.param_sets)
        states = [PredictorState(p, **options) for p in model.param_sets]
        for quote in stream:
            t = quote.index
            expected = []
            for params, state, series in zip(model.param_sets, states, momenta):
                if t < params.l_s:
                    expected.append(0)
                    continue
                value = float(series[t - params.l_s])
                lag = max(1, params.l_s // 2)
                hint = int(np.sign(mids[t] - mids[t - lag])) if t >= lag else 0
                record = MomentumRecord(t, params, value, not np.isnan(value))
                expected.append(update_and_signal(state, record, hint))
            command = model.command(quote, None)
            self.assertEqual(list(command.per_set), expected, t)
            self.assertEqual(command.summary, sum(expected) / 4.0)
        for state, replayed in zip(states, model.states):
            np.testing.assert_allclose(state.learned_band, replayed.learned_band, rtol=1e-12)

    def test_workers_do_not_change_commands(self):
        stream = self._stream(seed=5)
        single = self._model()
        threaded = self._model(workers=4)
        single.prepare(stream)
        threaded.prepare(stream)
        for quote in stream:
            self.assertEqual(single.command(quote, None), threaded.command(quote, None))
        self.assertEqual(single.optimal, threaded.optimal)


@pytest.mark.slow
class TestScale(unittest.TestCase):

    def test_million_ticks(self):
        stream = generate_synthetic(3, 10 ** 6, SyntheticModel.RANDOM_WALK,
                                    {'start': 1.3, 'volatility': 0.00005, 'spread': 0.0002})
        sets = parameter_grid(l_s=[900], Q=[8, 16], m=GRID_M, phase=GRID_PHASE)
        self.assertEqual(len(sets), 16)
        model = PMBCSModel(sets, workers=4)
        started = time.time()
        account = run_backtest(stream, model, StrategyConfig(max_hold=2 * 900))
        elapsed = time.time() - started
        self.assertLess(elapsed, 60.0)
        self.assertEqual(len(account.history), 10 ** 6)
