# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Moment predictors: per-set momentum -> {-1, 0, +1} signals, their aggregate
trade command, and the PMBCS model loop that drives the backtester.

Signal rule: after a warm-up of `warmup` usable momenta, a momentum inside the
learned band fires in the direction of the recent mid-price slope (last
l_s/2 ticks); anything else abstains. The band starts at (0.3, 0.4) and, when
adaptive, follows the rolling [q30, q40] quantiles of the momentum history.

update_and_signal is the streaming form of the rule. PMBCSModel replays each
set's whole momentum series through PredictorState.replay instead, which
gives the same signals without a Python call per set and tick.
"""
# stdlib
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging

# 3p
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# project
from backtester import Strategy
from evaluator import (
    NoDefinedScore,
    ShadowLedger,
    SigmaMode,
    DEFAULT_LEDGER_WINDOW,
    DEFAULT_PENALTY,
    select_optimal,
    sharpe_ratio,
    skewness,
    undefined_score,
    volatility_sharpe,
    EvaluatorError,
)
from histogram import UnitHistogram
from string_core import (
    StringError,
    momentum_matrix,
    return_volatility,
)
from util import sign

log = logging.getLogger(__name__)

DEFAULT_WARMUP = 500
DEFAULT_BAND = (0.3, 0.4)
DEFAULT_BAND_QUANTILES = (0.3, 0.4)
DEFAULT_HISTORY_SIZE = 5000
DEFAULT_BAND_REFRESH = 100
DEFAULT_EVALUATION_INTERVAL = 1000
DEFAULT_MOMENTUM_BINS = 20
DEFAULT_WORKERS = 1
SIGNAL_ALPHABET = (-1, 0, 1)
# band windows quantiled per numpy call during replay
QUANTILE_BATCH = 64


class PredictorError(Exception):
    pass


class TradeCommand(namedtuple('TradeCommand', ['tau', 'per_set', 'summary', 'exits', 'open_allowed', 'set_id'])):
    """
    Aggregated per-tick prediction. `exits` lists position ids a strategy
    force-closes; `open_allowed` is the strategy's own gate on new opens;
    `set_id` is stamped on execution reports.
    """
    __slots__ = ()

    def __new__(cls, tau, per_set, summary, exits=(), open_allowed=True, set_id=None):
        return super(TradeCommand, cls).__new__(cls, tau, tuple(per_set), summary,
                                                tuple(exits), open_allowed, set_id)


def _window_quantiles(values, counts, size, quantiles):
    """ Quantiles of values[max(0, c - size):c] for every count c. """
    out = np.empty((len(counts), len(quantiles)))
    partial = counts < size
    for k in np.flatnonzero(partial):
        out[k] = np.quantile(values[:counts[k]], quantiles)
    full = np.flatnonzero(~partial)
    if len(full):
        windows = sliding_window_view(values, size)
        for start in range(0, len(full), QUANTILE_BATCH):
            rows = full[start:start + QUANTILE_BATCH]
            out[rows] = np.quantile(windows[counts[rows] - size], quantiles, axis=1).T
    return out


class PredictorState(object):
    """
    Learning state of one parameter set: the learned band and a ring buffer
    of the last `history_size` recorded momenta.
    """

    def __init__(self, params, warmup=DEFAULT_WARMUP, band=DEFAULT_BAND,
                 band_quantiles=DEFAULT_BAND_QUANTILES, history_size=DEFAULT_HISTORY_SIZE,
                 adaptive_band=True, band_refresh=DEFAULT_BAND_REFRESH):
        lo, hi = band
        if not 0.0 <= lo < hi <= 1.0:
            raise PredictorError("band must satisfy 0 <= lo < hi <= 1, got %r" % (band,))
        if warmup < 1:
            raise PredictorError("warmup must be at least 1")
        if history_size < 1:
            raise PredictorError("history_size must be at least 1")
        self.params = params
        self.warmup = warmup
        self.learned_band = (float(lo), float(hi))
        self.band_quantiles = tuple(band_quantiles)
        self.adaptive_band = adaptive_band
        self.band_refresh = max(1, int(band_refresh))
        self.history_size = int(history_size)
        self.observed = 0
        self._history = np.empty(self.history_size)
        self._filled = 0
        self._next = 0

    @property
    def warmed_up(self):
        return self.observed >= self.warmup

    @property
    def momentum_history(self):
        """ Recorded momenta still in the buffer, oldest first. """
        if self._filled < self.history_size:
            return self._history[:self._filled].copy()
        return np.concatenate((self._history[self._next:], self._history[:self._next]))

    def _refreshes_at(self, count):
        return self.adaptive_band and count >= self.warmup and \
            (count == self.warmup or count % self.band_refresh == 0)

    def _refresh_counts(self, n):
        """ Observation counts up to n after which the band is refreshed. """
        if not self.adaptive_band or n < self.warmup:
            return np.empty(0, dtype=int)
        first = -(-self.warmup // self.band_refresh) * self.band_refresh
        counts = np.arange(first, n + 1, self.band_refresh)
        if not len(counts) or counts[0] != self.warmup:
            counts = np.concatenate(([self.warmup], counts))
        return counts

    def _learn(self, lo, hi):
        if lo < hi:
            self.learned_band = (float(lo), float(hi))

    def observe(self, value):
        self._history[self._next] = value
        self._next = (self._next + 1) % self.history_size
        self._filled = min(self._filled + 1, self.history_size)
        self.observed += 1
        if self._refreshes_at(self.observed):
            self._learn(*np.quantile(self._history[:self._filled], self.band_quantiles))

    def in_band(self, value):
        lo, hi = self.learned_band
        return lo <= value <= hi

    def replay(self, values):
        """
        Record a whole series of usable momenta as successive observe() calls
        would. Returns, per value, whether the state was warmed up and the
        value sat inside the band in force before it was recorded.
        """
        if self.observed:
            raise PredictorError("replay needs a fresh predictor state")
        values = np.asarray(values, dtype=float)
        if not np.all((values >= 0.0) & (values <= 1.0)):
            raise PredictorError("momenta outside [0, 1]")
        n = len(values)

        counts = self._refresh_counts(n)
        lows = [self.learned_band[0]]
        highs = [self.learned_band[1]]
        for lo, hi in _window_quantiles(values, counts, self.history_size, self.band_quantiles):
            self._learn(lo, hi)
            lows.append(self.learned_band[0])
            highs.append(self.learned_band[1])

        position = np.arange(n)
        # band index per value: how many refreshes happened before it
        segment = np.searchsorted(counts, position, side='right')
        fires = (position >= self.warmup) & \
            (np.asarray(lows)[segment] <= values) & (values <= np.asarray(highs)[segment])

        tail = values[-self.history_size:]
        self._history[:len(tail)] = tail
        self._filled = len(tail)
        self._next = len(tail) % self.history_size
        self.observed = n
        return fires


def update_and_signal(state, m, direction_hint):
    if m.params != state.params:
        raise PredictorError("momentum computed with %s fed to predictor for %s"
                             % (m.params.label(), state.params.label()))
    if not m.usable:
        return 0
    if not 0.0 <= m.value <= 1.0:
        raise PredictorError("momentum %r outside [0, 1]" % m.value)

    was_warm = state.warmed_up
    fires = was_warm and state.in_band(m.value)
    state.observe(m.value)
    if not fires or not direction_hint:
        return 0
    return 1 if direction_hint > 0 else -1


def aggregate(values, n_s=None, tau=0):
    values = tuple(int(v) for v in values)
    if n_s is not None and len(values) != n_s:
        raise PredictorError("expected %d per-set values, got %d" % (n_s, len(values)))
    if not values:
        raise PredictorError("no per-set values to aggregate")
    for v in values:
        if v not in SIGNAL_ALPHABET:
            raise PredictorError("per-set value %r outside {-1, 0, +1}" % v)
    return TradeCommand(tau, values, sum(values) / float(len(values)))


def momentum_histograms(incoming, outgoing, bins=DEFAULT_MOMENTUM_BINS):
    h1 = UnitHistogram(bins)
    h2 = UnitHistogram(bins)
    h1.sample_many(incoming)
    h2.sample_many(outgoing)
    return h1.masses(), h2.masses()


def direction_hints(mids, lag):
    """ sign(mid[t] - mid[t - lag]) per tick, 0 before the first full lag. """
    hints = np.zeros(len(mids), dtype=np.int8)
    if len(mids) > lag:
        hints[lag:] = np.sign(mids[lag:] - mids[:-lag])
    return hints


class PMBCSModel(Strategy):
    """
    The predictor -> evaluator -> optimal parameters loop.

    prepare() computes every set's momenta over the stream's mids (the window
    ending at tick t starts at t - l_s), replays them through the set's
    predictor state into a (ticks x sets) signal matrix and replays each
    column into the set's shadow ledger. command() then reads one row per
    tick, has the evaluator rescore the ledgers every `evaluation_interval`
    ticks, and allows opens only when the currently optimal set agrees with
    the aggregate sign and the trade-strategy gates pass.
    """

    def __init__(self, param_sets, self_learning=True, warmup=DEFAULT_WARMUP,
                 band=DEFAULT_BAND, band_quantiles=DEFAULT_BAND_QUANTILES,
                 history_size=DEFAULT_HISTORY_SIZE, adaptive_band=True,
                 band_refresh=DEFAULT_BAND_REFRESH, penalty=DEFAULT_PENALTY,
                 sigma_mode=SigmaMode.STD, evaluation_interval=DEFAULT_EVALUATION_INTERVAL,
                 max_hold=None, ledger_window=DEFAULT_LEDGER_WINDOW, min_sharpe=None,
                 max_skewness=None, momentum_bins=DEFAULT_MOMENTUM_BINS, workers=DEFAULT_WORKERS):
        param_sets = list(param_sets)
        if not param_sets:
            raise PredictorError("at least one parameter set is required")
        if not self_learning and len(param_sets) != 1:
            raise PredictorError("the simple model takes exactly one parameter set, got %d" % len(param_sets))
        if sigma_mode not in SigmaMode.ALL:
            raise PredictorError("unknown sigma mode %r" % sigma_mode)

        self.param_sets = param_sets
        self.self_learning = self_learning
        self.name = 'pmbcs_selflearning' if self_learning else 'pmbcs_simple'
        self.penalty = penalty
        self.sigma_mode = sigma_mode
        self.evaluation_interval = max(1, int(evaluation_interval))
        self.max_hold = max_hold
        self.ledger_window = ledger_window
        self.min_sharpe = min_sharpe
        self.max_skewness = max_skewness
        self.momentum_bins = momentum_bins
        self.workers = max(1, int(workers))
        self._state_options = dict(warmup=warmup, band=band, band_quantiles=band_quantiles,
                                   history_size=history_size, adaptive_band=adaptive_band,
                                   band_refresh=band_refresh)
        self.states = [PredictorState(p, **self._state_options) for p in param_sets]
        self.ledgers = []
        self.incoming = UnitHistogram(momentum_bins)
        self.outgoing = UnitHistogram(momentum_bins)
        self.scores = [undefined_score(i, penalty) for i in range(len(param_sets))]
        self.optimal = None if self_learning else 0
        self.selections = 0
        self._mids = None
        self._signals = None
        self._summary = None
        self._observations = []

    @property
    def n_s(self):
        return len(self.param_sets)

    def _map(self, func, items):
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                return list(executor.map(func, items))
        return [func(item) for item in items]

    def prepare(self, stream):
        mids = stream.mids()
        momenta = momentum_matrix(mids, self.param_sets, self.workers)
        lags = set(max(1, p.l_s // 2) for p in self.param_sets)
        hints = dict((lag, direction_hints(mids, lag)) for lag in lags)

        self._mids = mids
        self._signals = np.zeros((len(mids), self.n_s), dtype=np.int8)
        self.states = [PredictorState(p, **self._state_options) for p in self.param_sets]

        def replay(i):
            params = self.param_sets[i]
            series = momenta[i]
            usable = ~np.isnan(series)
            ticks = np.flatnonzero(usable) + params.l_s
            values = series[usable]
            hint = hints[max(1, params.l_s // 2)][ticks]
            fired = self.states[i].replay(values) & (hint != 0)
            self._signals[ticks[fired], i] = hint[fired]
            return ticks, values, fired

        self._observations = self._map(replay, list(range(self.n_s)))
        self.incoming = UnitHistogram(self.momentum_bins)
        self.outgoing = UnitHistogram(self.momentum_bins)
        for ticks, values, fired in self._observations:
            self.incoming.sample_many(values)
            self.outgoing.sample_many(values[fired])

        self.ledgers = [
            ShadowLedger(self._signals[:, i], self.max_hold if self.max_hold is not None else 2 * p.l_s,
                         window=self.ledger_window)
            for i, p in enumerate(self.param_sets)
        ]
        self._summary = self._signals.sum(axis=1, dtype=np.int64) / float(self.n_s)
        log.info("Computed momenta and signals for %d parameter set(s) over %d ticks: %d of %d momenta fired",
                 self.n_s, len(mids), self.outgoing.count, self.incoming.count)

    def recent_momenta(self, i, tau):
        """ Momenta of set i recorded up to tick tau that the state still holds. """
        ticks, values, _ = self._observations[i]
        end = int(np.searchsorted(ticks, tau, side='right'))
        return values[max(0, end - self.states[i].history_size):end]

    def command(self, quote, account):
        if self._signals is None:
            raise PredictorError("prepare() must run before command()")
        tau = quote.index
        if tau and tau % self.evaluation_interval == 0:
            self.evaluate(tau)

        per_set = tuple(self._signals[tau].tolist())
        summary = float(self._summary[tau])
        return TradeCommand(tau, per_set, summary, open_allowed=self._open_allowed(per_set, summary, tau),
                            set_id=self.optimal)

    def _open_allowed(self, per_set, summary, tau):
        if self.optimal is None:
            return False
        if self.self_learning and per_set[self.optimal] != sign(summary):
            return False
        if self.min_sharpe is not None:
            score = self.scores[self.optimal]
            if not score.defined or score.ratio < self.min_sharpe:
                return False
        if self.max_skewness is not None:
            try:
                skew = skewness(self.recent_momenta(self.optimal, tau))
            except EvaluatorError:
                return False
            if abs(skew) > self.max_skewness:
                return False
        return True

    def _score(self, i, tau):
        view = self.ledgers[i].view(tau)
        if not view.N:
            return undefined_score(i, self.penalty)
        if self.sigma_mode == SigmaMode.STD:
            return sharpe_ratio(view, self.penalty, set_id=i)

        l_s = self.param_sets[i].l_s
        l_s -= l_s % 2
        half = l_s // 2
        if l_s < 2 or tau < half:
            return undefined_score(i, self.penalty)
        try:
            sigma_r = return_volatility(self._mids[tau - half:tau + 1], l_s)
        except StringError as e:
            log.debug("Set %d: return volatility unavailable: %s", i, e)
            return undefined_score(i, self.penalty)
        return volatility_sharpe(view, self.penalty, sigma_r, set_id=i)

    def evaluate(self, tau):
        self.scores = [self._score(i, tau) for i in range(self.n_s)]
        if not self.self_learning:
            return self.optimal
        try:
            optimal = select_optimal(self.scores)
        except NoDefinedScore:
            log.debug("No defined Sharpe ratio at tick %d, keeping set %s", tau, self.optimal)
            return self.optimal
        if optimal != self.optimal:
            log.info("Tick %d: optimal string parameters are now set %d (%s)",
                     tau, optimal, self.param_sets[optimal].label())
            self.optimal = optimal
            self.selections += 1
        return self.optimal

    def finish(self, account):
        if self._mids is not None and len(self._mids):
            self.evaluate(len(self._mids) - 1)
