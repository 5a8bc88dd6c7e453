# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Comparison strategies: SCALPER, MACD and closed-form ARIMA forecasters.

They only generate TradeCommands; execution and accounting go through the
same backtester.step() as the PMBCS model.
"""
# stdlib
from collections import namedtuple
import logging

# 3p
import numpy as np

# project
from backtester import Strategy
from predictor import TradeCommand
from util import sign

log = logging.getLogger(__name__)

DEFAULT_PIP = 0.0001
DEFAULT_ARIMA_WINDOW = 1000
DEFAULT_DEAD_BAND = 0.0
DEFAULT_MACD_PERIODS = (12, 26, 9)
DEFAULT_SCALPER_PIPS = 5
DEFAULT_SCALPER_MAX_HOLD = 1000
# |MACD - signal| below this (relative to price) counts as no separation
CROSSING_TOLERANCE = 1e-12
# price comparisons against take-profit / stop-loss offsets
PRICE_TOLERANCE = 1e-9


class BenchmarkError(Exception):
    pass


class BenchmarkKind(object):

    SCALPER = 'scalper'
    MACD = 'macd'
    ARIMA_000_C = 'arima_000_c'
    ARIMA_010 = 'arima_010'
    ARIMA_010_C = 'arima_010_c'

    ARIMA = (ARIMA_000_C, ARIMA_010, ARIMA_010_C)
    ALL = (SCALPER, MACD) + ARIMA


class BenchmarkConfig(object):

    def __init__(self, kind, c=0.0, window=DEFAULT_ARIMA_WINDOW, dead_band=DEFAULT_DEAD_BAND,
                 fast=DEFAULT_MACD_PERIODS[0], slow=DEFAULT_MACD_PERIODS[1],
                 signal=DEFAULT_MACD_PERIODS[2], tick_factor=1,
                 take_profit=DEFAULT_SCALPER_PIPS * DEFAULT_PIP,
                 stop_loss=DEFAULT_SCALPER_PIPS * DEFAULT_PIP, max_hold=DEFAULT_SCALPER_MAX_HOLD):
        if kind not in BenchmarkKind.ALL:
            raise BenchmarkError("unknown benchmark %r" % (kind,))
        if not 0 < fast < slow or signal < 1 or tick_factor < 1:
            raise BenchmarkError("MACD periods must satisfy 0 < fast < slow, signal >= 1")
        if take_profit <= 0 or stop_loss <= 0:
            raise BenchmarkError("take-profit and stop-loss must be positive")
        if window < 1 or dead_band < 0 or max_hold < 1:
            raise BenchmarkError("window and max_hold must be >= 1, dead_band >= 0")
        self.kind = kind
        self.c = float(c)
        self.window = int(window)
        self.dead_band = float(dead_band)
        self.fast = int(fast) * int(tick_factor)
        self.slow = int(slow) * int(tick_factor)
        self.signal = int(signal) * int(tick_factor)
        self.take_profit = float(take_profit)
        self.stop_loss = float(stop_loss)
        self.max_hold = int(max_hold)


def arima_forecast(config, history):
    """ Next-tick forecast from the closed-form ARIMA variants. """
    if len(history) == 0:
        raise BenchmarkError("empty history")
    if config.kind == BenchmarkKind.ARIMA_010:
        return float(history[-1])
    if config.kind == BenchmarkKind.ARIMA_010_C:
        return float(history[-1]) + config.c
    if config.kind == BenchmarkKind.ARIMA_000_C:
        return float(np.mean(history[-config.window:])) + config.c
    raise BenchmarkError("%s is not an ARIMA variant" % config.kind)


class MacdIndicator(object):
    """
    Incremental MACD: EMAs seeded with the first observation, smoothing
    2 / (period + 1). update() returns +1 / -1 on an upward / downward
    crossing of the MACD line over its signal line, else 0.
    """

    def __init__(self, fast, slow, signal):
        self.alpha_fast = 2.0 / (fast + 1)
        self.alpha_slow = 2.0 / (slow + 1)
        self.alpha_signal = 2.0 / (signal + 1)
        self.slow = slow
        self.count = 0
        self.ema_fast = None
        self.ema_slow = None
        self.signal_line = None
        self._state = 0

    @property
    def macd(self):
        return self.ema_fast - self.ema_slow

    def update(self, price):
        if self.count == 0:
            self.ema_fast = self.ema_slow = float(price)
            self.signal_line = 0.0
        else:
            self.ema_fast += self.alpha_fast * (price - self.ema_fast)
            self.ema_slow += self.alpha_slow * (price - self.ema_slow)
            self.signal_line += self.alpha_signal * (self.macd - self.signal_line)
        self.count += 1

        gap = self.macd - self.signal_line
        state = 0 if abs(gap) <= CROSSING_TOLERANCE * max(1.0, abs(price)) else sign(gap)
        previous, self._state = self._state, state if state else self._state
        if self.count < self.slow or not state or state == previous:
            return 0
        return state


def macd_signal(config, history):
    if len(history) < config.slow:
        raise BenchmarkError("MACD needs %d prices, got %d" % (config.slow, len(history)))
    indicator = MacdIndicator(config.fast, config.slow, config.signal)
    result = 0
    for price in history:
        result = indicator.update(price)
    return result


ScalperInstructions = namedtuple('ScalperInstructions', ['open_side', 'close_ids'])


def scalper_signal(config, quote, open_positions, previous_mid, mid=None):
    """
    Take-profit / stop-loss exits for open positions, and one new position in
    the direction of the last mid move when flat.
    """
    close_ids = []
    for position in open_positions:
        if position.direction > 0:
            gain = quote.bid - position.open_price
        else:
            gain = position.open_price - quote.ask
        if gain >= config.take_profit - PRICE_TOLERANCE or -gain >= config.stop_loss - PRICE_TOLERANCE or \
                quote.index - position.open_tau >= config.max_hold:
            close_ids.append(position.id)

    open_side = 0
    if len(close_ids) == len(open_positions) and previous_mid is not None:
        open_side = sign((quote.mid if mid is None else mid) - previous_mid)
    return ScalperInstructions(open_side, tuple(close_ids))


class ScalperStrategy(Strategy):

    name = BenchmarkKind.SCALPER

    def __init__(self, config):
        self.config = config
        self._mids = None

    def prepare(self, stream):
        self._mids = stream.mids()

    def command(self, quote, account):
        tau = quote.index
        previous_mid = self._mids[tau - 1] if tau else None
        instructions = scalper_signal(self.config, quote, list(account.open_positions.values()),
                                      previous_mid, self._mids[tau])
        side = instructions.open_side
        return TradeCommand(quote.index, (side,), float(side), exits=instructions.close_ids)


class MacdStrategy(Strategy):

    name = BenchmarkKind.MACD

    def __init__(self, config):
        self.config = config
        self.indicator = MacdIndicator(config.fast, config.slow, config.signal)
        self._mids = None

    def prepare(self, stream):
        self._mids = stream.mids()

    def command(self, quote, account):
        signal = self.indicator.update(self._mids[quote.index])
        return TradeCommand(quote.index, (signal,), float(signal))


class ArimaStrategy(Strategy):
    """ Trades the sign of (forecast - mid) outside a dead band. """

    def __init__(self, config):
        if config.kind not in BenchmarkKind.ARIMA:
            raise BenchmarkError("%s is not an ARIMA variant" % config.kind)
        self.config = config
        self.name = config.kind
        self._mids = None
        self._cumsum = None

    def prepare(self, stream):
        self._mids = stream.mids()
        self._cumsum = np.concatenate(([0.0], np.cumsum(self._mids)))

    def forecast(self, tau):
        config = self.config
        if config.kind == BenchmarkKind.ARIMA_000_C:
            start = max(0, tau + 1 - config.window)
            return (self._cumsum[tau + 1] - self._cumsum[start]) / (tau + 1 - start) + config.c
        return arima_forecast(config, self._mids[tau:tau + 1])

    def command(self, quote, account):
        tau = quote.index
        signal = 0
        if self.config.kind != BenchmarkKind.ARIMA_000_C or tau + 1 >= self.config.window:
            edge = self.forecast(tau) - self._mids[tau]
            if edge > self.config.dead_band:
                signal = 1
            elif edge < -self.config.dead_band:
                signal = -1
        return TradeCommand(tau, (signal,), float(signal))


def make_benchmark(config):
    if config.kind == BenchmarkKind.SCALPER:
        return ScalperStrategy(config)
    if config.kind == BenchmarkKind.MACD:
        return MacdStrategy(config)
    return ArimaStrategy(config)
