# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Event-driven execution and NAV accounting.

Longs open at ask and close at bid, shorts open at bid and close at ask, so
every round trip pays the spread. Open positions are marked at their
liquidation price (longs at bid, shorts at ask).
"""
# stdlib
from collections import deque, namedtuple, OrderedDict
from datetime import timedelta
import logging
import math

# 3p
import numpy as np

# project
from market_data import with_spread
from util import plural
from utils.logger import ProgressLogger

log = logging.getLogger(__name__)

REFERENCE_NAV = 1e5
DEFAULT_UNITS = 1000
DEFAULT_MAX_OPEN = 10
DEFAULT_MAX_OPENS_PER_WINDOW = 10
RATE_WINDOW_SECONDS = 3600
DEFAULT_ALTITUDE = 0.25
PROGRESS_EVERY = 100000


class BacktestError(Exception):
    pass


class Side(object):

    LONG = 'long'
    SHORT = 'short'


class Event(object):

    OPEN = 'open'
    CLOSE = 'close'
    RATE_LIMITED = 'rate_limited'


class PositionStatus(object):

    OPEN = 'open'
    CLOSED = 'closed'


ExecutionReport = namedtuple('ExecutionReport', [
    'tau', 'timestamp', 'event', 'side', 'units', 'price', 'pnl', 'set_id',
])

NavPoint = namedtuple('NavPoint', ['tau', 'timestamp', 'nav'])

NavStatistics = namedtuple('NavStatistics', ['final_nav', 'nav_pct', 'mean', 'sigma'])


class StrategyConfig(object):
    """
    Execution caps and sizing. `max_hold` of None disables the age rule; the
    PMBCS runner sets it to 2 * l_s.
    """

    def __init__(self, altitude=DEFAULT_ALTITUDE, units=DEFAULT_UNITS, max_open=DEFAULT_MAX_OPEN,
                 max_opens_per_window=DEFAULT_MAX_OPENS_PER_WINDOW,
                 rate_window_seconds=RATE_WINDOW_SECONDS, max_hold=None,
                 reference_nav=REFERENCE_NAV):
        if altitude < 0 or altitude > 1:
            raise BacktestError("altitude threshold must lie in [0, 1]")
        if units < 1 or int(units) != units:
            raise BacktestError("units must be a positive integer")
        if max_open < 1 or max_opens_per_window < 1:
            raise BacktestError("position caps must be at least 1")
        if max_hold is not None and max_hold < 1:
            raise BacktestError("max_hold must be at least 1 tick")
        self.altitude = float(altitude)
        self.units = int(units)
        self.max_open = int(max_open)
        self.max_opens_per_window = int(max_opens_per_window)
        self.rate_window = timedelta(seconds=rate_window_seconds)
        self.max_hold = max_hold
        self.reference_nav = float(reference_nav)


class TradePosition(object):

    def __init__(self, id, side, units, open_tau, open_timestamp, open_price, set_id=None):
        self.id = id
        self.side = side
        self.units = units
        self.open_tau = open_tau
        self.open_timestamp = open_timestamp
        self.open_price = open_price
        self.set_id = set_id
        self.close_tau = None
        self.close_timestamp = None
        self.close_price = None
        self.realized_pnl = 0.0
        self.status = PositionStatus.OPEN

    @property
    def direction(self):
        return 1 if self.side == Side.LONG else -1

    def pnl_at(self, price):
        return (price - self.open_price) * self.units * self.direction

    def exit_price(self, quote):
        """ Liquidation price: longs sell at bid, shorts buy back at ask. """
        return quote.bid if self.side == Side.LONG else quote.ask

    def close(self, quote):
        self.close_tau = quote.index
        self.close_timestamp = quote.timestamp
        self.close_price = self.exit_price(quote)
        self.realized_pnl = self.pnl_at(self.close_price)
        self.status = PositionStatus.CLOSED

    @property
    def holding_ticks(self):
        if self.close_tau is None:
            return None
        return self.close_tau - self.open_tau

    def __repr__(self):
        return "<TradePosition %d %s %d @ %s %s>" % (
            self.id, self.side, self.units, self.open_price, self.status)


class Account(object):

    def __init__(self, reference_nav=REFERENCE_NAV):
        self.reference_nav = float(reference_nav)
        self.nav = self.reference_nav
        self.realized = 0.0
        self.open_positions = OrderedDict()
        self.closed = []
        self.reports = []
        self.history = []
        self.opens = deque()
        self.last_tau = None
        self._next_id = 0

    def next_position_id(self):
        self._next_id += 1
        return self._next_id

    def mark(self, quote):
        unrealized = sum(p.pnl_at(p.exit_price(quote)) for p in self.open_positions.values())
        self.nav = self.reference_nav + self.realized + unrealized
        self.history.append(NavPoint(quote.index, quote.timestamp, self.nav))
        return self.nav

    def opens_in_window(self, now, window):
        while self.opens and now - self.opens[0] >= window:
            self.opens.popleft()
        return len(self.opens)


class Strategy(object):
    """ Command generator fed to run_backtest, one command per quote. """

    name = 'strategy'

    def prepare(self, stream):
        pass

    def command(self, quote, account):
        raise NotImplementedError()

    def finish(self, account):
        pass


def _report(quote, event, side, units, price, pnl, set_id):
    return ExecutionReport(quote.index, quote.timestamp, event, side, units, price, pnl, set_id)


def _should_close(position, quote, command, config):
    if position.id in command.exits:
        return True
    if command.summary * position.direction < 0:
        return True
    if config.max_hold is not None and quote.index - position.open_tau > config.max_hold:
        return True
    return False


def step(account, quote, command, config):
    """
    Process one quote: close, then open, then re-mark NAV. Returns the
    account and the execution reports emitted on this tick.
    """
    if account.last_tau is not None and quote.index != account.last_tau + 1:
        raise BacktestError("out-of-order quote %d after %d" % (quote.index, account.last_tau))
    account.last_tau = quote.index
    reports = []

    for position in list(account.open_positions.values()):
        if not _should_close(position, quote, command, config):
            continue
        position.close(quote)
        del account.open_positions[position.id]
        account.closed.append(position)
        account.realized += position.realized_pnl
        reports.append(_report(quote, Event.CLOSE, position.side, position.units,
                               position.close_price, position.realized_pnl, position.set_id))

    if command.open_allowed and command.summary != 0 and abs(command.summary) >= config.altitude:
        side = Side.LONG if command.summary > 0 else Side.SHORT
        price = quote.ask if side == Side.LONG else quote.bid
        if account.opens_in_window(quote.timestamp, config.rate_window) >= config.max_opens_per_window:
            reports.append(_report(quote, Event.RATE_LIMITED, side, config.units, price, None, command.set_id))
        elif len(account.open_positions) >= config.max_open:
            log.debug("Tick %d: %d positions open, not opening", quote.index, len(account.open_positions))
        else:
            position = TradePosition(account.next_position_id(), side, config.units, quote.index,
                                     quote.timestamp, price, set_id=command.set_id)
            account.open_positions[position.id] = position
            account.opens.append(quote.timestamp)
            reports.append(_report(quote, Event.OPEN, side, config.units, price, None, command.set_id))

    account.mark(quote)
    account.reports.extend(reports)
    return account, reports


def run_backtest(stream, strategy, config, progress_every=PROGRESS_EVERY):
    account = Account(config.reference_nav)
    progress = ProgressLogger(log, "%s ticks processed" % strategy.name, len(stream), progress_every)
    strategy.prepare(stream)
    for quote in stream:
        step(account, quote, strategy.command(quote, account), config)
        progress.update()
    strategy.finish(account)
    log.info("%s: %d position%s closed, %d open, final NAV %.2f",
             strategy.name, len(account.closed), plural(len(account.closed)),
             len(account.open_positions), account.nav)
    return account


def nav_series(account):
    if not account.history:
        raise BacktestError("no processed ticks")
    return list(account.history)


def nav_pct(final_nav, reference_nav=REFERENCE_NAV):
    return (final_nav - reference_nav) / reference_nav * 100.0


def nav_statistics(series, reference_nav=REFERENCE_NAV):
    """ Mean and standard deviation of NAV relative to the reference point. """
    if not series:
        raise BacktestError("empty NAV series")
    offsets = np.array([p.nav for p in series], dtype=float) - reference_nav
    final = series[-1].nav
    return NavStatistics(final, nav_pct(final, reference_nav), float(np.mean(offsets)), float(np.std(offsets)))


def spread_sweep(stream, strategy_factory, spreads, config):
    """
    Final NAV per spread. Each run rebuilds the stream around the same mids
    and uses a fresh strategy from `strategy_factory`.
    """
    results = OrderedDict()
    for spread in spreads:
        if spread < 0 or math.isnan(spread):
            raise BacktestError("spread must be non-negative, got %r" % spread)
        account = run_backtest(with_spread(stream, spread), strategy_factory(), config)
        results[spread] = account.nav
    return results
