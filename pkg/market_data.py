# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Tick quotes: loading, synthetic generation and descriptive histograms.

The scalar price used by all predictor math is the mid-price (bid+ask)/2;
execution uses bid/ask (buy at ask, sell at bid).
"""
# stdlib
from collections import namedtuple, OrderedDict
import csv
from datetime import datetime, timedelta, timezone
import logging
import math
import os

# 3p
import numpy as np

# project
from histogram import Histogram

log = logging.getLogger(__name__)

TIMESTAMP_FORMAT = '%Y-%m-%dT%H:%M:%S.%fZ'
# accepted on input only, some exports drop the milliseconds
TIMESTAMP_FORMATS_IN = [TIMESTAMP_FORMAT, '%Y-%m-%dT%H:%M:%SZ']
CSV_HEADER = ['timestamp', 'bid', 'ask']
PRICE_DIGITS = 6
DEFAULT_INSTRUMENT = 'EUR/USD'
# synthetic streams are stamped one tick per second from this instant
SYNTHETIC_EPOCH = datetime(2010, 7, 15, tzinfo=timezone.utc)
SYNTHETIC_TICK_SECONDS = 1.0


class MarketDataError(Exception):
    pass


class TickParseError(MarketDataError):
    def __init__(self, row, reason):
        super(TickParseError, self).__init__("%s at row %d" % (reason, row))
        self.row = row
        self.reason = reason


class EmptyStreamError(MarketDataError):
    pass


class InvalidQuoteError(MarketDataError):
    pass


class StreamSource(object):

    FILE = 'file'
    SYNTHETIC = 'synthetic'


class SyntheticModel(object):

    RANDOM_WALK = 'random_walk'
    RANDOM_WALK_DRIFT = 'random_walk_drift'
    SINUSOID = 'sinusoid'

    ALL = (RANDOM_WALK, RANDOM_WALK_DRIFT, SINUSOID)


class TickQuote(namedtuple('TickQuote', ['index', 'timestamp', 'bid', 'ask'])):
    """ One bid/ask quote, the atomic market event. """
    __slots__ = ()

    @property
    def mid(self):
        return (self.bid + self.ask) / 2.0

    @property
    def spread(self):
        return self.ask - self.bid


class TickStream(object):
    """
    Immutable, validated sequence of quotes for one instrument.

    `zero_spread` marks synthetic streams built with spread 0, the only case
    where bid == ask is accepted.
    """

    def __init__(self, quotes, instrument=DEFAULT_INSTRUMENT, source=StreamSource.FILE,
                 zero_spread=False, mids=None):
        quotes = tuple(quotes)
        if not quotes:
            raise EmptyStreamError("empty stream")
        _validate_quotes(quotes, zero_spread)

        self._quotes = quotes
        self.instrument = instrument
        self.source = source
        self.zero_spread = zero_spread
        self._mids = None
        if mids is not None:
            if len(mids) != len(quotes):
                raise InvalidQuoteError("%d mids for %d quotes" % (len(mids), len(quotes)))
            self._mids = np.array(mids, dtype=float)
            self._mids.setflags(write=False)

    @property
    def quotes(self):
        return self._quotes

    def __len__(self):
        return len(self._quotes)

    def __iter__(self):
        return iter(self._quotes)

    def __getitem__(self, idx):
        return self._quotes[idx]

    def mids(self):
        """ Mid-prices as a read-only float array, cached. """
        if self._mids is None:
            mids = np.fromiter((q.mid for q in self._quotes), dtype=float, count=len(self._quotes))
            mids.setflags(write=False)
            self._mids = mids
        return self._mids

    def bids(self):
        return np.array([q.bid for q in self._quotes], dtype=float)

    def asks(self):
        return np.array([q.ask for q in self._quotes], dtype=float)


def _validate_quotes(quotes, zero_spread):
    prev_ts = None
    for expected, q in enumerate(quotes):
        if q.index != expected:
            raise InvalidQuoteError("non-contiguous index %s, expected %s" % (q.index, expected))
        if q.bid <= 0 or q.ask <= 0:
            raise InvalidQuoteError("non-positive price at index %d" % q.index)
        if q.bid > q.ask or (q.bid == q.ask and not zero_spread):
            raise InvalidQuoteError("bid >= ask at index %d" % q.index)
        if prev_ts is not None and q.timestamp < prev_ts:
            raise InvalidQuoteError("decreasing timestamp at index %d" % q.index)
        prev_ts = q.timestamp


def parse_timestamp(value):
    value = value.strip()
    for fmt in TIMESTAMP_FORMATS_IN:
        try:
            return datetime.strptime(value, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            pass
    raise ValueError(value)


def format_timestamp(ts):
    return ts.strftime(TIMESTAMP_FORMAT)[:-4] + 'Z'


def _parse_row(row, row_number):
    if len(row) != 3:
        raise TickParseError(row_number, "malformed row")
    try:
        ts = parse_timestamp(row[0])
        bid = float(row[1])
        ask = float(row[2])
    except ValueError:
        raise TickParseError(row_number, "malformed row")
    if not (math.isfinite(bid) and math.isfinite(ask)) or bid <= 0 or ask <= 0:
        raise TickParseError(row_number, "non-positive price")
    if bid >= ask:
        raise TickParseError(row_number, "bid ≥ ask")
    return ts, bid, ask


def load_ticks(path, format='csv', instrument=DEFAULT_INSTRUMENT):
    """
    Load `timestamp,bid,ask` rows; the header row is optional. Row numbers in
    errors count data rows from 1.
    """
    if format != 'csv':
        raise MarketDataError("unsupported tick format: %s" % format)
    if not os.path.exists(path):
        raise MarketDataError("missing tick file: %s" % path)

    quotes = []
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        row_number = 0
        try:
            for row in reader:
                if not row or all(not cell.strip() for cell in row):
                    continue
                if not quotes and row_number == 0 and [c.strip().lower() for c in row] == CSV_HEADER:
                    continue
                row_number += 1
                ts, bid, ask = _parse_row(row, row_number)
                if quotes and ts < quotes[-1].timestamp:
                    raise TickParseError(row_number, "decreasing timestamp")
                quotes.append(TickQuote(len(quotes), ts, bid, ask))
        except (UnicodeDecodeError, csv.Error):
            # the row that failed to decode was never counted
            raise TickParseError(row_number + 1, "malformed row")

    if not quotes:
        raise EmptyStreamError("empty stream")

    log.info("Loaded %d ticks of %s from %s", len(quotes), instrument, path)
    return TickStream(quotes, instrument=instrument, source=StreamSource.FILE)


def write_ticks(stream, path):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for q in stream:
            writer.writerow([
                format_timestamp(q.timestamp),
                '%.*f' % (PRICE_DIGITS, q.bid),
                '%.*f' % (PRICE_DIGITS, q.ask),
            ])


def _synthetic_mids(rng, n, model, params):
    start = params.get('start', 1.0)
    if start <= 0:
        raise MarketDataError("start price must be positive")

    if model == SyntheticModel.SINUSOID:
        amplitude = params.get('amplitude', 0.0)
        period = params.get('period', 0)
        if period < 2:
            raise MarketDataError("sinusoid period must be at least 2 ticks")
        if abs(amplitude) >= start:
            raise MarketDataError("sinusoid amplitude must stay below the start price")
        tau = np.arange(n, dtype=float)
        return start + amplitude * np.sin(2.0 * math.pi * tau / period)

    if model not in (SyntheticModel.RANDOM_WALK, SyntheticModel.RANDOM_WALK_DRIFT):
        raise MarketDataError("unknown synthetic model: %s" % model)

    volatility = params.get('volatility', 0.0)
    if volatility < 0:
        raise MarketDataError("volatility must be non-negative")
    drift = params.get('drift', 0.0) if model == SyntheticModel.RANDOM_WALK_DRIFT else 0.0

    steps = rng.standard_normal(n - 1) * volatility + drift
    mids = np.empty(n, dtype=float)
    mids[0] = start
    np.cumsum(steps, out=mids[1:])
    mids[1:] += start
    return mids


def generate_synthetic(seed, n, model, params, instrument=DEFAULT_INSTRUMENT):
    """
    Deterministic tick stream: mid follows `model`, quotes straddle it by
    `params['spread']`. Parameterizations that cross zero are rejected.
    """
    if n < 1:
        raise MarketDataError("n must be at least 1")
    spread = params.get('spread', 0.0)
    if spread < 0:
        raise MarketDataError("spread must be non-negative")

    rng = np.random.default_rng(seed)
    mids = _synthetic_mids(rng, n, model, params)

    half = spread / 2.0
    if np.min(mids) - half <= 0:
        raise MarketDataError("parameters force non-positive prices")

    step = timedelta(seconds=params.get('tick_seconds', SYNTHETIC_TICK_SECONDS))
    quotes = [
        TickQuote(i, SYNTHETIC_EPOCH + i * step, float(mid - half), float(mid + half))
        for i, mid in enumerate(mids)
    ]
    if spread == 0:
        log.warning("Synthetic stream generated with zero spread, bid == ask on every tick")
    return TickStream(quotes, instrument=instrument, source=StreamSource.SYNTHETIC,
                      zero_spread=(spread == 0))


def with_spread(stream, spread):
    """ Same mid-prices, symmetric bid/ask at `spread`. """
    if spread < 0:
        raise MarketDataError("spread must be non-negative")
    half = spread / 2.0
    quotes = []
    for q in stream:
        mid = q.mid
        if mid - half <= 0:
            raise MarketDataError("spread %s forces non-positive bid at index %d" % (spread, q.index))
        quotes.append(TickQuote(q.index, q.timestamp, mid - half, mid + half))
    # mids() stays bit-identical to the source stream
    return TickStream(quotes, instrument=stream.instrument, source=stream.source,
                      zero_spread=(spread == 0), mids=stream.mids())


def spread_histogram(stream, bin_width):
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    hist = Histogram(bin_width)
    for q in stream:
        hist.sample(q.spread)
    return hist.counts()


def utc_day(ts):
    return ts.astimezone(timezone.utc).strftime('%Y-%m-%d')


def trades_per_day_histogram(closed, calendar=utc_day):
    counts = OrderedDict()
    for position in closed:
        if position.close_timestamp is None:
            raise ValueError("position %s has no close timestamp" % position.id)
        day = calendar(position.close_timestamp)
        counts[day] = counts.get(day, 0) + 1
    return OrderedDict(sorted(counts.items()))
