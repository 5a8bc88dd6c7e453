# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Replica store with spin labels and the fuzzy spin prediction.

A replica is the string state of one past opening window: d_X + 1 coordinate
sequences X_j(h), h = 0..h_op, and a spin S = +1 when a long opened at the
end of the window (at ask, offset h_op) and closed at offset h_cl (at bid)
would have made money, else -1.

The fuzzy spin of a query is the Boltzmann-weighted mean of the stored spins,
weights exp(-c_D * D_n / mean(D)) over the Hilbert L_p distances D_n.
Only replicas 0..N_red take part, N_red = N - (h_cl - h_op).
"""
# stdlib
from collections import namedtuple, OrderedDict
import logging

# 3p
import numpy as np
from scipy.special import softmax

# project
from histogram import Histogram
from string_core import StringError, two_endpoint_maps

log = logging.getLogger(__name__)

DEFAULT_CAPACITY = 256
DEFAULT_C_D = 1.0
DEFAULT_P = 1.0
DEFAULT_D_X = 1
DEFAULT_Q = 1.0
DEFAULT_STRIDE = 1
DEFAULT_INTERVAL_BIN = 1


class ReplicaError(Exception):
    pass


class Replica(namedtuple('Replica', ['coords', 'spin'])):
    """ `coords` has shape (d_X + 1, h_op + 1). """
    __slots__ = ()

    def __new__(cls, coords, spin):
        coords = np.array(coords, dtype=float, ndmin=2)
        if coords.ndim != 2:
            raise ReplicaError("replica coordinates must be 2-dimensional, got shape %s" % (coords.shape,))
        if spin not in (-1, 1):
            raise ReplicaError("spin must be -1 or +1, got %r" % (spin,))
        coords.flags.writeable = False
        return super(Replica, cls).__new__(cls, coords, int(spin))

    @property
    def shape(self):
        return self.coords.shape


SpinPrediction = namedtuple('SpinPrediction', ['tau', 'fuzzy_spin', 'spin'])


class ReplicaSystem(object):

    def __init__(self, h_op, h_cl, d_X=DEFAULT_D_X, p=DEFAULT_P, c_D=DEFAULT_C_D,
                 capacity=DEFAULT_CAPACITY):
        if h_op < 1:
            raise ReplicaError("h_op must be at least 1")
        if h_cl <= h_op:
            raise ReplicaError("h_cl must exceed h_op, got h_op=%d h_cl=%d" % (h_op, h_cl))
        if d_X < 1:
            raise ReplicaError("d_X must be at least 1")
        if p < 1:
            raise ReplicaError("distance exponent p must be >= 1, got %r" % (p,))
        if c_D < 0:
            raise ReplicaError("c_D must be non-negative")
        if capacity < 1:
            raise ReplicaError("capacity must be at least 1")
        self.h_op = int(h_op)
        self.h_cl = int(h_cl)
        self.d_X = int(d_X)
        self.p = float(p)
        self.c_D = float(c_D)
        self.capacity = int(capacity)
        self.replicas = []

    @property
    def shape(self):
        return (self.d_X + 1, self.h_op + 1)

    @property
    def N(self):
        return len(self.replicas) - 1

    @property
    def N_red(self):
        return self.N - (self.h_cl - self.h_op)

    @property
    def full(self):
        return len(self.replicas) >= self.capacity

    def __len__(self):
        return len(self.replicas)

    def check_shape(self, coords):
        shape = np.shape(coords)
        if shape != self.shape:
            raise ReplicaError("replica shape %s does not match (d_X + 1, h_op + 1) = %s"
                               % (shape, self.shape))


def spin_from_trade(bid_at_close, ask_at_open):
    """ +1 when the long round trip is profitable; a tie is not profit. """
    if bid_at_close <= 0 or ask_at_open <= 0:
        raise ReplicaError("prices must be positive")
    return 1 if bid_at_close - ask_at_open > 0 else -1


def _coords(replica):
    return replica.coords if isinstance(replica, Replica) else np.asarray(replica, dtype=float)


def hilbert_distance(a, b, p, h_op, d_X):
    """
    [ 1/(d_X * h_op) * sum_h sum_j |X_j^a(h) - X_j^b(h)|^p ]^(1/p)

    The prefactor is kept as written although the double sum runs over
    (h_op + 1)(d_X + 1) terms.
    """
    x_a = _coords(a)
    x_b = _coords(b)
    if x_a.shape != x_b.shape or x_a.shape != (d_X + 1, h_op + 1):
        raise ReplicaError("shape mismatch: %s vs %s, expected %s"
                           % (x_a.shape, x_b.shape, (d_X + 1, h_op + 1)))
    if p < 1 or h_op < 1 or d_X < 1:
        raise ReplicaError("need p >= 1, h_op >= 1, d_X >= 1")
    total = float(np.sum(np.abs(x_a - x_b) ** p))
    return (total / (d_X * h_op)) ** (1.0 / p)


def mean_distance(distances):
    values = np.asarray(distances, dtype=float)
    if values.size == 0:
        raise ReplicaError("empty distance list")
    return float(np.mean(values))


def boltzmann_weights(distances, c_D, mean_distance=None):
    values = np.asarray(distances, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ReplicaError("empty distance list")
    if np.any(values < 0):
        raise ReplicaError("distances must be non-negative")
    d_bar = float(np.mean(values)) if mean_distance is None else float(mean_distance)
    if d_bar < 0:
        raise ReplicaError("mean distance must be non-negative")
    if d_bar == 0.0:
        return np.full(values.size, 1.0 / values.size)
    return softmax(-c_D * values / d_bar)


def fuzzy_spin(system, query):
    if not system.replicas:
        raise ReplicaError("empty replica system")
    n_red = system.N_red
    if n_red < 0:
        raise ReplicaError("N_red = %d: need at least %d stored replicas"
                           % (n_red, system.h_cl - system.h_op + 1))
    query = _coords(query)
    system.check_shape(query)

    contributing = system.replicas[:n_red + 1]
    distances = [hilbert_distance(r, query, system.p, system.h_op, system.d_X) for r in contributing]
    weights = boltzmann_weights(distances, system.c_D)
    spins = np.array([r.spin for r in contributing], dtype=float)
    return float(np.clip(np.dot(weights, spins), -1.0, 1.0))


def _check_replica(system, fresh):
    if not isinstance(fresh, Replica):
        raise ReplicaError("expected a Replica, got %r" % type(fresh).__name__)
    system.check_shape(fresh.coords)


def append_replica(system, fresh):
    """ Fill step: store `fresh` above the current top while below capacity. """
    _check_replica(system, fresh)
    if system.full:
        raise ReplicaError("store is full at %d replicas, shift instead" % system.capacity)
    system.replicas.append(fresh)
    return system


def shift_replicas(system, fresh):
    """
    Move every replica of a full store one slot down (slot n takes the
    content of slot n + 1), drop the old slot 0 and store `fresh` at the top.
    The store size never changes.
    """
    _check_replica(system, fresh)
    if not system.full:
        raise ReplicaError("shift needs a full store, %d of %d slots used" % (len(system), system.capacity))
    del system.replicas[0]
    system.replicas.append(fresh)
    return system


def store_replica(system, fresh):
    """ Append while the store fills up, shift once it is full. """
    if system.full:
        return shift_replicas(system, fresh)
    return append_replica(system, fresh)


def replica_coords(bids, asks, q=DEFAULT_Q):
    """
    Coordinates for d_X = 1 from the X map of the bid and ask windows, each
    of length h_op + 1.
    """
    try:
        x_bid = two_endpoint_maps(bids, len(bids) - 1, q)[1]
        x_ask = two_endpoint_maps(asks, len(asks) - 1, q)[1]
    except StringError as e:
        raise ReplicaError("cannot build replica coordinates: %s" % e)
    return np.vstack([x_bid, x_ask])


def spin_histograms(trades, bin_width=DEFAULT_INTERVAL_BIN):
    """
    `trades` yields (interval, spin) pairs, interval = h_cl - h_op in ticks.
    Returns (h_S_plus, h_S_minus), each bin_lower -> value with the class
    peak at 1.0. A class without trades comes back empty.
    """
    plus = Histogram(bin_width)
    minus = Histogram(bin_width)
    for interval, spin in trades:
        if spin == 1:
            plus.sample(interval)
        elif spin == -1:
            minus.sample(interval)
        else:
            raise ReplicaError("spin must be -1 or +1, got %r" % (spin,))
    return plus.max_normalized(), minus.max_normalized()


def trade_spins(closed):
    """ (holding ticks, spin) for closed positions; spin from realized PnL. """
    return [(p.holding_ticks, 1 if p.realized_pnl > 0 else -1) for p in closed]


def merge_spin_histograms(h_plus, h_minus):
    """ Rows (interval_bin, h_S_plus, h_S_minus) over the union of bins. """
    rows = OrderedDict()
    for lower in sorted(set(h_plus) | set(h_minus)):
        rows[lower] = (h_plus.get(lower, 0.0), h_minus.get(lower, 0.0))
    return [(lower, plus, minus) for lower, (plus, minus) in rows.items()]


class ReplicaTracker(object):
    """
    Streams a tick series through a ReplicaSystem. Every `stride` ticks, once
    tick t reaches h_cl, the window opened at tau = t - h_cl is turned into a
    replica: its fuzzy spin is predicted against the store (when N_red >= 0),
    its realized spin is read off bid(tau + h_cl) and ask(tau + h_op), then it
    is shifted in. Predictions are reporting only.
    """

    def __init__(self, system, q=DEFAULT_Q, stride=DEFAULT_STRIDE):
        if system.d_X != 1:
            raise ReplicaError("tick coordinates are built for d_X = 1, got %d" % system.d_X)
        if stride < 1:
            raise ReplicaError("stride must be at least 1")
        self.system = system
        self.q = float(q)
        self.stride = int(stride)
        self.predictions = []

    def observe(self, t, bids, asks):
        system = self.system
        if t < system.h_cl or (t - system.h_cl) % self.stride:
            return None
        tau = t - system.h_cl
        coords = replica_coords(bids[tau:tau + system.h_op + 1], asks[tau:tau + system.h_op + 1], self.q)
        spin = spin_from_trade(bids[tau + system.h_cl], asks[tau + system.h_op])
        predicted = fuzzy_spin(system, coords) if system.replicas and system.N_red >= 0 else None
        store_replica(system, Replica(coords, spin))
        prediction = SpinPrediction(tau, predicted, spin)
        self.predictions.append(prediction)
        return prediction

    def run(self, stream):
        bids = stream.bids()
        asks = stream.asks()
        for t in range(len(bids)):
            self.observe(t, bids, asks)
        scored = [p for p in self.predictions if p.fuzzy_spin is not None]
        log.info("Replica tracker: %d replicas built, %d predicted", len(self.predictions), len(scored))
        return self.predictions
