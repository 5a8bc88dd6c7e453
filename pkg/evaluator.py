# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Predictors Evaluator: Sharpe-ratio scoring of parameter sets and optimal set
selection.

The ratio follows the penalty form E(R - R_f) / sigma where, per closed
position i with per-tick PnL increments p_1..p_T,
    R = sum(p_j),  R_f = sum(p_j - j * P)
so R - R_f = P * T * (T + 1) / 2 and the p_j cancel. Scores therefore depend
on the ledger only through the holding lengths T.
"""
# stdlib
from collections import namedtuple
import logging
import math

# 3p
import numpy as np
from scipy import stats

log = logging.getLogger(__name__)

DEFAULT_PENALTY = 1e-5
DEFAULT_LEDGER_WINDOW = 1000


class EvaluatorError(Exception):
    pass


class NoDefinedScore(EvaluatorError):
    pass


class SigmaMode(object):

    STD = 'std'
    RETURN_VOLATILITY = 'return_volatility'

    ALL = (STD, RETURN_VOLATILITY)


class SharpeScore(namedtuple('SharpeScore', ['set_id', 'excess_mean', 'sigma', 'ratio', 'penalty', 'defined'])):
    """ `ratio` is None and `defined` False when sigma is zero. """
    __slots__ = ()


def undefined_score(set_id, penalty):
    return SharpeScore(set_id, 0.0, 0.0, None, penalty, False)


class ClosedTradeLedgerView(object):
    """
    Per closed position, the per-tick PnL increments over its lifetime.
    Scores only read the holding lengths, so a view can also be built from
    lengths alone.
    """

    def __init__(self, increments):
        self.increments = [np.asarray(p, dtype=float) for p in increments]
        self.lengths = np.array([len(p) for p in self.increments], dtype=int)
        if np.any(self.lengths < 1):
            raise EvaluatorError("closed position with no accepted trade results")

    @property
    def N(self):
        return len(self.lengths)

    @property
    def T(self):
        return self.lengths.tolist()

    @classmethod
    def from_lengths(cls, lengths):
        view = cls([])
        view.lengths = np.array(lengths, dtype=int)
        if np.any(view.lengths < 1):
            raise EvaluatorError("closed position with no accepted trade results")
        view.increments = None
        return view


def _excess_returns(ledger, penalty):
    if ledger.N == 0:
        raise EvaluatorError("empty ledger")
    if penalty < 0:
        raise EvaluatorError("penalty must be non-negative")
    T = ledger.lengths.astype(float)
    return penalty * T * (T + 1.0) / 2.0


def sharpe_ratio(ledger, penalty=DEFAULT_PENALTY, set_id=0):
    excess = _excess_returns(ledger, penalty)
    excess_mean = float(np.mean(excess))
    sigma = math.sqrt(float(np.mean(excess ** 2)))
    if sigma == 0.0:
        return SharpeScore(set_id, excess_mean, 0.0, None, penalty, False)
    return SharpeScore(set_id, excess_mean, sigma, excess_mean / sigma, penalty, True)


def volatility_sharpe(ledger, penalty, sigma_r, set_id=0):
    if sigma_r < 0:
        raise EvaluatorError("sigma_r must be non-negative")
    excess_mean = float(np.mean(_excess_returns(ledger, penalty)))
    if sigma_r == 0.0:
        return SharpeScore(set_id, excess_mean, 0.0, None, penalty, False)
    return SharpeScore(set_id, excess_mean, float(sigma_r), excess_mean / sigma_r, penalty, True)


def skewness(momenta):
    """ Population third standardized moment. """
    values = np.asarray(momenta, dtype=float)
    if len(values) < 3:
        raise EvaluatorError("skewness needs at least 3 values, got %d" % len(values))
    if np.ptp(values) == 0:
        raise EvaluatorError("skewness undefined for zero variance")
    return float(stats.skew(values, bias=True))


def select_optimal(scores):
    best = None
    for score in sorted(scores, key=lambda s: s.set_id):
        if not score.defined:
            continue
        if best is None or score.ratio > best.ratio:
            best = score
    if best is None:
        raise NoDefinedScore("no parameter set has a defined Sharpe ratio")
    return best.set_id


class ShadowLedger(object):
    """
    Virtual positions driven by one parameter set's own signal series and
    valued on mid-prices; the real account never sees them.

    A flat ledger opens on any nonzero signal. An open position closes on the
    opposing signal or once it is `max_hold` ticks old, and a signal on the
    closing tick opens the next position. The whole series is replayed up
    front; `view(tau)` then exposes the last `window` positions closed by tick
    tau.
    """

    def __init__(self, signals, max_hold, window=DEFAULT_LEDGER_WINDOW):
        if max_hold < 1:
            raise EvaluatorError("max_hold must be at least 1 tick")
        signals = np.asarray(signals)
        self.max_hold = int(max_hold)
        self.window = int(window)

        opens, closes, sides = [], [], []
        side = 0
        open_tau = 0
        events = np.flatnonzero(signals)
        for tau, signal in zip(events.tolist(), signals[events].tolist()):
            if side:
                expiry = open_tau + self.max_hold
                if expiry < tau or signal == -side or expiry == tau:
                    opens.append(open_tau)
                    closes.append(min(expiry, tau))
                    sides.append(side)
                    side = 0
            if not side:
                side = 1 if signal > 0 else -1
                open_tau = tau
        if side and open_tau + self.max_hold < len(signals):
            opens.append(open_tau)
            closes.append(open_tau + self.max_hold)
            sides.append(side)
            side = 0

        self.open_taus = np.array(opens, dtype=int)
        self.close_taus = np.array(closes, dtype=int)
        self.sides = np.array(sides, dtype=int)
        self.final_side = side
        self.final_open_tau = open_tau if side else None

    def total_closed(self, tau):
        return int(np.searchsorted(self.close_taus, tau, side='right'))

    def is_open(self, tau):
        closed = self.total_closed(tau)
        if closed < len(self.open_taus):
            # the next recorded position may already be open at tau
            return self.open_taus[closed] <= tau
        return self.final_open_tau is not None and self.final_open_tau <= tau

    def view(self, tau):
        end = self.total_closed(tau)
        start = max(0, end - self.window)
        return ClosedTradeLedgerView.from_lengths(self.close_taus[start:end] - self.open_taus[start:end])

