# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
String mathematics: window standardization, the regular-function family,
the string momentum, return volatility and the 2-end-point maps.

All functions are pure.
"""
# stdlib
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import itertools
import logging
import math

# 3p
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

log = logging.getLogger(__name__)

DEGENERATE_LEVEL = 0.5
RADICAND_TOLERANCE = 1e-12
# elements per block of windows; keeps the working buffers cache resident
SERIES_CHUNK_ELEMENTS = 1 << 16

# default self-learning grid
GRID_L_S = (800, 900, 1000, 1100)
GRID_Q = (1, 2, 4, 8, 16, 24, 32)
GRID_M = (0, 1, 2, 3)
GRID_PHASE = (0.0, 3.14)


class StringError(Exception):
    pass


class FuncKind(object):

    COS = 'cos'
    SIN = 'sin'
    SINH_NORM = 'sinh_norm'
    COSH_NORM = 'cosh_norm'

    ALL = (COS, SIN, SINH_NORM, COSH_NORM)


class StringParams(namedtuple('StringParams', ['l_s', 'm', 'Q', 'func', 'phase'])):
    __slots__ = ()

    def __new__(cls, l_s, m, Q, func=FuncKind.COS, phase=0.0):
        if int(l_s) != l_s or l_s < 1:
            raise StringError("l_s must be a positive integer, got %r" % (l_s,))
        if int(m) != m or m < 0:
            raise StringError("m must be a non-negative integer, got %r" % (m,))
        if not Q > 0:
            raise StringError("Q must be positive, got %r" % (Q,))
        if func not in FuncKind.ALL:
            raise StringError("unknown regular function %r" % (func,))
        return super(StringParams, cls).__new__(cls, int(l_s), int(m), float(Q), func, float(phase))

    def label(self):
        return "l_s=%d m=%d Q=%g func=%s phase=%g" % self


StandardizedWindow = namedtuple('StandardizedWindow', ['values', 'p_min', 'p_max', 'degenerate'])


class MomentumRecord(namedtuple('MomentumRecord', ['tau', 'params', 'value', 'usable'])):
    """ `usable` is False for degenerate windows, whose value is not a signal. """
    __slots__ = ()


def parameter_grid(l_s=GRID_L_S, Q=GRID_Q, m=GRID_M, func=(FuncKind.COS,), phase=GRID_PHASE):
    """ Cartesian product in l_s -> func -> Q -> m -> phase order. """
    return [
        StringParams(ls, mm, q, f, ph)
        for ls, f, q, mm, ph in itertools.product(l_s, func, Q, m, phase)
    ]


def _check_window(prices, l_s):
    values = np.asarray(prices, dtype=float)
    if values.ndim != 1 or len(values) != l_s + 1:
        raise StringError("window must hold l_s + 1 = %d prices, got %d" % (l_s + 1, len(values)))
    if np.any(values <= 0):
        raise StringError("window prices must be positive")
    return values


def standardize_window(prices, l_s=None):
    """
    Map a window onto [0, 1] by its own min and max. With `l_s` the window
    must hold exactly l_s + 1 positive prices.
    """
    if l_s is None:
        values = np.asarray(prices, dtype=float)
        if values.ndim != 1 or len(values) < 2:
            raise StringError("window must hold at least 2 prices")
        if np.any(values <= 0):
            raise StringError("window prices must be positive")
    else:
        values = _check_window(prices, l_s)
    p_min = float(values.min())
    p_max = float(values.max())
    if p_max == p_min:
        return StandardizedWindow(np.full(len(values), DEGENERATE_LEVEL), p_min, p_max, True)
    return StandardizedWindow((values - p_min) / (p_max - p_min), p_min, p_max, False)


def _phase_argument(params, h):
    return 2.0 * math.pi * params.m * np.asarray(h, dtype=float) / (params.l_s + 1) + params.phase


def regular_function_values(params):
    """ F_CS(h, l_s) for h = 0..l_s. """
    arg = _phase_argument(params, np.arange(params.l_s + 1))
    if params.func == FuncKind.COS:
        return 0.5 * (1.0 + np.cos(arg))
    if params.func == FuncKind.SIN:
        return 0.5 * (1.0 + np.sin(arg))

    arg_max = float(np.max(np.abs(arg)))
    if params.func == FuncKind.SINH_NORM:
        if arg_max == 0.0:
            return np.full(len(arg), 0.5)
        return 0.5 * (1.0 + np.sinh(arg) / math.sinh(arg_max))
    return 0.5 * (1.0 + np.cosh(arg) / math.cosh(arg_max))


def regular_function(params, h):
    if int(h) != h or not 0 <= h <= params.l_s:
        raise StringError("h=%r outside [0, %d]" % (h, params.l_s))
    return float(regular_function_values(params)[int(h)])


def _raise_power(values, Q, scratch=None):
    """ values ** Q in place. Integral Q goes by repeated squaring. """
    if not float(Q).is_integer():
        return np.power(values, Q, out=values)
    q = int(Q)
    if q == 1:
        return values
    if q == 2:
        return np.multiply(values, values, out=values)
    if scratch is None:
        scratch = np.empty_like(values)
    np.copyto(scratch, values)
    first = True
    while q:
        if q & 1:
            if first:
                np.copyto(values, scratch)
                first = False
            else:
                np.multiply(values, scratch, out=values)
        q >>= 1
        if q:
            np.multiply(scratch, scratch, out=scratch)
    return values


def _power_mean(deviation, Q, axis=None):
    powered = _raise_power(np.array(deviation, dtype=float), Q)
    return np.mean(powered, axis=axis) ** (1.0 / Q)


def string_momentum(prices, params, tau=0):
    values = _check_window(prices, params.l_s)
    window = standardize_window(values)
    if window.degenerate:
        return MomentumRecord(tau, params, float('nan'), False)
    deviation = np.abs(window.values - regular_function_values(params))
    value = float(_power_mean(deviation, params.Q))
    # power means of values in [0, 1] stay in [0, 1]; clip rounding only
    return MomentumRecord(tau, params, min(max(value, 0.0), 1.0), True)


def _fill_momenta(prices, width, members, start, stop, outputs):
    """
    Momenta of windows start..stop-1 for every (index, params, reference) in
    `members`, which all share `width`. The standardized block is computed
    once and reused across the members.
    """
    windows = sliding_window_view(prices, width)
    rows = max(1, SERIES_CHUNK_ELEMENTS // width)
    stand = np.empty((rows, width))
    work = np.empty((rows, width))
    scratch = np.empty((rows, width))
    with np.errstate(invalid='ignore', divide='ignore'):
        for lo in range(start, stop, rows):
            hi = min(lo + rows, stop)
            k = hi - lo
            block = windows[lo:hi]
            p_min = block.min(axis=1, keepdims=True)
            p_range = block.max(axis=1, keepdims=True) - p_min
            degenerate = p_range[:, 0] == 0
            np.subtract(block, p_min, out=stand[:k])
            np.divide(stand[:k], p_range, out=stand[:k])
            for index, params, reference in members:
                np.subtract(stand[:k], reference, out=work[:k])
                np.abs(work[:k], out=work[:k])
                _raise_power(work[:k], params.Q, scratch[:k])
                value = (work[:k].sum(axis=1) / width) ** (1.0 / params.Q)
                value[degenerate] = np.nan
                outputs[index][lo:hi] = value


def momentum_matrix(prices, param_sets, workers=1):
    """
    Momentum series for several parameter sets over one price series, in
    `param_sets` order. Sets sharing l_s share the standardized windows;
    blocks of windows are spread over `workers` threads.
    """
    prices = np.ascontiguousarray(prices, dtype=float)
    param_sets = list(param_sets)
    outputs = [np.empty(max(0, len(prices) - p.l_s)) for p in param_sets]

    references = {}
    groups = {}
    for index, params in enumerate(param_sets):
        if params not in references:
            references[params] = regular_function_values(params)
        groups.setdefault(params.l_s + 1, []).append((index, params, references[params]))

    units = []
    workers = max(1, int(workers))
    for width, members in sorted(groups.items()):
        count = len(prices) - width + 1
        if count <= 0:
            continue
        span = -(-count // workers)
        for start in range(0, count, span):
            units.append((width, members, start, min(start + span, count)))

    def fill(unit):
        width, members, start, stop = unit
        _fill_momenta(prices, width, members, start, stop, outputs)

    if workers > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            list(executor.map(fill, units))
    else:
        for unit in units:
            fill(unit)
    return [np.clip(out, 0.0, 1.0) for out in outputs]


def momentum_series(prices, params, reference=None):
    """
    M for every full window of `prices`: element k is the momentum of
    prices[k:k + l_s + 1]. Degenerate windows yield NaN.
    """
    prices = np.ascontiguousarray(prices, dtype=float)
    width = params.l_s + 1
    if len(prices) < width:
        return np.empty(0)
    if reference is None:
        reference = regular_function_values(params)
    out = np.empty(len(prices) - width + 1)
    _fill_momenta(prices, width, [(0, params, reference)], 0, len(out), [out])
    return np.clip(out, 0.0, 1.0)


def return_volatility(prices, l_s):
    if l_s < 2 or l_s % 2:
        raise StringError("l_s must be an even positive integer, got %r" % (l_s,))
    half = l_s // 2
    values = np.asarray(prices, dtype=float)
    if len(values) < half + 1:
        raise StringError("need %d prices, got %d" % (half + 1, len(values)))
    values = values[:half + 1]
    if np.any(values == 0):
        raise StringError("zero price in volatility window")

    returns = np.diff(values) / values[1:]
    r_1 = float(np.sum(returns))
    r_2 = float(np.sum(returns ** 2))
    radicand = r_2 - r_1 ** 2
    if radicand < -RADICAND_TOLERANCE:
        raise StringError("negative volatility radicand %g" % radicand)
    return math.sqrt(max(radicand, 0.0))


def two_endpoint_maps(prices, l_s, q):
    """
    Substitute 2-end-point map: P(h) = |(p(h)/p(0) - 1)(p(h)/p(l_s) - 1)|^q,
    X(h) = running mean of P over 0..h. P vanishes at both ends.
    """
    if not q > 0:
        raise StringError("q must be positive")
    values = _check_window(prices, l_s)

    P = np.abs((values / values[0] - 1.0) * (values / values[-1] - 1.0)) ** q
    P[0] = 0.0
    P[-1] = 0.0
    X = np.cumsum(P) / np.arange(1, len(P) + 1)
    return P, X
