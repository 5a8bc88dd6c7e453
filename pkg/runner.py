# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Run orchestration: data -> momenta -> signals -> evaluator -> backtester ->
report bundle, and sweeps of single runs along one axis.
"""
# stdlib
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging
import os

# 3p
import numpy as np

# project
from backtester import nav_series, nav_statistics, run_backtest
from benchmarks import make_benchmark
from config import ConfigError, Model, SWEEP_AXES
from emitter import emit_run, emit_sweep
from market_data import (
    generate_synthetic,
    load_ticks,
    spread_histogram,
    trades_per_day_histogram,
    with_spread,
)
from predictor import PMBCSModel
from spin_replica import (
    ReplicaSystem,
    ReplicaTracker,
    merge_spin_histograms,
    spin_histograms,
    trade_spins,
)
from string_core import FuncKind
from utils.timer import Timer

log = logging.getLogger(__name__)

RunResult = namedtuple('RunResult', [
    'model', 'stream', 'account', 'nav', 'stats', 'param_sets', 'scores',
    'spread_histogram', 'trades_per_day', 'momentum_incoming', 'momentum_outgoing',
    'spin_histogram', 'spin_predictions',
])

SweepRow = namedtuple('SweepRow', ['axis_value', 'stats'])


def load_stream(config):
    if config.ticks_file:
        path = config.ticks_file
        if not os.path.isabs(path) and config.path and not os.path.exists(path):
            # relative to the config file
            path = os.path.join(os.path.dirname(config.path), path)
        stream = load_ticks(path, instrument=config.instrument)
    else:
        stream = generate_synthetic(config.seed, config.synthetic_n, config.synthetic_model,
                                    config.synthetic_params, instrument=config.instrument)
    if config.spread is not None:
        stream = with_spread(stream, config.spread * config.pip_size)
    return stream


def make_strategy(config):
    if config.model not in Model.PMBCS:
        return make_benchmark(config.benchmark_config())
    return PMBCSModel(
        config.param_sets(),
        self_learning=(config.model == Model.PMBCS_SELFLEARNING),
        warmup=config.warmup,
        band=config.band,
        band_quantiles=config.band_quantiles,
        history_size=config.band_window,
        adaptive_band=config.adaptive_band,
        band_refresh=config.band_refresh,
        penalty=config.penalty,
        sigma_mode=config.sigma,
        evaluation_interval=config.evaluation_interval,
        max_hold=config.max_hold,
        ledger_window=config.ledger_window,
        min_sharpe=config.min_sharpe,
        max_skewness=config.max_skewness,
        momentum_bins=config.momentum_bins,
        workers=config.momentum_workers,
    )


def track_spins(config, stream):
    system = ReplicaSystem(config.h_op, config.h_cl, p=config.spin_p, c_D=config.c_D,
                           capacity=config.spin_capacity)
    return ReplicaTracker(system, q=config.spin_q, stride=config.spin_stride).run(stream)


def run(config, out_dir=None):
    """
    One backtest of `config`. Writes the report bundle to `out_dir` when
    given and returns the RunResult.
    """
    timer = Timer()
    stream = load_stream(config)
    strategy = make_strategy(config)
    strategy_config = config.strategy_config()
    log.info("Running %s over %d ticks of %s", config.model, len(stream), stream.instrument)

    with np.errstate(divide='raise', over='raise', invalid='raise'):
        account = run_backtest(stream, strategy, strategy_config)
        nav = nav_series(account)
        stats = nav_statistics(nav, strategy_config.reference_nav)

        spin_predictions = track_spins(config, stream) if config.spin_enabled else []
        h_plus, h_minus = spin_histograms(trade_spins(account.closed), config.spin_bin_width)

    if isinstance(strategy, PMBCSModel):
        param_sets, scores = strategy.param_sets, strategy.scores
        incoming, outgoing = strategy.incoming.masses(), strategy.outgoing.masses()
    else:
        param_sets, scores, incoming, outgoing = [], [], [], []

    result = RunResult(
        model=config.model,
        stream=stream,
        account=account,
        nav=nav,
        stats=stats,
        param_sets=param_sets,
        scores=scores,
        spread_histogram=spread_histogram(stream, config.spread_bin_width * config.pip_size),
        trades_per_day=trades_per_day_histogram(account.closed),
        momentum_incoming=incoming,
        momentum_outgoing=outgoing,
        spin_histogram=merge_spin_histograms(h_plus, h_minus),
        spin_predictions=spin_predictions,
    )
    log.info("%s finished in %.1fs (%.0f ticks/s): final NAV %.2f (%.4f%%)",
             config.model, timer.total(), timer.rate(len(stream)), stats.final_nav, stats.nav_pct)

    if out_dir is not None:
        emit_run(out_dir, result, config.echo())
    return result


def parse_axis_values(axis, values):
    """ Typed sweep values from a comma separated string or a sequence. """
    if axis not in SWEEP_AXES:
        raise ConfigError("unknown sweep axis %r, expected one of %s" % (axis, ', '.join(SWEEP_AXES)))
    if isinstance(values, str):
        values = [v.strip() for v in values.split(',') if v.strip()]
    if not values:
        raise ConfigError("no sweep values given")

    parsed = []
    for value in values:
        try:
            if axis in ('l_s', 'n_s'):
                typed = int(value)
                if typed < 1:
                    raise ValueError
            elif axis == 'func':
                typed = str(value)
                if typed not in FuncKind.ALL:
                    raise ValueError
            else:
                typed = float(value)
                if typed < 0 or (axis == 'Q' and typed == 0):
                    raise ValueError
        except ValueError:
            raise ConfigError("invalid %s sweep value %r" % (axis, value))
        parsed.append(typed)
    return parsed


def _point_dir(out_dir, axis, value):
    if out_dir is None:
        return None
    return os.path.join(out_dir, '%s_%s' % (axis, value))


def sweep(config, axis, values, out_dir=None):
    """
    One isolated run per axis value with the config's shared seed. Rows come
    back in value order whatever `workers` is.
    """
    values = parse_axis_values(axis, values)
    configs = [config.for_sweep(axis, value) for value in values]
    log.info("Sweeping %s over %d value(s) with %d worker(s)", axis, len(values), config.workers)

    def run_point(item):
        value, point_config = item
        return SweepRow(value, run(point_config, _point_dir(out_dir, axis, value)).stats)

    items = list(zip(values, configs))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            rows = list(executor.map(run_point, items))
    else:
        rows = [run_point(item) for item in items]

    if out_dir is not None:
        emit_sweep(out_dir, axis, rows, config.echo())
    return rows
