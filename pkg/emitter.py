# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
Report bundle writer: flat CSV files plus a JSON manifest carrying the config
echo, library versions and an md5 checksum per report file.

Nothing time-dependent is written, so the same config and seed give a
byte-identical bundle.
"""
# stdlib
from collections import OrderedDict
import csv
from hashlib import md5
import logging
import os
import platform

# 3p
import numpy
import scipy
import simplejson as json

# project
from config import get_version
from market_data import format_timestamp
from util import format_value

log = logging.getLogger(__name__)

MANIFEST_FILE = 'manifest.json'

NAV_HEADER = ['tau', 'timestamp', 'nav']
EXECUTIONS_HEADER = ['tau', 'timestamp', 'event', 'side', 'units', 'price', 'pnl', 'set_id']
SCORES_HEADER = ['set_id', 'l_s', 'm', 'Q', 'func', 'phase', 'excess_mean', 'sigma', 'ratio']
SPREAD_HEADER = ['bin_lower', 'count']
TRADES_PER_DAY_HEADER = ['day', 'count']
MOMENTUM_HEADER = ['bin_lower', 'mass']
SPIN_HISTOGRAM_HEADER = ['interval_bin', 'h_S_plus', 'h_S_minus']
SPIN_PREDICTIONS_HEADER = ['tau', 'fuzzy_spin', 'spin']
SWEEP_HEADER = ['axis_value', 'final_nav', 'nav_pct', 'mean', 'sigma']


def _cell(value):
    if hasattr(value, 'strftime'):
        return format_timestamp(value)
    return format_value(value)


def write_csv(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    log.debug("Wrote %d row(s) to %s", count, path)
    return path


def md5sum(path):
    digest = md5()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def library_versions():
    return OrderedDict([
        ('strand', get_version()),
        ('python', platform.python_version()),
        ('numpy', numpy.__version__),
        ('scipy', scipy.__version__),
        ('simplejson', json.__version__),
    ])


class ReportBundle(object):
    """
    One output directory. Each `write` records the file; `close` writes the
    manifest with the checksums of everything written.
    """

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = OrderedDict()
        if not os.path.isdir(out_dir):
            os.makedirs(out_dir)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def write(self, name, header, rows):
        write_csv(self.path(name), header, rows)
        self.files[name] = md5sum(self.path(name))
        return self.path(name)

    def close(self, config_echo, summary=None):
        manifest = OrderedDict([
            ('versions', library_versions()),
            ('config', config_echo),
            ('summary', summary or OrderedDict()),
            ('files', OrderedDict((name, OrderedDict([('md5', digest)]))
                                  for name, digest in sorted(self.files.items()))),
        ])
        with open(self.path(MANIFEST_FILE), 'w', encoding='utf-8') as f:
            f.write(json.dumps(manifest, indent=2))
            f.write('\n')
        log.info("Report bundle written to %s (%d file(s))", self.out_dir, len(self.files) + 1)
        return self.path(MANIFEST_FILE)


def nav_rows(series):
    return ((p.tau, p.timestamp, p.nav) for p in series)


def execution_rows(reports):
    return ((r.tau, r.timestamp, r.event, r.side, r.units, r.price, r.pnl, r.set_id) for r in reports)


def score_rows(param_sets, scores):
    for params, score in zip(param_sets, scores):
        yield (score.set_id, params.l_s, params.m, params.Q, params.func, params.phase,
               score.excess_mean, score.sigma, score.ratio)


def prediction_rows(predictions):
    return ((p.tau, p.fuzzy_spin, p.spin) for p in predictions)


def sweep_rows(rows):
    return ((r.axis_value, r.stats.final_nav, r.stats.nav_pct, r.stats.mean, r.stats.sigma) for r in rows)


def emit_run(out_dir, result, config_echo):
    """ Write the full report bundle of one run; returns the ReportBundle. """
    bundle = ReportBundle(out_dir)
    bundle.write('nav.csv', NAV_HEADER, nav_rows(result.nav))
    bundle.write('executions.csv', EXECUTIONS_HEADER, execution_rows(result.account.reports))
    bundle.write('scores.csv', SCORES_HEADER, score_rows(result.param_sets, result.scores))
    bundle.write('spread_histogram.csv', SPREAD_HEADER, result.spread_histogram.items())
    bundle.write('trades_per_day.csv', TRADES_PER_DAY_HEADER, result.trades_per_day.items())
    bundle.write('momentum_incoming.csv', MOMENTUM_HEADER, result.momentum_incoming)
    bundle.write('momentum_outgoing.csv', MOMENTUM_HEADER, result.momentum_outgoing)
    bundle.write('spin_histogram.csv', SPIN_HISTOGRAM_HEADER, result.spin_histogram)
    bundle.write('spin_predictions.csv', SPIN_PREDICTIONS_HEADER, prediction_rows(result.spin_predictions))

    stats = result.stats
    summary = OrderedDict([
        ('model', result.model),
        ('ticks', len(result.nav)),
        ('n_s', len(result.param_sets)),
        ('positions_closed', len(result.account.closed)),
        ('positions_open', len(result.account.open_positions)),
        ('final_nav', stats.final_nav),
        ('nav_pct', stats.nav_pct),
        ('mean', stats.mean),
        ('sigma', stats.sigma),
    ])
    bundle.close(config_echo, summary)
    return bundle


def emit_sweep(out_dir, axis, rows, config_echo):
    bundle = ReportBundle(out_dir)
    bundle.write('sweep.csv', SWEEP_HEADER, sweep_rows(rows))
    bundle.close(config_echo, OrderedDict([('axis', axis), ('points', len(rows))]))
    return bundle
