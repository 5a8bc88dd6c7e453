#!/usr/bin/env python
# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

"""
    strand run --config <path> [--seed N] [--out DIR]
    strand sweep --config <path> --axis <name> --values v1,v2,...
    strand gen --model <kind> --n <count> --seed N --out <file>

Exit status: 0 success, 2 invalid configuration, 3 market data error,
4 numeric failure.
"""
# stdlib
import logging
import optparse
import sys

# project
from backtester import BacktestError
from benchmarks import BenchmarkError
from config import (
    ConfigError,
    DEFAULTS,
    PathNotFound,
    SWEEP_AXES,
    get_config,
    initialize_logging,
)
from evaluator import EvaluatorError
from market_data import MarketDataError, SyntheticModel, generate_synthetic, write_ticks
from predictor import PredictorError
from runner import run, sweep
from spin_replica import ReplicaError
from string_core import StringError
from utils.logger import log_exceptions

log = logging.getLogger('strand')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

COMMANDS = ['run', 'sweep', 'gen']

# EvaluatorError covers NoDefinedScore
NUMERIC_ERRORS = (StringError, EvaluatorError, PredictorError, FloatingPointError,
                  ReplicaError, BacktestError, BenchmarkError)


def get_parsed_args(argv=None):
    parser = optparse.OptionParser("%prog [run|sweep|gen] [options]")
    parser.add_option('-c', '--config', action='store', default=None, dest='config',
                      help='Path to the strand config file')
    parser.add_option('-s', '--seed', action='store', type='int', default=None, dest='seed',
                      help='Override [Main] seed')
    parser.add_option('-o', '--out', action='store', default=None, dest='out',
                      help='Output directory (run, sweep) or tick file (gen)')
    parser.add_option('-a', '--axis', action='store', default=None, dest='axis',
                      help='Sweep axis: %s' % ', '.join(SWEEP_AXES))
    parser.add_option('-V', '--values', action='store', default=None, dest='values',
                      help='Comma separated sweep values')
    parser.add_option('-m', '--model', action='store', default=SyntheticModel.RANDOM_WALK, dest='model',
                      help='Synthetic model for gen: %s' % ', '.join(SyntheticModel.ALL))
    parser.add_option('-n', '--n', action='store', type='int', default=None, dest='n',
                      help='Tick count for gen')
    return parser.parse_args(argv)


def _load_config(options):
    if options.config is None:
        raise ConfigError("--config is required")
    config = get_config(options.config)
    if options.seed is not None:
        config = config.replace('Main', 'seed', options.seed)
    return config


def _synthetic_params():
    defaults = DEFAULTS['synthetic']
    return dict((key, float(defaults[key]))
                for key in ('start', 'volatility', 'drift', 'amplitude', 'period', 'spread'))


def run_command(options):
    config = _load_config(options)
    run(config, options.out or config.output_dir)
    return EXIT_OK


def sweep_command(options):
    config = _load_config(options)
    if options.axis is None or options.values is None:
        raise ConfigError("sweep needs --axis and --values")
    sweep(config, options.axis, options.values, options.out or config.output_dir)
    return EXIT_OK


def gen_command(options):
    if options.n is None or options.out is None:
        raise ConfigError("gen needs --n and --out")
    stream = generate_synthetic(options.seed or 0, options.n, options.model, _synthetic_params())
    write_ticks(stream, options.out)
    log.info("Wrote %d %s ticks to %s", len(stream), options.model, options.out)
    return EXIT_OK


@log_exceptions(log)
def dispatch(command, options):
    if command == 'run':
        return run_command(options)
    if command == 'sweep':
        return sweep_command(options)
    return gen_command(options)


def main(argv=None):
    options, args = get_parsed_args(argv)
    if len(args) < 1:
        sys.stderr.write("Usage: %s %s\n" % (sys.argv[0], "|".join(COMMANDS)))
        return EXIT_CONFIG

    command = args[0]
    if command not in COMMANDS:
        sys.stderr.write("Unknown command: %s\n" % command)
        return EXIT_CONFIG

    initialize_logging('strand', options.config)

    try:
        return dispatch(command, options)
    except PathNotFound as e:
        sys.stderr.write("Config file not found: %s\n" % e)
        return EXIT_CONFIG
    except ConfigError as e:
        sys.stderr.write("Invalid configuration: %s\n" % e)
        return EXIT_CONFIG
    except (MarketDataError, IOError) as e:
        sys.stderr.write("Market data error: %s\n" % e)
        return EXIT_DATA
    except NUMERIC_ERRORS as e:
        sys.stderr.write("Numeric failure: %s: %s\n" % (type(e).__name__, e))
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
