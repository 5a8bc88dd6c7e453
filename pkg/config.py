# (C) strand authors 2026
# All rights reserved
# Licensed under Simplified BSD License (see LICENSE)

# stdlib
from collections import OrderedDict
import configparser
import copy
from io import StringIO
import logging
import logging.handlers
import os
import sys
import traceback

# project
from backtester import BacktestError, StrategyConfig
from benchmarks import BenchmarkConfig, BenchmarkError, BenchmarkKind
from evaluator import SigmaMode
from market_data import SyntheticModel
from string_core import FuncKind, StringError, parameter_grid


# CONSTANTS
STRAND_VERSION = "1.0.0"
STRAND_CONF = "strand.conf"
LOGGING_MAX_BYTES = 10 * 1024 * 1024
DEFAULT_PIP = 0.0001


class Model(object):

    PMBCS_SIMPLE = 'pmbcs_simple'
    PMBCS_SELFLEARNING = 'pmbcs_selflearning'

    PMBCS = (PMBCS_SIMPLE, PMBCS_SELFLEARNING)
    ALL = PMBCS + BenchmarkKind.ALL


SWEEP_AXES = ('l_s', 'Q', 'func', 'spread', 'n_s')

# Option defaults per section. List-valued options are comma separated.
DEFAULTS = OrderedDict([
    ('Main', OrderedDict([
        ('model', Model.PMBCS_SELFLEARNING),
        ('instrument', 'EUR/USD'),
        ('ticks_file', ''),
        ('seed', '0'),
        ('output_dir', 'reports'),
        ('log_level', 'INFO'),
        ('log_file', ''),
        ('pip_size', str(DEFAULT_PIP)),
    ])),
    ('synthetic', OrderedDict([
        ('model', SyntheticModel.RANDOM_WALK),
        ('n', '20000'),
        ('start', '1.3'),
        ('volatility', '0.00005'),
        ('drift', '0.0'),
        ('amplitude', '0.002'),
        ('period', '2000'),
        ('spread', '0.0002'),
    ])),
    ('strings', OrderedDict([
        ('l_s', '900'),
        ('Q', '8, 16, 24, 32'),
        ('m', '0, 1, 2, 3'),
        ('func', FuncKind.COS),
        ('phase', '0, 3.14'),
        ('n_s', ''),
        ('warmup', '500'),
        ('band', '0.3, 0.4'),
        ('band_quantiles', '0.3, 0.4'),
        ('band_window', '5000'),
        ('adaptive_band', 'yes'),
        ('band_refresh', '100'),
        ('workers', '4'),
    ])),
    ('strategy', OrderedDict([
        ('altitude', '0.25'),
        ('units', '1000'),
        ('max_open', '10'),
        ('max_opens_per_hour', '10'),
        ('max_hold', ''),
        ('penalty', '1e-5'),
        ('sigma', SigmaMode.STD),
        ('evaluation_interval', '1000'),
        ('ledger_window', '1000'),
        ('min_sharpe', ''),
        ('max_skewness', ''),
        ('spread', ''),
    ])),
    ('benchmarks', OrderedDict([
        ('arima_c', '0.0'),
        ('arima_window', '1000'),
        ('dead_band', '0.0'),
        ('macd_fast', '12'),
        ('macd_slow', '26'),
        ('macd_signal', '9'),
        ('tick_factor', '1'),
        ('take_profit', '5'),
        ('stop_loss', '5'),
        ('max_hold', '1000'),
    ])),
    ('spin', OrderedDict([
        ('enabled', 'no'),
        ('h_op', '50'),
        ('h_cl', '100'),
        ('capacity', '256'),
        ('p', '1'),
        ('c_D', '1.0'),
        ('q', '1'),
        ('stride', '10'),
    ])),
    ('reports', OrderedDict([
        ('spread_bin_width', '0.5'),
        ('momentum_bins', '20'),
        ('spin_bin_width', '1'),
    ])),
    ('sweep', OrderedDict([
        ('workers', '1'),
    ])),
])

LOG_LEVELS = {
    'CRITICAL': logging.CRITICAL,
    'DEBUG': logging.DEBUG,
    'ERROR': logging.ERROR,
    'FATAL': logging.FATAL,
    'INFO': logging.INFO,
    'WARN': logging.WARN,
    'WARNING': logging.WARNING,
}

log = logging.getLogger(__name__)


class PathNotFound(Exception):
    pass


class ConfigError(Exception):
    pass


def get_version():
    return STRAND_VERSION


def skip_leading_wsp(f):
    "Works on a file, returns a file-like object"
    return StringIO("\n".join(line.strip() for line in f.readlines()))


def _is_affirmative(s):
    if s is None:
        return False
    # int or real bool
    if isinstance(s, int):
        return bool(s)
    # try string cast
    return s.strip().lower() in ('yes', 'true', '1')


def _parse_list(configstr, name, cast, valid=None):
    """
    Comma separated values; entries that fail `cast` or `valid` are logged
    and skipped. An option left with no usable entry is an error.
    """
    result = []
    for val in configstr.split(','):
        val = val.strip()
        if not val:
            continue
        try:
            value = cast(val)
            if valid is not None and not valid(value):
                raise ValueError
        except ValueError:
            log.warning("Bad %s value %s, skipping", name, val)
            continue
        result.append(value)
    if not result:
        raise ConfigError("%s: no valid value in %r" % (name, configstr))
    return result


def get_int_list(configstr, name, minimum=None):
    return _parse_list(configstr, name, int, None if minimum is None else lambda v: v >= minimum)


def get_float_list(configstr, name, positive=False):
    return _parse_list(configstr, name, float, (lambda v: v > 0) if positive else None)


def get_choice_list(configstr, name, choices):
    return _parse_list(configstr, name, str, lambda v: v in choices)


def get_band(configstr, name):
    band = get_float_list(configstr, name)
    if len(band) != 2 or not 0.0 <= band[0] < band[1] <= 1.0:
        raise ConfigError("%s must be two values lo, hi with 0 <= lo < hi <= 1, got %r" % (name, configstr))
    return tuple(band)


class RunConfig(object):
    """
    Typed view over the INI sections. Sections mirror the option groups of
    the string parameter grids and the fixed trade-strategy parameters.
    """

    def __init__(self, raw, path=None):
        self.path = path
        self.raw = raw
        try:
            self._load(raw)
        except (ValueError, TypeError) as e:
            raise ConfigError("invalid value: %s" % e)
        self.validate()

    def _load(self, raw):
        main = raw['Main']
        self.model = main['model'].strip()
        self.instrument = main['instrument'].strip()
        self.ticks_file = main['ticks_file'].strip() or None
        self.seed = int(main['seed'])
        self.output_dir = main['output_dir'].strip()
        self.log_level = main['log_level'].strip().upper()
        self.log_file = main['log_file'].strip() or None
        self.pip_size = float(main['pip_size'])

        synthetic = raw['synthetic']
        self.synthetic_model = synthetic['model'].strip()
        self.synthetic_n = int(synthetic['n'])
        self.synthetic_params = OrderedDict(
            (key, float(synthetic[key])) for key in ('start', 'volatility', 'drift', 'amplitude', 'period', 'spread')
        )

        strings = raw['strings']
        self.l_s = get_int_list(strings['l_s'], 'l_s', minimum=2)
        self.Q = get_float_list(strings['Q'], 'Q', positive=True)
        self.m = get_int_list(strings['m'], 'm', minimum=0)
        self.func = get_choice_list(strings['func'], 'func', FuncKind.ALL)
        self.phase = get_float_list(strings['phase'], 'phase')
        self.n_s = int(strings['n_s']) if strings['n_s'].strip() else None
        self.warmup = int(strings['warmup'])
        self.band = get_band(strings['band'], 'band')
        self.band_quantiles = get_band(strings['band_quantiles'], 'band_quantiles')
        self.band_window = int(strings['band_window'])
        self.adaptive_band = _is_affirmative(strings['adaptive_band'])
        self.band_refresh = int(strings['band_refresh'])
        self.momentum_workers = int(strings['workers'])

        strategy = raw['strategy']
        self.altitude = float(strategy['altitude'])
        self.units = int(strategy['units'])
        self.max_open = int(strategy['max_open'])
        self.max_opens_per_hour = int(strategy['max_opens_per_hour'])
        self.max_hold = int(strategy['max_hold']) if strategy['max_hold'].strip() else None
        self.penalty = float(strategy['penalty'])
        self.sigma = strategy['sigma'].strip()
        self.evaluation_interval = int(strategy['evaluation_interval'])
        self.ledger_window = int(strategy['ledger_window'])
        self.min_sharpe = float(strategy['min_sharpe']) if strategy['min_sharpe'].strip() else None
        self.max_skewness = float(strategy['max_skewness']) if strategy['max_skewness'].strip() else None
        # pips, applied around the mids of the loaded stream
        self.spread = float(strategy['spread']) if strategy['spread'].strip() else None

        benchmarks = raw['benchmarks']
        self.arima_c = float(benchmarks['arima_c'])
        self.arima_window = int(benchmarks['arima_window'])
        self.dead_band = float(benchmarks['dead_band'])
        self.macd_periods = (int(benchmarks['macd_fast']), int(benchmarks['macd_slow']),
                             int(benchmarks['macd_signal']))
        self.tick_factor = int(benchmarks['tick_factor'])
        self.take_profit = float(benchmarks['take_profit'])
        self.stop_loss = float(benchmarks['stop_loss'])
        self.benchmark_max_hold = int(benchmarks['max_hold'])

        spin = raw['spin']
        self.spin_enabled = _is_affirmative(spin['enabled'])
        self.h_op = int(spin['h_op'])
        self.h_cl = int(spin['h_cl'])
        self.spin_capacity = int(spin['capacity'])
        self.spin_p = float(spin['p'])
        self.c_D = float(spin['c_D'])
        self.spin_q = float(spin['q'])
        self.spin_stride = int(spin['stride'])

        reports = raw['reports']
        self.spread_bin_width = float(reports['spread_bin_width'])
        self.momentum_bins = int(reports['momentum_bins'])
        self.spin_bin_width = int(reports['spin_bin_width'])

        self.workers = int(raw['sweep']['workers'])

    def validate(self):
        if self.model not in Model.ALL:
            raise ConfigError("unknown model %r, expected one of %s" % (self.model, ', '.join(Model.ALL)))
        if self.synthetic_model not in SyntheticModel.ALL:
            raise ConfigError("unknown synthetic model %r" % self.synthetic_model)
        if self.sigma not in SigmaMode.ALL:
            raise ConfigError("sigma must be one of %s" % ', '.join(SigmaMode.ALL))
        if self.log_level not in LOG_LEVELS:
            raise ConfigError("unknown log_level %r" % self.log_level)
        if self.pip_size <= 0:
            raise ConfigError("pip_size must be positive")
        if self.synthetic_n < 1:
            raise ConfigError("synthetic n must be at least 1")
        if self.warmup < 1 or self.band_window < 1 or self.band_refresh < 1:
            raise ConfigError("warmup, band_window and band_refresh must be at least 1")
        if self.evaluation_interval < 1 or self.ledger_window < 1:
            raise ConfigError("evaluation_interval and ledger_window must be at least 1")
        if self.penalty < 0:
            raise ConfigError("penalty must be non-negative")
        if self.spread is not None and self.spread < 0:
            raise ConfigError("spread must be non-negative")
        if self.momentum_bins < 1 or self.spread_bin_width <= 0 or self.spin_bin_width < 1:
            raise ConfigError("report bin settings must be positive")
        if self.workers < 1 or self.momentum_workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.spin_enabled and not 1 <= self.h_op < self.h_cl:
            raise ConfigError("spin needs 1 <= h_op < h_cl")

        if self.model in Model.PMBCS:
            n_sets = len(self.param_sets())
            if self.model == Model.PMBCS_SIMPLE and n_sets != 1:
                raise ConfigError("pmbcs_simple takes exactly one string parameter combination, got %d" % n_sets)
            if self.n_s is not None and not 1 <= self.n_s <= len(self.grid()):
                raise ConfigError("n_s must lie in [1, %d]" % len(self.grid()))
        # constructed once so bad caps surface as configuration errors
        self.strategy_config()
        if self.model in BenchmarkKind.ALL:
            self.benchmark_config()

    def grid(self):
        try:
            return parameter_grid(self.l_s, self.Q, self.m, self.func, self.phase)
        except StringError as e:
            raise ConfigError(str(e))

    def param_sets(self):
        grid = self.grid()
        return grid if self.n_s is None else grid[:self.n_s]

    def strategy_config(self):
        max_hold = self.max_hold
        if max_hold is None and self.model in Model.PMBCS:
            max_hold = 2 * max(p.l_s for p in self.param_sets())
        try:
            return StrategyConfig(altitude=self.altitude, units=self.units, max_open=self.max_open,
                                  max_opens_per_window=self.max_opens_per_hour, max_hold=max_hold)
        except BacktestError as e:
            raise ConfigError(str(e))

    def benchmark_config(self):
        fast, slow, signal = self.macd_periods
        try:
            return BenchmarkConfig(self.model, c=self.arima_c, window=self.arima_window,
                                   dead_band=self.dead_band, fast=fast, slow=slow, signal=signal,
                                   tick_factor=self.tick_factor,
                                   take_profit=self.take_profit * self.pip_size,
                                   stop_loss=self.stop_loss * self.pip_size,
                                   max_hold=self.benchmark_max_hold)
        except BenchmarkError as e:
            raise ConfigError(str(e))

    def replace(self, section, option, value):
        """ Copy of this config with one raw option overridden. """
        raw = copy.deepcopy(self.raw)
        if section not in raw or option not in raw[section]:
            raise ConfigError("unknown option [%s] %s" % (section, option))
        raw[section][option] = str(value)
        return RunConfig(raw, self.path)

    def for_sweep(self, axis, value):
        if axis not in SWEEP_AXES:
            raise ConfigError("unknown sweep axis %r, expected one of %s" % (axis, ', '.join(SWEEP_AXES)))
        section = 'strategy' if axis == 'spread' else 'strings'
        return self.replace(section, axis, value)

    def echo(self):
        """ Effective options, section by section, for the run manifest. """
        return OrderedDict(
            (section, OrderedDict(options)) for section, options in self.raw.items()
        )


def _read_raw(config):
    raw = copy.deepcopy(DEFAULTS)
    for section in config.sections():
        if section not in raw:
            log.warning("Ignoring unknown config section [%s]", section)
            continue
        for option in config.options(section):
            if option not in raw[section]:
                log.warning("Ignoring unknown option %s in [%s]", option, section)
                continue
            raw[section][option] = config.get(section, option)
    return raw


def _new_parser():
    config = configparser.ConfigParser(interpolation=None)
    # option names are case sensitive (Q, c_D)
    config.optionxform = str
    return config


def get_config(cfg_path=None):
    if cfg_path is None:
        cfg_path = STRAND_CONF
    if not os.path.exists(cfg_path):
        raise PathNotFound(cfg_path)

    config = _new_parser()
    try:
        with open(cfg_path) as f:
            config.read_file(skip_leading_wsp(f))
    except configparser.Error as e:
        raise ConfigError("cannot parse %s: %s" % (cfg_path, e))
    if not config.has_section('Main'):
        raise ConfigError("%s has no [Main] section" % cfg_path)

    return RunConfig(_read_raw(config), cfg_path)


def default_config():
    return RunConfig(copy.deepcopy(DEFAULTS))


def get_log_date_format():
    return "%Y-%m-%d %H:%M:%S %Z"


def get_log_format(logger_name):
    return '%%(asctime)s | %%(levelname)s | strand.%s | %%(name)s(%%(filename)s:%%(lineno)s) | %%(message)s' % logger_name


def get_logging_config(cfg_path=None):
    logging_config = {
        'log_level': None,
        'log_file': None,
    }
    if cfg_path is None or not os.path.exists(cfg_path):
        return logging_config

    config = _new_parser()
    with open(cfg_path) as f:
        config.read_file(skip_leading_wsp(f))

    if config.has_option('Main', 'log_level'):
        logging_config['log_level'] = LOG_LEVELS.get(config.get('Main', 'log_level').strip().upper())
    if config.has_option('Main', 'log_file'):
        logging_config['log_file'] = config.get('Main', 'log_file').strip() or None
    return logging_config


def initialize_logging(logger_name, cfg_path=None):
    try:
        logging_config = get_logging_config(cfg_path)

        logging.basicConfig(
            format=get_log_format(logger_name),
            level=logging_config['log_level'] or logging.INFO,
        )

        log_file = logging_config['log_file']
        if log_file is not None:
            # the entire directory needs to be writable so that rotation works
            log_dir = os.path.dirname(os.path.abspath(log_file))
            if os.access(log_dir, os.R_OK | os.W_OK):
                file_handler = logging.handlers.RotatingFileHandler(log_file, maxBytes=LOGGING_MAX_BYTES, backupCount=1)
                formatter = logging.Formatter(get_log_format(logger_name), get_log_date_format())
                file_handler.setFormatter(formatter)

                root_log = logging.getLogger()
                root_log.addHandler(file_handler)
            else:
                sys.stderr.write("Log file is unwritable: '%s'\n" % log_file)

    except Exception as e:
        sys.stderr.write("Couldn't initialize logging: %s\n" % str(e))
        traceback.print_exc()

        # if config fails entirely, enable basic stderr logging as a fallback
        logging.basicConfig(
            format=get_log_format(logger_name),
            level=logging.INFO,
        )

    # re-get the log after logging is initialized
    global log
    log = logging.getLogger(__name__)
