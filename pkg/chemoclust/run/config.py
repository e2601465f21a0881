# -*- coding: utf-8 -*-

"""Run configuration read from ``key = value`` text files.

Lines starting with ``#`` and trailing ``# ...`` parts are comments. Keys
missing from the file take the defaults below, which reproduce the
aggregation experiment with ``chi = alpha = 1``.
"""

import collections
import logging

from chemoclust.model import ModelParams
from chemoclust.scl import ResponseSpec
from chemoclust.stepper import StepConfig


logger = logging.getLogger(__name__)


modes = ('simulate', 'poincare', 'scl', 'rates')

named_initial_conditions = ('equilibrium', 'shifted', 'two_peaks',
                            'even_perturbation', 'odd_perturbation')

responses = {'stiff_sign': 'stiff', 'smooth_tanh': 'tanh'}


class ConfigError(ValueError):

    def __init__(self, msg, lineno=None):
        if lineno is not None:
            msg = 'line %i: %s' % (lineno, msg)
        super(ConfigError, self).__init__(msg)
        self.lineno = lineno


def _positive(convert):
    def parse(text):
        value = convert(text)
        if not value > 0:
            raise ValueError('has to be positive')
        return value
    return parse


def _non_negative(text):
    value = float(text)
    if not value >= 0:
        raise ValueError('has to be non-negative')
    return value


def _optional(convert):
    def parse(text):
        return None if text == '' else convert(text)
    return parse


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError('expected one of %s' % ', '.join(options))
        return text
    return parse


def _floats(text):
    values = tuple(float(i) for i in text.split(',') if i.strip())
    if not values or not all(v > 0 for v in values):
        raise ValueError('expected a comma separated list of positive numbers')
    return values


def _window(text):
    if text == '':
        return None
    lo, hi = (float(i) for i in text.split(','))
    if not 0 <= lo < hi:
        raise ValueError('expected "lo, hi" with 0 <= lo < hi')
    return lo, hi


def _initial_condition(text):
    if text in named_initial_conditions or text.endswith('.csv'):
        return text
    raise ValueError('expected one of %s or a .csv path'
                     % ', '.join(named_initial_conditions))


# Every key with its parser and its default.
fields = collections.OrderedDict([
    ('mode', (_choice(modes), None)),
    ('chi', (_positive(float), 1.)),
    ('alpha', (_non_negative, 1.)),
    ('mass', (_optional(_positive(float)), None)),
    ('n', (_positive(int), 400)),
    ('dt', (_positive(float), 1e-2)),
    ('t_final', (_positive(float), 10.)),
    ('sample_every', (_positive(int), 10)),
    ('kernel', (_choice(('direct', 'prefix')), 'direct')),
    ('y_radius', (_positive(float), 40.)),
    ('y_step', (_positive(float), 1e-2)),
    ('frame_interpolation', (_choice(('spline', 'linear')), 'spline')),
    ('frame_tails', (_choice(('flat', 'empty')), 'flat')),
    ('field_radius', (_positive(float), 10.)),
    ('field_step', (_positive(float), .1)),
    ('initial_condition', (_initial_condition, 'equilibrium')),
    ('shift', (float, .5)),
    ('amplitude', (_non_negative, .04)),
    ('scl_L', (_positive(float), 20.)),
    ('scl_dx', (_positive(float), .02)),
    ('scl_dt', (_positive(float), .01)),
    ('scl_t_final', (_positive(float), 50.)),
    ('response', (_choice(tuple(responses)), 'smooth_tanh')),
    ('tanh_k', (_positive(float), 10.)),
    ('v_max', (_positive(float), 2.)),
    ('n_functions', (_positive(int), 200)),
    ('lambdas', (_floats, (1., 1.5, 3., 10.))),
    ('seed', (int, 42)),
    ('rate_window', (_window, None)),
    ('archive', (str, '')),
    ('output_dir', (str, '.')),
])


RunConfig = collections.namedtuple('RunConfig', list(fields))


def defaults(mode=None):
    """Return the default configuration for ``mode``."""
    values = dict((k, v[1]) for k, v in fields.items())
    values['mode'] = mode
    return RunConfig(**values)


def parse_config(text, mode=None):
    """Parse configuration text into a ``RunConfig``.

    Parameters
    ----------

    text : string
        One ``key = value`` pair per line.

    mode : string, optional
        Mode given outside of the text, e.g. on the command line. It has to
        agree with a ``mode`` line if both are given.

    Returns
    -------

    cfg : RunConfig

    Raises
    ------

    ConfigError
        For unknown keys, repeated keys, malformed values and a missing
        mode.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError('expected "key = value", got %r' % line, lineno)
        key, value = (i.strip() for i in line.split('=', 1))
        if key not in fields:
            raise ConfigError('unknown key %r' % key, lineno)
        if key in values:
            raise ConfigError('repeated key %r' % key, lineno)
        try:
            values[key] = fields[key][0](value)
        except ValueError as e:
            raise ConfigError('bad value %r for %s: %s' % (value, key, e),
                              lineno)

    if mode is not None:
        if mode not in modes:
            raise ConfigError('unknown mode %r' % mode)
        if values.get('mode', mode) != mode:
            raise ConfigError('mode %r in the file conflicts with mode %r'
                              % (values['mode'], mode))
        values['mode'] = mode
    if 'mode' not in values:
        raise ConfigError('no mode given')

    cfg = defaults()._replace(**values)
    if cfg.mode in ('simulate', 'rates') and cfg.alpha == 0:
        raise ConfigError('alpha = 0 has no peak dynamics, use mode scl')
    logger.debug('parsed configuration %r', cfg)
    return cfg


def read_config(fn, mode=None):
    with open(fn, encoding='utf-8') as fp:
        return parse_config(fp.read(), mode)


def model_params(cfg):
    return ModelParams(cfg.chi, cfg.alpha, cfg.mass)


def step_config(cfg):
    return StepConfig(dt=cfg.dt, kernel=cfg.kernel)


def response_spec(cfg):
    return ResponseSpec(responses[cfg.response], v_max=cfg.v_max,
                        k=cfg.tanh_k)
