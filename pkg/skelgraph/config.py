r"""
Training configuration.

A configuration file is a list of ``key = value`` lines; blank lines and
lines starting with ``#`` are ignored. The type of each value is the type of
its default (tuples are comma separated, booleans are ``true`` or
``false``).

EXAMPLES::

    >>> from skelgraph.config import TrainConfig
    >>> cfg = TrainConfig.from_text('''
    ... # tiny run
    ... epochs = 2
    ... learning_rate = 0.01
    ... adversarial = false
    ... attention_scales = 0.4, 0.6
    ... ''')
    >>> cfg.epochs, cfg.learning_rate, cfg.adversarial, cfg.attention_scales
    (2, 0.01, False, (0.4, 0.6))
    >>> TrainConfig.from_text(cfg.to_text()) == cfg
    True
"""
from __future__ import absolute_import
from six import string_types

import hashlib
import io

from .constants import ABLATION_FLAGS, EDGE_THRESHOLD, GED_EXACT_LIMIT
from .errors import ConfigurationError
from .spectral import DEFAULT_ALPHA

# (key, default) in canonical order
DEFAULTS = [
    ('seed', 0),
    ('epochs', 50),
    ('learning_rate', 1e-3),
    ('batch_size', 1),
    ('w_coord', 1.0),
    ('w_spectral', 0.1),
    ('w_adv', 0.01),
    ('alpha', DEFAULT_ALPHA),
    ('K', 0),

    # ablation switches
    ('spectral_loss', True),
    ('hierarchical_attention', True),
    ('adaptive_complexity', True),
    ('adversarial', True),
    ('topology_discriminator', False),

    # shapes
    ('feature_width', 16),
    ('n_min', 4),
    ('n_max', 12),
    ('knn', 8),
    ('encoder_samples', (64, 16)),
    ('encoder_radii', (0.2, 0.4)),
    ('encoder_widths', (32, 64)),
    ('global_width', 64),
    ('decoder_hidden', (128,)),
    ('edge_hidden', (32, 32)),
    ('attention_levels', 3),
    ('attention_scales', (0.3, 0.5, 0.7)),
    ('attention_heads', 1),
    ('attention_gate', False),
    ('disc_hidden', (32,)),
    ('disc_K', 8),
    ('disc_bins', 8),

    # evaluation
    ('edge_threshold', EDGE_THRESHOLD),
    ('exact_ged_limit', GED_EXACT_LIMIT),
    ]

KEYS = [k for k, _ in DEFAULTS]

# keys that may change when a run is resumed
RESUMABLE = ('epochs',)

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')

def _parse_scalar(key, s, ref):
    s = s.strip()
    if isinstance(ref, bool):
        if s.lower() in _TRUE:
            return True
        if s.lower() in _FALSE:
            return False
        raise ConfigurationError("%s: expected a boolean, got '%s'" % (key, s))
    try:
        if isinstance(ref, int):
            return int(s)
        return float(s)
    except ValueError:
        raise ConfigurationError("%s: expected a number, got '%s'" % (key, s))

def _parse_value(key, s, default):
    if isinstance(default, tuple):
        ref = default[0] if default else 0.0
        return tuple(_parse_scalar(key, x, ref) for x in s.split(',') if x.strip())
    return _parse_scalar(key, s, default)

def _format_value(v):
    if isinstance(v, bool):
        return 'true' if v else 'false'
    if isinstance(v, tuple):
        return ', '.join(_format_value(x) for x in v)
    return repr(v)

def _coerce(key, value, default):
    if isinstance(value, string_types):
        return _parse_value(key, value, default)
    if isinstance(default, tuple):
        value = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        ref = default[0] if default else 0.0
        return tuple(type(ref)(x) for x in value)
    if isinstance(default, bool):
        return bool(value)
    return type(default)(value)

class TrainConfig(object):
    r"""
    Hyperparameters, loss weights, ablation switches and model shapes of a
    training run.

    EXAMPLES::

        >>> from skelgraph.config import TrainConfig
        >>> cfg = TrainConfig(epochs=3, spectral_loss=False)
        >>> cfg
        TrainConfig(seed=0, epochs=3, flags: -spectral_loss +hierarchical_attention +adaptive_complexity +adversarial)
        >>> cfg.copy(seed=5).seed
        5

        >>> TrainConfig(w_coord=-1.0)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: weight w_coord = -1.0 is negative
        >>> TrainConfig(lr=0.1)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: unknown configuration key 'lr'
    """
    __slots__ = KEYS

    def __init__(self, check=True, **kwds):
        for key, default in DEFAULTS:
            setattr(self, key, default)
        for key, value in kwds.items():
            if key not in KEYS:
                raise ConfigurationError("unknown configuration key '%s'" % key)
            setattr(self, key, _coerce(key, value, dict(DEFAULTS)[key]))
        if check:
            self._check(ConfigurationError)

    def __repr__(self):
        flags = ' '.join(('+' if getattr(self, f) else '-') + f for f in ABLATION_FLAGS)
        return "TrainConfig(seed=%d, epochs=%d, flags: %s)" % (self.seed, self.epochs, flags)

    def __eq__(self, other):
        return type(self) is type(other) and all(getattr(self, k) == getattr(other, k) for k in KEYS)

    def __ne__(self, other):
        return not (self == other)

    def _check(self, error=RuntimeError):
        for w in ('w_coord', 'w_spectral', 'w_adv'):
            if getattr(self, w) < 0:
                raise error('weight %s = %s is negative' % (w, getattr(self, w)))
        if self.epochs < 1:
            raise error('epochs = %d must be at least 1' % self.epochs)
        if self.batch_size < 1:
            raise error('batch_size = %d must be at least 1' % self.batch_size)
        if self.learning_rate <= 0:
            raise error('learning_rate = %s must be positive' % self.learning_rate)
        if not 2 <= self.n_min <= self.n_max:
            raise error('node bounds must satisfy 2 <= n_min <= n_max, got (%d, %d)' % (self.n_min, self.n_max))
        if self.K < 0:
            raise error('K = %d is negative' % self.K)
        if len(self.encoder_samples) != len(self.encoder_radii) or len(self.encoder_samples) != len(self.encoder_widths):
            raise error('encoder_samples, encoder_radii and encoder_widths must have the same length')
        if len(self.attention_scales) < self.attention_levels:
            raise error('%d attention levels but %d scales' % (self.attention_levels, len(self.attention_scales)))
        if self.knn < 1:
            raise error('knn = %d must be positive' % self.knn)

    def copy(self, **kwds):
        r"""
        Return a copy with the given keys changed.
        """
        d = self.as_dict()
        d.update(kwds)
        return TrainConfig(**d)

    def as_dict(self):
        return {k: getattr(self, k) for k in KEYS}

    def flags(self):
        r"""
        Dictionary of the ablation switches.
        """
        return {f: getattr(self, f) for f in ABLATION_FLAGS}

    def to_text(self):
        r"""
        Canonical ``key = value`` dump, one line per key in the order of
        :data:`DEFAULTS`.
        """
        return ''.join('%s = %s\n' % (k, _format_value(getattr(self, k))) for k in KEYS)

    def config_hash(self):
        r"""
        SHA-256 of the canonical dump without the keys that may change on
        resume.

        EXAMPLES::

            >>> from skelgraph.config import TrainConfig
            >>> TrainConfig(epochs=2).config_hash() == TrainConfig(epochs=7).config_hash()
            True
            >>> TrainConfig(seed=1).config_hash() == TrainConfig(seed=2).config_hash()
            False
        """
        text = ''.join('%s=%s\n' % (k, _format_value(getattr(self, k))) for k in KEYS if k not in RESUMABLE)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    @staticmethod
    def from_text(text):
        defaults = dict(DEFAULTS)
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigurationError("line %d: expected 'key = value', got '%s'" % (lineno, line))
            key, value = (x.strip() for x in line.split('=', 1))
            if key not in defaults:
                raise ConfigurationError("line %d: unknown configuration key '%s'" % (lineno, key))
            try:
                values[key] = _parse_value(key, value, defaults[key])
            except ConfigurationError as e:
                raise ConfigurationError('line %d: %s' % (lineno, e))
        return TrainConfig(**values)

    @staticmethod
    def from_file(path):
        with io.open(path, 'r', encoding='utf-8') as f:
            return TrainConfig.from_text(f.read())

    def write(self, path):
        with io.open(path, 'w', encoding='utf-8') as f:
            f.write(u'%s' % self.to_text())
