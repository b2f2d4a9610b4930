r"""
Adaptive moment optimizer.

EXAMPLES::

    >>> from skelgraph.diffcore import leaf, reduce_sum, square, backward
    >>> from skelgraph.optim import Adam
    >>> x = leaf([[3.0, -2.0]])
    >>> opt = Adam([('x', x)], learning_rate=0.1)
    >>> for _ in range(300):
    ...     opt.zero_grad()
    ...     backward(reduce_sum(square(x)))
    ...     opt.step()
    >>> bool(abs(x.value).max() < 0.1)
    True
"""
from __future__ import absolute_import
from six.moves import zip

import numpy as np

from .errors import ConfigurationError, DataError, NumericalError

class Adam(object):
    r"""
    First and second moment gradient descent acting in place on the
    ``value`` of each parameter.

    INPUT:

    - ``params`` -- list of ``(name, value)`` pairs

    - ``learning_rate``, ``beta1``, ``beta2``, ``eps`` -- the usual constants

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf
        >>> from skelgraph.optim import Adam
        >>> Adam([('w', leaf([[1.0]]))])
        Adam(1 parameters, learning_rate=0.001, steps=0)
        >>> Adam([('w', leaf(1.0)), ('w', leaf(2.0))])
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: duplicate parameter name 'w'
    """
    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        params = list(params)
        names = set()
        for name, _ in params:
            if name in names:
                raise ConfigurationError("duplicate parameter name '%s'" % name)
            names.add(name)
        if learning_rate <= 0:
            raise ConfigurationError('learning rate must be positive, got %s' % learning_rate)
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ConfigurationError('betas must lie in [0, 1), got (%s, %s)' % (beta1, beta2))
        self.params = params
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.steps = 0
        self.m = [np.zeros_like(p.value) for _, p in params]
        self.v = [np.zeros_like(p.value) for _, p in params]

    def __repr__(self):
        return "Adam(%d parameters, learning_rate=%s, steps=%d)" % (len(self.params), self.learning_rate, self.steps)

    def zero_grad(self):
        for _, p in self.params:
            p.grad[...] = 0

    def step(self):
        r"""
        Apply one update from the accumulated gradients.
        """
        for name, p in self.params:
            if not np.isfinite(p.grad).all():
                raise NumericalError('non-finite gradient for parameter %s' % name)
        self.steps += 1
        t = self.steps
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        for (_, p), m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.value -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self):
        r"""
        Dictionary of numpy arrays describing the moments and the step count.

        EXAMPLES::

            >>> from skelgraph.diffcore import leaf
            >>> from skelgraph.optim import Adam
            >>> opt = Adam([('w', leaf([[1.0, 2.0]]))])
            >>> sorted(opt.state_dict())
            ['m.w', 'steps', 'v.w']
        """
        d = {'steps': np.array(self.steps)}
        for (name, _), m, v in zip(self.params, self.m, self.v):
            d['m.' + name] = m.copy()
            d['v.' + name] = v.copy()
        return d

    def load_state_dict(self, d):
        for i, (name, p) in enumerate(self.params):
            try:
                m = np.asarray(d['m.' + name], dtype=float)
                v = np.asarray(d['v.' + name], dtype=float)
            except KeyError:
                raise DataError('optimizer state has no moments for %s' % name)
            if m.shape != p.shape or v.shape != p.shape:
                raise DataError('optimizer state of %s has shape %s, expected %s' % (name, m.shape, p.shape))
            self.m[i] = m.copy()
            self.v[i] = v.copy()
        self.steps = int(d['steps'])
