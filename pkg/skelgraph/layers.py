r"""
Dense layers.

The learned parts of the pipeline (edge network, encoder, decoder,
discriminator, offset heads) are all multilayer perceptrons built from
:class:`Linear` layers. Parameters are :func:`~skelgraph.diffcore.leaf`
values; every container exposes them through ``parameters()`` as a list of
``(name, value)`` pairs in a fixed order, which is what the optimizer and the
checkpoints rely on.

EXAMPLES::

    >>> from skelgraph.layers import Mlp
    >>> from skelgraph.diffcore import constant
    >>> f = Mlp([4, 8, 1], seed=0)
    >>> f
    Mlp([4, 8, 1], activation='leaky_relu')
    >>> f(constant([[0.0, 1.0, 2.0, 3.0]])).shape
    (1, 1)
    >>> [name for name, _ in f.parameters()]
    ['0.weight', '0.bias', '1.weight', '1.bias']
"""
from __future__ import absolute_import
from six.moves import range

import numpy as np

from .env import random_state
from .diffcore import leaf, matmul, add, broadcast_to, activation, LEAKY_RELU_SLOPE
from .errors import ConfigurationError, DimensionError

def glorot_uniform(rng, rows, cols):
    r"""
    Return a ``rows x cols`` array drawn uniformly in ``[-l, l]`` with
    ``l = sqrt(6 / (rows + cols))``.

    EXAMPLES::

        >>> from skelgraph.env import random_state
        >>> from skelgraph.layers import glorot_uniform
        >>> w = glorot_uniform(random_state(0), 10, 20)
        >>> w.shape, bool(abs(w).max() <= (6.0 / 30) ** 0.5)
        ((10, 20), True)
    """
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))

class Linear(object):
    r"""
    Affine map ``x -> x W + b`` acting on the rows of ``x``.

    ``weight`` has shape ``(in_width, out_width)`` and ``bias`` shape
    ``(1, out_width)``. Glorot-uniform initialization, zero bias.

    EXAMPLES::

        >>> from skelgraph.layers import Linear
        >>> from skelgraph.diffcore import constant
        >>> L = Linear(2, 3, seed=1, zero=True)
        >>> L(constant([[1.0, 2.0]])).value.tolist()
        [[0.0, 0.0, 0.0]]
    """
    __slots__ = ['weight', 'bias']

    def __init__(self, in_width, out_width, seed=0, zero=False, bias=True):
        if in_width <= 0 or out_width <= 0:
            raise ConfigurationError('invalid layer widths (%s, %s)' % (in_width, out_width))
        if zero:
            w = np.zeros((in_width, out_width))
        else:
            w = glorot_uniform(random_state(seed), in_width, out_width)
        self.weight = leaf(w)
        self.bias = leaf(np.zeros((1, out_width))) if bias else None

    @property
    def in_width(self):
        return self.weight.rows

    @property
    def out_width(self):
        return self.weight.cols

    def __call__(self, x):
        if x.cols != self.in_width:
            raise DimensionError('linear layer expects width %d, got shape %s' % (self.in_width, x.shape))
        y = matmul(x, self.weight)
        if self.bias is not None:
            y = add(y, broadcast_to(self.bias, x.rows, self.out_width))
        return y

    def parameters(self):
        if self.bias is None:
            return [('weight', self.weight)]
        return [('weight', self.weight), ('bias', self.bias)]

    def _check(self, error=RuntimeError):
        for name, p in self.parameters():
            if not np.isfinite(p.value).all():
                raise error('non-finite entries in %s' % name)

class Mlp(object):
    r"""
    Multilayer perceptron with the same activation after each hidden layer
    and a linear output.

    INPUT:

    - ``widths`` -- list of layer widths, input first, output last

    - ``activation`` -- ``'leaky_relu'`` (default), ``'relu'``, ``'sigmoid'``
      or ``'linear'``

    - ``slope`` -- negative slope of the leaky relu

    - ``seed`` -- integer seed for the initialization

    - ``zero_last`` -- whether to zero-initialize the output layer

    EXAMPLES::

        >>> from skelgraph.layers import Mlp
        >>> from skelgraph.diffcore import constant
        >>> f = Mlp([3, 5, 2], zero_last=True)
        >>> f(constant([[1.0, 2.0, 3.0], [0.0, 0.0, 1.0]])).value.tolist()
        [[0.0, 0.0], [0.0, 0.0]]

        >>> Mlp([3])
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: an MLP needs at least an input and an output width, got [3]
    """
    def __init__(self, widths, activation='leaky_relu', slope=LEAKY_RELU_SLOPE, seed=0, zero_last=False):
        widths = [int(w) for w in widths]
        if len(widths) < 2:
            raise ConfigurationError('an MLP needs at least an input and an output width, got %s' % widths)
        self.widths = widths
        self.activation = activation
        self.slope = slope
        n = len(widths) - 1
        self.layers = [Linear(widths[i], widths[i+1], seed=seed + 7919 * i, zero=(zero_last and i == n - 1))
                       for i in range(n)]

    def __repr__(self):
        return "Mlp(%s, activation=%r)" % (self.widths, self.activation)

    @property
    def in_width(self):
        return self.widths[0]

    @property
    def out_width(self):
        return self.widths[-1]

    def __call__(self, x):
        n = len(self.layers)
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < n - 1:
                x = activation(x, self.activation, self.slope)
        return x

    def parameters(self):
        return [('%d.%s' % (i, name), p) for i, layer in enumerate(self.layers) for name, p in layer.parameters()]

    def _check(self, error=RuntimeError):
        for layer in self.layers:
            layer._check(error)

def prefixed(prefix, params):
    r"""
    Prepend ``prefix`` to the names of a parameter list.

    EXAMPLES::

        >>> from skelgraph.layers import prefixed, Linear
        >>> [n for n, _ in prefixed('head', Linear(2, 2).parameters())]
        ['head.weight', 'head.bias']
    """
    return [('%s.%s' % (prefix, name), p) for name, p in params]
