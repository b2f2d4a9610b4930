r"""
Differentiable graph construction.

The soft adjacency between joints ``i`` and ``j`` is::

    A_ij = sigmoid(MLP_edge([f_i ; f_j ; |x_i - x_j|]))

computed for every ordered pair, then symmetrized as ``(A + A^T) / 2`` with
the diagonal set to zero. The matrix stays soft during training; hard edges
are only extracted by thresholding for evaluation and export.

EXAMPLES::

    >>> import numpy as np
    >>> from skelgraph.diffcore import constant
    >>> from skelgraph.dgcn import EdgeMlpParams, build_adjacency, extract_hard_edges
    >>> params = EdgeMlpParams(feature_width=4, hidden=(8,), seed=0, zero_last=True)
    >>> A = build_adjacency(constant(np.ones((2, 4))), constant([[0, 0, 0], [1, 0, 0]]), params)
    >>> A.value.tolist()
    [[0.0, 0.5], [0.5, 0.0]]
    >>> extract_hard_edges(A.value, 0.4)
    [(0, 1)]
"""
from __future__ import absolute_import
from six.moves import zip

import numpy as np

from .constants import EDGE_THRESHOLD
from .diffcore import (DiffValue, constant, take_rows, sub, row_norms, concat_cols,
        sigmoid, reshape, transpose, add, scale, mul, LEAKY_RELU_SLOPE)
from .errors import ConfigurationError, ParameterError
from .layers import Mlp

class EdgeMlpParams(object):
    r"""
    Parameters of the edge network, a :class:`~skelgraph.layers.Mlp` from
    ``2 * feature_width + 1`` inputs to one logit.

    EXAMPLES::

        >>> from skelgraph.dgcn import EdgeMlpParams
        >>> EdgeMlpParams(feature_width=16)
        EdgeMlpParams(feature_width=16, hidden=(64, 64))
        >>> EdgeMlpParams(feature_width=16).mlp.in_width
        33
    """
    def __init__(self, feature_width, hidden=(64, 64), activation='leaky_relu', slope=LEAKY_RELU_SLOPE, seed=0, zero_last=False):
        self.feature_width = int(feature_width)
        self.hidden = tuple(int(h) for h in hidden)
        self.mlp = Mlp([2 * self.feature_width + 1] + list(self.hidden) + [1],
                       activation=activation, slope=slope, seed=seed, zero_last=zero_last)
        self._check(ConfigurationError)

    def __repr__(self):
        return "EdgeMlpParams(feature_width=%d, hidden=%s)" % (self.feature_width, self.hidden)

    def _check(self, error=RuntimeError):
        if self.mlp.in_width != 2 * self.feature_width + 1:
            raise error('edge network input width %d != 2 * %d + 1' % (self.mlp.in_width, self.feature_width))
        if self.mlp.out_width != 1:
            raise error('edge network must output one logit')
        self.mlp._check(error)

    def parameters(self):
        return self.mlp.parameters()

def pair_indices(n):
    r"""
    Row and column indices of the ``n * n`` ordered pairs in row-major order.

    EXAMPLES::

        >>> from skelgraph.dgcn import pair_indices
        >>> I, J = pair_indices(2)
        >>> I.tolist(), J.tolist()
        ([0, 0, 1, 1], [0, 1, 0, 1])
    """
    return np.repeat(np.arange(n), n), np.tile(np.arange(n), n)

def build_adjacency(features, joints, params):
    r"""
    Return the ``N x N`` soft adjacency of the joints ``joints`` with node
    features ``features``.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import constant
        >>> from skelgraph.dgcn import EdgeMlpParams, build_adjacency
        >>> params = EdgeMlpParams(feature_width=3, hidden=(4,))
        >>> build_adjacency(constant(np.ones((3, 2))), constant(np.zeros((3, 3))), params)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: edge network built for 3 features, got 2
        >>> build_adjacency(constant(np.ones((1, 3))), constant(np.zeros((1, 3))), params)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: at least 2 joints are needed to build an adjacency, got 1
    """
    if not isinstance(features, DiffValue):
        features = constant(features)
    if not isinstance(joints, DiffValue):
        joints = constant(joints)
    n = joints.rows
    if features.cols != params.feature_width:
        raise ConfigurationError('edge network built for %d features, got %d' % (params.feature_width, features.cols))
    if n < 2:
        raise ParameterError('at least 2 joints are needed to build an adjacency, got %d' % n)
    if features.rows != n:
        raise ParameterError('%d feature rows for %d joints' % (features.rows, n))

    I, J = pair_indices(n)
    dist = row_norms(sub(take_rows(joints, I), take_rows(joints, J)))
    desc = concat_cols([take_rows(features, I), take_rows(features, J), dist])
    A = reshape(sigmoid(params.mlp(desc)), n, n)
    A = scale(add(A, transpose(A)), 0.5)
    return mul(A, constant(1.0 - np.eye(n)))

def extract_hard_edges(adjacency, threshold=EDGE_THRESHOLD):
    r"""
    Return the sorted pairs ``(i, j)`` with ``i < j`` and
    ``adjacency[i, j] > threshold``.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.dgcn import extract_hard_edges
        >>> extract_hard_edges(np.full((3, 3), 0.9), 0.5)
        [(0, 1), (0, 2), (1, 2)]
        >>> extract_hard_edges(np.full((3, 3), 0.1), 0.5)
        []
        >>> extract_hard_edges(np.full((2, 2), 0.5), 0.5)
        []
    """
    if isinstance(adjacency, DiffValue):
        adjacency = adjacency.value
    A = np.asarray(adjacency)
    I, J = np.nonzero(np.triu(A > threshold, k=1))
    return [(int(i), int(j)) for i, j in zip(I, J)]
