r"""
Hierarchical graph attention.

One attention layer updates the node features ``f`` over a neighbourhood
``N_i`` of each node::

    alpha_ij = softmax_{j in N_i}( LeakyReLU(a^T [W f_i || W f_j]) )
    f_i'     = phi( sum_{j in N_i} alpha_ij W f_j ) + f_i

where the residual ``f_i`` goes through a learned projection when the input
and output widths differ. A refinement stacks several such layers, each
over the neighbourhood obtained by thresholding the current soft adjacency
at its own level (coarse levels use low thresholds and see more
neighbours), and finally moves the joints by a linear head applied to the
refined features.

EXAMPLES::

    >>> import numpy as np
    >>> from skelgraph.diffcore import constant
    >>> from skelgraph.attention import GatLayerParams, gat_layer, attention_coefficients
    >>> params = GatLayerParams(4, 4, seed=0)
    >>> X = constant(np.random.default_rng(0).normal(size=(5, 4)))
    >>> mask = np.zeros((5, 5), dtype=bool); mask[0, 1] = mask[1, 0] = True
    >>> gat_layer(X, mask, params).shape
    (5, 4)
    >>> bool(np.allclose(attention_coefficients(X, mask, params).sum(axis=1), 1.0))
    True
"""
from __future__ import absolute_import
from six.moves import range

import numpy as np

from .env import random_state
from .diffcore import (DiffValue, leaf, constant, matmul, transpose, submatrix, add,
        mul, affine, scale, sigmoid, leaky_relu, broadcast_to, rowsoftmax_masked,
        activation, LEAKY_RELU_SLOPE)
from .errors import ConfigurationError, DimensionError
from .graphcore import SkeletonGraph
from .layers import Linear, glorot_uniform

DEFAULT_SCALES = (0.3, 0.5, 0.7)

class GatLayerParams(object):
    r"""
    Parameters of one attention level.

    Attributes:

    * ``heads`` -- list of pairs ``(W, a)``: projection ``F_out x F_in`` and
      attention vector ``2 F_out x 1``; the first pair is also available as
      ``W`` and ``a``
    * ``projection`` -- ``F_out x F_in`` residual projection, ``None`` when
      ``F_in == F_out``
    * ``gate`` -- ``1 x 1`` gate logit or ``None``
    * ``level`` -- index of the level in its refinement

    EXAMPLES::

        >>> from skelgraph.attention import GatLayerParams
        >>> GatLayerParams(8, 4, heads=2, gate=True, level=1)
        GatLayerParams(8 -> 4, heads=2, gate=True, level=1)
        >>> GatLayerParams(4, 4).projection is None
        True
        >>> GatLayerParams(4, 4, zero=True).W.value.any()
        False
    """
    def __init__(self, in_width, out_width, heads=1, gate=False, level=0, slope=LEAKY_RELU_SLOPE,
                 phi='leaky_relu', seed=0, zero=False):
        if in_width <= 0 or out_width <= 0 or heads <= 0:
            raise ConfigurationError('invalid attention shape (%s, %s, heads=%s)' % (in_width, out_width, heads))
        rng = random_state(seed)
        self.in_width = int(in_width)
        self.out_width = int(out_width)
        self.level = int(level)
        self.slope = slope
        self.phi = phi
        self.heads = []
        for _ in range(heads):
            W = np.zeros((out_width, in_width)) if zero else glorot_uniform(rng, out_width, in_width)
            a = glorot_uniform(rng, 2 * out_width, 1)
            self.heads.append((leaf(W), leaf(a)))
        if in_width != out_width:
            self.projection = leaf(glorot_uniform(rng, out_width, in_width))
        else:
            self.projection = None
        self.gate = leaf([[0.0]]) if gate else None
        self._check(ConfigurationError)

    def __repr__(self):
        return "GatLayerParams(%d -> %d, heads=%d, gate=%s, level=%d)" % (
                self.in_width, self.out_width, len(self.heads), self.gate is not None, self.level)

    @property
    def W(self):
        return self.heads[0][0]

    @property
    def a(self):
        return self.heads[0][1]

    def _check(self, error=RuntimeError):
        for W, a in self.heads:
            if W.shape != (self.out_width, self.in_width):
                raise error('W of shape %s, expected %s' % (W.shape, (self.out_width, self.in_width)))
            if a.shape != (2 * self.out_width, 1):
                raise error('a of shape %s, expected %s' % (a.shape, (2 * self.out_width, 1)))
        for name, p in self.parameters():
            if not np.isfinite(p.value).all():
                raise error('non-finite entries in %s' % name)

    def parameters(self):
        params = []
        for h, (W, a) in enumerate(self.heads):
            params.append(('head%d.W' % h, W))
            params.append(('head%d.a' % h, a))
        if self.projection is not None:
            params.append(('projection', self.projection))
        if self.gate is not None:
            params.append(('gate', self.gate))
        return params

def _neighbourhood(neighborhood, n, self_loops):
    mask = np.array(neighborhood, dtype=bool)
    if mask.shape != (n, n):
        raise DimensionError('neighbourhood of shape %s for %d nodes' % (mask.shape, n))
    if self_loops:
        mask |= np.eye(n, dtype=bool)
    return mask

def _head_attention(X, mask, W, a, slope):
    n = X.rows
    f = W.rows
    H = matmul(X, transpose(W))
    s_src = matmul(H, submatrix(a, rows=(0, f)))
    s_dst = matmul(H, submatrix(a, rows=(f, 2 * f)))
    ones = constant(np.ones((n, 1)))
    E = add(matmul(s_src, transpose(ones)), matmul(ones, transpose(s_dst)))
    return H, rowsoftmax_masked(leaky_relu(E, slope), mask)

def attention_coefficients(features, neighborhood, params, head=0, self_loops=True):
    r"""
    Return the ``N x N`` numpy array of attention coefficients of one head.
    """
    if not isinstance(features, DiffValue):
        features = constant(features)
    mask = _neighbourhood(neighborhood, features.rows, self_loops)
    W, a = params.heads[head]
    return _head_attention(features, mask, W, a, params.slope)[1].value

def gat_layer(features, neighborhood, params, self_loops=True):
    r"""
    Apply one attention level to the ``N x F_in`` node features.

    INPUT:

    - ``features`` -- ``N x F_in`` value

    - ``neighborhood`` -- ``N x N`` boolean matrix

    - ``params`` -- :class:`GatLayerParams`

    - ``self_loops`` -- whether each node attends to itself (default
      ``True``); without self loops an isolated node raises
      :class:`~skelgraph.errors.IsolatedNodeError`

    With several heads, the aggregated messages of the heads are averaged
    before the nonlinearity.

    EXAMPLES:

    A zero projection leaves the features unchanged::

        >>> import numpy as np
        >>> from skelgraph.diffcore import constant
        >>> from skelgraph.attention import GatLayerParams, gat_layer
        >>> X = constant([[1.0, 2.0], [3.0, -1.0]])
        >>> gat_layer(X, np.ones((2, 2), dtype=bool), GatLayerParams(2, 2, zero=True)).value.tolist()
        [[1.0, 2.0], [3.0, -1.0]]

        >>> gat_layer(X, np.zeros((2, 2), dtype=bool), GatLayerParams(2, 2), self_loops=False)
        Traceback (most recent call last):
        ...
        skelgraph.errors.IsolatedNodeError: rows without admissible entry: [0, 1]
    """
    if not isinstance(features, DiffValue):
        features = constant(features)
    if features.cols != params.in_width:
        raise DimensionError('attention level expects %d features, got shape %s' % (params.in_width, features.shape))
    n = features.rows
    mask = _neighbourhood(neighborhood, n, self_loops)

    agg = None
    for W, a in params.heads:
        H, att = _head_attention(features, mask, W, a, params.slope)
        m = matmul(att, H)
        agg = m if agg is None else add(agg, m)
    if len(params.heads) > 1:
        agg = scale(agg, 1.0 / len(params.heads))
    out = activation(agg, params.phi, params.slope)

    if params.projection is None:
        res = features
    else:
        res = matmul(features, transpose(params.projection))

    if params.gate is None:
        return add(out, res)
    g = broadcast_to(sigmoid(params.gate), n, params.out_width)
    return add(mul(g, out), mul(affine(g, -1.0, 1.0), res))

class RefinementParams(object):
    r"""
    Attention levels, their adjacency thresholds and the offset head of a
    hierarchical refinement.

    EXAMPLES::

        >>> from skelgraph.attention import RefinementParams
        >>> R = RefinementParams(16, levels=3)
        >>> R
        RefinementParams(3 levels, scales=(0.3, 0.5, 0.7))
        >>> [p.level for p in R.levels]
        [0, 1, 2]
        >>> R.offset_head.weight.value.any()
        False
    """
    def __init__(self, feature_width, levels=3, scales=DEFAULT_SCALES, heads=1, gate=False,
                 slope=LEAKY_RELU_SLOPE, seed=0, zero_offset=True):
        levels = int(levels)
        scales = tuple(float(s) for s in scales)
        if levels and len(scales) < levels:
            raise ConfigurationError('%d levels but only %d scales' % (levels, len(scales)))
        self.feature_width = int(feature_width)
        self.scales = scales[:levels]
        self.levels = [GatLayerParams(feature_width, feature_width, heads=heads, gate=gate, level=l,
                                      slope=slope, seed=seed + 104729 * l)
                       for l in range(levels)]
        self.offset_head = Linear(feature_width, 3, seed=seed + 1, zero=zero_offset)

    def __repr__(self):
        return "RefinementParams(%d levels, scales=%s)" % (len(self.levels), self.scales)

    def parameters(self):
        params = []
        for l, p in enumerate(self.levels):
            params.extend(('level%d.%s' % (l, name), v) for name, v in p.parameters())
        params.extend(('offset.%s' % name, v) for name, v in self.offset_head.parameters())
        return params

def hierarchical_refine(graph, levels, scales, offset_head):
    r"""
    Refine the node features of ``graph`` through the attention ``levels``
    and move its joints by ``offset_head`` applied to the refined features.

    INPUT:

    - ``graph`` -- :class:`~skelgraph.graphcore.SkeletonGraph`

    - ``levels`` -- non-empty list of :class:`GatLayerParams`

    - ``scales`` -- adjacency thresholds, one per level; level ``l`` attends
      over the pairs whose soft adjacency exceeds ``scales[l]``

    - ``offset_head`` -- :class:`~skelgraph.layers.Linear` from the feature
      width to 3

    OUTPUT: a new skeleton with the same adjacency, refined features and
    joints ``graph.joints + offsets``

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.attention import RefinementParams, hierarchical_refine
        >>> R = RefinementParams(4, levels=1)
        >>> S = SkeletonGraph(np.full((3, 3), 0.5), np.zeros((3, 3)), np.ones((3, 4)))
        >>> T = hierarchical_refine(S, R.levels, R.scales, R.offset_head)
        >>> T.joints.value.tolist() == S.joints.value.tolist()
        True

        >>> hierarchical_refine(S, [], [], R.offset_head)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: hierarchical refinement needs at least one level
    """
    if not levels:
        raise ConfigurationError('hierarchical refinement needs at least one level')
    if len(scales) != len(levels):
        raise ConfigurationError('%d levels but %d scales' % (len(levels), len(scales)))

    A = graph.adjacency.value
    X = graph.node_features
    for params, tau in zip(levels, scales):
        X = gat_layer(X, A > tau, params)
    joints = add(graph.joints, offset_head(X))
    return SkeletonGraph(joints, graph.adjacency, X, check=False)
