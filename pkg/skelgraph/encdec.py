r"""
Point cloud encoder and skeleton decoder.

The encoder is a stack of set abstraction stages. Each stage selects
centers by farthest point sampling, groups the points within a radius of
every center, runs a shared MLP on the grouped inputs
``[p - c, |p - c|, f]`` (offset to the center, distance to the center,
feature of the previous stage) and max-pools each group. The centers and
their pooled features feed the next stage; a final linear layer followed by
a max over all centers gives the global feature.

Only the MLPs are learned. The sampling and grouping depend on the point
coordinates alone and are computed once by :func:`group_points`, so that
training can reuse them for every epoch.

The decoder maps the global feature to ``N_max`` slots of coordinates and
node features and keeps the first ``n``; :func:`adaptive_node_count`
chooses ``n`` from the structural entropy of the k-nearest-neighbour graph
of the cloud.

EXAMPLES::

    >>> from skelgraph.env import random_state
    >>> from skelgraph.graphcore import normalize_pointcloud
    >>> from skelgraph.encdec import EncoderParams, DecoderParams, encode, decode
    >>> pc = normalize_pointcloud(random_state(0).random((40, 3)))
    >>> enc = EncoderParams(samples=(16, 4), radii=(0.3, 0.6), widths=((8,), (8,)), global_width=12)
    >>> g = encode(pc, enc)
    >>> g.shape
    (1, 12)
    >>> dec = DecoderParams(12, feature_width=5, n_min=3, n_max=6)
    >>> decode(g, 4, dec)
    SkeletonGraph(4 joints, 0 edges)
"""
from __future__ import absolute_import
from six.moves import zip

import logging
import math

import numpy as np
from scipy.spatial import cKDTree

from .diffcore import (DiffValue, constant, concat_cols, take_rows, max_pool_groups,
        activation, reshape, submatrix, sigmoid, LEAKY_RELU_SLOPE)
from .errors import ConfigurationError, ParameterError
from .graphcore import PointCloud, SkeletonGraph, knn_graph
from .layers import Linear, Mlp
from .spectral import structural_entropy

logger = logging.getLogger(__name__)

# largest number of decoder slots
MAX_NODES = 64

def _points(pc):
    return pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=float)

def canonical_seed(points):
    r"""
    Index of the lexicographically smallest point (lowest index among equal
    points).

    EXAMPLES::

        >>> from skelgraph.encdec import canonical_seed
        >>> canonical_seed([[1, 0, 0], [0, 5, 0], [0, 1, 2], [0, 1, 2]])
        2
    """
    P = np.asarray(points, dtype=float)
    return int(np.lexsort((P[:, 2], P[:, 1], P[:, 0]))[0])

def farthest_point_sample(pc, n, seed_index=None):
    r"""
    Greedy max-min selection of ``n`` point indices starting at
    ``seed_index`` (default: :func:`canonical_seed`).

    At each step the point whose distance to the already selected points
    is largest is added; ties go to the lowest index.

    EXAMPLES::

        >>> from skelgraph.encdec import farthest_point_sample
        >>> farthest_point_sample([[1, 0, 0], [0, 0, 0], [10, 0, 0]], 2, seed_index=1)
        [1, 2]
        >>> farthest_point_sample([[1, 0, 0], [0, 0, 0], [10, 0, 0]], 3)
        [1, 2, 0]

        >>> farthest_point_sample([[0, 0, 0]], 2)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: cannot sample 2 points out of 1
    """
    P = _points(pc)
    M = P.shape[0]
    n = int(n)
    if n > M or n < 0:
        raise ParameterError('cannot sample %d points out of %d' % (n, M))
    if n == 0:
        return []
    if seed_index is None:
        seed_index = canonical_seed(P)
    if not 0 <= seed_index < M:
        raise ParameterError('seed index %d out of range for %d points' % (seed_index, M))

    selected = [int(seed_index)]
    dist = np.linalg.norm(P - P[seed_index], axis=1)
    dist[seed_index] = -1.0
    while len(selected) < n:
        i = int(np.argmax(dist))
        selected.append(i)
        dist = np.minimum(dist, np.linalg.norm(P - P[i], axis=1))
        dist[selected] = -1.0
    return selected

class EncoderParams(object):
    r"""
    Set abstraction stages and global layer of the encoder.

    INPUT:

    - ``samples`` -- number of centers of each stage, strictly decreasing

    - ``radii`` -- grouping radius of each stage

    - ``widths`` -- hidden and output widths of the shared MLP of each stage

    - ``global_width`` -- width ``G`` of the global feature

    - ``max_group`` -- optional cap on the group size (nearest points first);
      without a cap the encoder is invariant under duplication of points

    EXAMPLES::

        >>> from skelgraph.encdec import EncoderParams
        >>> E = EncoderParams()
        >>> E
        EncoderParams(samples=(64, 16), radii=(0.2, 0.4), global_width=64)
        >>> [m.in_width for m in E.mlps]
        [4, 36]

        >>> EncoderParams(samples=(8, 8), radii=(0.1, 0.2))
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: sample counts must be strictly decreasing, got (8, 8)
    """
    def __init__(self, samples=(64, 16), radii=(0.2, 0.4), widths=((32, 32), (64, 64)), global_width=64,
                 max_group=None, activation='leaky_relu', slope=LEAKY_RELU_SLOPE, seed=0):
        self.samples = tuple(int(s) for s in samples)
        self.radii = tuple(float(r) for r in radii)
        self.widths = tuple(tuple(int(w) for w in ws) for ws in widths)
        self.global_width = int(global_width)
        self.max_group = None if max_group is None else int(max_group)
        self.activation = activation
        self.slope = slope
        if not (len(self.samples) == len(self.radii) == len(self.widths)) or not self.samples:
            raise ConfigurationError('one sample count, radius and width list per stage is needed')
        self.mlps = []
        prev = 0
        for s, ws in enumerate(self.widths):
            if not ws:
                raise ConfigurationError('stage %d has no MLP width' % s)
            self.mlps.append(Mlp([4 + prev] + list(ws), activation=activation, slope=slope, seed=seed + 31 * s))
            prev = ws[-1]
        self.head = Linear(prev, self.global_width, seed=seed + 1000)
        self._check(ConfigurationError)

    def __repr__(self):
        return "EncoderParams(samples=%s, radii=%s, global_width=%d)" % (self.samples, self.radii, self.global_width)

    def _check(self, error=RuntimeError):
        if any(a <= b for a, b in zip(self.samples, self.samples[1:])):
            raise error('sample counts must be strictly decreasing, got %s' % (self.samples,))
        if any(s <= 0 for s in self.samples):
            raise error('sample counts must be positive, got %s' % (self.samples,))
        if any(r <= 0 for r in self.radii):
            raise error('radii must be positive, got %s' % (self.radii,))
        if self.max_group is not None and self.max_group < 1:
            raise error('max_group must be positive')
        for m in self.mlps:
            m._check(error)
        self.head._check(error)

    def parameters(self):
        params = []
        for s, m in enumerate(self.mlps):
            params.extend(('stage%d.%s' % (s, name), p) for name, p in m.parameters())
        params.extend(('head.%s' % name, p) for name, p in self.head.parameters())
        return params

class StagePlan(object):
    r"""
    Sampling and grouping of one stage: ``centers`` (``n x 3`` positions),
    ``index`` (flat row indices into the previous stage, ``n * group_size``),
    ``geometry`` (the constant ``[offset, distance]`` columns of the grouped
    inputs) and ``group_size``.
    """
    __slots__ = ['centers', 'index', 'geometry', 'group_size']

    def __init__(self, centers, index, geometry, group_size):
        self.centers = centers
        self.index = index
        self.geometry = geometry
        self.group_size = group_size

    def __repr__(self):
        return "StagePlan(%d centers, group_size=%d)" % (self.centers.shape[0], self.group_size)

def group_points(pc, params):
    r"""
    Return the list of :class:`StagePlan` of the encoder ``params`` on the
    cloud ``pc``.

    Every group contains its center. Groups smaller than the largest group
    of the stage are padded with the center.

    EXAMPLES::

        >>> from skelgraph.encdec import EncoderParams, group_points
        >>> pts = [[0, 0, 0], [0.1, 0, 0], [1, 0, 0], [1, 0.1, 0]]
        >>> plan = group_points(pts, EncoderParams(samples=(2, 1), radii=(0.2, 2.0), widths=((4,), (4,))))
        >>> plan
        [StagePlan(2 centers, group_size=2), StagePlan(1 centers, group_size=2)]
        >>> plan[0].index.reshape(2, 2).tolist()
        [[0, 1], [3, 2]]

        >>> group_points(pts, EncoderParams(samples=(8, 5), radii=(0.2, 0.2), widths=((4,), (4,))))
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: the last stage needs 5 centers but the cloud has 4 points
    """
    P = _points(pc)
    M = P.shape[0]
    if M < params.samples[-1]:
        raise ParameterError('the last stage needs %d centers but the cloud has %d points' % (params.samples[-1], M))

    plan = []
    for n, r in zip(params.samples, params.radii):
        n = min(n, P.shape[0])
        centers_idx = farthest_point_sample(P, n)
        C = P[centers_idx]
        tree = cKDTree(P)
        groups = []
        for c, ball in zip(centers_idx, tree.query_ball_point(C, r)):
            ball = sorted(set(ball) | {c})
            d = np.linalg.norm(P[ball] - P[c], axis=1)
            order = np.lexsort((ball, d))
            g = [ball[k] for k in order]
            if params.max_group is not None:
                g = g[:params.max_group]
            groups.append((c, g))
        size = max(len(g) for _, g in groups)
        index = np.array([g + [c] * (size - len(g)) for c, g in groups], dtype=np.intp).ravel()
        centers_rep = np.repeat(C, size, axis=0)
        offset = P[index] - centers_rep
        geometry = np.hstack([offset, np.linalg.norm(offset, axis=1, keepdims=True)])
        plan.append(StagePlan(C, index, geometry, size))
        logger.debug('group_points: %d centers, radius %g, group size %d', n, r, size)
        P = C
    return plan

def encode(pc, params, plan=None):
    r"""
    Return the ``1 x G`` global feature of the cloud ``pc``.

    ``plan`` is the output of :func:`group_points` for ``pc`` and is
    computed when not provided.

    EXAMPLES:

    The global feature only depends on the set of points::

        >>> import numpy as np
        >>> from skelgraph.env import random_state
        >>> from skelgraph.encdec import EncoderParams, encode
        >>> P = random_state(1).random((30, 3))
        >>> enc = EncoderParams(samples=(10, 3), radii=(0.3, 0.6), widths=((8,), (8,)), global_width=6)
        >>> a = encode(P, enc).value
        >>> b = encode(np.vstack([P[::-1], P]), enc).value
        >>> bool(np.abs(a - b).max() < 1e-12)
        True
    """
    if plan is None:
        plan = group_points(pc, params)
    if len(plan) != len(params.mlps):
        raise ConfigurationError('grouping plan has %d stages, encoder %d' % (len(plan), len(params.mlps)))

    F = None
    for stage, mlp in zip(plan, params.mlps):
        geo = constant(stage.geometry)
        X = geo if F is None else concat_cols([geo, take_rows(F, stage.index)])
        H = activation(mlp(X), params.activation, params.slope)
        F = max_pool_groups(H, stage.group_size)
    Y = params.head(F)
    return max_pool_groups(Y, Y.rows)

class DecoderParams(object):
    r"""
    MLP from the global feature to ``n_max`` slots of ``3 + feature_width``
    values, and the node count bounds.

    EXAMPLES::

        >>> from skelgraph.encdec import DecoderParams
        >>> DecoderParams(64, feature_width=16, n_min=4, n_max=12)
        DecoderParams(64 -> 12 x (3 + 16), n_min=4)

        >>> DecoderParams(64, feature_width=16, n_min=5, n_max=65)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: node count bounds must satisfy 1 <= 5 <= 65 <= 64
    """
    def __init__(self, global_width, feature_width=16, n_min=4, n_max=16, hidden=(128,),
                 activation='leaky_relu', slope=LEAKY_RELU_SLOPE, seed=0, zero_last=False):
        self.global_width = int(global_width)
        self.feature_width = int(feature_width)
        self.n_min = int(n_min)
        self.n_max = int(n_max)
        self._check(ConfigurationError)
        self.mlp = Mlp([self.global_width] + [int(h) for h in hidden] + [self.n_max * (3 + self.feature_width)],
                       activation=activation, slope=slope, seed=seed, zero_last=zero_last)

    def __repr__(self):
        return "DecoderParams(%d -> %d x (3 + %d), n_min=%d)" % (self.global_width, self.n_max, self.feature_width, self.n_min)

    def _check(self, error=RuntimeError):
        if not (1 <= self.n_min <= self.n_max <= MAX_NODES):
            raise error('node count bounds must satisfy 1 <= %d <= %d <= %d' % (self.n_min, self.n_max, MAX_NODES))
        if self.feature_width < 1:
            raise error('the decoder needs at least one node feature')

    @property
    def bounds(self):
        return (self.n_min, self.n_max)

    def parameters(self):
        return self.mlp.parameters()

def decode(global_feature, target_n, params):
    r"""
    Decode ``target_n`` joints and node features from the ``1 x G`` global
    feature. The adjacency of the returned skeleton is empty.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant
        >>> from skelgraph.encdec import DecoderParams, decode
        >>> dec = DecoderParams(2, feature_width=1, n_min=2, n_max=3, zero_last=True)
        >>> decode(constant([[1.0, -1.0]]), 2, dec).joints.value.tolist()
        [[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]]

        >>> decode(constant([[1.0, -1.0]]), 4, dec)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: node count 4 outside of [2, 3]
    """
    if not isinstance(global_feature, DiffValue):
        global_feature = constant(global_feature)
    n = int(target_n)
    if not params.n_min <= n <= params.n_max:
        raise ParameterError('node count %d outside of [%d, %d]' % (n, params.n_min, params.n_max))
    width = 3 + params.feature_width
    slots = reshape(params.mlp(global_feature), params.n_max, width)
    used = submatrix(slots, rows=(0, n))
    joints = sigmoid(submatrix(used, cols=(0, 3)))
    features = submatrix(used, cols=(3, width))
    return SkeletonGraph(joints, None, features, check=False)

def entropy_node_count(H, M, bounds):
    r"""
    Map the entropy ``H`` linearly from `[0, \log M]` to ``bounds``,
    rounding half up and clamping.

    EXAMPLES::

        >>> import math
        >>> from skelgraph.encdec import entropy_node_count
        >>> entropy_node_count(0.0, 16, (4, 12))
        4
        >>> entropy_node_count(math.log(16), 16, (4, 12))
        12
        >>> entropy_node_count(0.5 * math.log(16), 16, (4, 12))
        8
        >>> entropy_node_count(10.0, 16, (4, 12))
        12
    """
    n_min, n_max = bounds
    if M <= 1:
        return int(n_min)
    x = n_min + (n_max - n_min) * H / math.log(M)
    return int(min(n_max, max(n_min, math.floor(x + 0.5))))

def adaptive_node_count(pc, k, bounds):
    r"""
    Number of joints to decode for the cloud ``pc``: the structural entropy
    of the Laplacian of its ``k``-nearest-neighbour graph, mapped by
    :func:`entropy_node_count`.

    EXAMPLES::

        >>> from skelgraph.graphcore import PointCloud
        >>> from skelgraph.encdec import adaptive_node_count
        >>> pc = PointCloud([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
        >>> 2 <= adaptive_node_count(pc, 1, (2, 9)) <= 9
        True
    """
    P = _points(pc)
    A = knn_graph(P, k).astype(float)
    L = np.diag(A.sum(axis=1)) - A
    H = structural_entropy(L)
    n = entropy_node_count(H, P.shape[0], bounds)
    logger.debug('adaptive_node_count: entropy %.6g on %d points -> %d joints', H, P.shape[0], n)
    return n
