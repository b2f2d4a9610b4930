r"""
Skeleton graphs and point clouds.

A skeleton graph is made of ``N`` joints in the unit box, a soft symmetric
adjacency matrix with entries in `[0, 1]` and per-joint features. All three
are :class:`~skelgraph.diffcore.DiffValue` so that the Laplacian of a
predicted skeleton can be differentiated.

EXAMPLES::

    >>> from skelgraph.graphcore import SkeletonGraph, laplacian
    >>> S = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
    >>> S
    SkeletonGraph(3 joints, 2 edges)
    >>> laplacian(S).value.tolist()
    [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
"""
from __future__ import absolute_import
from six.moves import range

import numpy as np
from scipy.spatial.distance import cdist

from . import env
from .env import as_matrix
from .constants import SYMMETRY_TOL, EDGE_THRESHOLD
from .diffcore import DiffValue, constant, diag, sub, reduce_sum, take_rows, transpose
from .errors import InvariantError, DataError, ParameterError
from .permutation import perm_invert, perm_check

def _as_value(x):
    return x if isinstance(x, DiffValue) else constant(x)

def binary_adjacency(n, edges):
    r"""
    Return the ``n x n`` 0/1 adjacency matrix of an undirected edge list.

    EXAMPLES::

        >>> from skelgraph.graphcore import binary_adjacency
        >>> binary_adjacency(3, [(0, 2)]).tolist()
        [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
    """
    A = np.zeros((n, n))
    for i, j in edges:
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise InvariantError('invalid edge (%s, %s) for %d nodes' % (i, j, n))
        A[i, j] = A[j, i] = 1.0
    return A

def binary_laplacian(n, edges):
    r"""
    Laplacian of an unweighted graph as a numpy array.

    EXAMPLES::

        >>> from skelgraph.graphcore import binary_laplacian
        >>> binary_laplacian(2, [(0, 1)]).tolist()
        [[1.0, -1.0], [-1.0, 1.0]]
    """
    A = binary_adjacency(n, edges)
    return np.diag(A.sum(axis=1)) - A

class SkeletonGraph(object):
    r"""
    Joints, soft adjacency and node features of a skeleton.

    INPUT:

    - ``joints`` -- ``N x 3`` matrix or value

    - ``adjacency`` -- ``N x N`` symmetric matrix or value with zero diagonal
      and entries in `[0, 1]` (default: no edges)

    - ``node_features`` -- ``N x F`` matrix or value (default: ``F = 0``)

    - ``check`` -- whether to verify the invariants

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> SkeletonGraph([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]], [[0.0, 0.3], [0.3, 0.0]])
        SkeletonGraph(2 joints, 0 edges)

        >>> SkeletonGraph([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]], [[0.0, 0.3], [0.7, 0.0]])
        Traceback (most recent call last):
        ...
        skelgraph.errors.InvariantError: adjacency is not symmetric (deviation 0.4)

        >>> SkeletonGraph([[0.0, float('nan'), 0.0]])
        Traceback (most recent call last):
        ...
        skelgraph.errors.InvariantError: joints contain NaN or Inf
    """
    __slots__ = ['joints', 'adjacency', 'node_features']

    def __init__(self, joints, adjacency=None, node_features=None, check=True):
        self.joints = _as_value(joints)
        n = self.joints.rows
        self.adjacency = _as_value(np.zeros((n, n)) if adjacency is None else adjacency)
        self.node_features = _as_value(np.zeros((n, 0)) if node_features is None else node_features)
        if check:
            self._check(InvariantError)

    @staticmethod
    def from_edges(joints, edges, node_features=None, check=True):
        joints = _as_value(joints)
        return SkeletonGraph(joints, binary_adjacency(joints.rows, edges), node_features, check=check)

    def _check(self, error=RuntimeError):
        J = self.joints.value
        A = self.adjacency.value
        n = J.shape[0]
        if n < 1:
            raise error('a skeleton needs at least one joint')
        if J.shape[1] != 3:
            raise error('joints must have 3 columns, got shape %s' % (J.shape,))
        if not np.isfinite(J).all():
            raise error('joints contain NaN or Inf')
        if A.shape != (n, n):
            raise error('adjacency of shape %s for %d joints' % (A.shape, n))
        dev = np.abs(A - A.T).max()
        if dev > SYMMETRY_TOL:
            raise error('adjacency is not symmetric (deviation %.3g)' % dev)
        if np.any(np.diag(A) != 0):
            raise error('adjacency has a nonzero diagonal')
        if A.min() < 0 or A.max() > 1:
            raise error('adjacency entries outside [0, 1]')
        if self.node_features.rows != n:
            raise error('node features of shape %s for %d joints' % (self.node_features.shape, n))

    def __repr__(self):
        return "SkeletonGraph(%d joints, %d edges)" % (self.num_joints(), len(self.hard_edges()))

    def num_joints(self):
        return self.joints.rows

    def num_features(self):
        return self.node_features.cols

    def hard_edges(self, threshold=EDGE_THRESHOLD):
        r"""
        Return the sorted list of pairs ``(i, j)``, ``i < j``, whose
        adjacency exceeds ``threshold``.
        """
        from .dgcn import extract_hard_edges
        return extract_hard_edges(self.adjacency.value, threshold)

    def binarized(self, threshold=EDGE_THRESHOLD):
        r"""
        Return a constant copy with 0/1 adjacency.
        """
        return SkeletonGraph.from_edges(self.joints.value, self.hard_edges(threshold), self.node_features.value)

    def detach(self):
        return SkeletonGraph(self.joints.detach(), self.adjacency.detach(), self.node_features.detach(), check=False)

    def relabel(self, p):
        r"""
        Return the skeleton where joint ``i`` is renamed ``p[i]``.

        EXAMPLES::

            >>> from skelgraph.graphcore import SkeletonGraph
            >>> S = SkeletonGraph.from_edges([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [(0, 1)])
            >>> T = S.relabel([2, 0, 1])
            >>> T.hard_edges()
            [(0, 2)]
            >>> T.joints.value[2].tolist()
            [0.0, 0.0, 0.0]
        """
        from array import array
        p = array('l', p)
        n = self.num_joints()
        if not perm_check(p, n) or -1 in p:
            raise ValueError('invalid relabelling permutation')
        q = perm_invert(p)
        A = transpose(take_rows(transpose(take_rows(self.adjacency, q)), q))
        S = SkeletonGraph(take_rows(self.joints, q), A, take_rows(self.node_features, q), check=False)
        if env.CHECK:
            S._check()
        return S

def laplacian(g):
    r"""
    Return the Laplacian ``L = D - A`` of the skeleton ``g`` where ``D`` is
    the diagonal matrix of the row sums of the soft adjacency ``A``.

    The result is differentiable with respect to the adjacency entries.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.graphcore import SkeletonGraph, laplacian
        >>> S = SkeletonGraph(np.zeros((3, 3)))
        >>> laplacian(S).value.tolist()
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    """
    A = g.adjacency if isinstance(g, SkeletonGraph) else _as_value(g)
    dev = np.abs(A.value - A.value.T).max() if A.value.size else 0.0
    if dev > SYMMETRY_TOL:
        raise InvariantError('adjacency is not symmetric (deviation %.3g)' % dev)
    return sub(diag(reduce_sum(A, axis=1)), A)

class PointCloud(object):
    r"""
    Points normalized into the unit box.

    Attributes:

    * ``points`` -- ``M x 3`` numpy array inside `[0, 1]^3`
    * ``scale``, ``offset`` -- the transform ``x -> scale * x + offset``
      that produced ``points`` from the raw input
    * ``degenerate`` -- whether all raw points coincided

    EXAMPLES::

        >>> from skelgraph.graphcore import normalize_pointcloud
        >>> pc = normalize_pointcloud([[-2, 0, 0], [2, 1, 0]])
        >>> pc
        PointCloud(2 points)
        >>> pc.scale
        0.25
        >>> pc.points.tolist()
        [[0.0, 0.0, 0.0], [1.0, 0.25, 0.0]]
    """
    __slots__ = ['points', 'scale', 'offset', 'degenerate']

    def __init__(self, points, scale=1.0, offset=(0.0, 0.0, 0.0), degenerate=False, check=True):
        self.points = as_matrix(points)
        self.scale = float(scale)
        self.offset = np.asarray(offset, dtype=float).reshape(3)
        self.degenerate = bool(degenerate)
        if check:
            self._check(InvariantError)

    def _check(self, error=RuntimeError):
        P = self.points
        if P.shape[0] < 1 or P.shape[1] != 3:
            raise error('a point cloud is a non-empty M x 3 matrix, got shape %s' % (P.shape,))
        if not np.isfinite(P).all():
            raise error('point cloud contains NaN or Inf')
        if P.min() < -1e-9 or P.max() > 1 + 1e-9:
            raise error('point cloud not inside the unit box')

    def __repr__(self):
        return "PointCloud(%d points)" % self.num_points()

    def __len__(self):
        return self.points.shape[0]

    def num_points(self):
        return self.points.shape[0]

    def transform(self, x):
        r"""
        Apply the normalization transform of this cloud to other coordinates.
        """
        return as_matrix(x) * self.scale + self.offset

def unit_box_transform(raw):
    r"""
    Return ``(scale, offset, degenerate)`` of the isotropic map sending the
    points ``raw`` into the unit box, the longest extent onto `[0, 1]`.

    Axes that already fit in `[0, 1]` after scaling are not moved; the others
    are shifted by the smallest amount that brings them in. All-identical
    points go to the center of the box.

    EXAMPLES::

        >>> from skelgraph.graphcore import unit_box_transform
        >>> unit_box_transform([[1, 1, 1], [1, 1, 1]])
        (1.0, [-0.5, -0.5, -0.5], True)
    """
    P = as_matrix(raw)
    if P.shape[0] < 1 or P.shape[1] != 3:
        raise DataError('expected a non-empty M x 3 matrix, got shape %s' % (P.shape,))
    bad = np.flatnonzero(~np.isfinite(P).all(axis=1))
    if bad.size:
        raise DataError('point %d has a non-finite coordinate' % bad[0])
    lo = P.min(axis=0)
    hi = P.max(axis=0)
    extent = (hi - lo).max()
    if extent == 0:
        return 1.0, (0.5 - P[0]).tolist(), True
    s = 1.0 / extent
    lo = lo * s
    hi = hi * s
    offset = np.where(lo < 0, -lo, np.where(hi > 1, 1 - hi, 0.0))
    return s, offset.tolist(), False

def normalize_pointcloud(raw):
    r"""
    Return the :class:`PointCloud` obtained by isotropically mapping ``raw``
    into the unit box.

    EXAMPLES::

        >>> from skelgraph.graphcore import normalize_pointcloud
        >>> normalize_pointcloud([[0, 0.2, 0.2], [1, 0.4, 0.3]]).points.tolist()
        [[0.0, 0.2, 0.2], [1.0, 0.4, 0.3]]
        >>> normalize_pointcloud([[3, 4, 5], [3, 4, 5]]).points.tolist()
        [[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]]

        >>> normalize_pointcloud([[0, 0, 0], [1, float('inf'), 0]])
        Traceback (most recent call last):
        ...
        skelgraph.errors.DataError: point 1 has a non-finite coordinate
    """
    P = as_matrix(raw)
    s, offset, degenerate = unit_box_transform(P)
    Q = np.clip(P * s + np.asarray(offset), 0.0, 1.0)
    return PointCloud(Q, s, offset, degenerate)

def knn_graph(pc, k):
    r"""
    Return the symmetric (union) ``k``-nearest-neighbour adjacency of the
    points of ``pc`` as a boolean matrix with zero diagonal. Ties in
    distance are broken by the lowest index.

    EXAMPLES::

        >>> from skelgraph.graphcore import PointCloud, knn_graph
        >>> pc = PointCloud([[0, 0, 0], [0.1, 0, 0], [1, 0, 0]])
        >>> knn_graph(pc, 1).astype(int).tolist()
        [[0, 1, 0], [1, 0, 1], [0, 1, 0]]

        >>> knn_graph(pc, 3)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: k = 3 must be smaller than the number of points 3
    """
    P = pc.points if isinstance(pc, PointCloud) else as_matrix(pc)
    M = P.shape[0]
    k = int(k)
    if k >= M or k < 1:
        raise ParameterError('k = %d must be smaller than the number of points %d' % (k, M))
    D = cdist(P, P)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind='stable')[:, :k]
    K = np.zeros((M, M), dtype=bool)
    K[np.repeat(np.arange(M), k), nn.ravel()] = True
    return K | K.T
