r"""
Evaluation metrics of predicted skeletons.

All metrics compare a predicted skeleton with a ground truth skeleton
through a node correspondence computed by :func:`match_nodes`, the
assignment of minimal total squared distance between the joints. Predicted
edges are the pairs whose soft adjacency exceeds
:data:`~skelgraph.constants.EDGE_THRESHOLD`.

- :func:`mpjpe` -- mean distance between matched joints, an unmatched joint
  costing the diameter of the unit box
- :func:`graph_edit_distance` -- unit cost node and edge insertions and
  deletions, exact on small graphs
- :func:`spectral_consistency` -- ``1 / (1 + |lambda_pred - lambda_gt|)`` on
  the lowest Laplacian eigenvalues
- :func:`topological_fidelity` -- F1 score of the predicted edges

EXAMPLES::

    >>> from skelgraph.graphcore import SkeletonGraph
    >>> from skelgraph.metrics import evaluate_pair
    >>> P3 = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
    >>> K3 = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (0, 2), (1, 2)])
    >>> evaluate_pair(P3, P3)
    (0.0, 0.0, 1.0, 1.0)
    >>> mpjpe, ged, sc, tf = evaluate_pair(P3, K3, K=3)
    >>> ged, round(sc, 12), round(tf, 12)
    (1.0, 0.333333333333, 0.8)
"""
from __future__ import absolute_import
from six.moves import range, zip

import logging
import math
from array import array

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .constants import EDGE_THRESHOLD, UNIT_BOX_DIAMETER, GED_EXACT_LIMIT, TIE_TOLERANCE
from .errors import InvariantError, ParseError
from .graphcore import SkeletonGraph, binary_adjacency
from .permutation import edges_relabel
from .spectral import laplacian_spectrum, padded_spectrum

logger = logging.getLogger(__name__)

def _joints(s):
    if isinstance(s, SkeletonGraph):
        return s.joints.value
    return np.asarray(s, dtype=float)

def _graph(s, threshold):
    return s.num_joints(), s.hard_edges(threshold)

def _assignment(C, rows, cols):
    r"""
    Optimal assignment of the submatrix ``C[rows][:, cols]`` as a pair
    ``(cost, pairs)`` in the indices of ``C``.
    """
    if not rows or not cols:
        return 0.0, []
    sub = C[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub)
    return float(sub[r, c].sum()), [(rows[i], cols[j]) for i, j in zip(r, c)]

def lexicographic_assignment(C, tol=TIE_TOLERANCE):
    r"""
    Return the sorted pairs of a minimum cost assignment of ``min(N_p, N_g)``
    rows of the cost matrix ``C`` to its columns. Among the optimal
    assignments the one whose sorted list of pairs is lexicographically
    smallest is returned, so that ties go to the lowest index pairs.
    Totals within a relative ``tol`` of the optimum count as optimal.

    EXAMPLES::

        >>> from skelgraph.metrics import lexicographic_assignment
        >>> lexicographic_assignment([[1.0, 1.0], [1.0, 1.0]])
        [(0, 0), (1, 1)]
        >>> lexicographic_assignment([[1.0, 1.0, 1.0]])
        [(0, 0)]
        >>> lexicographic_assignment([[2.0], [1.0], [1.0]])
        [(1, 0)]
    """
    C = np.asarray(C, dtype=float)
    n_p, n_g = C.shape
    k = min(n_p, n_g)
    best, current = _assignment(C, list(range(n_p)), list(range(n_g)))
    bound = best + tol * max(1.0, abs(best))
    chosen = dict(current)
    fixed = []
    fixed_cost = 0.0
    used = set()
    for i in range(n_p):
        rest = list(range(i + 1, n_p))
        limit = chosen.get(i, n_g)
        for j in range(limit):
            if j in used:
                continue
            free = [c for c in range(n_g) if c not in used and c != j]
            if len(fixed) + 1 + min(len(rest), len(free)) != k:
                continue
            cost, pairs = _assignment(C, rest, free)
            if fixed_cost + C[i, j] + cost <= bound:
                chosen = dict(fixed + [(i, j)] + pairs)
                break
        if i in chosen:
            j = chosen[i]
            fixed.append((i, j))
            fixed_cost += C[i, j]
            used.add(j)
    return sorted(fixed)

def match_nodes(pred_joints, gt_joints):
    r"""
    Return the pairs ``(i, j)`` (sorted by ``i``) of an assignment of
    ``min(N_p, N_g)`` predicted joints to ground truth joints minimizing the
    total squared distance.

    Ties go to the lowest index pairs, see :func:`lexicographic_assignment`.

    EXAMPLES::

        >>> from skelgraph.metrics import match_nodes
        >>> match_nodes([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [1, 0, 0]])
        [(0, 0), (1, 1)]
        >>> match_nodes([[0, 0, 0], [1, 0, 0]], [[0.9, 0, 0], [0.1, 0, 0]])
        [(0, 1), (1, 0)]
        >>> match_nodes([[0, 0, 0], [1, 0, 0], [0.4, 0, 0]], [[0.5, 0, 0]])
        [(2, 0)]
        >>> match_nodes([[0, 0, 0], [0, 0, 0]], [[1, 0, 0], [1, 0, 0]])
        [(0, 0), (1, 1)]
    """
    P = _joints(pred_joints)
    G = _joints(gt_joints)
    if P.shape[0] == 0 or G.shape[0] == 0:
        return []
    return lexicographic_assignment(cdist(P, G, 'sqeuclidean'))

def pairs_to_map(pairs, n):
    r"""
    Partial injective map of ``n`` nodes (``-1`` for the unmatched ones)
    from a list of pairs.

    EXAMPLES::

        >>> from skelgraph.metrics import pairs_to_map
        >>> list(pairs_to_map([(0, 2), (2, 0)], 3))
        [2, -1, 0]
    """
    p = array('l', [-1] * n)
    for i, j in pairs:
        p[i] = j
    return p

def mpjpe(pred, gt, pairs=None):
    r"""
    Mean per joint position error.

    The matched pairs contribute their distance, every unmatched joint of
    the larger skeleton contributes `\sqrt{3}`, and the sum is divided by
    ``max(N_p, N_g)``.

    EXAMPLES::

        >>> from skelgraph.metrics import mpjpe
        >>> mpjpe([[0, 0, 0], [1, 1, 1]], [[3, 4, 0], [4, 5, 1]])
        5.0
        >>> x = mpjpe([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 0, 0], [1, 0, 0]])
        >>> bool(abs(x - 3 ** 0.5 / 3) < 1e-15)
        True
    """
    P = _joints(pred)
    G = _joints(gt)
    if pairs is None:
        pairs = match_nodes(P, G)
    n = max(P.shape[0], G.shape[0])
    if n == 0:
        return 0.0
    total = sum(float(np.linalg.norm(P[i] - G[j])) for i, j in pairs)
    total += UNIT_BOX_DIAMETER * (n - len(pairs))
    return total / n

def mapped_edit_cost(n_a, edges_a, n_b, edges_b, p):
    r"""
    Edit cost of the graphs ``(n_a, edges_a)`` and ``(n_b, edges_b)`` under
    the partial injective map ``p`` (``p[i] = -1`` for a node without image).

    Mapped nodes are substituted for free; every other node is inserted or
    deleted, and every edge not preserved by ``p`` is inserted or deleted, at
    unit cost.

    EXAMPLES::

        >>> from skelgraph.metrics import mapped_edit_cost
        >>> mapped_edit_cost(3, [(0, 1), (1, 2)], 3, [(0, 1), (0, 2), (1, 2)], [0, 1, 2])
        1
        >>> mapped_edit_cost(2, [(0, 1)], 3, [(0, 1)], [-1, 0])
        5
    """
    matched = sum(1 for v in p if v != -1)
    common = len(set(edges_relabel(edges_a, p)) & set(tuple(e) for e in edges_b))
    return (n_a - matched) + (n_b - matched) + len(edges_a) + len(edges_b) - 2 * common

def exact_edit_distance(n_a, edges_a, n_b, edges_b, upper=None):
    r"""
    Minimal edit cost over the injective maps of the smaller graph into the
    larger one, by branch and bound.

    ``upper`` is an optional injective map of the smaller graph (the first
    one when both have the same size) into the other used as initial bound.

    EXAMPLES::

        >>> from skelgraph.metrics import exact_edit_distance
        >>> exact_edit_distance(3, [(0, 1), (1, 2)], 3, [(0, 2), (1, 2)])
        0
        >>> exact_edit_distance(4, [(0, 1), (1, 2), (2, 3), (0, 3)], 3, [(0, 1), (1, 2), (0, 2)])
        4
    """
    if n_a > n_b:
        n_a, edges_a, n_b, edges_b = n_b, edges_b, n_a, edges_a
    S = binary_adjacency(n_a, edges_a) > 0
    L = binary_adjacency(n_b, edges_b) > 0
    m_s = len(edges_a)
    m_l = len(edges_b)

    # lower[u]: neighbours w < u of u; decided[u]: edges with both ends < u
    lower = [[w for w in range(u) if S[u, w]] for u in range(n_a)]
    decided = [0] * (n_a + 1)
    for u in range(n_a):
        decided[u + 1] = decided[u] + len(lower[u])

    phi = [-1] * n_a
    used = [False] * n_b
    best = [-1]
    if upper is not None and len(upper) == n_a and -1 not in upper:
        best[0] = len(set(edges_relabel(edges_a, upper)) & set(tuple(e) for e in edges_b))

    def rec(u, common):
        if min(common + m_s - decided[u], m_l) <= best[0]:
            return
        if u == n_a:
            best[0] = common
            return
        for v in range(n_b):
            if used[v]:
                continue
            gain = 0
            for w in lower[u]:
                if L[v, phi[w]]:
                    gain += 1
            used[v] = True
            phi[u] = v
            rec(u + 1, common + gain)
            used[v] = False
        phi[u] = -1

    rec(0, 0)
    return (n_b - n_a) + m_s + m_l - 2 * best[0]

def graph_edit_distance(n_pred, pred_edges, n_gt, gt_edges, exact_limit=GED_EXACT_LIMIT, pairs=None):
    r"""
    Graph edit distance with unit costs between ``(n_pred, pred_edges)`` and
    ``(n_gt, gt_edges)``.

    If both graphs have at most ``exact_limit`` nodes the exact distance is
    returned. Otherwise the cost of the correspondence ``pairs`` (the
    identity on the common nodes when ``None``) is returned, which is an
    upper bound.

    EXAMPLES::

        >>> from skelgraph.metrics import graph_edit_distance
        >>> graph_edit_distance(3, [(0, 1), (1, 2)], 3, [(0, 1), (1, 2)])
        0.0
        >>> graph_edit_distance(3, [(0, 1), (1, 2)], 3, [(0, 1), (0, 2), (1, 2)])
        1.0
        >>> graph_edit_distance(3, [(0, 1), (1, 2)], 3, [(0, 1), (0, 2)], exact_limit=2)
        2.0
    """
    if pairs is None:
        pairs = [(i, i) for i in range(min(n_pred, n_gt))]
    p = pairs_to_map(pairs, n_pred)
    if max(n_pred, n_gt) <= exact_limit:
        if n_pred <= n_gt:
            upper = p if len(pairs) == n_pred else None
        else:
            upper = pairs_to_map([(j, i) for i, j in pairs], n_gt) if len(pairs) == n_gt else None
        return float(exact_edit_distance(n_pred, pred_edges, n_gt, gt_edges, upper))
    logger.debug('graph_edit_distance: %d and %d nodes, using the matching bound', n_pred, n_gt)
    return float(mapped_edit_cost(n_pred, pred_edges, n_gt, gt_edges, p))

def spectral_consistency(pred, gt, K=None, threshold=EDGE_THRESHOLD):
    r"""
    ``1 / (1 + |lambda_pred - lambda_gt|)`` where ``lambda`` are the ``K``
    lowest Laplacian eigenvalues of the hard graphs (default ``K`` is the
    larger number of joints), padded with zeros at the bottom.

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.metrics import spectral_consistency
        >>> J = [[0, 0, 0], [0.5, 0, 0], [1, 0, 0]]
        >>> P3 = SkeletonGraph.from_edges(J, [(0, 1), (1, 2)])
        >>> K3 = SkeletonGraph.from_edges(J, [(0, 1), (0, 2), (1, 2)])
        >>> spectral_consistency(P3, P3)
        1.0
        >>> round(spectral_consistency(P3, K3, 3), 12)
        0.333333333333
    """
    n_p, e_p = _graph(pred, threshold)
    n_g, e_g = _graph(gt, threshold)
    if K is None:
        K = max(n_p, n_g)
    lp = padded_spectrum(laplacian_spectrum(n_p, e_p), K)
    lg = padded_spectrum(laplacian_spectrum(n_g, e_g), K)
    gap = float(np.linalg.norm(lp - lg))
    if gap < 1e-12:
        gap = 0.0
    return 1.0 / (1.0 + gap)

def topological_fidelity(pred, gt, pairs=None, threshold=EDGE_THRESHOLD):
    r"""
    F1 score of the predicted edges mapped through the node correspondence
    against the ground truth edges. Two graphs without edges score ``1``.

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.metrics import topological_fidelity
        >>> J = [[0, 0, 0], [0.5, 0, 0], [1, 0, 0]]
        >>> P3 = SkeletonGraph.from_edges(J, [(0, 1), (1, 2)])
        >>> K3 = SkeletonGraph.from_edges(J, [(0, 1), (0, 2), (1, 2)])
        >>> round(topological_fidelity(P3, K3), 12)
        0.8
        >>> topological_fidelity(SkeletonGraph(J), K3)
        0.0
        >>> topological_fidelity(SkeletonGraph(J), SkeletonGraph(J))
        1.0
    """
    n_p, e_p = _graph(pred, threshold)
    n_g, e_g = _graph(gt, threshold)
    if not e_p and not e_g:
        return 1.0
    if not e_p or not e_g:
        return 0.0
    if pairs is None:
        pairs = match_nodes(pred, gt)
    tp = len(set(edges_relabel(e_p, pairs_to_map(pairs, n_p))) & set(e_g))
    if tp == 0:
        return 0.0
    precision = tp / float(len(e_p))
    recall = tp / float(len(e_g))
    return 2 * precision * recall / (precision + recall)

def evaluate_pair(pred, gt, K=None, threshold=EDGE_THRESHOLD, exact_limit=GED_EXACT_LIMIT):
    r"""
    Return ``(mpjpe, ged, sc, tf)`` of the skeleton ``pred`` against ``gt``
    with a single node matching.
    """
    pairs = match_nodes(pred, gt)
    n_p, e_p = _graph(pred, threshold)
    n_g, e_g = _graph(gt, threshold)
    return (mpjpe(pred, gt, pairs),
            graph_edit_distance(n_p, e_p, n_g, e_g, exact_limit, pairs),
            spectral_consistency(pred, gt, K, threshold),
            topological_fidelity(pred, gt, pairs, threshold))

FIELDS = ['mpjpe', 'ged', 'sc', 'tf']

class SampleMetrics(object):
    r"""
    The four metrics of one sample.
    """
    __slots__ = ['id', 'category', 'mpjpe', 'ged', 'sc', 'tf']

    def __init__(self, id, category, mpjpe, ged, sc, tf):
        self.id = str(id)
        self.category = str(category)
        self.mpjpe = float(mpjpe)
        self.ged = float(ged)
        self.sc = float(sc)
        self.tf = float(tf)

    def __repr__(self):
        return "SampleMetrics(%r, %s, mpjpe=%.4g, ged=%g, sc=%.4g, tf=%.4g)" % (
                self.id, self.category, self.mpjpe, self.ged, self.sc, self.tf)

    def __eq__(self, other):
        return type(self) is type(other) and all(getattr(self, a) == getattr(other, a) for a in self.__slots__)

    def __ne__(self, other):
        return not (self == other)

    def values(self):
        return tuple(getattr(self, f) for f in FIELDS)

def _means(samples):
    if not samples:
        return (0.0, 0.0, 0.0, 0.0)
    return tuple(float(np.mean([getattr(s, f) for s in samples])) for f in FIELDS)

class MetricsReport(object):
    r"""
    Mean metrics of an evaluation and the metrics of every sample.

    EXAMPLES::

        >>> from skelgraph.metrics import MetricsReport, SampleMetrics
        >>> R = MetricsReport.from_samples([SampleMetrics('a', 'chain', 0.1, 2, 0.5, 1.0),
        ...                                 SampleMetrics('b', 'cycle', 0.3, 0, 1.0, 0.5)])
        >>> R
        MetricsReport(2 samples, mpjpe=0.2, ged=1, sc=0.75, tf=0.75)
        >>> sorted(R.per_category())
        ['chain', 'cycle']
        >>> MetricsReport.from_text(R.to_text()) == R
        True
    """
    __slots__ = ['mpjpe', 'ged', 'sc', 'tf', 'per_sample']

    def __init__(self, mpjpe, ged, sc, tf, per_sample=(), check=True):
        self.mpjpe = float(mpjpe)
        self.ged = float(ged)
        self.sc = float(sc)
        self.tf = float(tf)
        self.per_sample = list(per_sample)
        if check:
            self._check(InvariantError)

    @staticmethod
    def from_samples(samples):
        samples = list(samples)
        return MetricsReport(*_means(samples), per_sample=samples)

    def __repr__(self):
        return "MetricsReport(%d samples, mpjpe=%.4g, ged=%.4g, sc=%.4g, tf=%.4g)" % (
                len(self.per_sample), self.mpjpe, self.ged, self.sc, self.tf)

    def __eq__(self, other):
        return type(self) is type(other) and \
               self.values() == other.values() and \
               self.per_sample == other.per_sample

    def __ne__(self, other):
        return not (self == other)

    def _check(self, error=RuntimeError):
        for s in [self] + self.per_sample:
            v = s.values()
            if not all(math.isfinite(x) and x >= 0 for x in v):
                raise error('metrics must be finite and nonnegative, got %s' % (v,))
            if s.sc > 1 or s.tf > 1:
                raise error('sc and tf must lie in [0, 1], got %s and %s' % (s.sc, s.tf))

    def values(self):
        return tuple(getattr(self, f) for f in FIELDS)

    def per_category(self):
        r"""
        Return a dictionary ``category -> (mpjpe, ged, sc, tf)`` of means.
        """
        cats = {}
        for s in self.per_sample:
            cats.setdefault(s.category, []).append(s)
        return {c: _means(l) for c, l in cats.items()}

    def to_text(self):
        r"""
        Serialize as ``key = value`` lines followed by one ``sample`` line
        per sample.
        """
        lines = ['# skelgraph metrics report']
        for f in FIELDS:
            lines.append('%s = %.17g' % (f, getattr(self, f)))
        lines.append('samples = %d' % len(self.per_sample))
        for s in self.per_sample:
            lines.append('sample = %s, %s, %.17g, %.17g, %.17g, %.17g' % ((s.id, s.category) + s.values()))
        for c, means in sorted(self.per_category().items()):
            lines.append('category = %s, %.17g, %.17g, %.17g, %.17g' % ((c,) + means))
        return '\n'.join(lines) + '\n'

    @staticmethod
    def from_text(text):
        r"""
        Parse the output of :meth:`to_text`. The ``category`` lines are
        recomputed and ignored.
        """
        values = {}
        samples = []
        count = None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ParseError("expected 'key = value', got %r" % line, lineno)
            key, value = (x.strip() for x in line.split('=', 1))
            try:
                if key in FIELDS:
                    values[key] = float(value)
                elif key == 'samples':
                    count = int(value)
                elif key == 'sample':
                    fields = [x.strip() for x in value.split(',')]
                    if len(fields) != 6:
                        raise ParseError('a sample line has 6 fields, got %d' % len(fields), lineno)
                    samples.append(SampleMetrics(fields[0], fields[1], *[float(x) for x in fields[2:]]))
                elif key == 'category':
                    pass
                else:
                    raise ParseError("unknown key '%s'" % key, lineno)
            except ValueError as e:
                if isinstance(e, ParseError):
                    raise
                raise ParseError('invalid value for %s: %s' % (key, e), lineno)
        missing = [f for f in FIELDS if f not in values]
        if missing:
            raise ParseError('missing keys %s' % ', '.join(missing))
        if count is not None and count != len(samples):
            raise ParseError('%d samples announced, %d found' % (count, len(samples)))
        return MetricsReport(per_sample=samples, **values)
