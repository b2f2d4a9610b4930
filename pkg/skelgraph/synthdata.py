r"""
Synthetic skeletons, point clouds and datasets.

Five categories of ground truth skeletons are generated procedurally:

- ``chain`` -- a path following a random walk
- ``tree`` -- every new joint branches off a random earlier joint
- ``star`` -- one hub joined to every other joint
- ``cycle`` -- a single loop around a random plane
- ``bicycle_like`` -- two wheels (4-cycles) joined by a frame path, and a
  two joint handlebar on the frame when there are more than 10 joints

A point cloud is sampled uniformly along the edges (by length) with
isotropic Gaussian noise. Points and joints of a sample are mapped together
into the unit box.

All randomness comes from :func:`skelgraph.env.random_state` (``PCG64``),
so that the same seed gives byte-identical dataset files.

Dataset files have one header line ``{"schema_version": 1, ...}`` followed
by one record per line with the keys ``id``, ``category``, ``points``,
``gt_joints``, ``gt_edges`` and ``meta``. Coordinates are written with 17
significant digits.

EXAMPLES::

    >>> from skelgraph.constants import CYCLE
    >>> from skelgraph.synthdata import generate_sample
    >>> r = generate_sample(CYCLE, 6, 50, 0.01, seed=3)
    >>> r
    SampleRecord('cycle-3', cycle, 6 joints, 6 edges, 50 points)
    >>> r.skeleton()
    SkeletonGraph(6 joints, 6 edges)
"""
from __future__ import absolute_import
from six.moves import range, zip
from six import string_types

import hashlib
import io
import json
import logging
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .constants import (CHAIN, TREE, STAR, CYCLE, BICYCLE_LIKE, MIN_JOINTS,
        category_from_string, category_to_string)
from .env import random_state, as_matrix
from .errors import DataError, InvariantError, ParameterError, ParseError
from .graphcore import PointCloud, SkeletonGraph, normalize_pointcloud, unit_box_transform

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SPLITS = ('train', 'val', 'test')

def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)

def _rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    return Q * np.sign(np.diag(R))

def _sorted_edges(edges):
    return sorted(set((min(i, j), max(i, j)) for i, j in edges))

def _chain(n, rng):
    joints = np.zeros((n, 3))
    d = _unit(rng)
    for i in range(1, n):
        d = d + 0.6 * rng.normal(size=3)
        d /= np.linalg.norm(d)
        joints[i] = joints[i - 1] + rng.uniform(0.5, 1.0) * d
    return joints, [(i, i + 1) for i in range(n - 1)]

def _tree(n, rng):
    joints = np.zeros((n, 3))
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        joints[i] = joints[parent] + rng.uniform(0.5, 1.0) * _unit(rng)
        edges.append((parent, i))
    return joints, edges

def _star(n, rng):
    joints = np.zeros((n, 3))
    for i in range(1, n):
        joints[i] = rng.uniform(0.6, 1.0) * _unit(rng)
    return joints, [(0, i) for i in range(1, n)]

def _cycle(n, rng):
    basis = _rotation(rng)[:, :2]
    theta = 2 * math.pi * (np.arange(n) + rng.uniform(-0.2, 0.2, size=n)) / n
    radius = rng.uniform(0.8, 1.2, size=n)
    joints = (radius * np.cos(theta))[:, None] * basis[:, 0] + (radius * np.sin(theta))[:, None] * basis[:, 1]
    return joints, [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]

def _bicycle_like(n, rng):
    handlebar = 2 if n > 10 else 0
    m = n - 8 - handlebar
    r = 0.6
    joints = np.zeros((n, 3))
    edges = []
    for w, cx in enumerate((-1.2, 1.2)):
        for k in range(4):
            theta = math.pi / 2 + k * math.pi / 2 + rng.uniform(-0.1, 0.1)
            joints[4 * w + k] = (cx + r * math.cos(theta), 0.0, r * math.sin(theta))
        edges.extend([(4 * w, 4 * w + 1), (4 * w + 1, 4 * w + 2), (4 * w + 2, 4 * w + 3), (4 * w, 4 * w + 3)])

    # frame from the top of the rear wheel to the top of the front wheel
    path = [0]
    for k in range(m):
        t = (k + 1.0) / (m + 1)
        joints[8 + k] = (1 - t) * joints[0] + t * joints[4] + (0.0, 0.0, 0.4 * math.sin(math.pi * t))
        joints[8 + k] += 0.05 * rng.normal(size=3)
        path.append(8 + k)
    path.append(4)
    edges.extend(zip(path, path[1:]))

    if handlebar:
        f = 8 + m - 1
        joints[n - 2] = joints[f] + (0.1, 0.0, 0.35)
        joints[n - 1] = joints[n - 2] + (0.25, 0.0, 0.05)
        edges.extend([(f, n - 2), (n - 2, n - 1)])
    return joints.dot(_rotation(rng).T), edges

_GENERATORS = {
    CHAIN: _chain,
    TREE: _tree,
    STAR: _star,
    CYCLE: _cycle,
    BICYCLE_LIKE: _bicycle_like,
    }

def _category(category):
    if isinstance(category, string_types):
        return category_from_string(category)
    if category not in _GENERATORS:
        raise ParameterError('unknown category %s' % category)
    return category

def generate_skeleton(category, n_joints, seed):
    r"""
    Return ``(joints, edges)`` of a random skeleton of the given category:
    an ``n_joints x 3`` array (not normalized) and the sorted edge list.

    EXAMPLES::

        >>> from skelgraph.synthdata import generate_skeleton
        >>> generate_skeleton('chain', 2, 0)[1]
        [(0, 1)]
        >>> len(generate_skeleton('tree', 7, 0)[1])
        6
        >>> joints, edges = generate_skeleton('bicycle_like', 11, 1)
        >>> len(edges) - 11 + 1
        2

        >>> generate_skeleton('bicycle_like', 5, 0)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: a bicycle_like skeleton needs at least 8 joints, got 5
    """
    cat = _category(category)
    n = int(n_joints)
    if n < MIN_JOINTS[cat]:
        raise ParameterError('a %s skeleton needs at least %d joints, got %d' % (category_to_string(cat), MIN_JOINTS[cat], n))
    joints, edges = _GENERATORS[cat](n, random_state(seed))
    return joints, _sorted_edges(edges)

def sample_points(joints, edges, m_points, noise_sigma, seed):
    r"""
    Return ``m_points`` points drawn uniformly along the edges of the
    skeleton (by length) plus Gaussian noise of scale ``noise_sigma``, in the
    coordinates of ``joints``.
    """
    rng = random_state(seed)
    J = as_matrix(joints)
    m = int(m_points)
    if m < 1:
        raise ParameterError('at least one point is needed, got %d' % m)
    if noise_sigma < 0:
        raise ParameterError('noise_sigma = %s is negative' % noise_sigma)
    E = np.array(edges, dtype=np.intp).reshape(-1, 2)
    lengths = np.linalg.norm(J[E[:, 0]] - J[E[:, 1]], axis=1) if len(E) else np.zeros(0)
    total = lengths.sum()
    if total > 0:
        k = rng.choice(len(E), size=m, p=lengths / total)
        t = rng.random(m)[:, None]
        P = J[E[k, 0]] + t * (J[E[k, 1]] - J[E[k, 0]])
    else:
        P = J[rng.integers(0, J.shape[0], size=m)]
    if noise_sigma > 0:
        P = P + noise_sigma * rng.normal(size=P.shape)
    return P

def sample_pointcloud(joints, edges, m_points, noise_sigma, seed):
    r"""
    Return the normalized :class:`~skelgraph.graphcore.PointCloud` of
    :func:`sample_points`.

    EXAMPLES::

        >>> from skelgraph.synthdata import sample_pointcloud
        >>> pc = sample_pointcloud([[0, 0, 0], [2, 0, 0]], [(0, 1)], 5, 0.0, 0)
        >>> pc.points[:, 1:].tolist() == [[0.0, 0.0]] * 5
        True
        >>> len(sample_pointcloud([[0, 0, 0], [2, 0, 0]], [(0, 1)], 1, 0.0, 0))
        1
    """
    return normalize_pointcloud(sample_points(joints, edges, m_points, noise_sigma, seed))

def is_connected(n, edges):
    r"""
    EXAMPLES::

        >>> from skelgraph.synthdata import is_connected
        >>> is_connected(3, [(0, 1), (1, 2)])
        True
        >>> is_connected(3, [(0, 1)])
        False
    """
    if n <= 1:
        return True
    E = np.array(edges, dtype=np.intp).reshape(-1, 2)
    A = csr_matrix((np.ones(len(E)), (E[:, 0], E[:, 1])), shape=(n, n))
    return connected_components(A, directed=False)[0] == 1

class SampleRecord(object):
    r"""
    One sample of a dataset: point cloud and ground truth skeleton.

    Attributes:

    * ``id`` -- string identifier
    * ``category`` -- category code (see :mod:`skelgraph.constants`)
    * ``points`` -- ``M x 3`` array in the unit box
    * ``gt_joints`` -- ``N x 3`` array in the unit box
    * ``gt_edges`` -- sorted list of pairs ``(i, j)`` with ``i < j``
    * ``meta`` -- dictionary with at least ``seed`` and ``degenerate``

    EXAMPLES::

        >>> from skelgraph.constants import CHAIN
        >>> from skelgraph.synthdata import SampleRecord
        >>> SampleRecord('a', CHAIN, [[0, 0, 0]], [[0, 0, 0], [1, 1, 1]], [(0, 1)], {'seed': 0})
        SampleRecord('a', chain, 2 joints, 1 edges, 1 points)
        >>> SampleRecord('b', CHAIN, [[0, 0, 0]], [[0, 0, 0], [1, 1, 1]], [], {'seed': 0})
        Traceback (most recent call last):
        ...
        skelgraph.errors.InvariantError: the skeleton of b is not connected
    """
    __slots__ = ['id', 'category', 'points', 'gt_joints', 'gt_edges', 'meta']

    def __init__(self, id, category, points, gt_joints, gt_edges, meta=None, check=True):
        self.id = str(id)
        self.category = _category(category)
        self.points = as_matrix(points, copy=True)
        self.gt_joints = as_matrix(gt_joints, copy=True)
        self.gt_edges = [(int(i), int(j)) for i, j in gt_edges]
        self.meta = dict(meta or {})
        if check:
            self._check(InvariantError)

    def __repr__(self):
        return "SampleRecord(%r, %s, %d joints, %d edges, %d points)" % (
                self.id, category_to_string(self.category), self.num_joints(),
                len(self.gt_edges), self.points.shape[0])

    def __eq__(self, other):
        return type(self) is type(other) and \
               self.id == other.id and \
               self.category == other.category and \
               np.array_equal(self.points, other.points) and \
               np.array_equal(self.gt_joints, other.gt_joints) and \
               self.gt_edges == other.gt_edges and \
               self.meta == other.meta

    def __ne__(self, other):
        return not (self == other)

    def num_joints(self):
        return self.gt_joints.shape[0]

    @property
    def category_name(self):
        return category_to_string(self.category)

    def _check(self, error=RuntimeError):
        n = self.num_joints()
        for name, X in (('points', self.points), ('gt_joints', self.gt_joints)):
            if X.shape[0] < 1 or X.shape[1] != 3:
                raise error('%s of %s must be a non-empty M x 3 matrix, got shape %s' % (name, self.id, X.shape))
            if not np.isfinite(X).all():
                raise error('%s of %s contain NaN or Inf' % (name, self.id))
            if X.min() < 0 or X.max() > 1:
                raise error('%s of %s not inside the unit box' % (name, self.id))
        if self.gt_edges != sorted(set(self.gt_edges)):
            raise error('edges of %s are not sorted and unique' % self.id)
        for i, j in self.gt_edges:
            if not 0 <= i < j < n:
                raise error('invalid edge (%d, %d) in %s with %d joints' % (i, j, self.id, n))
        if not is_connected(n, self.gt_edges):
            raise error('the skeleton of %s is not connected' % self.id)

    def skeleton(self):
        return SkeletonGraph.from_edges(self.gt_joints, self.gt_edges)

    def pointcloud(self):
        return PointCloud(self.points, degenerate=bool(self.meta.get('degenerate', False)))

def generate_sample(category, n_joints, m_points, noise, seed, id=None):
    r"""
    Generate one :class:`SampleRecord`; points and joints share the same
    normalization into the unit box.

    EXAMPLES::

        >>> from skelgraph.synthdata import generate_sample
        >>> generate_sample('star', 5, 20, 0.0, 7) == generate_sample('star', 5, 20, 0.0, 7)
        True
        >>> generate_sample('star', 5, 20, 0.0, 7, id='s').meta
        {'degenerate': False, 'noise': 0.0, 'seed': 7}
    """
    cat = _category(category)
    rng = random_state(seed)
    joints, edges = generate_skeleton(cat, n_joints, rng)
    raw = sample_points(joints, edges, m_points, noise, rng)
    s, offset, degenerate = unit_box_transform(np.vstack([raw, joints]))
    offset = np.asarray(offset)
    points = np.clip(raw * s + offset, 0.0, 1.0)
    joints = np.clip(joints * s + offset, 0.0, 1.0)
    if id is None:
        id = '%s-%d' % (category_to_string(cat), seed)
    meta = {'degenerate': bool(degenerate), 'noise': float(noise), 'seed': int(seed)}
    return SampleRecord(id, cat, points, joints, edges, meta)

def generate_dataset(categories, count, m_points=256, noise=0.01, seed=0, min_joints=4, max_joints=12):
    r"""
    Generate ``count`` records cycling through ``categories``; the number of
    joints of each record is uniform in ``[max(min_joints, minimum of the
    category), max_joints]``.

    EXAMPLES::

        >>> from skelgraph.constants import CATEGORIES
        >>> from skelgraph.synthdata import generate_dataset
        >>> D = generate_dataset(CATEGORIES, 5, m_points=30, seed=1)
        >>> [r.category_name for r in D]
        ['chain', 'tree', 'star', 'cycle', 'bicycle_like']
        >>> D[0].id
        'sample-00000'
    """
    categories = [_category(c) for c in categories]
    if not categories:
        raise ParameterError('no category given')
    rng = random_state(seed)
    records = []
    for i in range(int(count)):
        cat = categories[i % len(categories)]
        lo = max(MIN_JOINTS[cat], min_joints)
        hi = max(lo, max_joints)
        n = int(rng.integers(lo, hi + 1))
        s = int(rng.integers(0, 2 ** 31))
        records.append(generate_sample(cat, n, m_points, noise, s, 'sample-%05d' % i))
    logger.debug('generate_dataset: %d records', len(records))
    return records

def split_of(id, fractions=(0.8, 0.1, 0.1)):
    r"""
    Split (``'train'``, ``'val'`` or ``'test'``) of the record ``id``, from
    the SHA-1 hash of the identifier.

    EXAMPLES::

        >>> from skelgraph.synthdata import split_of
        >>> split_of('sample-00000') in ('train', 'val', 'test')
        True
        >>> split_of('sample-00000') == split_of('sample-00000')
        True
    """
    h = int(hashlib.sha1(id.encode('utf-8')).hexdigest()[:8], 16) / 2.0 ** 32
    if h < fractions[0]:
        return 'train'
    elif h < fractions[0] + fractions[1]:
        return 'val'
    return 'test'

def select_split(records, split):
    r"""
    Records of ``records`` that belong to ``split``.
    """
    if split not in SPLITS:
        raise ParameterError("unknown split '%s' (expected one of %s)" % (split, ', '.join(SPLITS)))
    return [r for r in records if split_of(r.id) == split]

def _format_matrix(A):
    return '[' + ','.join('[' + ','.join('%.17g' % x for x in row) + ']' for row in A) + ']'

def record_to_string(r):
    r"""
    Single line encoding of a record.

    EXAMPLES::

        >>> from skelgraph.constants import CHAIN
        >>> from skelgraph.synthdata import SampleRecord, record_to_string
        >>> r = SampleRecord('a', CHAIN, [[0.1, 0, 0]], [[0, 0, 0], [1, 1, 1]], [(0, 1)], {'seed': 0})
        >>> record_to_string(r)
        '{"id": "a", "category": "chain", "points": [[0.10000000000000001,0,0]], "gt_joints": [[0,0,0],[1,1,1]], "gt_edges": [[0,1]], "meta": {"seed": 0}}'
    """
    edges = '[' + ','.join('[%d,%d]' % e for e in r.gt_edges) + ']'
    return '{"id": %s, "category": "%s", "points": %s, "gt_joints": %s, "gt_edges": %s, "meta": %s}' % (
            json.dumps(r.id), r.category_name, _format_matrix(r.points), _format_matrix(r.gt_joints),
            edges, json.dumps(r.meta, sort_keys=True))

_KEYS = ('id', 'category', 'points', 'gt_joints', 'gt_edges', 'meta')

def record_from_string(s, line=None):
    r"""
    Inverse of :func:`record_to_string`.
    """
    try:
        d = json.loads(s)
    except ValueError as e:
        raise ParseError('invalid record: %s' % e, line)
    if not isinstance(d, dict) or any(k not in d for k in _KEYS):
        raise ParseError('a record needs the keys %s' % ', '.join(_KEYS), line)
    try:
        category = category_from_string(d['category'])
    except ValueError as e:
        raise ParseError(str(e), line)
    try:
        return SampleRecord(d['id'], category, np.array(d['points'], dtype=float),
                            np.array(d['gt_joints'], dtype=float), d['gt_edges'], d['meta'])
    except (InvariantError, ValueError, TypeError) as e:
        raise DataError('record %s: %s' % (d['id'], e), record_id=str(d['id']))

def write_dataset(records, path):
    r"""
    Write ``records`` to the file ``path``.
    """
    records = list(records)
    with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
        header = json.dumps({'schema_version': SCHEMA_VERSION, 'format': 'skelgraph-dataset', 'count': len(records)},
                            sort_keys=True)
        f.write(u'%s\n' % header)
        for r in records:
            f.write(u'%s\n' % record_to_string(r))
    logger.debug('write_dataset: %d records to %s', len(records), path)

def read_dataset(path):
    r"""
    Read the records of the dataset file ``path`` in order.

    A malformed line raises :class:`~skelgraph.errors.ParseError` with its
    line number, an invalid record :class:`~skelgraph.errors.DataError`
    with its identifier.
    """
    records = []
    with io.open(path, 'r', encoding='utf-8') as f:
        header = None
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if header is None:
                try:
                    header = json.loads(line)
                except ValueError as e:
                    raise ParseError('invalid header: %s' % e, lineno)
                if not isinstance(header, dict) or header.get('schema_version') != SCHEMA_VERSION:
                    raise ParseError('unsupported dataset header %s' % line, lineno)
                continue
            records.append(record_from_string(line, lineno))
    if header is None:
        raise ParseError('missing dataset header', 1)
    if 'count' in header and header['count'] != len(records):
        raise ParseError('%d records announced, %d found' % (header['count'], len(records)))
    return records
