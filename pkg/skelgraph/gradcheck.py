r"""
Finite difference checks of the analytic gradients.

Each suite builds random inputs from a seeded generator, compares
:func:`~skelgraph.diffcore.backward` with central differences and records
the largest relative error over its trials.

EXAMPLES::

    >>> from skelgraph.gradcheck import run_suites
    >>> results = run_suites(trials=2, seed=0, suites=['diffcore', 'eigenvalues'])
    >>> [r.name for r in results]
    ['diffcore', 'eigenvalues']
    >>> all(r.passed for r in results)
    True
"""
from __future__ import absolute_import
from six.moves import range

import logging
import time

import numpy as np

from .env import random_state
from .diffcore import (leaf, constant, matmul, transpose, reshape, broadcast_to, diag, add, sub, mul, div,
        scale, sigmoid, leaky_relu, exp, log, square, absolute, clip, rowsoftmax_masked, concat_rows,
        concat_cols, submatrix, take_rows, max_pool_groups, reduce_sum, reduce_mean, trace, frobenius_sq,
        l2_norm, row_norms, check_gradients)
from .adversarial import DiscriminatorParams, adversarial_losses
from .attention import GatLayerParams, gat_layer
from .dgcn import EdgeMlpParams, build_adjacency
from .errors import ParameterError
from .graphcore import SkeletonGraph, laplacian
from .metrics import match_nodes
from .spectral import eigvalsh, spectral_loss

logger = logging.getLogger(__name__)

# relative error accepted by the suites and by the eigenvalue oracle; the
# central differences use the single step STEP
TOLERANCE = 1e-4
EIGEN_TOLERANCE = 1e-5
ABS_FLOOR = 1e-7
STEP = 1e-6

# largest side of the random matrices of the diffcore suite
MAX_SIDE = 8
# distance kept between the inputs and the kinks of leaky_relu, absolute and clip
KINK_MARGIN = 0.05

def _sym(x):
    return scale(add(x, transpose(x)), 0.5)

def _soft_adjacency(X):
    n = X.rows
    return mul(sigmoid(_sym(X)), constant(1.0 - np.eye(n)))

#####################################################################
# Cases of the diffcore suite: name -> (rng -> (function, leaves))
#####################################################################

def _side(rng, lo=1, hi=MAX_SIDE):
    return int(rng.integers(lo, hi + 1))

def _shape(rng):
    return (_side(rng), _side(rng))

def off_kinks(x, kinks, margin=KINK_MARGIN):
    r"""
    Move the entries of ``x`` lying within ``margin`` of one of ``kinks``
    to distance ``margin`` on the same side.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.gradcheck import off_kinks
        >>> off_kinks(np.array([0.01, -0.02, 0.5, 0.99]), [0.0, 1.0]).tolist()
        [0.05, -0.05, 0.5, 0.95]
    """
    x = np.array(x, dtype=float)
    for k in kinks:
        d = x - k
        close = np.abs(d) < margin
        x[close] = k + np.where(d[close] < 0, -margin, margin)
    return x

def _unary(op, lo=-1.0, hi=1.0, kinks=()):
    def case(rng):
        x = leaf(off_kinks(rng.uniform(lo, hi, size=_shape(rng)), kinks))
        return (lambda: op(x)), [x]
    return case

def _binary(op, lo=-1.0, hi=1.0):
    def case(rng):
        shape = _shape(rng)
        a = leaf(rng.uniform(-1, 1, size=shape))
        b = leaf(rng.uniform(lo, hi, size=shape))
        return (lambda: op(a, b)), [a, b]
    return case

def _matmul(rng):
    r, k, c = _side(rng), _side(rng), _side(rng)
    a = leaf(rng.normal(size=(r, k)))
    b = leaf(rng.normal(size=(k, c)))
    return (lambda: matmul(a, b)), [a, b]

def _softmax(rng):
    n = _side(rng)
    x = leaf(rng.normal(size=(n, n)))
    m = rng.random((n, n)) < 0.6
    m[np.arange(n), np.arange(n)] = True
    return (lambda: rowsoftmax_masked(x, m)), [x]

def _clip(rng):
    x = leaf(off_kinks(rng.uniform(-2, 2, size=_shape(rng)), [-1.0, 1.0]))
    return (lambda: clip(x, -1.0, 1.0)), [x]

def _structural(rng):
    r, r2, c = _side(rng, hi=4), _side(rng, hi=4), _side(rng)
    x = leaf(rng.normal(size=(r, c)))
    y = leaf(rng.normal(size=(r2, c)))
    indices = [int(i) for i in rng.integers(0, r * c, size=r + r2)]
    return (lambda: concat_cols([concat_rows([x, y]),
                                 take_rows(reshape(transpose(x), r * c, 1), indices)])), [x, y]

def _broadcast(rng):
    rows, cols = _shape(rng)
    r = leaf(rng.normal(size=(1, cols)))
    c = leaf(rng.normal(size=(rows, 1)))
    s = leaf(rng.normal(size=(1, 1)))
    return (lambda: add(add(broadcast_to(r, rows, cols), broadcast_to(c, rows, cols)),
                        broadcast_to(s, rows, cols))), [r, c, s]

def _pooling(rng):
    group = _side(rng, hi=4)
    rows = group * _side(rng, hi=MAX_SIDE // group)
    cols = _side(rng)
    x = leaf(rng.normal(size=(MAX_SIDE, cols)))
    return (lambda: max_pool_groups(submatrix(x, rows=(0, rows), cols=(0, cols)), group)), [x]

def _reductions(rng):
    n = _side(rng)
    x = leaf(rng.normal(size=(n, n)))
    v = leaf(rng.normal(size=(n, 1)))
    return (lambda: concat_cols([reduce_sum(x, axis=0), reduce_mean(x),
                                 trace(add(x, diag(v))), frobenius_sq(x), l2_norm(x),
                                 transpose(row_norms(x))])), [x, v]

DIFFCORE_CASES = [
    ('matmul', _matmul),
    ('add', _binary(add)),
    ('sub', _binary(sub)),
    ('mul', _binary(mul)),
    ('div', _binary(div, 0.5, 2.0)),
    ('sigmoid', _unary(sigmoid, -3.0, 3.0)),
    ('leaky_relu', _unary(leaky_relu, kinks=[0.0])),
    ('exp', _unary(exp)),
    ('log', _unary(log, 0.5, 2.0)),
    ('square', _unary(square)),
    ('absolute', _unary(absolute, kinks=[0.0])),
    ('clip', _clip),
    ('rowsoftmax_masked', _softmax),
    ('structural', _structural),
    ('broadcast', _broadcast),
    ('max_pool_groups', _pooling),
    ('reductions', _reductions),
    ]

#####################################################################
# Suites
#####################################################################

def _gradient_error(f, xs):
    return check_gradients(f, xs, h=STEP, atol=ABS_FLOOR)

def _check(f, xs, rng):
    w = constant(rng.normal(size=f().shape))
    return _gradient_error(lambda: reduce_sum(mul(f(), w)), xs)

def diffcore_suite(rng):
    err = 0.0
    for name, case in DIFFCORE_CASES:
        f, xs = case(rng)
        e = _check(f, xs, rng)
        logger.debug('diffcore %s: %g', name, e)
        err = max(err, e)
    return err

def adjacency_suite(rng):
    n = int(rng.integers(2, 5))
    params = EdgeMlpParams(3, hidden=(5,), seed=int(rng.integers(1 << 30)))
    F = leaf(rng.normal(size=(n, 3)))
    J = leaf(rng.random((n, 3)))
    xs = [F, J] + [p for _, p in params.parameters()]
    return _check(lambda: build_adjacency(F, J, params), xs, rng)

def attention_suite(rng):
    n = int(rng.integers(2, 5))
    heads = int(rng.integers(1, 3))
    gate = bool(rng.integers(0, 2))
    out = int(rng.choice([3, 4]))
    params = GatLayerParams(3, out, heads=heads, gate=gate, seed=int(rng.integers(1 << 30)))
    X = leaf(rng.normal(size=(n, 3)))
    mask = rng.random((n, n)) < 0.5
    mask = mask | mask.T
    xs = [X] + [p for _, p in params.parameters()]
    return _check(lambda: gat_layer(X, mask, params), xs, rng)

def spectral_suite(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(2, 6))
    X = leaf(rng.normal(size=(n, n)))
    G = rng.random((m, m))
    G = np.triu(G, 1)
    G = G + G.T
    L_gt = np.diag(G.sum(axis=1)) - G
    K = int(rng.integers(1, max(n, m) + 1))
    alpha = float(rng.uniform(-1, 1))
    return _gradient_error(lambda: spectral_loss(laplacian(_soft_adjacency(X)), L_gt, K, alpha), [X])

def adversarial_suite(rng):
    n = int(rng.integers(3, 6))
    m = int(rng.integers(3, 6))
    X = leaf(rng.normal(size=(n, n)))
    J = leaf(rng.random((n, 3)))
    gt = SkeletonGraph.from_edges(rng.random((m, 3)), [(i, i + 1) for i in range(m - 1)])
    D = DiscriminatorParams(K=3, bins=4, hidden=(4,), seed=int(rng.integers(1 << 30)))
    pairs = match_nodes(J.value, gt.joints.value)

    def gen():
        pred = SkeletonGraph(J, _soft_adjacency(X), check=False)
        return adversarial_losses(pred, gt, D, pairs=pairs)[0]

    def disc():
        pred = SkeletonGraph(J, _soft_adjacency(X), check=False)
        return adversarial_losses(pred, gt, D, pairs=pairs)[1]

    dparams = [p for _, p in D.parameters()]
    return max(_gradient_error(gen, [X, J] + dparams), _gradient_error(disc, dparams))

def random_gapped_symmetric(rng, n=8, gap=1e-3):
    r"""
    Random symmetric ``n x n`` matrix whose consecutive eigenvalues differ
    by more than ``gap``.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.env import random_state
        >>> from skelgraph.gradcheck import random_gapped_symmetric
        >>> S = random_gapped_symmetric(random_state(0))
        >>> bool(np.diff(np.linalg.eigvalsh(S)).min() > 1e-3)
        True
    """
    base = np.arange(n) * max(0.1, 2 * gap)
    w = base + rng.uniform(0, max(0.1, 2 * gap) / 4, size=n) + rng.normal()
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    S = (Q * w).dot(Q.T)
    return (S + S.T) / 2

def eigenvalue_suite(rng):
    X = leaf(random_gapped_symmetric(rng))
    n = X.rows
    err = 0.0
    for k in range(n):
        f = lambda k=k: submatrix(eigvalsh(_sym(X)), rows=(k, k + 1))
        err = max(err, _gradient_error(f, [X]))
    return err

# name -> (suite, tolerance)
SUITES = [
    ('diffcore', diffcore_suite, TOLERANCE),
    ('adjacency', adjacency_suite, TOLERANCE),
    ('attention', attention_suite, TOLERANCE),
    ('spectral', spectral_suite, TOLERANCE),
    ('adversarial', adversarial_suite, TOLERANCE),
    ('eigenvalues', eigenvalue_suite, EIGEN_TOLERANCE),
    ]

class SuiteResult(object):
    __slots__ = ['name', 'trials', 'max_error', 'tolerance', 'seconds']

    def __init__(self, name, trials, max_error, tolerance, seconds):
        self.name = name
        self.trials = trials
        self.max_error = max_error
        self.tolerance = tolerance
        self.seconds = seconds

    def __repr__(self):
        return "SuiteResult(%s, %d trials, max_error=%.3g, %s)" % (
                self.name, self.trials, self.max_error, 'ok' if self.passed else 'FAILED')

    @property
    def passed(self):
        return self.max_error <= self.tolerance

def run_suites(trials=100, seed=0, suites=None):
    r"""
    Run the suites named in ``suites`` (all by default) with ``trials``
    random trials each and return a list of :class:`SuiteResult`.

    EXAMPLES::

        >>> from skelgraph.gradcheck import run_suites
        >>> run_suites(1, suites=['hessian'])
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: unknown gradient suite 'hessian'
    """
    known = [name for name, _, _ in SUITES]
    if suites is None:
        suites = known
    for name in suites:
        if name not in known:
            raise ParameterError("unknown gradient suite '%s'" % name)
    results = []
    for i, (name, suite, tol) in enumerate(SUITES):
        if name not in suites:
            continue
        rng = random_state(seed + 1009 * i)
        t0 = time.time()
        err = 0.0
        for _ in range(trials):
            err = max(err, suite(rng))
        res = SuiteResult(name, trials, err, tol, time.time() - t0)
        logger.info('[grad-check] %-12s %4d trials  max error %.3g  %.1fs  %s',
                    name, trials, err, res.seconds, 'ok' if res.passed else 'FAILED')
        results.append(res)
    return results
