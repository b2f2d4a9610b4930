r"""
Reverse-mode differentiation over dense matrices.

A :class:`DiffValue` holds a ``float64`` matrix (scalars are 1x1), a gradient
accumulator of the same shape, references to the values it was computed from
and the rule to propagate its gradient back to them. The functions of this
module build new values from old ones; :func:`backward` then fills the
``grad`` of every leaf reachable from a scalar root.

EXAMPLES::

    >>> from skelgraph.diffcore import leaf, matmul, reduce_sum, square, backward
    >>> x = leaf([[1.0, 2.0], [3.0, 4.0]])
    >>> y = reduce_sum(square(x))
    >>> float(y.value[0, 0])
    30.0
    >>> backward(y)
    >>> x.grad.tolist()
    [[2.0, 4.0], [6.0, 8.0]]

Operations broadcast nothing implicitly: binary operations want equal shapes
and :func:`broadcast_to` has to be called explicitly::

    >>> from skelgraph.diffcore import add, constant
    >>> add(x, constant([[1.0, 1.0]]))
    Traceback (most recent call last):
    ...
    skelgraph.errors.DimensionError: add: shapes (2, 2) and (1, 2) differ
"""
from __future__ import absolute_import
from six.moves import range, zip

import logging

import numpy as np

from .env import DTYPE, as_matrix
from .errors import DimensionError, DomainError, IsolatedNodeError, ContractError

logger = logging.getLogger(__name__)

LEAKY_RELU_SLOPE = 0.2

class DiffValue(object):
    r"""
    A node of a computation graph.

    Attributes:

    * ``value`` -- 2-dimensional ``float64`` array
    * ``grad`` -- array of the same shape accumulating gradients
    * ``op_tag`` -- name of the producing operation (``'leaf'`` for inputs)
    * ``requires_grad`` -- whether gradients flow into this value

    EXAMPLES::

        >>> from skelgraph.diffcore import DiffValue
        >>> v = DiffValue([[1.0, 2.0]])
        >>> v
        DiffValue(leaf, shape=(1, 2))
        >>> v.shape
        (1, 2)
        >>> v.grad.tolist()
        [[0.0, 0.0]]
    """
    __slots__ = ['value', 'grad', 'op_tag', 'requires_grad', 'name', '_parents', '_backward']

    def __init__(self, value, requires_grad=True, name=None):
        self.value = as_matrix(value, copy=True)
        self.grad = np.zeros_like(self.value)
        self.op_tag = 'leaf'
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = ()
        self._backward = None

    @staticmethod
    def _make(value, parents, backward, op_tag):
        v = DiffValue.__new__(DiffValue)
        v.value = value
        v.grad = np.zeros_like(value)
        v.op_tag = op_tag
        v.name = None
        v.requires_grad = any(p.requires_grad for p in parents)
        v._parents = tuple(parents) if v.requires_grad else ()
        v._backward = backward if v.requires_grad else None
        return v

    def __repr__(self):
        if self.name is not None:
            return "DiffValue(%s, shape=%s, name=%r)" % (self.op_tag, self.shape, self.name)
        return "DiffValue(%s, shape=%s)" % (self.op_tag, self.shape)

    @property
    def shape(self):
        return self.value.shape

    @property
    def rows(self):
        return self.value.shape[0]

    @property
    def cols(self):
        return self.value.shape[1]

    def is_leaf(self):
        return self._backward is None

    def item(self):
        if self.value.shape != (1, 1):
            raise ContractError('item() of a non scalar value of shape %s' % (self.shape,))
        return float(self.value[0, 0])

    def detach(self):
        r"""
        Return a constant copy of this value (no gradient flows through it).
        """
        return DiffValue(self.value, requires_grad=False)

    def zero_grad(self):
        self.grad[...] = 0

    def __add__(self, other):
        if isinstance(other, DiffValue):
            return add(self, other)
        return affine(self, 1.0, float(other))
    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DiffValue):
            return sub(self, other)
        return affine(self, 1.0, -float(other))

    def __rsub__(self, other):
        return affine(self, -1.0, float(other))

    def __mul__(self, other):
        if isinstance(other, DiffValue):
            return mul(self, other)
        return affine(self, float(other), 0.0)
    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DiffValue):
            return div(self, other)
        return affine(self, 1.0 / float(other), 0.0)
    __div__ = __truediv__

    def __neg__(self):
        return affine(self, -1.0, 0.0)

    def __matmul__(self, other):
        return matmul(self, other)

def leaf(value, name=None):
    r"""
    Return a new input value that gradients flow into.
    """
    return DiffValue(value, requires_grad=True, name=name)

def constant(value):
    r"""
    Return a new input value excluded from differentiation.
    """
    return DiffValue(value, requires_grad=False)

def _wrap(x):
    return x if isinstance(x, DiffValue) else constant(x)

def _same_shape(opname, a, b):
    if a.shape != b.shape:
        raise DimensionError('%s: shapes %s and %s differ' % (opname, a.shape, b.shape))

def _accumulate(x, g):
    if x.requires_grad:
        x.grad += g

#####################################################################
# Linear algebra
#####################################################################

def matmul(a, b):
    r"""
    Matrix product.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, matmul
        >>> matmul(constant([[1, 2], [3, 4]]), constant([[1], [1]])).value.tolist()
        [[3.0], [7.0]]
        >>> matmul(constant([[1, 2]]), constant([[1, 2]]))
        Traceback (most recent call last):
        ...
        skelgraph.errors.DimensionError: matmul: shapes (1, 2) and (1, 2) are not aligned
    """
    a = _wrap(a)
    b = _wrap(b)
    if a.cols != b.rows:
        raise DimensionError('matmul: shapes %s and %s are not aligned' % (a.shape, b.shape))

    def backward(g):
        _accumulate(a, g.dot(b.value.T))
        _accumulate(b, a.value.T.dot(g))

    return DiffValue._make(a.value.dot(b.value), (a, b), backward, 'matmul')

def transpose(x):
    def backward(g):
        _accumulate(x, g.T)
    return DiffValue._make(np.ascontiguousarray(x.value.T), (x,), backward, 'transpose')

def reshape(x, rows, cols):
    r"""
    Row-major reshape.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, reshape
        >>> reshape(constant([[1, 2, 3, 4]]), 2, 2).value.tolist()
        [[1.0, 2.0], [3.0, 4.0]]
    """
    if rows * cols != x.value.size:
        raise DimensionError('reshape: cannot reshape %s into %s' % (x.shape, (rows, cols)))
    shape = x.shape

    def backward(g):
        _accumulate(x, g.reshape(shape))

    return DiffValue._make(x.value.reshape(rows, cols).copy(), (x,), backward, 'reshape')

def broadcast_to(x, rows, cols):
    r"""
    Repeat a 1x1, 1xC or Rx1 value to shape ``(rows, cols)``.

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf, broadcast_to, reduce_sum, backward
        >>> b = leaf([[1.0, 2.0]])
        >>> y = broadcast_to(b, 3, 2)
        >>> y.value.tolist()
        [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]
        >>> backward(reduce_sum(y))
        >>> b.grad.tolist()
        [[3.0, 3.0]]
    """
    r, c = x.shape
    if (r != rows and r != 1) or (c != cols and c != 1):
        raise DimensionError('broadcast_to: cannot broadcast %s to %s' % (x.shape, (rows, cols)))

    def backward(g):
        if r == 1 and rows != 1:
            g = g.sum(axis=0, keepdims=True)
        if c == 1 and cols != 1:
            g = g.sum(axis=1, keepdims=True)
        _accumulate(x, g)

    return DiffValue._make(np.broadcast_to(x.value, (rows, cols)).copy(), (x,), backward, 'broadcast')

def diag(v):
    r"""
    Diagonal matrix from a column (or row) vector.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, diag
        >>> diag(constant([[1.0], [2.0]])).value.tolist()
        [[1.0, 0.0], [0.0, 2.0]]
    """
    if v.rows != 1 and v.cols != 1:
        raise DimensionError('diag: expected a vector, got shape %s' % (v.shape,))
    shape = v.shape

    def backward(g):
        _accumulate(v, np.diag(g).reshape(shape))

    return DiffValue._make(np.diag(v.value.ravel()), (v,), backward, 'diag')

#####################################################################
# Elementwise operations
#####################################################################

def add(a, b):
    a = _wrap(a)
    b = _wrap(b)
    _same_shape('add', a, b)

    def backward(g):
        _accumulate(a, g)
        _accumulate(b, g)

    return DiffValue._make(a.value + b.value, (a, b), backward, 'add')

def sub(a, b):
    a = _wrap(a)
    b = _wrap(b)
    _same_shape('sub', a, b)

    def backward(g):
        _accumulate(a, g)
        _accumulate(b, -g)

    return DiffValue._make(a.value - b.value, (a, b), backward, 'sub')

def mul(a, b):
    a = _wrap(a)
    b = _wrap(b)
    _same_shape('mul', a, b)

    def backward(g):
        _accumulate(a, g * b.value)
        _accumulate(b, g * a.value)

    return DiffValue._make(a.value * b.value, (a, b), backward, 'mul')

def div(a, b):
    a = _wrap(a)
    b = _wrap(b)
    _same_shape('div', a, b)
    bad = np.argwhere(b.value == 0)
    if bad.size:
        raise DomainError('div: zero denominator at index %s' % (tuple(int(i) for i in bad[0]),),
                          tuple(int(i) for i in bad[0]))
    out = a.value / b.value

    def backward(g):
        _accumulate(a, g / b.value)
        _accumulate(b, -g * out / b.value)

    return DiffValue._make(out, (a, b), backward, 'div')

def affine(x, a, b):
    r"""
    Return ``a * x + b`` for real constants ``a`` and ``b``.
    """
    def backward(g):
        _accumulate(x, a * g)
    return DiffValue._make(a * x.value + b, (x,), backward, 'affine')

def scale(x, c):
    return affine(x, c, 0.0)

def sigmoid(x):
    r"""
    EXAMPLES::

        >>> from skelgraph.diffcore import constant, sigmoid
        >>> sigmoid(constant(0.0)).item()
        0.5
    """
    v = x.value
    # split by sign so that exp never overflows
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    e = np.exp(v[~pos])
    out[~pos] = e / (1.0 + e)

    def backward(g):
        _accumulate(x, g * out * (1.0 - out))

    return DiffValue._make(out, (x,), backward, 'sigmoid')

def leaky_relu(x, slope=LEAKY_RELU_SLOPE):
    r"""
    EXAMPLES::

        >>> from skelgraph.diffcore import constant, leaky_relu
        >>> leaky_relu(constant(-1.0), slope=0.2).item()
        -0.2
        >>> leaky_relu(constant(3.0)).item()
        3.0
    """
    v = x.value
    factor = np.where(v > 0, 1.0, slope)

    def backward(g):
        _accumulate(x, g * factor)

    return DiffValue._make(v * factor, (x,), backward, 'leaky_relu')

def exp(x):
    out = np.exp(x.value)

    def backward(g):
        _accumulate(x, g * out)

    return DiffValue._make(out, (x,), backward, 'exp')

def log(x):
    r"""
    EXAMPLES::

        >>> from skelgraph.diffcore import constant, log
        >>> log(constant([[1.0, 0.0]]))
        Traceback (most recent call last):
        ...
        skelgraph.errors.DomainError: log: non-positive entry 0.0 at index (0, 1)
    """
    v = x.value
    bad = np.argwhere(~(v > 0))
    if bad.size:
        index = tuple(int(i) for i in bad[0])
        raise DomainError('log: non-positive entry %s at index %s' % (v[index], index), index)

    def backward(g):
        _accumulate(x, g / v)

    return DiffValue._make(np.log(v), (x,), backward, 'log')

def square(x):
    v = x.value

    def backward(g):
        _accumulate(x, 2.0 * g * v)

    return DiffValue._make(v * v, (x,), backward, 'square')

def absolute(x):
    v = x.value

    def backward(g):
        _accumulate(x, g * np.sign(v))

    return DiffValue._make(np.abs(v), (x,), backward, 'abs')

def clip(x, lo, hi):
    r"""
    Clamp entries to ``[lo, hi]``; the gradient passes where no clamping
    happened.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, clip
        >>> clip(constant([[0.0, 0.5, 1.0]]), 0.1, 0.9).value.tolist()
        [[0.1, 0.5, 0.9]]
    """
    v = x.value
    inside = (v >= lo) & (v <= hi)

    def backward(g):
        _accumulate(x, g * inside)

    return DiffValue._make(np.clip(v, lo, hi), (x,), backward, 'clip')

_UNARY = {
    'sigmoid': sigmoid,
    'leaky_relu': leaky_relu,
    'exp': exp,
    'log': log,
    'square': square,
    'abs': absolute,
    }

_BINARY = {
    'add': add,
    'sub': sub,
    'mul': mul,
    'div': div,
    }

def elementwise(op, *args, **kwds):
    r"""
    Apply the elementwise operation named ``op`` to ``args``.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, elementwise
        >>> elementwise('mul', constant([[2.0]]), constant([[3.0]])).item()
        6.0
        >>> elementwise('leaky_relu', constant([[-1.0]]), slope=0.1).item()
        -0.1
        >>> elementwise('cos', constant([[1.0]]))
        Traceback (most recent call last):
        ...
        ValueError: unknown elementwise operation 'cos'
    """
    if op in _BINARY:
        if len(args) != 2:
            raise ContractError('%s takes two arguments' % op)
        return _BINARY[op](*args)
    elif op in _UNARY:
        if len(args) != 1:
            raise ContractError('%s takes one argument' % op)
        return _UNARY[op](args[0], **kwds)
    raise ValueError("unknown elementwise operation '%s'" % op)

def activation(x, name, slope=LEAKY_RELU_SLOPE):
    r"""
    Apply the activation ``name`` (``'leaky_relu'``, ``'sigmoid'``,
    ``'relu'`` or ``'linear'``).
    """
    if name == 'leaky_relu':
        return leaky_relu(x, slope)
    elif name == 'relu':
        return leaky_relu(x, 0.0)
    elif name == 'sigmoid':
        return sigmoid(x)
    elif name == 'linear':
        return x
    raise ValueError("unknown activation '%s'" % name)

#####################################################################
# Softmax
#####################################################################

def rowsoftmax_masked(scores, mask):
    r"""
    Softmax of each row of ``scores`` restricted to the entries where
    ``mask`` is true. Masked entries are exactly zero.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import constant, rowsoftmax_masked
        >>> s = constant([[1.0, 5.0, 1.0], [0.3, 2.0, 7.0]])
        >>> m = np.array([[True, False, True], [False, True, False]])
        >>> rowsoftmax_masked(s, m).value.tolist()
        [[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]

        >>> rowsoftmax_masked(s, np.array([[True, True, True], [False, False, False]]))
        Traceback (most recent call last):
        ...
        skelgraph.errors.IsolatedNodeError: rows without admissible entry: [1]
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != scores.shape:
        raise DimensionError('rowsoftmax_masked: mask shape %s and scores shape %s differ' % (mask.shape, scores.shape))
    empty = np.flatnonzero(~mask.any(axis=1))
    if empty.size:
        raise IsolatedNodeError('rows without admissible entry: %s' % empty.tolist(), empty.tolist())

    s = np.where(mask, scores.value, -np.inf)
    m = s.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(s - m), 0.0)
    out = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        _accumulate(scores, out * (g - (g * out).sum(axis=1, keepdims=True)))

    return DiffValue._make(out, (scores,), backward, 'rowsoftmax')

#####################################################################
# Structural operations
#####################################################################

def concat_rows(xs):
    r"""
    Stack values vertically.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, concat_rows
        >>> concat_rows([constant([[1, 2]]), constant([[3, 4], [5, 6]])]).shape
        (3, 2)
    """
    xs = [_wrap(x) for x in xs]
    if not xs:
        raise DimensionError('concat_rows: nothing to concatenate')
    cols = xs[0].cols
    for x in xs:
        if x.cols != cols:
            raise DimensionError('concat_rows: shapes %s and %s have different widths' % (xs[0].shape, x.shape))
    bounds = np.cumsum([0] + [x.rows for x in xs])

    def backward(g):
        for x, i, j in zip(xs, bounds[:-1], bounds[1:]):
            _accumulate(x, g[i:j])

    return DiffValue._make(np.vstack([x.value for x in xs]), xs, backward, 'concat_rows')

def concat_cols(xs):
    xs = [_wrap(x) for x in xs]
    if not xs:
        raise DimensionError('concat_cols: nothing to concatenate')
    rows = xs[0].rows
    for x in xs:
        if x.rows != rows:
            raise DimensionError('concat_cols: shapes %s and %s have different heights' % (xs[0].shape, x.shape))
    bounds = np.cumsum([0] + [x.cols for x in xs])

    def backward(g):
        for x, i, j in zip(xs, bounds[:-1], bounds[1:]):
            _accumulate(x, g[:, i:j])

    return DiffValue._make(np.hstack([x.value for x in xs]), xs, backward, 'concat_cols')

def submatrix(x, rows=None, cols=None):
    r"""
    Slice ``x`` to the block ``rows = (start, stop)`` and
    ``cols = (start, stop)`` (``None`` keeps everything).

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, submatrix
        >>> x = constant([[1, 2, 3], [4, 5, 6]])
        >>> submatrix(x, cols=(1, 3)).value.tolist()
        [[2.0, 3.0], [5.0, 6.0]]
        >>> submatrix(x, rows=(1, 3))
        Traceback (most recent call last):
        ...
        skelgraph.errors.DimensionError: submatrix: rows (1, 3) out of range for shape (2, 3)
    """
    r0, r1 = (0, x.rows) if rows is None else rows
    c0, c1 = (0, x.cols) if cols is None else cols
    if not (0 <= r0 <= r1 <= x.rows):
        raise DimensionError('submatrix: rows %s out of range for shape %s' % ((r0, r1), x.shape))
    if not (0 <= c0 <= c1 <= x.cols):
        raise DimensionError('submatrix: cols %s out of range for shape %s' % ((c0, c1), x.shape))

    def backward(g):
        if x.requires_grad:
            x.grad[r0:r1, c0:c1] += g

    return DiffValue._make(x.value[r0:r1, c0:c1].copy(), (x,), backward, 'slice')

def take_rows(x, indices):
    r"""
    Gather the rows ``indices`` of ``x`` (repetitions allowed).

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf, take_rows, reduce_sum, backward
        >>> x = leaf([[1.0], [2.0], [3.0]])
        >>> y = take_rows(x, [2, 0, 2])
        >>> y.value.ravel().tolist()
        [3.0, 1.0, 3.0]
        >>> backward(reduce_sum(y))
        >>> x.grad.ravel().tolist()
        [1.0, 0.0, 2.0]
    """
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= x.rows):
        raise DimensionError('take_rows: index out of range for shape %s' % (x.shape,))

    def backward(g):
        if x.requires_grad:
            np.add.at(x.grad, idx, g)

    return DiffValue._make(x.value[idx], (x,), backward, 'take_rows')

def max_pool_groups(x, group_size):
    r"""
    Max over consecutive groups of ``group_size`` rows. The gradient goes to
    the first maximal row of each group.

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, max_pool_groups
        >>> x = constant([[1, 5], [3, 2], [0, 0], [7, -1]])
        >>> max_pool_groups(x, 2).value.tolist()
        [[3.0, 5.0], [7.0, 0.0]]
    """
    group_size = int(group_size)
    if group_size <= 0 or x.rows % group_size:
        raise DimensionError('max_pool_groups: %d rows not divisible in groups of %d' % (x.rows, group_size))
    ngroups = x.rows // group_size
    v = x.value.reshape(ngroups, group_size, x.cols)
    arg = v.argmax(axis=1)
    out = np.take_along_axis(v, arg[:, None, :], axis=1)[:, 0, :]

    def backward(g):
        gx = np.zeros((ngroups, group_size, x.cols))
        np.put_along_axis(gx, arg[:, None, :], g[:, None, :], axis=1)
        _accumulate(x, gx.reshape(x.shape))

    return DiffValue._make(out, (x,), backward, 'max_pool')

#####################################################################
# Reductions
#####################################################################

def reduce_sum(x, axis=None):
    r"""
    Sum of all entries (``axis=None``, 1x1 result), of each column
    (``axis=0``) or of each row (``axis=1``).

    EXAMPLES::

        >>> from skelgraph.diffcore import constant, reduce_sum
        >>> x = constant([[1, 2], [3, 4]])
        >>> reduce_sum(x).item()
        10.0
        >>> reduce_sum(x, axis=1).value.tolist()
        [[3.0], [7.0]]
    """
    shape = x.shape
    if axis is None:
        out = np.array([[x.value.sum()]])
    else:
        out = x.value.sum(axis=axis, keepdims=True)

    def backward(g):
        _accumulate(x, np.broadcast_to(g, shape))

    return DiffValue._make(out, (x,), backward, 'sum')

def reduce_mean(x, axis=None):
    n = x.value.size if axis is None else x.shape[axis]
    return scale(reduce_sum(x, axis), 1.0 / n)

def trace(x):
    r"""
    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import constant, trace
        >>> trace(constant(np.eye(4))).item()
        4.0
    """
    if x.rows != x.cols:
        raise DimensionError('trace: matrix of shape %s is not square' % (x.shape,))
    n = x.rows

    def backward(g):
        _accumulate(x, g[0, 0] * np.eye(n))

    return DiffValue._make(np.array([[np.trace(x.value)]]), (x,), backward, 'trace')

def frobenius_sq(x):
    v = x.value

    def backward(g):
        _accumulate(x, 2.0 * g[0, 0] * v)

    return DiffValue._make(np.array([[np.sum(v * v)]]), (x,), backward, 'frobenius_sq')

def l2_norm(x):
    r"""
    Euclidean norm of all entries; the subgradient at zero is zero.

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf, l2_norm, backward
        >>> x = leaf([[3.0, 4.0, 0.0]])
        >>> y = l2_norm(x)
        >>> y.item()
        5.0
        >>> backward(y)
        >>> x.grad.tolist()
        [[0.6, 0.8, 0.0]]
        >>> z = leaf([[0.0, 0.0]])
        >>> backward(l2_norm(z))
        >>> z.grad.tolist()
        [[0.0, 0.0]]
    """
    v = x.value
    n = np.sqrt(np.sum(v * v))

    def backward(g):
        if n > 0:
            _accumulate(x, g[0, 0] * v / n)

    return DiffValue._make(np.array([[n]]), (x,), backward, 'l2_norm')

def row_norms(x):
    r"""
    Euclidean norm of each row, as a column. Zero rows get subgradient zero.
    """
    v = x.value
    n = np.sqrt(np.sum(v * v, axis=1, keepdims=True))
    safe = np.where(n > 0, n, 1.0)

    def backward(g):
        _accumulate(x, np.where(n > 0, g / safe, 0.0) * v)

    return DiffValue._make(n, (x,), backward, 'row_norms')

#####################################################################
# Backpropagation
#####################################################################

def topological_order(root):
    r"""
    Return the values reachable from ``root`` that require a gradient, each
    after all the values it depends on.
    """
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in reversed(node._parents):
            if id(p) not in visited:
                stack.append((p, False))
    return order

def leaves(root):
    r"""
    Return the leaves reachable from ``root`` that require a gradient.
    """
    return [v for v in topological_order(root) if v.is_leaf() and v.requires_grad]

def backward(root):
    r"""
    Accumulate ``d root / d leaf`` into the ``grad`` of every leaf reachable
    from the scalar ``root``. Gradients of leaves accumulate over successive
    calls; intermediate values are reset at each call.

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf, backward, add
        >>> x = leaf(2.0)
        >>> backward(x); backward(x)
        >>> x.grad.tolist()
        [[2.0]]

    A shared subexpression accumulates both paths::

        >>> x = leaf(3.0)
        >>> y = add(x, x)
        >>> backward(add(y, y))
        >>> x.grad.tolist()
        [[4.0]]

        >>> backward(leaf([[1.0, 2.0]]))
        Traceback (most recent call last):
        ...
        skelgraph.errors.ContractError: backward needs a 1x1 root, got shape (1, 2)
    """
    if root.shape != (1, 1):
        raise ContractError('backward needs a 1x1 root, got shape %s' % (root.shape,))
    if not root.requires_grad:
        return
    order = topological_order(root)
    for node in order:
        if not node.is_leaf():
            node.grad[...] = 0
    root.grad += 1.0
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)

def zero_grad(values):
    for v in values:
        v.grad[...] = 0

#####################################################################
# Finite differences
#####################################################################

def numerical_gradient(f, x, h=1e-5):
    r"""
    Central finite differences of the scalar function ``f()`` with respect to
    the entries of the leaf ``x`` (whose ``value`` is perturbed in place and
    restored).

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import leaf, numerical_gradient, reduce_sum, square
        >>> x = leaf([[1.0, -2.0]])
        >>> g = numerical_gradient(lambda: reduce_sum(square(x)), x)
        >>> bool(np.allclose(g, [[2.0, -4.0]]))
        True
    """
    v = x.value
    out = np.zeros_like(v)
    it = np.nditer(v, flags=['multi_index'])
    for _ in it:
        i = it.multi_index
        old = v[i]
        v[i] = old + h
        fp = f().item()
        v[i] = old - h
        fm = f().item()
        v[i] = old
        out[i] = (fp - fm) / (2 * h)
    return out

def gradient_error(analytic, numeric, atol=1e-7):
    r"""
    Largest relative discrepancy between two gradient arrays; entries whose
    absolute discrepancy is below ``atol`` count as exact.

    EXAMPLES::

        >>> from skelgraph.diffcore import gradient_error
        >>> gradient_error([[1.0, 2.0]], [[1.0, 2.0002]]) < 2e-4
        True
        >>> gradient_error([[1e-9]], [[0.0]])
        0.0
    """
    a = np.asarray(analytic, dtype=DTYPE)
    n = np.asarray(numeric, dtype=DTYPE)
    diff = np.abs(a - n)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), atol)
    err = np.where(diff <= atol, 0.0, diff / denom)
    return float(err.max()) if err.size else 0.0

def check_gradients(f, xs, h=1e-5, atol=1e-7):
    r"""
    Compare :func:`backward` with :func:`numerical_gradient` for the scalar
    function ``f()`` and each leaf of ``xs``. Return the largest relative
    error.

    EXAMPLES::

        >>> from skelgraph.diffcore import leaf, check_gradients, matmul, reduce_sum, sigmoid
        >>> a = leaf([[0.1, 0.2], [0.3, -0.4]])
        >>> b = leaf([[1.0], [-1.0]])
        >>> check_gradients(lambda: reduce_sum(sigmoid(matmul(a, b))), [a, b]) < 1e-6
        True
    """
    zero_grad(xs)
    backward(f())
    err = 0.0
    for x in xs:
        num = numerical_gradient(f, x, h)
        e = gradient_error(x.grad, num, atol)
        logger.debug('gradient check of %r: %g', x, e)
        err = max(err, e)
    zero_grad(xs)
    return err
