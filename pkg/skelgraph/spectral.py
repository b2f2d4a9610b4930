r"""
Differentiable symmetric eigenvalues and the spectral topology loss.

The spectral loss compares the lowest ``K`` Laplacian eigenvalues of a
predicted skeleton with those of the ground truth and adds a trace coupling
between the two Laplacians::

    sum_k |lambda_k(L_pred) - lambda_k(L_gt)|^2 + alpha * tr(L_pred^T L_gt)

Only eigenvalues are differentiated. For a simple eigenvalue with unit
eigenvector ``u`` the derivative with respect to the (symmetric) matrix is
``u u^T``. Eigenvalues closer than :data:`~skelgraph.constants.DEGENERACY_TOL`
form a cluster whose members all receive the average of ``u u^T`` over the
cluster; they are flagged in :class:`EigenResult`.

EXAMPLES::

    >>> import numpy as np
    >>> from skelgraph.diffcore import constant
    >>> from skelgraph.spectral import eigh, spectral_loss
    >>> P3 = np.array([[1., -1, 0], [-1, 2, -1], [0, -1, 1]])
    >>> [round(x, 10) + 0.0 for x in eigh(constant(P3)).eigenvalues.value.ravel().tolist()]
    [0.0, 1.0, 3.0]
    >>> K3 = np.array([[2., -1, -1], [-1, 2, -1], [-1, -1, 2]])
    >>> round(spectral_loss(constant(P3), K3, 3, 0.0).item(), 10)
    4.0
"""
from __future__ import absolute_import
from six.moves import range

import logging

import numpy as np

from .constants import DEGENERACY_TOL
from .diffcore import (DiffValue, constant, concat_rows, submatrix, sub, square,
        reduce_sum, trace, matmul, transpose, add, scale)
from .errors import ContractError, NumericalError, ParameterError
from .graphcore import binary_laplacian

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = -0.1

class EigenResult(object):
    r"""
    Output of :func:`eigh`.

    Attributes:

    * ``eigenvalues`` -- ascending ``N x 1`` :class:`~skelgraph.diffcore.DiffValue`
    * ``eigenvectors`` -- ``N x N`` orthonormal numpy array (columns)
    * ``degeneracy_flags`` -- boolean numpy array, ``True`` for the
      eigenvalues that belong to a cluster of size at least two
    """
    __slots__ = ['eigenvalues', 'eigenvectors', 'degeneracy_flags']

    def __init__(self, eigenvalues, eigenvectors, degeneracy_flags):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.degeneracy_flags = degeneracy_flags

    def __repr__(self):
        return "EigenResult(%d eigenvalues, %d degenerate)" % (len(self.degeneracy_flags), int(self.degeneracy_flags.sum()))

    def _check(self, L, error=RuntimeError):
        w = self.eigenvalues.value.ravel()
        U = self.eigenvectors
        L = np.asarray(L)
        tol = 1e-8 * max(1.0, np.linalg.norm(L))
        if np.any(np.diff(w) < 0):
            raise error('eigenvalues not sorted')
        if np.abs(U.T.dot(U) - np.eye(len(w))).max() > 1e-8:
            raise error('eigenvectors not orthonormal')
        for k in range(len(w)):
            r = np.linalg.norm(L.dot(U[:, k]) - w[k] * U[:, k])
            if r > tol:
                raise error('residual %g of eigenpair %d above %g' % (r, k, tol))

def clusters(w, tol=DEGENERACY_TOL):
    r"""
    Group the indices of the ascending sequence ``w`` into maximal runs of
    consecutive gaps below ``tol``.

    EXAMPLES::

        >>> from skelgraph.spectral import clusters
        >>> clusters([0.0, 3.0, 3.0, 5.0])
        [[0], [1, 2], [3]]
    """
    out = []
    for k in range(len(w)):
        if out and w[k] - w[out[-1][-1]] < tol:
            out[-1].append(k)
        else:
            out.append([k])
    return out

def _check_symmetric(L):
    v = L.value
    if v.shape[0] != v.shape[1]:
        raise ContractError('expected a square matrix, got shape %s' % (v.shape,))
    dev = np.linalg.norm(v - v.T)
    if dev > 1e-9 * max(1.0, np.linalg.norm(v)):
        raise ContractError('matrix is not symmetric (deviation %.3g)' % dev)

def eigh(L):
    r"""
    Symmetric eigendecomposition of the ``N x N`` value ``L`` with
    differentiable eigenvalues.

    The input is symmetrized as ``(L + L^T) / 2`` before the decomposition.

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import leaf, submatrix, backward
        >>> from skelgraph.spectral import eigh
        >>> L = leaf(np.diag([1.0, 2.0, 3.0]))
        >>> E = eigh(L)
        >>> E
        EigenResult(3 eigenvalues, 0 degenerate)
        >>> backward(submatrix(E.eigenvalues, rows=(1, 2)))
        >>> np.abs(L.grad).tolist()
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]

    Degenerate eigenvalues are flagged::

        >>> eigh(leaf(np.eye(2))).degeneracy_flags.tolist()
        [True, True]

        >>> eigh(leaf([[0.0, 1.0], [0.0, 0.0]]))
        Traceback (most recent call last):
        ...
        skelgraph.errors.ContractError: matrix is not symmetric (deviation 1.41)
    """
    _check_symmetric(L)
    S = 0.5 * (L.value + L.value.T)
    try:
        w, U = np.linalg.eigh(S)
    except np.linalg.LinAlgError as e:
        raise NumericalError('eigendecomposition failed (%s): norm %.3g, %d non-finite entries'
                             % (e, np.linalg.norm(np.nan_to_num(S)), int((~np.isfinite(S)).sum())))
    if not np.isfinite(w).all():
        raise NumericalError('eigendecomposition produced non-finite eigenvalues (norm %.3g)' % np.linalg.norm(S))

    n = len(w)
    flags = np.zeros(n, dtype=bool)
    groups = clusters(w)
    for c in groups:
        if len(c) > 1:
            flags[c] = True
    if flags.any():
        logger.debug('eigh: degenerate clusters %s', [c for c in groups if len(c) > 1])

    def backward(g):
        g = g.ravel()
        G = np.zeros((n, n))
        for c in groups:
            V = U[:, c]
            # average projector of the cluster
            P = V.dot(V.T) / len(c)
            G += g[c].sum() * P
        if L.requires_grad:
            L.grad += G

    values = DiffValue._make(w.reshape(n, 1), (L,), backward, 'eigh')
    return EigenResult(values, U, flags)

def eigvalsh(L):
    r"""
    Ascending differentiable eigenvalues of ``L`` as an ``N x 1`` value.
    """
    return eigh(L).eigenvalues

def spectrum(L):
    r"""
    Ascending eigenvalues of the symmetric numpy array ``L``.
    """
    L = np.asarray(L, dtype=float)
    if L.size == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(0.5 * (L + L.T))

def laplacian_spectrum(n, edges):
    r"""
    Ascending Laplacian eigenvalues of the unweighted graph on ``n`` nodes.

    EXAMPLES::

        >>> from skelgraph.spectral import laplacian_spectrum
        >>> [round(x, 10) + 0.0 for x in laplacian_spectrum(3, [(0, 1), (0, 2), (1, 2)]).tolist()]
        [0.0, 3.0, 3.0]
    """
    return spectrum(binary_laplacian(n, edges))

def padded_spectrum(w, K):
    r"""
    Return the ``K`` lowest entries of the ascending sequence ``w``, with
    zeros prepended when ``w`` is too short.

    EXAMPLES::

        >>> from skelgraph.spectral import padded_spectrum
        >>> padded_spectrum([0.0, 2.0], 3).tolist()
        [0.0, 0.0, 2.0]
        >>> padded_spectrum([0.0, 1.0, 3.0], 2).tolist()
        [0.0, 1.0]
    """
    w = np.asarray(w, dtype=float).ravel()
    if len(w) < K:
        w = np.concatenate([np.zeros(K - len(w)), w])
    return w[:K]

def padded_eigenvalues(lam, K):
    r"""
    Differentiable counterpart of :func:`padded_spectrum` for an ``N x 1``
    value of ascending eigenvalues.
    """
    n = lam.rows
    if n < K:
        lam = concat_rows([constant(np.zeros((K - n, 1))), lam])
    return submatrix(lam, rows=(0, K))

def spectral_loss(L_pred, L_gt, K=None, alpha=DEFAULT_ALPHA):
    r"""
    Return the spectral loss of ``L_pred`` (a value) against the numpy
    Laplacian ``L_gt``.

    INPUT:

    - ``L_pred`` -- ``N_p x N_p`` symmetric :class:`~skelgraph.diffcore.DiffValue`

    - ``L_gt`` -- ``N_g x N_g`` symmetric matrix

    - ``K`` -- number of compared eigenvalues (default ``min(N_p, N_g)``); the
      spectrum of a graph with fewer than ``K`` nodes is padded with zeros
      at the bottom

    - ``alpha`` -- signed coefficient of ``tr(L_pred^T L_gt)``; when the
      sizes differ the trace runs over the common leading block, which is
      the trace of the zero-padded matrices

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.diffcore import constant
        >>> from skelgraph.spectral import spectral_loss
        >>> P3 = np.array([[1., -1, 0], [-1, 2, -1], [0, -1, 1]])
        >>> round(spectral_loss(constant(P3), P3, 3, 0.0).item(), 10)
        0.0
        >>> round(spectral_loss(constant(P3), P3, 3, 1.0).item(), 10)
        10.0

        >>> spectral_loss(constant(P3), np.zeros((2, 2)), 4, 0.0)
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: K = 4 exceeds the size of both graphs (3 and 2)
    """
    if not isinstance(L_pred, DiffValue):
        L_pred = constant(L_pred)
    L_gt = np.asarray(L_gt, dtype=float)
    n_pred = L_pred.rows
    n_gt = L_gt.shape[0]
    if K is None:
        K = min(n_pred, n_gt)
    K = int(K)
    if K > n_pred and K > n_gt:
        raise ParameterError('K = %d exceeds the size of both graphs (%d and %d)' % (K, n_pred, n_gt))
    if K < 0:
        raise ParameterError('K = %d is negative' % K)

    lam_pred = padded_eigenvalues(eigvalsh(L_pred), K)
    lam_gt = padded_spectrum(spectrum(L_gt), K).reshape(K, 1)
    loss = reduce_sum(square(sub(lam_pred, constant(lam_gt))))

    if alpha:
        m = min(n_pred, n_gt)
        block = submatrix(L_pred, rows=(0, m), cols=(0, m))
        coupling = trace(matmul(transpose(block), constant(L_gt[:m, :m])))
        loss = add(loss, scale(coupling, alpha))
    return loss

def structural_entropy(L):
    r"""
    Shannon entropy of the trace-normalized spectrum of the Laplacian ``L``
    (``0`` for the empty graph).

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.spectral import structural_entropy
        >>> K3 = np.array([[2., -1, -1], [-1, 2, -1], [-1, -1, 2]])
        >>> bool(abs(structural_entropy(K3) - np.log(2)) < 1e-12)
        True
        >>> structural_entropy([[1.0, -1.0], [-1.0, 1.0]])
        0.0
        >>> structural_entropy(np.zeros((3, 3)))
        0.0
    """
    if isinstance(L, DiffValue):
        L = L.value
    w = np.clip(spectrum(L), 0.0, None)
    if w.size:
        w[w < DEGENERACY_TOL * max(1.0, w.max())] = 0.0
    total = w.sum()
    if total <= 0:
        return 0.0
    p = w / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum()) + 0.0
