r"""
Adversarial consistency losses.

A discriminator scores a skeleton through a fixed length descriptor that
does not depend on the numbering of the joints:

- the ``K`` lowest eigenvalues of the Laplacian of the soft adjacency
  (zero padded at the bottom),
- the mean of the joints and the upper triangle of their covariance,
- a histogram of the pairwise joint distances over `[0, \sqrt{3}]`, where
  every pair counts with its soft adjacency and falls into the bins through
  a Gaussian kernel so that the histogram is differentiable.

The discriminator is trained to tell ground truth skeletons from
predictions while the generator minimizes the non-saturating loss
``-log D(pred)`` plus a pose term, the mean squared distance between
matched joints.

EXAMPLES::

    >>> import math
    >>> from skelgraph.graphcore import SkeletonGraph
    >>> from skelgraph.adversarial import DiscriminatorParams, adversarial_losses
    >>> S = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
    >>> D = DiscriminatorParams(K=3, bins=4, zero_last=True)
    >>> gen, disc = adversarial_losses(S, S, D)
    >>> bool(abs(disc.item() - 2 * math.log(2)) < 1e-12)
    True
    >>> bool(abs(gen.item() - math.log(2)) < 1e-12)
    True
"""
from __future__ import absolute_import

import logging

import numpy as np

from .constants import PROB_EPS, UNIT_BOX_DIAMETER
from .diffcore import (constant, matmul, transpose, reshape, submatrix, concat_cols,
        take_rows, sub, scale, affine, add, exp, log, square, clip, sigmoid, row_norms,
        reduce_sum, reduce_mean, broadcast_to, LEAKY_RELU_SLOPE)
from .errors import ConfigurationError
from .graphcore import laplacian
from .layers import Mlp
from .metrics import match_nodes
from .spectral import eigvalsh, padded_eigenvalues

logger = logging.getLogger(__name__)

# entries of the covariance upper triangle
_TRIU = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]

def descriptor_width(K, bins, spectral_only=False):
    r"""
    EXAMPLES::

        >>> from skelgraph.adversarial import descriptor_width
        >>> descriptor_width(8, 6)
        23
        >>> descriptor_width(8, 6, spectral_only=True)
        8
    """
    return K if spectral_only else K + 9 + bins

def spectral_descriptor(s, K):
    r"""
    The ``K`` lowest Laplacian eigenvalues of ``s`` as a ``1 x K`` value.
    """
    return transpose(padded_eigenvalues(eigvalsh(laplacian(s)), K))

def moment_descriptor(s):
    r"""
    Mean of the joints followed by the upper triangle of their covariance,
    as a ``1 x 9`` value.
    """
    J = s.joints
    n = J.rows
    mu = reduce_mean(J, axis=0)
    D = sub(J, broadcast_to(mu, n, 3))
    C = scale(matmul(transpose(D), D), 1.0 / n)
    return concat_cols([mu] + [submatrix(C, rows=(i, i + 1), cols=(j, j + 1)) for i, j in _TRIU])

def edge_length_histogram(s, bins):
    r"""
    Gaussian-kernel histogram of the joint distances weighted by the soft
    adjacency, divided by the number of joints, as a ``1 x bins`` value.

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.adversarial import edge_length_histogram
        >>> S = SkeletonGraph.from_edges([[0, 0, 0], [0.1, 0, 0]], [(0, 1)])
        >>> h = edge_length_histogram(S, 4).value.ravel()
        >>> int(h.argmax())
        0
        >>> edge_length_histogram(SkeletonGraph([[0, 0, 0], [0.1, 0, 0]]), 4).value.tolist()
        [[0.0, 0.0, 0.0, 0.0]]
    """
    n = s.num_joints()
    if n < 2 or bins == 0:
        return constant(np.zeros((1, bins)))
    width = UNIT_BOX_DIAMETER / bins
    centers = (np.arange(bins) + 0.5) * width
    I, J = np.triu_indices(n, 1)
    d = row_norms(sub(take_rows(s.joints, I), take_rows(s.joints, J)))
    w = take_rows(reshape(s.adjacency, n * n, 1), I * n + J)
    ones = constant(np.ones((1, bins)))
    diff = sub(matmul(d, ones), constant(np.tile(centers, (len(I), 1))))
    kernel = exp(scale(square(diff), -0.5 / width ** 2))
    return scale(matmul(transpose(w), kernel), 1.0 / n)

def skeleton_descriptor(s, K, bins, spectral_only=False):
    r"""
    Descriptor of the skeleton ``s`` as a ``1 x (K + 9 + bins)`` value (only
    the ``K`` eigenvalues when ``spectral_only``).

    EXAMPLES::

        >>> import numpy as np
        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.adversarial import skeleton_descriptor
        >>> S = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
        >>> d = skeleton_descriptor(S, 4, 5)
        >>> d.shape
        (1, 18)
        >>> [round(x, 10) + 0.0 for x in d.value[0, :4].tolist()]
        [0.0, 0.0, 1.0, 3.0]
        >>> T = S.relabel([2, 0, 1])
        >>> bool(np.abs(skeleton_descriptor(T, 4, 5).value - d.value).max() < 1e-12)
        True
    """
    spec = spectral_descriptor(s, K)
    if spectral_only:
        return spec
    return concat_cols([spec, moment_descriptor(s), edge_length_histogram(s, bins)])

class DiscriminatorParams(object):
    r"""
    MLP from the skeleton descriptor to one logit.

    EXAMPLES::

        >>> from skelgraph.adversarial import DiscriminatorParams
        >>> DiscriminatorParams(K=8, bins=6)
        DiscriminatorParams(K=8, bins=6, hidden=(32,))
        >>> DiscriminatorParams(K=8, bins=6, spectral_only=True).mlp.in_width
        8
    """
    def __init__(self, K=8, bins=8, hidden=(32,), spectral_only=False, activation='leaky_relu',
                 slope=LEAKY_RELU_SLOPE, seed=0, zero_last=False):
        self.K = int(K)
        self.bins = int(bins)
        self.hidden = tuple(int(h) for h in hidden)
        self.spectral_only = bool(spectral_only)
        if self.K < 1 or self.bins < 0:
            raise ConfigurationError('invalid descriptor size K = %d, bins = %d' % (self.K, self.bins))
        width = descriptor_width(self.K, self.bins, self.spectral_only)
        self.mlp = Mlp([width] + list(self.hidden) + [1], activation=activation, slope=slope,
                       seed=seed, zero_last=zero_last)
        self._check(ConfigurationError)

    def __repr__(self):
        if self.spectral_only:
            return "DiscriminatorParams(K=%d, spectral_only=True, hidden=%s)" % (self.K, self.hidden)
        return "DiscriminatorParams(K=%d, bins=%d, hidden=%s)" % (self.K, self.bins, self.hidden)

    def _check(self, error=RuntimeError):
        if self.mlp.out_width != 1:
            raise error('the discriminator outputs one logit')
        self.mlp._check(error)

    def parameters(self):
        return self.mlp.parameters()

def discriminate(s, params):
    r"""
    Probability in `(0, 1)` that ``s`` is a ground truth skeleton.

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.adversarial import DiscriminatorParams, discriminate
        >>> S = SkeletonGraph.from_edges([[0, 0, 0], [1, 1, 1]], [(0, 1)])
        >>> discriminate(S, DiscriminatorParams(K=2, bins=3, zero_last=True)).item()
        0.5
    """
    desc = skeleton_descriptor(s, params.K, params.bins, params.spectral_only)
    return sigmoid(params.mlp(desc))

def pose_loss(pred, gt, pairs=None):
    r"""
    Mean squared distance between the matched joints of ``pred`` and ``gt``
    (``pairs`` from :func:`~skelgraph.metrics.match_nodes` by default).

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.adversarial import pose_loss
        >>> A = SkeletonGraph([[0, 0, 0], [1, 0, 0]])
        >>> B = SkeletonGraph([[0.9, 0, 0], [0, 0.2, 0]])
        >>> round(pose_loss(A, B).item(), 12)
        0.025
    """
    if pairs is None:
        pairs = match_nodes(pred.joints.value, gt.joints.value)
    I = [i for i, _ in pairs]
    J = [j for _, j in pairs]
    diff = sub(take_rows(pred.joints, I), constant(gt.joints.value[J]))
    return scale(reduce_sum(square(diff)), 1.0 / len(pairs))

def _log_prob(p):
    return log(clip(p, PROB_EPS, 1.0 - PROB_EPS))

def _log_complement(p):
    return log(clip(affine(p, -1.0, 1.0), PROB_EPS, 1.0 - PROB_EPS))

def _discriminator_terms(pred, gt, params):
    real = discriminate(gt.detach(), params)
    fake = discriminate(pred.detach(), params)
    disc = scale(add(_log_prob(real), _log_complement(fake)), -1.0)
    gen = scale(_log_prob(discriminate(pred, params)), -1.0)
    return gen, disc

def adversarial_losses(pred, gt, params, topology=None, pairs=None):
    r"""
    Return ``(gen_loss, disc_loss)`` of the prediction ``pred`` against the
    ground truth ``gt``.

    - ``disc_loss = -(log D(gt) + log(1 - D(pred)))`` is computed on a
      detached copy of ``pred`` so that it only reaches the discriminator
    - ``gen_loss = -log D(pred) + pose_loss(pred, gt)``

    Probabilities are clamped to `[\epsilon, 1 - \epsilon]` with
    :data:`~skelgraph.constants.PROB_EPS` before the logarithm.

    When a ``topology`` discriminator (spectral descriptor only) is given,
    its two terms are added to the corresponding losses.
    """
    gen, disc = _discriminator_terms(pred, gt, params)
    if topology is not None:
        g2, d2 = _discriminator_terms(pred, gt, topology)
        gen = add(gen, g2)
        disc = add(disc, d2)
    gen = add(gen, pose_loss(pred, gt, pairs))
    return gen, disc
