r"""
The skeleton synthesis model and its checkpoints.

A :class:`SkeletonModel` gathers the parameters of every learned component
built from a :class:`~skelgraph.config.TrainConfig`:

- the set abstraction encoder and the slot decoder (:mod:`skelgraph.encdec`)
- the edge network (:mod:`skelgraph.dgcn`)
- the attention levels and the offset head (:mod:`skelgraph.attention`),
  absent when ``hierarchical_attention`` is off
- the discriminator and the optional topology discriminator
  (:mod:`skelgraph.adversarial`), absent when ``adversarial`` is off

EXAMPLES::

    >>> from skelgraph.config import TrainConfig
    >>> from skelgraph.synthdata import generate_sample
    >>> from skelgraph.model import SkeletonModel
    >>> cfg = TrainConfig(encoder_samples=(16, 4), encoder_widths=(8, 8), global_width=8,
    ...                   feature_width=4, decoder_hidden=(16,), edge_hidden=(8,),
    ...                   disc_hidden=(8,), n_max=6, attention_levels=2)
    >>> model = SkeletonModel(cfg)
    >>> model
    SkeletonModel(n_max=6, 2 attention levels, adversarial)
    >>> r = generate_sample('chain', 5, 64, 0.0, seed=1)
    >>> S = model.forward(r.pointcloud(), n=5)
    >>> S.num_joints(), S.adjacency.shape
    (5, (5, 5))
"""
from __future__ import absolute_import

import io
import json
import logging

import numpy as np

from .adversarial import DiscriminatorParams
from .attention import RefinementParams, hierarchical_refine
from .config import TrainConfig
from .dgcn import EdgeMlpParams, build_adjacency
from .encdec import EncoderParams, DecoderParams, group_points, encode, decode, adaptive_node_count
from .errors import ConfigurationError, DataError
from .graphcore import SkeletonGraph
from .layers import prefixed

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'skelgraph-checkpoint'

class SkeletonModel(object):
    def __init__(self, cfg):
        if not isinstance(cfg, TrainConfig):
            raise ConfigurationError('expected a TrainConfig, got %s' % type(cfg).__name__)
        self.cfg = cfg
        seed = cfg.seed
        self.encoder = EncoderParams(samples=cfg.encoder_samples, radii=cfg.encoder_radii,
                                     widths=tuple((w, w) for w in cfg.encoder_widths),
                                     global_width=cfg.global_width, seed=seed)
        self.decoder = DecoderParams(cfg.global_width, feature_width=cfg.feature_width,
                                     n_min=cfg.n_min, n_max=cfg.n_max, hidden=cfg.decoder_hidden,
                                     seed=seed + 1)
        self.edge = EdgeMlpParams(cfg.feature_width, hidden=cfg.edge_hidden, seed=seed + 2)
        levels = cfg.attention_levels if cfg.hierarchical_attention else 0
        self.refinement = RefinementParams(cfg.feature_width, levels=levels, scales=cfg.attention_scales,
                                           heads=cfg.attention_heads, gate=cfg.attention_gate,
                                           seed=seed + 3)
        if cfg.adversarial:
            self.discriminator = DiscriminatorParams(K=cfg.disc_K, bins=cfg.disc_bins, hidden=cfg.disc_hidden,
                                                     seed=seed + 4)
        else:
            self.discriminator = None
        if cfg.adversarial and cfg.topology_discriminator:
            self.topology = DiscriminatorParams(K=cfg.disc_K, hidden=cfg.disc_hidden, spectral_only=True,
                                                seed=seed + 5)
        else:
            self.topology = None

    def __repr__(self):
        s = "SkeletonModel(n_max=%d, %d attention levels" % (self.decoder.n_max, len(self.refinement.levels))
        if self.discriminator is not None:
            s += ", adversarial"
        if self.topology is not None:
            s += " + topology"
        return s + ")"

    def generator_parameters(self):
        r"""
        Parameters updated by the generator step, as ``(name, value)`` pairs.

        EXAMPLES::

            >>> from skelgraph.config import TrainConfig
            >>> from skelgraph.model import SkeletonModel
            >>> m = SkeletonModel(TrainConfig(attention_levels=1, adversarial=False))
            >>> sorted(set(name.split('.')[0] for name, _ in m.generator_parameters()))
            ['decoder', 'edge', 'encoder', 'refine']
            >>> m.discriminator_parameters()
            []
        """
        params = prefixed('encoder', self.encoder.parameters())
        params += prefixed('decoder', self.decoder.parameters())
        params += prefixed('edge', self.edge.parameters())
        params += prefixed('refine', self.refinement.parameters())
        return params

    def discriminator_parameters(self):
        params = []
        if self.discriminator is not None:
            params += prefixed('disc', self.discriminator.parameters())
        if self.topology is not None:
            params += prefixed('topology', self.topology.parameters())
        return params

    def parameters(self):
        return self.generator_parameters() + self.discriminator_parameters()

    def plan(self, pc):
        r"""
        Sampling and grouping plan of ``pc`` for the encoder.
        """
        return group_points(pc, self.encoder)

    def node_count(self, pc):
        r"""
        Number of joints decoded for ``pc``: the entropy based count when
        ``adaptive_complexity`` is on, ``n_max`` otherwise.
        """
        if self.cfg.adaptive_complexity:
            return adaptive_node_count(pc, self.cfg.knn, self.decoder.bounds)
        return self.decoder.n_max

    def forward(self, pc, plan=None, n=None):
        r"""
        Run encoder, decoder, edge network and refinement on the point cloud
        ``pc`` and return the differentiable predicted skeleton.
        """
        g = encode(pc, self.encoder, plan)
        if n is None:
            n = self.node_count(pc)
        S = decode(g, n, self.decoder)
        A = build_adjacency(S.node_features, S.joints, self.edge)
        S = SkeletonGraph(S.joints, A, S.node_features, check=False)
        if self.refinement.levels:
            S = hierarchical_refine(S, self.refinement.levels, self.refinement.scales, self.refinement.offset_head)
        return S

    def predict(self, pc):
        r"""
        Constant predicted skeleton of ``pc``.
        """
        return self.forward(pc).detach()

    def state_arrays(self):
        return {name: p.value.copy() for name, p in self.parameters()}

    def load_state_arrays(self, arrays):
        for name, p in self.parameters():
            if name not in arrays:
                raise DataError('checkpoint has no parameter %s' % name)
            a = np.asarray(arrays[name], dtype=float)
            if a.shape != p.shape:
                raise DataError('parameter %s has shape %s in the checkpoint, expected %s' % (name, a.shape, p.shape))
            p.value[...] = a

class Checkpoint(object):
    r"""
    A model together with the epoch it was saved at and the states of the
    generator and discriminator optimizers (dictionaries of arrays, possibly
    empty).
    """
    def __init__(self, model, epoch, gen_state=None, disc_state=None):
        self.model = model
        self.epoch = int(epoch)
        self.gen_state = dict(gen_state or {})
        self.disc_state = dict(disc_state or {})

    def __repr__(self):
        return "Checkpoint(epoch=%d, config_hash=%s...)" % (self.epoch, self.config_hash[:12])

    @property
    def cfg(self):
        return self.model.cfg

    @property
    def config_hash(self):
        return self.model.cfg.config_hash()

def save_checkpoint(path, checkpoint):
    r"""
    Write ``checkpoint`` as a ``.npz`` archive at ``path``.

    EXAMPLES::

        >>> import os, tempfile
        >>> import numpy as np
        >>> from skelgraph.config import TrainConfig
        >>> from skelgraph.model import SkeletonModel, Checkpoint, save_checkpoint, load_checkpoint
        >>> model = SkeletonModel(TrainConfig(seed=3, attention_levels=1))
        >>> path = os.path.join(tempfile.mkdtemp(), 'model.npz')
        >>> save_checkpoint(path, Checkpoint(model, 4))
        >>> c = load_checkpoint(path)
        >>> c.epoch, c.cfg == model.cfg
        (4, True)
        >>> all(np.array_equal(p.value, q.value) for (_, p), (_, q) in zip(model.parameters(), c.model.parameters()))
        True
    """
    model = checkpoint.model
    meta = {'format': CHECKPOINT_FORMAT,
            'config': model.cfg.to_text(),
            'config_hash': model.cfg.config_hash(),
            'epoch': checkpoint.epoch}
    arrays = {'meta': np.array(json.dumps(meta, sort_keys=True))}
    for name, a in model.state_arrays().items():
        arrays['param/' + name] = a
    for name, a in checkpoint.gen_state.items():
        arrays['gen_opt/' + name] = np.asarray(a)
    for name, a in checkpoint.disc_state.items():
        arrays['disc_opt/' + name] = np.asarray(a)
    with io.open(path, 'wb') as f:
        np.savez(f, **arrays)
    logger.debug('saved checkpoint of epoch %d to %s', checkpoint.epoch, path)

def _sub_dict(arrays, prefix):
    return {k[len(prefix):]: arrays[k] for k in arrays if k.startswith(prefix)}

def load_checkpoint(path):
    r"""
    Read a checkpoint written by :func:`save_checkpoint`.
    """
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {k: data[k] for k in data.files}
    except (IOError, OSError, ValueError) as e:
        raise DataError('cannot read checkpoint %s: %s' % (path, e))
    if 'meta' not in arrays:
        raise DataError('%s is not a skelgraph checkpoint' % path)
    try:
        meta = json.loads(str(arrays['meta']))
    except ValueError:
        raise DataError('corrupted checkpoint metadata in %s' % path)
    if meta.get('format') != CHECKPOINT_FORMAT:
        raise DataError('%s is not a skelgraph checkpoint' % path)
    cfg = TrainConfig.from_text(meta['config'])
    if cfg.config_hash() != meta['config_hash']:
        raise DataError('configuration hash mismatch in %s' % path)
    model = SkeletonModel(cfg)
    model.load_state_arrays(_sub_dict(arrays, 'param/'))
    return Checkpoint(model, meta['epoch'], _sub_dict(arrays, 'gen_opt/'), _sub_dict(arrays, 'disc_opt/'))
