r"""
Training, evaluation and ablation runs.

The generator loss of a prediction combines three terms, each multiplied
by its weight from the :class:`~skelgraph.config.TrainConfig`:

- ``coord`` -- mean squared distance between matched joints
- ``spectral`` -- spectral loss between the Laplacians of the prediction
  and of the ground truth (switch ``spectral_loss``)
- ``adv`` -- non-saturating generator loss of the discriminator plus the
  pose term (switch ``adversarial``)

A switched off term is not computed at all.

EXAMPLES::

    >>> import math
    >>> from skelgraph.adversarial import DiscriminatorParams
    >>> from skelgraph.config import TrainConfig
    >>> from skelgraph.graphcore import SkeletonGraph
    >>> from skelgraph.harness import total_loss
    >>> S = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
    >>> cfg = TrainConfig(alpha=0.0)
    >>> D = DiscriminatorParams(K=3, bins=4, zero_last=True)
    >>> loss = total_loss(S, S, cfg, D)
    >>> bool(abs(loss.item() - cfg.w_adv * math.log(2)) < 1e-12)
    True
"""
from __future__ import absolute_import
from six import string_types
from six.moves import range

import io
import logging
import os

import numpy as np

from . import env
from .adversarial import adversarial_losses, pose_loss
from .config import TrainConfig
from .constants import ABLATIONS
from .diffcore import add, scale, take_rows, transpose, backward
from .errors import ConfigurationError, DataError, NumericalError, ParameterError
from .graphcore import laplacian
from .metrics import match_nodes, evaluate_pair, SampleMetrics, MetricsReport
from .model import SkeletonModel, Checkpoint, save_checkpoint, load_checkpoint
from .optim import Adam
from .spectral import spectral_loss
from .synthdata import read_dataset, select_split

logger = logging.getLogger(__name__)

METRICS_HEADER = ['epoch', 'loss', 'coord', 'spectral', 'adv', 'disc', 'val_mpjpe', 'val_ged', 'val_sc', 'val_tf']

ABLATION_HEADER = ['configuration', 'mpjpe', 'ged', 'tf']

ABLATION_SEEDS_HEADER = ['configuration', 'seed', 'mpjpe', 'ged', 'sc', 'tf']

# (metric, ablated configuration, whether lower is better): the full model is
# expected to be at least as good as the ablated one on the metric
ABLATION_DIRECTIONS = [
    ('ged', 'no_spectral', True),
    ('tf', 'no_spectral', False),
    ('mpjpe', 'no_attention', True),
    ]

#####################################################################
# Losses
#####################################################################

def _alignment(n, matched):
    return list(matched) + [i for i in range(n) if i not in set(matched)]

def aligned_laplacians(pred, gt, pairs):
    r"""
    Laplacians of ``pred`` (differentiable) and ``gt`` (numpy) with the
    matched joints first, in the order of ``pairs``.

    EXAMPLES::

        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.harness import aligned_laplacians
        >>> P = SkeletonGraph.from_edges([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [(0, 1)])
        >>> G = SkeletonGraph.from_edges([[1, 0, 0], [0, 0, 0]], [(0, 1)])
        >>> Lp, Lg = aligned_laplacians(P, G, [(0, 1), (1, 0)])
        >>> Lp.value.tolist()
        [[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]
        >>> Lg.tolist()
        [[1.0, -1.0], [-1.0, 1.0]]
    """
    I = _alignment(pred.num_joints(), [i for i, _ in pairs])
    J = _alignment(gt.num_joints(), [j for _, j in pairs])
    L = laplacian(pred)
    L = transpose(take_rows(transpose(take_rows(L, I)), I))
    L_gt = laplacian(gt.detach()).value
    return L, L_gt[np.ix_(J, J)]

def total_loss(pred, gt, cfg, disc=None, topology=None, pairs=None, parts=None):
    r"""
    Weighted generator loss of the prediction ``pred`` against ``gt``.

    INPUT:

    - ``pred``, ``gt`` -- skeletons

    - ``cfg`` -- :class:`~skelgraph.config.TrainConfig`

    - ``disc``, ``topology`` -- discriminators (the adversarial term needs
      ``disc``)

    - ``pairs`` -- joint correspondence (computed when ``None``)

    - ``parts`` -- optional dictionary filled with the float values of the
      unweighted terms ``coord``, ``spectral`` and ``adv`` and with the
      discriminator loss ``disc`` (a value, or ``None``)

    EXAMPLES::

        >>> from skelgraph.config import TrainConfig
        >>> from skelgraph.graphcore import SkeletonGraph
        >>> from skelgraph.harness import total_loss
        >>> S = SkeletonGraph.from_edges([[0, 0, 0], [1, 0, 0]], [(0, 1)])
        >>> total_loss(S, S, TrainConfig(w_coord=0.0, spectral_loss=False))
        Traceback (most recent call last):
        ...
        skelgraph.errors.ConfigurationError: all loss terms are switched off or have zero weight
    """
    if parts is None:
        parts = {}
    parts.update(coord=0.0, spectral=0.0, adv=0.0, disc=None)

    use_coord = cfg.w_coord > 0
    use_spectral = cfg.spectral_loss and cfg.w_spectral > 0
    use_adv = cfg.adversarial and cfg.w_adv > 0 and disc is not None
    if not (use_coord or use_spectral or use_adv):
        raise ConfigurationError('all loss terms are switched off or have zero weight')

    if pairs is None:
        pairs = match_nodes(pred.joints.value, gt.joints.value)
    gt = gt.detach()

    terms = []
    if use_coord:
        coord = pose_loss(pred, gt, pairs)
        parts['coord'] = coord.item()
        terms.append(scale(coord, cfg.w_coord))
    if use_spectral:
        L_pred, L_gt = aligned_laplacians(pred, gt, pairs)
        K = None
        if cfg.K:
            K = min(cfg.K, max(L_pred.rows, L_gt.shape[0]))
        spec = spectral_loss(L_pred, L_gt, K, cfg.alpha)
        parts['spectral'] = spec.item()
        terms.append(scale(spec, cfg.w_spectral))
    if use_adv:
        gen, d = adversarial_losses(pred, gt, disc, topology, pairs)
        parts['adv'] = gen.item()
        parts['disc'] = d
        terms.append(scale(gen, cfg.w_adv))

    loss = terms[0]
    for t in terms[1:]:
        loss = add(loss, t)
    return loss

#####################################################################
# Data
#####################################################################

def _records(data):
    if isinstance(data, string_types):
        return read_dataset(data)
    return list(data)

class _Sample(object):
    r"""
    Non-learned inputs of one record, computed once per run.
    """
    __slots__ = ['id', 'pc', 'plan', 'n', 'gt']

    def __init__(self, record, model):
        self.id = record.id
        self.pc = record.pointcloud()
        self.plan = model.plan(self.pc)
        self.n = model.node_count(self.pc)
        self.gt = record.skeleton()

    def predict(self, model):
        return model.forward(self.pc, self.plan, self.n)

def evaluate_records(predict, records, cfg):
    r"""
    :class:`~skelgraph.metrics.MetricsReport` of the predictions
    ``predict(record)`` against the ground truth of ``records``.

    EXAMPLES::

        >>> from skelgraph.config import TrainConfig
        >>> from skelgraph.synthdata import generate_sample
        >>> from skelgraph.harness import evaluate_records
        >>> records = [generate_sample(c, 6, 40, 0.01, 3) for c in ('chain', 'tree', 'cycle')]
        >>> evaluate_records(lambda r: r.skeleton(), records, TrainConfig())
        MetricsReport(3 samples, mpjpe=0, ged=0, sc=1, tf=1)
    """
    samples = []
    for r in records:
        pred = predict(r)
        values = evaluate_pair(pred, r.skeleton(), None, cfg.edge_threshold, cfg.exact_ged_limit)
        samples.append(SampleMetrics(r.id, r.category_name, *values))
    return MetricsReport.from_samples(samples)

#####################################################################
# Training
#####################################################################

def _format_row(row):
    return ','.join(str(row[k]) if k == 'epoch' else '%.17g' % row[k] for k in METRICS_HEADER)

def read_metrics_log(path):
    r"""
    Rows of a ``metrics.csv`` file as dictionaries.
    """
    rows = []
    with io.open(path, 'r', encoding='utf-8') as f:
        lines = [l.strip() for l in f if l.strip()]
    if not lines or lines[0].split(',') != METRICS_HEADER:
        raise DataError('%s is not a metrics log' % path)
    for line in lines[1:]:
        fields = line.split(',')
        if len(fields) != len(METRICS_HEADER):
            raise DataError('malformed metrics row %r in %s' % (line, path))
        row = {k: float(v) for k, v in zip(METRICS_HEADER, fields)}
        row['epoch'] = int(row['epoch'])
        rows.append(row)
    return rows

def _abort(out_dir, cfg, good_state, good_epoch, epoch, sample_id, parts, reason):
    model = SkeletonModel(cfg)
    model.load_state_arrays(good_state)
    path = os.path.join(out_dir, 'last_good.npz')
    save_checkpoint(path, Checkpoint(model, good_epoch))
    with io.open(os.path.join(out_dir, 'diagnostic.txt'), 'w', encoding='utf-8') as f:
        f.write(u'reason = %s\n' % reason)
        f.write(u'epoch = %d\n' % epoch)
        f.write(u'sample = %s\n' % sample_id)
        for k in ('coord', 'spectral', 'adv'):
            f.write(u'%s = %r\n' % (k, parts.get(k, float('nan'))))
    raise NumericalError('%s on sample %s at epoch %d; last good checkpoint written to %s' % (
                         reason, sample_id, epoch, path))

def train(cfg, data, out_dir, resume=None, verbosity=0, progress=False):
    r"""
    Train a :class:`~skelgraph.model.SkeletonModel` on the ``train`` split
    of ``data`` and validate it on the ``val`` split after every epoch.

    INPUT:

    - ``cfg`` -- :class:`~skelgraph.config.TrainConfig`

    - ``data`` -- dataset path or list of records

    - ``out_dir`` -- output directory; receives ``metrics.csv`` (one row
      per epoch), ``last.npz`` and ``best.npz`` (lowest validation MPJPE)

    - ``resume`` -- optional checkpoint (or path) to continue from; its
      configuration must have the same hash as ``cfg``

    - ``verbosity`` -- ``0`` (default) logs one line per epoch, ``1`` one
      line per batch

    - ``progress`` -- whether to display a progress bar (needs tqdm)

    OUTPUT: ``(checkpoint, history)`` with the final checkpoint and the list
    of metrics rows of the epochs run by this call

    A non-finite loss or gradient stops the run with a
    :class:`~skelgraph.errors.NumericalError` after writing
    ``last_good.npz`` and ``diagnostic.txt``.
    """
    if not isinstance(cfg, TrainConfig):
        raise ConfigurationError('expected a TrainConfig, got %s' % type(cfg).__name__)
    if progress:
        env.require_package('tqdm', 'train')
    records = _records(data)
    train_records = select_split(records, 'train')
    val_records = select_split(records, 'val')
    if not train_records:
        raise DataError('the dataset has no training sample')
    if not val_records:
        logger.info('[train] empty validation split, validating on the training split')
        val_records = train_records

    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    log_path = os.path.join(out_dir, 'metrics.csv')

    model = SkeletonModel(cfg)
    gen_opt = Adam(model.generator_parameters(), cfg.learning_rate)
    disc_params = model.discriminator_parameters()
    disc_opt = Adam(disc_params, cfg.learning_rate) if disc_params else None

    start = 0
    best = float('inf')
    if resume is not None:
        if isinstance(resume, string_types):
            resume = load_checkpoint(resume)
        if resume.config_hash != cfg.config_hash():
            raise ConfigurationError('refusing to resume: the checkpoint was trained with another configuration')
        model.load_state_arrays(resume.model.state_arrays())
        gen_opt.load_state_dict(resume.gen_state)
        if disc_opt is not None:
            disc_opt.load_state_dict(resume.disc_state)
        start = resume.epoch
        if os.path.exists(log_path):
            rows = read_metrics_log(log_path)
            if rows:
                best = min(r['val_mpjpe'] for r in rows)
    if resume is None or not os.path.exists(log_path):
        with io.open(log_path, 'w', encoding='utf-8') as f:
            f.write(u'%s\n' % ','.join(METRICS_HEADER))

    samples = {r.id: _Sample(r, model) for r in train_records + val_records}
    good_state = model.state_arrays()
    history = []

    epochs = range(start, cfg.epochs)
    if progress:
        epochs = env.tqdm.tqdm(epochs, desc='train')

    for epoch in epochs:
        rng = env.random_state(cfg.seed + 7919 * (epoch + 1))
        order = rng.permutation(len(train_records))
        sums = dict(loss=0.0, coord=0.0, spectral=0.0, adv=0.0, disc=0.0)
        for b in range(0, len(order), cfg.batch_size):
            batch = [train_records[k] for k in order[b:b + cfg.batch_size]]
            w = 1.0 / len(batch)
            gen_opt.zero_grad()
            disc_losses = []
            for r in batch:
                s = samples[r.id]
                parts = {}
                loss = total_loss(s.predict(model), s.gt, cfg, model.discriminator, model.topology, parts=parts)
                value = loss.item()
                if not np.isfinite(value):
                    _abort(out_dir, cfg, good_state, epoch, epoch, r.id, parts, 'non-finite loss')
                backward(scale(loss, w))
                sums['loss'] += value
                for k in ('coord', 'spectral', 'adv'):
                    sums[k] += parts[k]
                if parts['disc'] is not None:
                    disc_losses.append(parts['disc'])
                    sums['disc'] += parts['disc'].item()
            try:
                gen_opt.step()
                if disc_opt is not None and disc_losses:
                    disc_opt.zero_grad()
                    for d in disc_losses:
                        backward(scale(d, 1.0 / len(disc_losses)))
                    disc_opt.step()
            except NumericalError as e:
                _abort(out_dir, cfg, good_state, epoch, epoch, batch[0].id, parts, str(e))
            if verbosity > 0:
                logger.info('[train] epoch %d batch %d loss=%.6g', epoch, b // cfg.batch_size, value)

        report = evaluate_records(lambda r: samples[r.id].predict(model).detach(), val_records, cfg)
        row = {k: v / len(train_records) for k, v in sums.items()}
        row.update(epoch=epoch, val_mpjpe=report.mpjpe, val_ged=report.ged, val_sc=report.sc, val_tf=report.tf)
        history.append(row)
        with io.open(log_path, 'a', encoding='utf-8') as f:
            f.write(u'%s\n' % _format_row(row))

        gen_state = gen_opt.state_dict()
        disc_state = disc_opt.state_dict() if disc_opt is not None else {}
        checkpoint = Checkpoint(model, epoch + 1, gen_state, disc_state)
        save_checkpoint(os.path.join(out_dir, 'last.npz'), checkpoint)
        if report.mpjpe < best:
            best = report.mpjpe
            save_checkpoint(os.path.join(out_dir, 'best.npz'), checkpoint)
        good_state = model.state_arrays()

        logger.info('[train] epoch %d/%d loss=%.6g coord=%.6g spectral=%.6g adv=%.6g disc=%.6g val_mpjpe=%.6g val_ged=%.4g',
                    epoch + 1, cfg.epochs, row['loss'], row['coord'], row['spectral'], row['adv'], row['disc'],
                    row['val_mpjpe'], row['val_ged'])

    if not history:
        checkpoint = Checkpoint(model, start, gen_opt.state_dict(),
                                disc_opt.state_dict() if disc_opt is not None else {})
    return checkpoint, history

#####################################################################
# Evaluation
#####################################################################

def evaluate(checkpoint, data, split='test', predict=None):
    r"""
    Evaluate a checkpoint (or checkpoint path) on the ``split`` of ``data``.

    ``predict`` replaces the model: it maps a record to a predicted
    skeleton, in which case ``checkpoint`` only provides the evaluation
    thresholds (and may be ``None``).

    EXAMPLES::

        >>> from skelgraph.constants import CATEGORIES
        >>> from skelgraph.synthdata import generate_dataset, select_split
        >>> from skelgraph.harness import evaluate
        >>> data = generate_dataset(CATEGORIES, 20, m_points=32, seed=2)
        >>> R = evaluate(None, data, 'train', predict=lambda r: r.skeleton())
        >>> R.values()
        (0.0, 0.0, 1.0, 1.0)
        >>> len(R.per_sample) == len(select_split(data, 'train'))
        True
        >>> evaluate(None, data, 'dev', predict=lambda r: r.skeleton())
        Traceback (most recent call last):
        ...
        skelgraph.errors.ParameterError: unknown split 'dev' (expected one of train, val, test)
    """
    if predict is None:
        if checkpoint is None:
            raise ParameterError('evaluation needs a checkpoint or a predict function')
        if isinstance(checkpoint, string_types):
            checkpoint = load_checkpoint(checkpoint)
        model = checkpoint.model
        predict = lambda r: model.predict(r.pointcloud())
    elif isinstance(checkpoint, string_types):
        checkpoint = load_checkpoint(checkpoint)
    cfg = checkpoint.cfg if checkpoint is not None else TrainConfig()
    records = select_split(_records(data), split)
    if not records:
        raise ParameterError("the split '%s' of the dataset is empty" % split)
    report = evaluate_records(predict, records, cfg)
    logger.info('[eval] %s: %r', split, report)
    return report

#####################################################################
# Ablations
#####################################################################

def ablation_configs(cfg):
    r"""
    The configurations of the ablation table, as ``(name, config)`` pairs.

    EXAMPLES::

        >>> from skelgraph.config import TrainConfig
        >>> from skelgraph.harness import ablation_configs
        >>> for name, c in ablation_configs(TrainConfig()):
        ...     print('%-15s %s' % (name, sorted(f for f, on in c.flags().items() if not on)))
        full            []
        no_spectral     ['spectral_loss']
        no_attention    ['hierarchical_attention']
        no_adaptive     ['adaptive_complexity']
        no_adversarial  ['adversarial']
    """
    configs = []
    for name, flag in ABLATIONS:
        configs.append((name, cfg if flag is None else cfg.copy(**{flag: False})))
    return configs

def format_ablation_table(rows):
    r"""
    Fixed width table of ``(configuration, mpjpe, ged, tf)`` rows.

    EXAMPLES::

        >>> from skelgraph.harness import format_ablation_table
        >>> print(format_ablation_table([('full', 0.05, 1.5, 0.9), ('no_spectral', 0.06, 2.0, 0.8)]))
        configuration      mpjpe      ged       tf
        full              0.0500   1.5000   0.9000
        no_spectral       0.0600   2.0000   0.8000
    """
    lines = ['%-15s %8s %8s %8s' % tuple(ABLATION_HEADER)]
    for name, m, g, t in rows:
        lines.append('%-15s %8.4f %8.4f %8.4f' % (name, m, g, t))
    return '\n'.join(lines)

def ablate(cfg, data, out_dir, seeds=None, split='test', verbosity=0):
    r"""
    Train and evaluate every ablation configuration for each seed of
    ``seeds`` (default: the seed of ``cfg``).

    Writes ``ablation.csv`` (means over the seeds) and
    ``ablation_seeds.csv`` (one row per configuration and seed) in
    ``out_dir`` and returns the rows of the former as tuples
    ``(configuration, mpjpe, ged, tf)``.
    """
    records = _records(data)
    if not select_split(records, split):
        logger.info("[ablate] empty split '%s', evaluating on 'val'", split)
        split = 'val'
    seeds = [cfg.seed] if not seeds else [int(s) for s in seeds]
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)

    rows = []
    seed_rows = []
    for name, c in ablation_configs(cfg):
        reports = []
        for seed in seeds:
            run_dir = os.path.join(out_dir, name, 'seed-%d' % seed)
            run_cfg = c.copy(seed=seed)
            train(run_cfg, records, run_dir, verbosity=verbosity)
            report = evaluate(os.path.join(run_dir, 'best.npz'), records, split)
            reports.append(report)
            seed_rows.append((name, seed) + report.values())
            logger.info('[ablate] %s seed %d: %r', name, seed, report)
        rows.append((name,
                     float(np.mean([r.mpjpe for r in reports])),
                     float(np.mean([r.ged for r in reports])),
                     float(np.mean([r.tf for r in reports]))))

    with io.open(os.path.join(out_dir, 'ablation.csv'), 'w', encoding='utf-8') as f:
        f.write(u'%s\n' % ','.join(ABLATION_HEADER))
        for row in rows:
            f.write(u'%s,%.17g,%.17g,%.17g\n' % row)
    with io.open(os.path.join(out_dir, 'ablation_seeds.csv'), 'w', encoding='utf-8') as f:
        f.write(u'%s\n' % ','.join(ABLATION_SEEDS_HEADER))
        for row in seed_rows:
            f.write(u'%s,%d,%.17g,%.17g,%.17g,%.17g\n' % row)
    return rows

def read_ablation_seeds(path):
    r"""
    Rows ``(configuration, seed, mpjpe, ged, sc, tf)`` of an
    ``ablation_seeds.csv`` file.
    """
    with io.open(path, 'r', encoding='utf-8') as f:
        lines = [l.strip() for l in f if l.strip()]
    if not lines or lines[0].split(',') != ABLATION_SEEDS_HEADER:
        raise DataError('%s is not a per seed ablation table' % path)
    rows = []
    for line in lines[1:]:
        fields = line.split(',')
        if len(fields) != len(ABLATION_SEEDS_HEADER):
            raise DataError('malformed ablation row %r in %s' % (line, path))
        try:
            rows.append((fields[0], int(fields[1])) + tuple(float(v) for v in fields[2:]))
        except ValueError:
            raise DataError('malformed ablation row %r in %s' % (line, path))
    return rows

def ablation_directions(seed_rows):
    r"""
    Count, for each entry of ``ABLATION_DIRECTIONS``, the seeds on which the
    full model is at least as good as the ablated configuration.

    INPUT: rows ``(configuration, seed, mpjpe, ged, sc, tf)`` as written in
    ``ablation_seeds.csv``.

    OUTPUT: list of ``(metric, configuration, wins, seeds)``.

    EXAMPLES::

        >>> from skelgraph.harness import ablation_directions
        >>> rows = [('full', 1, 0.05, 2.0, 0.9, 0.8), ('no_spectral', 1, 0.05, 3.0, 0.9, 0.7),
        ...         ('no_attention', 1, 0.04, 2.0, 0.9, 0.8),
        ...         ('full', 2, 0.05, 2.0, 0.9, 0.8), ('no_spectral', 2, 0.06, 1.0, 0.9, 0.8),
        ...         ('no_attention', 2, 0.07, 2.0, 0.9, 0.8)]
        >>> for d in ablation_directions(rows):
        ...     print(d)
        ('ged', 'no_spectral', 1, 2)
        ('tf', 'no_spectral', 2, 2)
        ('mpjpe', 'no_attention', 1, 2)
    """
    names = ABLATION_SEEDS_HEADER[2:]
    table = {}
    for row in seed_rows:
        table[row[0], int(row[1])] = dict(zip(names, row[2:]))
    seeds = sorted(s for name, s in table if name == 'full')
    directions = []
    for metric, other, lower in ABLATION_DIRECTIONS:
        wins = total = 0
        for s in seeds:
            if (other, s) not in table:
                continue
            total += 1
            a = table['full', s][metric]
            b = table[other, s][metric]
            if (a <= b) if lower else (a >= b):
                wins += 1
        directions.append((metric, other, wins, total))
    return directions
