######################################################################
# This file is part of skelgraph.
#
# skelgraph is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# skelgraph is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with skelgraph. If not, see <https://www.gnu.org/licenses/>.
######################################################################

import io
import math
import os
import sys
import pytest

import numpy as np

from skelgraph.adversarial import DiscriminatorParams
from skelgraph.config import TrainConfig
from skelgraph.constants import CATEGORIES
from skelgraph.diffcore import leaf, constant, backward
from skelgraph.errors import ConfigurationError, DataError, NumericalError, ParameterError
from skelgraph.graphcore import SkeletonGraph
from skelgraph.harness import (total_loss, aligned_laplacians, evaluate_records, read_metrics_log,
        train, evaluate, ablation_configs, format_ablation_table, ablate, read_ablation_seeds,
        ablation_directions, METRICS_HEADER)
from skelgraph.model import load_checkpoint
from skelgraph.synthdata import generate_dataset, generate_sample, select_split

PATH = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (1, 2)])
TRIANGLE = SkeletonGraph.from_edges([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], [(0, 1), (0, 2), (1, 2)])

def test_loss_parts():
    cfg = TrainConfig(alpha=0.0, w_coord=1.0, w_spectral=0.5, w_adv=0.25)
    D = DiscriminatorParams(K=3, bins=4, zero_last=True)
    parts = {}
    loss = total_loss(PATH, TRIANGLE, cfg, D, parts=parts)
    # spectra (0, 1, 3) against (0, 3, 3)
    assert parts['coord'] == 0.0
    assert abs(parts['spectral'] - 4.0) < 1e-10
    assert abs(parts['adv'] - math.log(2)) < 1e-12
    assert abs(parts['disc'].item() - 2 * math.log(2)) < 1e-12
    assert abs(loss.item() - (0.5 * 4.0 + 0.25 * math.log(2))) < 1e-10

@pytest.mark.parametrize("flags, active", [
    ({'spectral_loss': False}, ('coord', 'adv')),
    ({'adversarial': False}, ('coord', 'spectral')),
    ({'spectral_loss': False, 'adversarial': False}, ('coord',)),
    ({'w_coord': 0.0}, ('spectral', 'adv')),
    ])
def test_switched_off_terms(flags, active):
    cfg = TrainConfig(alpha=0.0, **flags)
    D = DiscriminatorParams(K=3, bins=4, zero_last=True)
    pred = SkeletonGraph.from_edges([[0.1, 0, 0], [0.5, 0.2, 0], [1, 0, 0]], [(0, 1), (1, 2)])
    parts = {}
    loss = total_loss(pred, TRIANGLE, cfg, D, parts=parts)
    expected = 0.0
    for k, w in (('coord', cfg.w_coord), ('spectral', cfg.w_spectral), ('adv', cfg.w_adv)):
        if k in active:
            assert parts[k] > 0
            expected += w * parts[k]
        else:
            assert parts[k] == 0.0
    assert (parts['disc'] is None) == ('adv' not in active)
    assert abs(loss.item() - expected) < 1e-10

def test_no_discriminator_skips_adversarial():
    parts = {}
    total_loss(PATH, TRIANGLE, TrainConfig(), None, parts=parts)
    assert parts['adv'] == 0.0 and parts['disc'] is None

def test_all_terms_off():
    with pytest.raises(ConfigurationError):
        total_loss(PATH, PATH, TrainConfig(w_coord=0.0, w_spectral=0.0, adversarial=False))

def test_loss_gradient_flows_to_prediction():
    J = np.array([[0.1, 0.0, 0.0], [0.5, 0.1, 0.0], [0.9, 0.0, 0.0]])
    A = np.array([[0.0, 0.7, 0.2], [0.7, 0.0, 0.6], [0.2, 0.6, 0.0]])
    Jv, Av = leaf(J), leaf(A)
    pred = SkeletonGraph(Jv, Av, check=False)
    backward(total_loss(pred, TRIANGLE, TrainConfig(adversarial=False)))
    assert Jv.grad.any() and Av.grad.any()
    assert np.all(np.isfinite(Jv.grad)) and np.all(np.isfinite(Av.grad))

def test_aligned_laplacians_unmatched():
    P = SkeletonGraph.from_edges([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]], [(0, 1), (1, 2), (2, 3)])
    G = SkeletonGraph.from_edges([[3, 0, 0], [0, 0, 0]], [(0, 1)])
    Lp, Lg = aligned_laplacians(P, G, [(3, 0), (0, 1)])
    # matched joints 3 and 0 first, then 1 and 2
    assert Lp.value.tolist() == [[1.0, 0.0, 0.0, -1.0],
                                 [0.0, 1.0, -1.0, 0.0],
                                 [0.0, -1.0, 2.0, -1.0],
                                 [-1.0, 0.0, -1.0, 2.0]]
    assert Lg.tolist() == [[1.0, -1.0], [-1.0, 1.0]]

def test_evaluate_records_identity():
    records = [generate_sample(c, 5, 40, 0.0, seed=i) for i, c in enumerate(CATEGORIES[:4])]
    R = evaluate_records(lambda r: r.skeleton(), records, TrainConfig())
    assert R.values() == (0.0, 0.0, 1.0, 1.0)
    assert [s.id for s in R.per_sample] == [r.id for r in records]

def test_read_metrics_log_errors(tmp_path):
    path = str(tmp_path / 'metrics.csv')
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(u'epoch,loss\n')
    with pytest.raises(DataError):
        read_metrics_log(path)
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(u'%s\n0,1.0\n' % ','.join(METRICS_HEADER))
    with pytest.raises(DataError):
        read_metrics_log(path)

def test_train_outputs(tiny_config, tiny_dataset, tmp_path):
    out = str(tmp_path / 'run')
    checkpoint, history = train(tiny_config, tiny_dataset, out)
    assert sorted(os.listdir(out)) == ['best.npz', 'last.npz', 'metrics.csv']
    assert checkpoint.epoch == 2
    assert [row['epoch'] for row in history] == [0, 1]

    rows = read_metrics_log(os.path.join(out, 'metrics.csv'))
    assert [row['epoch'] for row in rows] == [0, 1]
    for row in rows:
        assert all(np.isfinite(row[k]) for k in METRICS_HEADER)
        assert row['loss'] > 0 and row['disc'] > 0
        assert 0 <= row['val_sc'] <= 1 and 0 <= row['val_tf'] <= 1

    last = load_checkpoint(os.path.join(out, 'last.npz'))
    assert last.epoch == 2
    assert last.cfg == tiny_config
    assert int(last.gen_state['steps']) == 2 * len(select_split(tiny_dataset, 'train'))
    best = load_checkpoint(os.path.join(out, 'best.npz'))
    assert best.epoch in (1, 2)

def test_train_without_discriminator(tiny_config, tiny_dataset, tmp_path):
    cfg = tiny_config.copy(epochs=1, adversarial=False, batch_size=4)
    checkpoint, history = train(cfg, tiny_dataset, str(tmp_path / 'run'))
    assert checkpoint.disc_state == {}
    assert history[0]['adv'] == 0.0 and history[0]['disc'] == 0.0

def test_train_is_deterministic(tiny_config, tiny_dataset, tmp_path):
    cfg = tiny_config.copy(epochs=1)
    a, _ = train(cfg, tiny_dataset, str(tmp_path / 'a'))
    b, _ = train(cfg, tiny_dataset, str(tmp_path / 'b'))
    x = a.model.state_arrays()
    y = b.model.state_arrays()
    assert all(np.array_equal(x[k], y[k]) for k in x)

def test_resume(tiny_config, tiny_dataset, tmp_path):
    # one run of two epochs against one epoch followed by a resumed one
    full, _ = train(tiny_config, tiny_dataset, str(tmp_path / 'full'))
    out = str(tmp_path / 'split')
    first, _ = train(tiny_config.copy(epochs=1), tiny_dataset, out)
    assert first.epoch == 1
    second, history = train(tiny_config, tiny_dataset, out, resume=os.path.join(out, 'last.npz'))
    assert second.epoch == 2
    assert [row['epoch'] for row in history] == [1]
    assert [row['epoch'] for row in read_metrics_log(os.path.join(out, 'metrics.csv'))] == [0, 1]
    x = full.model.state_arrays()
    y = second.model.state_arrays()
    assert all(np.allclose(x[k], y[k], rtol=0, atol=1e-12) for k in x)

def test_resume_finished_run(tiny_config, tiny_dataset, tmp_path):
    out = str(tmp_path / 'run')
    first, _ = train(tiny_config.copy(epochs=1), tiny_dataset, out)
    again, history = train(tiny_config.copy(epochs=1), tiny_dataset, out, resume=first)
    assert history == []
    assert again.epoch == 1

def test_resume_other_config(tiny_config, tiny_dataset, tmp_path):
    out = str(tmp_path / 'run')
    first, _ = train(tiny_config.copy(epochs=1), tiny_dataset, out)
    with pytest.raises(ConfigurationError):
        train(tiny_config.copy(learning_rate=0.02), tiny_dataset, out, resume=first)

def test_train_errors(tiny_config, tmp_path):
    with pytest.raises(ConfigurationError):
        train({'epochs': 1}, [], str(tmp_path / 'run'))
    with pytest.raises(DataError):
        train(tiny_config, [], str(tmp_path / 'run'))

def test_train_non_finite(tiny_config, tiny_dataset, tmp_path, monkeypatch):
    import skelgraph.harness as harness
    loss = harness.total_loss
    n_train = len(select_split(tiny_dataset, 'train'))
    calls = []

    def poisoned(*args, **kwds):
        calls.append(1)
        value = loss(*args, **kwds)
        # second sample of the second epoch
        if len(calls) == n_train + 2:
            return constant(float('nan'))
        return value

    monkeypatch.setattr(harness, 'total_loss', poisoned)
    out = str(tmp_path / 'run')
    with pytest.raises(NumericalError):
        train(tiny_config, tiny_dataset, out)
    assert os.path.exists(os.path.join(out, 'last.npz'))
    with io.open(os.path.join(out, 'diagnostic.txt'), encoding='utf-8') as f:
        text = f.read()
    assert 'reason = non-finite loss' in text
    assert 'epoch = 1' in text
    good = load_checkpoint(os.path.join(out, 'last_good.npz'))
    assert good.epoch == 1
    last = load_checkpoint(os.path.join(out, 'last.npz'))
    x = good.model.state_arrays()
    y = last.model.state_arrays()
    assert all(np.array_equal(x[k], y[k]) for k in x)

def test_evaluate(tiny_config, tiny_dataset, tmp_path):
    out = str(tmp_path / 'run')
    train(tiny_config.copy(epochs=1), tiny_dataset, out)
    path = os.path.join(out, 'best.npz')
    R = evaluate(path, tiny_dataset, 'train')
    assert len(R.per_sample) == len(select_split(tiny_dataset, 'train'))
    assert R.mpjpe >= 0 and R.ged >= 0
    assert 0 <= R.sc <= 1 and 0 <= R.tf <= 1
    # same predictions from a loaded checkpoint object
    assert evaluate(load_checkpoint(path), tiny_dataset, 'train').values() == R.values()

def test_evaluate_errors(tiny_dataset):
    with pytest.raises(ParameterError):
        evaluate(None, tiny_dataset, 'train')
    with pytest.raises(ParameterError):
        evaluate(None, [], 'train', predict=lambda r: r.skeleton())

def test_ablation_configs(tiny_config):
    configs = ablation_configs(tiny_config)
    assert [name for name, _ in configs] == ['full', 'no_spectral', 'no_attention', 'no_adaptive', 'no_adversarial']
    assert configs[0][1] == tiny_config
    hashes = set(c.config_hash() for _, c in configs)
    assert len(hashes) == 5

def test_format_ablation_table():
    text = format_ablation_table([('no_adversarial', 0.123456, 2.0, 1.0)])
    assert text.splitlines()[1] == 'no_adversarial    0.1235   2.0000   1.0000'

def test_ablate(tiny_config, tiny_dataset, tmp_path):
    out = str(tmp_path / 'ablation')
    rows = ablate(tiny_config.copy(epochs=1), tiny_dataset, out, seeds=[3], split='train')
    assert [r[0] for r in rows] == ['full', 'no_spectral', 'no_attention', 'no_adaptive', 'no_adversarial']
    for name, m, g, t in rows:
        assert os.path.exists(os.path.join(out, name, 'seed-3', 'best.npz'))
        assert m >= 0 and g >= 0 and 0 <= t <= 1
    with io.open(os.path.join(out, 'ablation.csv'), encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'configuration,mpjpe,ged,tf'
    assert len(lines) == 6
    with io.open(os.path.join(out, 'ablation_seeds.csv'), encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'configuration,seed,mpjpe,ged,sc,tf'
    assert all(line.split(',')[1] == '3' for line in lines[1:])
    seed_rows = read_ablation_seeds(os.path.join(out, 'ablation_seeds.csv'))
    assert [(r[0], r[1]) for r in seed_rows] == [(r[0], 3) for r in rows]
    assert [d[3] for d in ablation_directions(seed_rows)] == [1, 1, 1]

def test_ablation_directions():
    rows = [('full', 41, 0.1, 2.0, 0.5, 0.6), ('no_spectral', 41, 0.1, 2.0, 0.5, 0.6),
            ('no_attention', 41, 0.1, 2.0, 0.5, 0.6), ('full', 42, 0.1, 2.0, 0.5, 0.6),
            ('no_spectral', 42, 0.1, 1.0, 0.5, 0.7)]
    assert ablation_directions(rows) == [('ged', 'no_spectral', 1, 2), ('tf', 'no_spectral', 1, 2),
                                         ('mpjpe', 'no_attention', 1, 1)]
    assert ablation_directions([]) == [('ged', 'no_spectral', 0, 0), ('tf', 'no_spectral', 0, 0),
                                       ('mpjpe', 'no_attention', 0, 0)]

@pytest.mark.parametrize("text", [u'', u'configuration,mpjpe,ged,tf\n', u'configuration,seed,mpjpe,ged,sc,tf\nfull,1,0.1\n',
                                  u'configuration,seed,mpjpe,ged,sc,tf\nfull,x,0.1,1,1,1\n'])
def test_read_ablation_seeds_errors(tmp_path, text):
    path = str(tmp_path / 'ablation_seeds.csv')
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    with pytest.raises(DataError):
        read_ablation_seeds(path)

def acceptance_dataset():
    return generate_dataset(CATEGORIES, 200, m_points=256, noise=0.01, seed=42, max_joints=12)

@pytest.mark.slow
def test_training_halves_pose_error(tmp_path):
    _, history = train(TrainConfig(), acceptance_dataset(), str(tmp_path / 'run'))
    assert len(history) == 50
    assert history[-1]['val_mpjpe'] <= 0.5 * history[0]['val_mpjpe']
    assert history[-1]['coord'] < history[0]['coord']

@pytest.mark.slow
def test_ablation_seeds(tmp_path):
    out = str(tmp_path / 'ablation')
    rows = ablate(TrainConfig(), acceptance_dataset(), out, seeds=[41, 42, 43])
    assert len(rows) == 5
    assert all(np.isfinite(r[1:]).all() for r in rows)
    for metric, other, wins, seeds in ablation_directions(read_ablation_seeds(os.path.join(out, 'ablation_seeds.csv'))):
        assert seeds == 3
        assert wins >= 2, (metric, other, wins)

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
