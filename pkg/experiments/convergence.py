r"""
Train the full model on a synthetic dataset, print the metrics of each
epoch and check that the validation MPJPE of the last epoch is at most half
of the first one (nonzero exit status otherwise).

    $ python experiments/convergence.py runs/convergence
"""
import sys
import logging

from skelgraph import *

logging.basicConfig(level=logging.INFO, format='%(message)s')

out = sys.argv[1] if len(sys.argv) > 1 else 'runs/convergence'

data = generate_dataset(CATEGORIES, 200, m_points=256, noise=0.01, seed=42, max_joints=12)
cfg = TrainConfig(epochs=50, learning_rate=1e-3)

checkpoint, history = train(cfg, data, out, verbosity=0)

print('%5s %10s %10s %10s %10s %10s %10s' % ('epoch', 'loss', 'coord', 'spectral', 'mpjpe', 'ged', 'tf'))
for row in history:
    print('%5d %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f' % (
        row['epoch'], row['loss'], row['coord'], row['spectral'],
        row['val_mpjpe'], row['val_ged'], row['val_tf']))

report = evaluate(checkpoint, data, 'test')
print(report.to_text())

first = history[0]['val_mpjpe']
last = history[-1]['val_mpjpe']
passed = last <= 0.5 * first
print('validation mpjpe %.4f -> %.4f (ratio %.3f): %s' % (first, last, last / first if first else 0.0,
                                                          'PASS' if passed else 'FAIL'))
sys.exit(0 if passed else 1)
