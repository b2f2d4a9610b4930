r"""
Ablation table over three seeds: the full model and the model with one of
spectral loss, hierarchical attention, adaptive complexity or adversarial
training switched off.

The full model is expected to be at least as good as the model without
spectral loss on GED and topological fidelity, and as the model without
hierarchical attention on MPJPE, for at least two of the three seeds
(nonzero exit status otherwise).

    $ python experiments/ablation_table.py runs/ablation
"""
import os
import sys
import logging

from skelgraph import *
from skelgraph.harness import format_ablation_table, read_ablation_seeds, ablation_directions

logging.basicConfig(level=logging.INFO, format='%(message)s')

out = sys.argv[1] if len(sys.argv) > 1 else 'runs/ablation'
seeds = [41, 42, 43]

data = generate_dataset(CATEGORIES, 200, m_points=256, noise=0.01, seed=42, max_joints=12)
cfg = TrainConfig(epochs=50)

rows = ablate(cfg, data, out, seeds=seeds)
print(format_ablation_table(rows))

full = rows[0]
for name, mpjpe, ged, tf in rows[1:]:
    print('%-15s mpjpe %+7.2f%%  ged %+7.2f%%  tf %+7.2f%%' % (
        name,
        100 * (mpjpe - full[1]) / full[1] if full[1] else 0.0,
        100 * (ged - full[2]) / full[2] if full[2] else 0.0,
        100 * (tf - full[3]) / full[3] if full[3] else 0.0))

passed = True
for metric, other, wins, total in ablation_directions(read_ablation_seeds(os.path.join(out, 'ablation_seeds.csv'))):
    ok = wins >= 2
    passed = passed and ok
    print('full vs %-13s %-6s %d/%d seeds: %s' % (other, metric, wins, total, 'PASS' if ok else 'FAIL'))
sys.exit(0 if passed else 1)
