r"""
Per category means of the four metrics for a trained checkpoint.

    $ python experiments/category_breakdown.py runs/convergence/best.npz data.jsonl
"""
import sys

from skelgraph import *

checkpoint = load_checkpoint(sys.argv[1])
if len(sys.argv) > 2:
    data = read_dataset(sys.argv[2])
else:
    data = generate_dataset(CATEGORIES, 200, m_points=256, noise=0.01, seed=42)

report = evaluate(checkpoint, data, 'test')
print('%-14s %8s %8s %8s %8s' % ('category', 'mpjpe', 'ged', 'sc', 'tf'))
for category, (m, g, s, t) in sorted(report.per_category().items()):
    print('%-14s %8.4f %8.4f %8.4f %8.4f' % (category, m, g, s, t))
