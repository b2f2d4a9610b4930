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

import sys
import math
import pytest

import itertools
import numpy as np

from skelgraph.env import random_state
from skelgraph.errors import InvariantError, ParseError
from skelgraph.graphcore import SkeletonGraph
from skelgraph.permutation import partial_injective_maps, perm_random, edges_relabel
from skelgraph.metrics import (match_nodes, mpjpe, graph_edit_distance, exact_edit_distance,
        mapped_edit_cost, lexicographic_assignment, spectral_consistency, topological_fidelity, evaluate_pair,
        SampleMetrics, MetricsReport)

def random_edges(rng, n, p=0.5):
    return [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]

def brute_force_ged(n_a, edges_a, n_b, edges_b):
    return min(mapped_edit_cost(n_a, edges_a, n_b, edges_b, p) for p in partial_injective_maps(n_a, n_b))

def test_ged_against_brute_force(repeat=200):
    rng = random_state(0)
    for _ in range(repeat):
        n_a = int(rng.integers(0, 7))
        n_b = int(rng.integers(0, 7))
        e_a = random_edges(rng, n_a)
        e_b = random_edges(rng, n_b)
        d = brute_force_ged(n_a, e_a, n_b, e_b)
        assert exact_edit_distance(n_a, e_a, n_b, e_b) == d
        assert graph_edit_distance(n_a, e_a, n_b, e_b) == float(d)

def test_ged_symmetric(repeat=20):
    rng = random_state(1)
    for _ in range(repeat):
        n_a = int(rng.integers(1, 7))
        n_b = int(rng.integers(1, 7))
        e_a = random_edges(rng, n_a)
        e_b = random_edges(rng, n_b)
        assert exact_edit_distance(n_a, e_a, n_b, e_b) == exact_edit_distance(n_b, e_b, n_a, e_a)

def test_ged_isomorphic(repeat=20):
    rng = random_state(2)
    for i in range(repeat):
        n = int(rng.integers(1, 8))
        e = random_edges(rng, n)
        p = perm_random(n, seed=i)
        assert exact_edit_distance(n, e, n, edges_relabel(e, p)) == 0

def test_ged_empty():
    assert graph_edit_distance(0, [], 0, []) == 0.0
    assert graph_edit_distance(0, [], 3, [(0, 1)]) == 4.0

def test_ged_triangle_inequality(repeat=200):
    rng = random_state(5)
    for _ in range(repeat):
        graphs = []
        for _ in range(3):
            n = int(rng.integers(0, 7))
            graphs.append((n, random_edges(rng, n, float(rng.random()))))
        (n_a, e_a), (n_b, e_b), (n_c, e_c) = graphs
        ab = exact_edit_distance(n_a, e_a, n_b, e_b)
        bc = exact_edit_distance(n_b, e_b, n_c, e_c)
        ac = exact_edit_distance(n_a, e_a, n_c, e_c)
        assert ac <= ab + bc

def test_ged_bound_above_exact(repeat=200):
    rng = random_state(3)
    for _ in range(repeat):
        n_a = int(rng.integers(2, 7))
        n_b = int(rng.integers(2, 7))
        e_a = random_edges(rng, n_a)
        e_b = random_edges(rng, n_b)
        exact = graph_edit_distance(n_a, e_a, n_b, e_b)
        bound = graph_edit_distance(n_a, e_a, n_b, e_b, exact_limit=1)
        assert bound >= exact

def test_ged_upper_bound_used():
    # the initial bound does not change the result
    e_a = [(0, 1), (1, 2), (2, 3)]
    e_b = [(0, 2), (1, 3), (2, 3)]
    assert exact_edit_distance(4, e_a, 4, e_b, upper=[0, 1, 2, 3]) == exact_edit_distance(4, e_a, 4, e_b)

def test_match_nodes_optimal(repeat=20):
    rng = random_state(4)
    for _ in range(repeat):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        P = rng.random((n, 3))
        G = rng.random((m, 3))
        pairs = match_nodes(P, G)
        assert len(pairs) == min(n, m)
        cost = sum(((P[i] - G[j]) ** 2).sum() for i, j in pairs)
        if n <= m:
            best = min(sum(((P[i] - G[q[i]]) ** 2).sum() for i in range(n))
                       for q in itertools.permutations(range(m), n))
        else:
            best = min(sum(((P[q[j]] - G[j]) ** 2).sum() for j in range(m))
                       for q in itertools.permutations(range(n), m))
        assert cost <= best + 1e-8

def lexicographic_optimum(C):
    n, m = C.shape
    if n <= m:
        candidates = [sorted(zip(range(n), q)) for q in itertools.permutations(range(m), n)]
    else:
        candidates = [sorted(zip(q, range(m))) for q in itertools.permutations(range(n), m)]
    best = min(sum(C[i, j] for i, j in pairs) for pairs in candidates)
    return min(pairs for pairs in candidates if sum(C[i, j] for i, j in pairs) == best)

def test_match_nodes_ties(repeat=100):
    # integer coordinates give many optimal assignments
    rng = random_state(6)
    for _ in range(repeat):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        P = rng.integers(0, 2, size=(n, 3)).astype(float)
        G = rng.integers(0, 2, size=(m, 3)).astype(float)
        C = ((P[:, None, :] - G[None, :, :]) ** 2).sum(axis=2)
        assert match_nodes(P, G) == lexicographic_optimum(C)
        assert lexicographic_assignment(C) == lexicographic_optimum(C)

def test_match_nodes_equal_points():
    assert match_nodes(np.zeros((3, 3)), np.ones((4, 3))) == [(0, 0), (1, 1), (2, 2)]
    assert match_nodes(np.zeros((4, 3)), np.ones((2, 3))) == [(0, 0), (1, 1)]

def test_mpjpe_unmatched():
    P = np.zeros((4, 3))
    G = np.zeros((2, 3))
    assert abs(mpjpe(P, G) - 2 * math.sqrt(3) / 4) < 1e-15
    assert mpjpe(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0

def test_metrics_permutation_invariant(repeat=10):
    rng = random_state(5)
    for i in range(repeat):
        n = int(rng.integers(2, 7))
        gt = SkeletonGraph.from_edges(rng.random((n, 3)), random_edges(rng, n))
        m = int(rng.integers(2, 7))
        A = np.triu(rng.random((m, m)), 1)
        pred = SkeletonGraph(rng.random((m, 3)), A + A.T)
        p = perm_random(m, seed=i)
        a = evaluate_pair(pred, gt)
        b = evaluate_pair(pred.relabel(p), gt)
        assert np.allclose(a, b)

def test_metrics_identity(repeat=10):
    rng = random_state(6)
    for _ in range(repeat):
        n = int(rng.integers(1, 9))
        S = SkeletonGraph.from_edges(rng.random((n, 3)), random_edges(rng, n))
        assert evaluate_pair(S, S) == (0.0, 0.0, 1.0, 1.0)

def test_spectral_consistency_range(repeat=10):
    rng = random_state(7)
    for _ in range(repeat):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        a = SkeletonGraph.from_edges(np.zeros((n, 3)), random_edges(rng, n))
        b = SkeletonGraph.from_edges(np.zeros((m, 3)), random_edges(rng, m))
        sc = spectral_consistency(a, b)
        assert 0 < sc <= 1
        assert sc == spectral_consistency(b, a)

def test_topological_fidelity_cases():
    J = np.array([[0, 0, 0], [0.5, 0, 0], [1, 0, 0], [1, 1, 0]], dtype=float)
    path = SkeletonGraph.from_edges(J, [(0, 1), (1, 2), (2, 3)])
    disjoint = SkeletonGraph.from_edges(J, [(0, 2), (1, 3)])
    assert topological_fidelity(path, path) == 1.0
    assert topological_fidelity(disjoint, path) == 0.0
    # precision 1, recall 2/3
    part = SkeletonGraph.from_edges(J, [(0, 1), (1, 2)])
    assert abs(topological_fidelity(part, path) - 0.8) < 1e-12

def test_report_text():
    samples = [SampleMetrics('s-%d' % i, ['chain', 'tree'][i % 2], 0.1 * i, i, 1.0 / (1 + i), 0.5)
               for i in range(5)]
    R = MetricsReport.from_samples(samples)
    assert MetricsReport.from_text(R.to_text()) == R
    assert R.per_category()['chain'][1] == 2.0
    assert abs(R.mpjpe - 0.2) < 1e-12

def test_report_empty():
    R = MetricsReport.from_samples([])
    assert R.values() == (0.0, 0.0, 0.0, 0.0)
    assert MetricsReport.from_text(R.to_text()) == R

def test_report_invalid():
    with pytest.raises(InvariantError):
        MetricsReport(0.1, 1, 1.5, 0.5)
    with pytest.raises(InvariantError):
        MetricsReport(float('nan'), 1, 0.5, 0.5)

@pytest.mark.parametrize("text", [
    "mpjpe = 0.1\nged = 1\nsc = 0.5\n",
    "mpjpe = 0.1\nged = 1\nsc = 0.5\ntf = x\n",
    "mpjpe = 0.1\nged = 1\nsc = 0.5\ntf = 0.5\nfoo = 2\n",
    "mpjpe = 0.1\nged = 1\nsc = 0.5\ntf = 0.5\nsamples = 1\n",
    "mpjpe 0.1\n",
    "mpjpe = 0.1\nged = 1\nsc = 0.5\ntf = 0.5\nsample = a, chain, 1\n",
    ])
def test_report_parse_errors(text):
    with pytest.raises(ParseError):
        MetricsReport.from_text(text)

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
