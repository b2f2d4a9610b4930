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

import numpy as np
from scipy.spatial.distance import pdist

from skelgraph.env import random_state
from skelgraph.errors import ConfigurationError, ParameterError
from skelgraph.diffcore import leaf, constant, reduce_sum, mul, check_gradients
from skelgraph.graphcore import normalize_pointcloud
from skelgraph.encdec import (EncoderParams, DecoderParams, encode, decode, group_points,
        farthest_point_sample, canonical_seed, entropy_node_count, adaptive_node_count)

def small_encoder(seed=0):
    return EncoderParams(samples=(12, 4), radii=(0.3, 0.6), widths=((6,), (6, 8)), global_width=5, seed=seed)

def test_fps_maxmin(repeat=20):
    rng = random_state(0)
    for _ in range(repeat):
        M = int(rng.integers(2, 40))
        P = rng.random((M, 3))
        n = int(rng.integers(1, M + 1))
        idx = farthest_point_sample(P, n)
        assert len(set(idx)) == n
        assert idx[0] == canonical_seed(P)
        # each new point is the farthest from the previous selection
        for t in range(1, n):
            d = np.linalg.norm(P[:, None, :] - P[None, idx[:t], :], axis=2).min(axis=1)
            assert abs(d[idx[t]] - d.max()) < 1e-12

@pytest.mark.parametrize("n", [8, 12, 16])
def test_fps_against_random_subsets(n, trials=200):
    rng = random_state(n)
    P = rng.random((256, 3))
    spread = pdist(P[farthest_point_sample(P, n)]).min()
    for _ in range(trials):
        subset = rng.choice(256, size=n, replace=False)
        assert spread >= pdist(P[subset]).min()

def test_fps_deterministic():
    P = random_state(1).random((20, 3))
    assert farthest_point_sample(P, 7) == farthest_point_sample(P.copy(), 7)
    assert farthest_point_sample(P, 0) == []
    with pytest.raises(ParameterError):
        farthest_point_sample(P, 3, seed_index=20)

def test_grouping(repeat=10):
    rng = random_state(2)
    enc = small_encoder()
    for _ in range(repeat):
        P = rng.random((30, 3))
        plan = group_points(P, enc)
        assert [s.centers.shape[0] for s in plan] == [12, 4]
        prev = P
        for stage, r in zip(plan, enc.radii):
            groups = stage.index.reshape(-1, stage.group_size)
            for center, g in zip(stage.centers, groups):
                assert any((prev[i] == center).all() for i in g)
                assert (np.linalg.norm(prev[g] - center, axis=1) <= r + 1e-12).all()
            assert np.allclose(stage.geometry[:, 3], np.linalg.norm(stage.geometry[:, :3], axis=1))
            prev = stage.centers

def test_max_group():
    P = random_state(3).random((30, 3))
    enc = EncoderParams(samples=(5, 2), radii=(1.0, 1.0), widths=((4,), (4,)), max_group=3)
    assert all(s.group_size <= 3 for s in group_points(P, enc))

def test_encoder_order_invariance(repeat=5):
    rng = random_state(4)
    enc = small_encoder(1)
    for _ in range(repeat):
        P = rng.random((25, 3))
        a = encode(P, enc).value
        b = encode(P[rng.permutation(25)], enc).value
        assert a.shape == (1, 5)
        assert np.allclose(a, b)

def test_encoder_gradient():
    rng = random_state(5)
    enc = EncoderParams(samples=(6, 2), radii=(0.4, 0.8), widths=((4,), (4,)), global_width=3, seed=2)
    P = rng.random((15, 3))
    plan = group_points(P, enc)
    w = constant(rng.normal(size=(1, 3)))
    xs = [p for _, p in enc.parameters()]
    assert check_gradients(lambda: reduce_sum(mul(encode(P, enc, plan), w)), xs) < 1e-4

def test_encoder_errors():
    with pytest.raises(ConfigurationError):
        EncoderParams(samples=(4,), radii=(0.1, 0.2), widths=((4,),))
    with pytest.raises(ConfigurationError):
        EncoderParams(samples=(4, 2), radii=(0.1, -0.2), widths=((4,), (4,)))
    with pytest.raises(ConfigurationError):
        encode(random_state(0).random((10, 3)), small_encoder(), plan=[])

def test_decode(repeat=10):
    rng = random_state(6)
    dec = DecoderParams(5, feature_width=3, n_min=2, n_max=7, hidden=(8,), seed=1)
    for _ in range(repeat):
        g = constant(rng.normal(size=(1, 5)) * 10)
        n = int(rng.integers(2, 8))
        S = decode(g, n, dec)
        assert S.num_joints() == n and S.num_features() == 3
        J = S.joints.value
        assert J.min() >= 0 and J.max() <= 1
        assert not S.adjacency.value.any()
        # slots are nested: fewer joints are a prefix of more joints
        T = decode(g, 7, dec)
        assert np.allclose(T.joints.value[:n], J)

def test_decode_gradient():
    rng = random_state(7)
    dec = DecoderParams(4, feature_width=2, n_min=1, n_max=4, hidden=(6,), seed=2)
    g = leaf(rng.normal(size=(1, 4)))
    w = constant(rng.normal(size=(3, 3)))
    xs = [g] + [p for _, p in dec.parameters()]
    assert check_gradients(lambda: reduce_sum(mul(decode(g, 3, dec).joints, w)), xs) < 1e-4

def test_decoder_bounds():
    with pytest.raises(ConfigurationError):
        DecoderParams(4, n_min=5, n_max=4)
    with pytest.raises(ConfigurationError):
        DecoderParams(4, n_min=0, n_max=4)
    with pytest.raises(ConfigurationError):
        DecoderParams(4, feature_width=0)
    assert DecoderParams(4, n_min=2, n_max=3).bounds == (2, 3)

def test_entropy_node_count_monotone():
    M = 50
    counts = [entropy_node_count(h, M, (4, 12)) for h in np.linspace(0, math.log(M), 30)]
    assert counts == sorted(counts)
    assert counts[0] == 4 and counts[-1] == 12
    assert entropy_node_count(3.0, 1, (4, 12)) == 4
    assert entropy_node_count(-1.0, 10, (4, 12)) == 4

def test_adaptive_node_count(repeat=10):
    rng = random_state(8)
    for _ in range(repeat):
        pc = normalize_pointcloud(rng.random((40, 3)))
        n = adaptive_node_count(pc, 6, (4, 12))
        assert 4 <= n <= 12
        assert n == adaptive_node_count(pc, 6, (4, 12))

def test_adaptive_node_count_degenerate():
    pc = normalize_pointcloud(np.ones((10, 3)))
    assert 3 <= adaptive_node_count(pc, 3, (3, 9)) <= 9

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
