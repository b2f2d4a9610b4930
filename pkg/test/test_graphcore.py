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
import pytest

import numpy as np

from skelgraph.env import random_state
from skelgraph.errors import InvariantError, DataError, ParameterError
from skelgraph.diffcore import leaf, reduce_sum, mul, constant, backward
from skelgraph.graphcore import (SkeletonGraph, PointCloud, laplacian, binary_laplacian,
        normalize_pointcloud, knn_graph)
from skelgraph.permutation import perm_random, perm_invert

def random_skeleton(rng, n):
    A = np.triu(rng.random((n, n)), 1)
    return SkeletonGraph(rng.random((n, 3)), A + A.T)

def test_laplacian_properties(repeat=1000):
    rng = random_state(0)
    for _ in range(repeat):
        S = random_skeleton(rng, int(rng.integers(1, 9)))
        L = laplacian(S).value
        assert np.array_equal(L, L.T)
        assert np.abs(L.sum(axis=1)).max() <= 1e-9
        assert np.linalg.eigvalsh(L).min() >= -1e-8

def test_laplacian_gradient():
    A = leaf([[0.0, 0.5], [0.5, 0.0]])
    W = constant([[1.0, 2.0], [3.0, 4.0]])
    backward(reduce_sum(mul(laplacian(A), W)))
    # dL/dA_ij = e_i e_i^T - e_i e_j^T row-wise
    assert A.grad.tolist() == [[0.0, 1.0 - 2.0], [4.0 - 3.0, 0.0]]

def test_laplacian_not_symmetric():
    with pytest.raises(InvariantError):
        laplacian(constant([[0.0, 1.0], [0.0, 0.0]]))

def test_binary_laplacian_path():
    L = binary_laplacian(4, [(0, 1), (1, 2), (2, 3)])
    assert np.diag(L).tolist() == [1.0, 2.0, 2.0, 1.0]
    with pytest.raises(InvariantError):
        binary_laplacian(2, [(0, 0)])
    with pytest.raises(InvariantError):
        binary_laplacian(2, [(0, 2)])

@pytest.mark.parametrize("joints, adjacency", [
    (np.zeros((0, 3)), np.zeros((0, 0))),
    (np.zeros((2, 2)), np.zeros((2, 2))),
    (np.zeros((2, 3)), np.array([[0.0, 1.5], [1.5, 0.0]])),
    (np.zeros((2, 3)), np.array([[1.0, 0.0], [0.0, 0.0]])),
    (np.zeros((2, 3)), np.zeros((3, 3))),
    ])
def test_invalid_skeletons(joints, adjacency):
    with pytest.raises(InvariantError):
        SkeletonGraph(joints, adjacency)

def test_relabel_laplacian(repeat=20):
    rng = random_state(1)
    for i in range(repeat):
        n = int(rng.integers(1, 8))
        S = random_skeleton(rng, n)
        p = perm_random(n, seed=i)
        T = S.relabel(p)
        q = perm_invert(p)
        L = laplacian(S).value
        M = laplacian(T).value
        assert np.allclose(M, L[np.ix_(q, q)])
        assert np.allclose(T.joints.value, S.joints.value[list(q)])
        T._check()

def test_binarized():
    S = SkeletonGraph(np.zeros((3, 3)), [[0, 0.9, 0.2], [0.9, 0, 0.6], [0.2, 0.6, 0]])
    assert S.hard_edges() == [(0, 1), (1, 2)]
    assert S.hard_edges(0.1) == [(0, 1), (0, 2), (1, 2)]
    B = S.binarized()
    assert sorted(set(B.adjacency.value.ravel().tolist())) == [0.0, 1.0]

def test_normalize_unit_box(repeat=20):
    rng = random_state(2)
    for _ in range(repeat):
        raw = rng.normal(size=(int(rng.integers(2, 50)), 3)) * rng.uniform(0.1, 100) + rng.normal(size=3) * 10
        pc = normalize_pointcloud(raw)
        P = pc.points
        assert P.min() >= 0.0 and P.max() <= 1.0
        assert abs((P.max(axis=0) - P.min(axis=0)).max() - 1.0) < 1e-12
        # isotropic: pairwise distances scale uniformly
        d0 = np.linalg.norm(raw[0] - raw[1])
        d1 = np.linalg.norm(P[0] - P[1])
        assert abs(d1 - pc.scale * d0) < 1e-9
        assert np.allclose(pc.transform(raw), P)

def test_normalize_degenerate():
    pc = normalize_pointcloud([[2.0, 2.0, 2.0]] * 4)
    assert pc.degenerate
    assert np.allclose(pc.points, 0.5)

def test_normalize_errors():
    with pytest.raises(DataError):
        normalize_pointcloud(np.zeros((0, 3)))
    with pytest.raises(DataError):
        normalize_pointcloud(np.zeros((4, 2)))
    with pytest.raises(InvariantError):
        PointCloud([[0.0, 2.0, 0.0]])

def test_knn_symmetric(repeat=10):
    rng = random_state(3)
    for _ in range(repeat):
        M = int(rng.integers(3, 30))
        k = int(rng.integers(1, M))
        K = knn_graph(PointCloud(rng.random((M, 3))), k)
        assert (K == K.T).all()
        assert not K.diagonal().any()
        assert (K.sum(axis=1) >= k).all()

def test_knn_invalid():
    with pytest.raises(ParameterError):
        knn_graph(PointCloud(np.zeros((4, 3))), 0)

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
