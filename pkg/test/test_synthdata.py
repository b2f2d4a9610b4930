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
import io
import pytest

import numpy as np

from skelgraph.constants import CATEGORIES, CHAIN, TREE, STAR, CYCLE, BICYCLE_LIKE, MIN_JOINTS
from skelgraph.errors import DataError, ParseError, ParameterError, InvariantError
from skelgraph.synthdata import (generate_skeleton, generate_sample, generate_dataset, sample_points,
        is_connected, split_of, select_split, write_dataset, read_dataset, record_to_string,
        record_from_string, SampleRecord)

def degrees(n, edges):
    d = [0] * n
    for i, j in edges:
        d[i] += 1
        d[j] += 1
    return d

@pytest.mark.parametrize("category", CATEGORIES)
def test_skeleton_structure(category, repeat=10):
    for seed in range(repeat):
        n = MIN_JOINTS[category] + seed % 6
        joints, edges = generate_skeleton(category, n, seed)
        assert joints.shape == (n, 3)
        assert edges == sorted(set(edges))
        assert is_connected(n, edges)
        d = degrees(n, edges)
        if category in (CHAIN, TREE, STAR):
            assert len(edges) == n - 1
        if category == CHAIN:
            assert max(d) <= 2
        elif category == STAR:
            assert d[0] == n - 1
        elif category == CYCLE:
            assert d == [2] * n
        elif category == BICYCLE_LIKE:
            # two independent loops
            assert len(edges) - n + 1 == 2

@pytest.mark.parametrize("category", CATEGORIES)
def test_sample_in_unit_box(category):
    r = generate_sample(category, MIN_JOINTS[category] + 2, 64, 0.02, seed=5)
    for X in (r.points, r.gt_joints):
        assert X.min() >= 0 and X.max() <= 1
    # the longest extent of points and joints together spans the box
    Y = np.vstack([r.points, r.gt_joints])
    assert abs((Y.max(axis=0) - Y.min(axis=0)).max() - 1.0) < 1e-9

def test_points_on_edges():
    joints = np.array([[0.0, 0, 0], [1, 0, 0], [1, 2, 0]])
    P = sample_points(joints, [(0, 1), (1, 2)], 200, 0.0, 3)
    assert P.shape == (200, 3)
    on_first = (np.abs(P[:, 1]) < 1e-12) & (P[:, 0] >= 0) & (P[:, 0] <= 1)
    on_second = (np.abs(P[:, 0] - 1) < 1e-12) & (P[:, 1] >= 0) & (P[:, 1] <= 2)
    assert (on_first | on_second).all()
    # sampled proportionally to length
    assert on_second.sum() > on_first.sum()

def test_sample_errors():
    with pytest.raises(ParameterError):
        sample_points([[0, 0, 0], [1, 0, 0]], [(0, 1)], 0, 0.0, 0)
    with pytest.raises(ParameterError):
        sample_points([[0, 0, 0], [1, 0, 0]], [(0, 1)], 5, -1.0, 0)
    with pytest.raises(ParameterError):
        generate_skeleton(CYCLE, 2, 0)
    with pytest.raises(ValueError):
        generate_skeleton('wheel', 5, 0)

def test_dataset_determinism(tmp_path):
    a = generate_dataset(CATEGORIES, 12, m_points=40, seed=42)
    b = generate_dataset(CATEGORIES, 12, m_points=40, seed=42)
    assert a == b
    write_dataset(a, str(tmp_path / 'a.jsonl'))
    write_dataset(b, str(tmp_path / 'b.jsonl'))
    assert (tmp_path / 'a.jsonl').read_bytes() == (tmp_path / 'b.jsonl').read_bytes()
    c = generate_dataset(CATEGORIES, 12, m_points=40, seed=43)
    assert a != c

def test_dataset_joint_range():
    D = generate_dataset([CHAIN, BICYCLE_LIKE], 20, m_points=10, seed=0, min_joints=4, max_joints=9)
    for r in D:
        assert max(4, MIN_JOINTS[r.category]) <= r.num_joints() <= 9

def test_round_trip(tmp_path):
    D = generate_dataset(CATEGORIES, 7, m_points=20, seed=3)
    path = str(tmp_path / 'd.jsonl')
    write_dataset(D, path)
    assert read_dataset(path) == D
    assert record_from_string(record_to_string(D[2])) == D[2]

def test_splits():
    D = generate_dataset(CATEGORIES, 200, m_points=5, seed=1)
    parts = [select_split(D, s) for s in ('train', 'val', 'test')]
    assert sum(len(p) for p in parts) == len(D)
    assert len(parts[0]) > len(parts[1]) and len(parts[0]) > len(parts[2])
    assert split_of(D[7].id) == split_of(D[7].id)
    with pytest.raises(ParameterError):
        select_split(D, 'dev')

def write_lines(tmp_path, lines):
    path = tmp_path / 'bad.jsonl'
    with io.open(str(path), 'w', encoding='utf-8') as f:
        f.write(u'\n'.join(lines) + u'\n')
    return str(path)

HEADER = '{"schema_version": 1}'
GOOD = '{"id": "a", "category": "chain", "points": [[0,0,0]], "gt_joints": [[0,0,0],[1,1,1]], "gt_edges": [[0,1]], "meta": {}}'

def test_read_good(tmp_path):
    assert len(read_dataset(write_lines(tmp_path, [HEADER, GOOD]))) == 1

@pytest.mark.parametrize("lines, line", [
    (['{"schema_version": 2}', GOOD], 1),
    (['not json'], 1),
    ([HEADER, GOOD, '{"id": "b"'], 3),
    ([HEADER, GOOD.replace('chain', 'wheel')], 2),
    ([HEADER, GOOD.replace('"meta": {}', '"extra": 1')], 2),
    ])
def test_read_parse_errors(tmp_path, lines, line):
    with pytest.raises(ParseError) as info:
        read_dataset(write_lines(tmp_path, lines))
    assert info.value.line == line

@pytest.mark.parametrize("record", [
    GOOD.replace('[[0,0,0],[1,1,1]]', '[[0,0,0],[1,1,2]]'),
    GOOD.replace('[[0,1]]', '[]'),
    GOOD.replace('[[0,1]]', '[[1,0]]'),
    GOOD.replace('"points": [[0,0,0]]', '"points": []'),
    ])
def test_read_invalid_records(tmp_path, record):
    with pytest.raises(DataError) as info:
        read_dataset(write_lines(tmp_path, [HEADER, record]))
    assert info.value.record_id == 'a'

def test_record_count_mismatch(tmp_path):
    with pytest.raises(ParseError):
        read_dataset(write_lines(tmp_path, ['{"schema_version": 1, "count": 2}', GOOD]))

def test_record_invariants():
    with pytest.raises(InvariantError):
        SampleRecord('x', CHAIN, [[0.5, 0.5, 0.5]], [[0, 0, 0], [1, 1, 1]], [(0, 1), (0, 1)])
    r = SampleRecord('x', 'tree', [[0.5, 0.5, 0.5]], [[0, 0, 0], [1, 1, 1], [0, 1, 0]], [(0, 1), (0, 2)])
    assert r.category_name == 'tree'
    assert r.skeleton().hard_edges() == [(0, 1), (0, 2)]
    assert len(r.pointcloud()) == 1

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
