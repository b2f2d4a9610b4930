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
import os
import sys
import pytest

from conftest import TINY

from skelgraph.__main__ import main, exit_code
from skelgraph.config import TrainConfig
from skelgraph.errors import ConfigurationError, DataError, ParseError, NumericalError, DomainError, InvariantError
from skelgraph.metrics import MetricsReport
from skelgraph.model import load_checkpoint
from skelgraph.synthdata import read_dataset

@pytest.fixture
def workdir(tmp_path):
    data = str(tmp_path / 'data.jsonl')
    assert main(['-q', 'gen-data', '--categories', 'all', '--count', '40', '--points', '32',
                 '--seed', '11', '--min-joints', '3', '--max-joints', '6', '--out', data]) == 0
    config = str(tmp_path / 'run.cfg')
    TrainConfig(**dict(TINY, epochs=1)).write(config)
    return tmp_path, data, config

def test_exit_codes():
    assert exit_code(ConfigurationError('x')) == 1
    assert exit_code(DataError('x')) == 2
    assert exit_code(ParseError('x')) == 2
    assert exit_code(InvariantError('x')) == 2
    assert exit_code(IOError('x')) == 2
    assert exit_code(NumericalError('x')) == 3
    assert exit_code(DomainError('x')) == 3

def test_usage(capsys):
    assert main([]) == 1
    assert main(['gen-data', '--out', 'x.jsonl']) == 1
    assert main(['eval', '--checkpoint', 'a.npz', '--data', 'b', '--split', 'dev']) == 1
    assert main(['train', '--help']) == 0

def test_gen_data(tmp_path):
    path = str(tmp_path / 'chains.jsonl')
    assert main(['-q', 'gen-data', '--categories', 'chain,star', '--count', '6', '--points', '20', '--out', path]) == 0
    records = read_dataset(path)
    assert len(records) == 6
    assert set(r.category_name for r in records) == {'chain', 'star'}
    assert all(r.points.shape == (20, 3) for r in records)

def test_gen_data_is_reproducible(tmp_path):
    paths = [str(tmp_path / name) for name in ('a.jsonl', 'b.jsonl')]
    for path in paths:
        assert main(['-q', 'gen-data', '--count', '5', '--points', '16', '--seed', '3', '--out', path]) == 0
    contents = []
    for path in paths:
        with io.open(path, 'rb') as f:
            contents.append(f.read())
    assert contents[0] == contents[1]

def test_gen_data_unknown_category(tmp_path):
    assert main(['-q', 'gen-data', '--categories', 'spiral', '--count', '2', '--out', str(tmp_path / 'x')]) == 1

def test_train_eval(workdir, capsys):
    tmp_path, data, config = workdir
    out = str(tmp_path / 'run')
    assert main(['-q', 'train', '--config', config, '--data', data, '--out', out]) == 0
    assert load_checkpoint(os.path.join(out, 'last.npz')).epoch == 1

    capsys.readouterr()
    best = os.path.join(out, 'best.npz')
    assert main(['-q', 'eval', '--checkpoint', best, '--data', data, '--split', 'train']) == 0
    printed = capsys.readouterr().out
    assert printed.startswith('# skelgraph metrics report\n')

    report = str(tmp_path / 'report.txt')
    assert main(['-q', 'eval', '--checkpoint', best, '--data', data, '--split', 'train', '--report', report]) == 0
    with io.open(report, encoding='utf-8') as f:
        text = f.read()
    assert text == printed
    R = MetricsReport.from_text(text)
    assert 0 <= R.tf <= 1

    # resuming a finished run is a no-op
    assert main(['-q', 'train', '--config', config, '--data', data, '--out', out,
                 '--resume', os.path.join(out, 'last.npz')]) == 0

def test_train_errors(workdir):
    tmp_path, data, config = workdir
    bad = str(tmp_path / 'bad.cfg')
    with io.open(bad, 'w', encoding='utf-8') as f:
        f.write(u'lr = 0.1\n')
    assert main(['-q', 'train', '--config', bad, '--data', data, '--out', str(tmp_path / 'a')]) == 1
    assert main(['-q', 'train', '--config', config, '--data', str(tmp_path / 'missing.jsonl'),
                 '--out', str(tmp_path / 'b')]) == 2
    broken = str(tmp_path / 'broken.jsonl')
    with io.open(broken, 'w', encoding='utf-8') as f:
        f.write(u'not a dataset\n')
    assert main(['-q', 'train', '--config', config, '--data', broken, '--out', str(tmp_path / 'c')]) == 2

def test_eval_missing_checkpoint(workdir):
    tmp_path, data, _ = workdir
    assert main(['-q', 'eval', '--checkpoint', str(tmp_path / 'none.npz'), '--data', data]) == 2

def test_grad_check(capsys):
    assert main(['-q', 'grad-check', '--trials', '1', '--suite', 'eigenvalues', '--suite', 'diffcore']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in lines] == ['diffcore', 'eigenvalues']
    assert all(line.endswith('ok') for line in lines)
    assert main(['-q', 'grad-check', '--trials', '1', '--suite', 'hessian']) == 1

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
