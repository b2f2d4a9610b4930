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

from skelgraph.errors import ConfigurationError, DataError, NumericalError
from skelgraph.diffcore import leaf, reduce_sum, square, backward
from skelgraph.optim import Adam

def test_first_step_is_learning_rate():
    # bias corrected moments make the first step +-learning_rate
    x = leaf([[1.0, -3.0, 0.5]])
    opt = Adam([('x', x)], learning_rate=0.01)
    backward(reduce_sum(square(x)))
    opt.step()
    assert np.allclose(x.value, [[0.99, -2.99, 0.49]])
    assert opt.steps == 1

def test_zero_grad():
    x = leaf([[1.0]])
    opt = Adam([('x', x)])
    backward(reduce_sum(square(x)))
    opt.zero_grad()
    assert not x.grad.any()

def test_non_finite_gradient():
    x = leaf([[1.0]])
    opt = Adam([('x', x)])
    x.grad[0, 0] = np.inf
    with pytest.raises(NumericalError):
        opt.step()
    assert x.value.tolist() == [[1.0]]
    assert opt.steps == 0

@pytest.mark.parametrize("kwds", [dict(learning_rate=0.0), dict(beta1=1.0), dict(beta2=-0.1)])
def test_invalid(kwds):
    with pytest.raises(ConfigurationError):
        Adam([('x', leaf(1.0))], **kwds)

def test_state_round_trip():
    def run(opt, x, steps):
        for _ in range(steps):
            opt.zero_grad()
            backward(reduce_sum(square(x)))
            opt.step()

    x = leaf([[2.0, -1.0]])
    opt = Adam([('x', x)], learning_rate=0.05)
    run(opt, x, 5)
    state = opt.state_dict()
    y = leaf(x.value.copy())
    other = Adam([('x', y)], learning_rate=0.05)
    other.load_state_dict(state)
    assert other.steps == 5
    run(opt, x, 5)
    run(other, y, 5)
    assert np.array_equal(x.value, y.value)

def test_state_mismatch():
    opt = Adam([('x', leaf([[1.0, 2.0]]))])
    with pytest.raises(DataError):
        opt.load_state_dict({'steps': np.array(1)})
    with pytest.raises(DataError):
        opt.load_state_dict({'steps': np.array(1), 'm.x': np.zeros((1, 3)), 'v.x': np.zeros((1, 3))})

if __name__ == '__main__': sys.exit(pytest.main(sys.argv))
