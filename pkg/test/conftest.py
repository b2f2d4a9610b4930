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

import os
import pytest

def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: desk-scale training runs (set SKELGRAPH_SLOW=1 to run them)')

def pytest_collection_modifyitems(config, items):
    if os.environ.get('SKELGRAPH_SLOW') == '1':
        return
    skip = pytest.mark.skip(reason='set SKELGRAPH_SLOW=1 to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)

from skelgraph.config import TrainConfig
from skelgraph.constants import CATEGORIES
from skelgraph.synthdata import generate_dataset

# a configuration small enough to train in a few seconds
TINY = dict(epochs=2, learning_rate=0.01, encoder_samples=(16, 4), encoder_radii=(0.3, 0.6),
            encoder_widths=(6, 6), global_width=8, feature_width=4, n_min=3, n_max=6, knn=4,
            decoder_hidden=(12,), edge_hidden=(6,), attention_levels=2, disc_hidden=(6,),
            disc_K=4, disc_bins=4)

@pytest.fixture
def tiny_config():
    return TrainConfig(**TINY)

@pytest.fixture(scope='session')
def tiny_dataset():
    return generate_dataset(CATEGORIES, 40, m_points=32, noise=0.01, seed=11, min_joints=3, max_joints=6)
