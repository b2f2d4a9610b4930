r"""
skelgraph

A Python module to synthesize 3D skeleton graphs from point clouds with a
differentiable graph construction trained under spectral and adversarial
losses.
"""
from __future__ import absolute_import

from .constants import CHAIN, TREE, STAR, CYCLE, BICYCLE_LIKE, CATEGORIES
from .diffcore import DiffValue, leaf, constant, backward
from .graphcore import SkeletonGraph, PointCloud, laplacian, normalize_pointcloud
from .spectral import spectral_loss
from .dgcn import build_adjacency, extract_hard_edges
from .attention import gat_layer, hierarchical_refine
from .encdec import encode, decode, adaptive_node_count
from .adversarial import adversarial_losses
from .metrics import match_nodes, mpjpe, graph_edit_distance, spectral_consistency, topological_fidelity, MetricsReport
from .synthdata import SampleRecord, generate_dataset, read_dataset, write_dataset
from .config import TrainConfig
from .model import SkeletonModel, Checkpoint, save_checkpoint, load_checkpoint
from .harness import total_loss, train, evaluate, ablate

del absolute_import
