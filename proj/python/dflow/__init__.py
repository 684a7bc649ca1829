"""Deformation-graph scene flow for mesh editing.

Arrays are NumPy: points (n, 3) float64, faces (m, 3) int32, rotations
(n, 3, 3). Configs are plain dicts with the same keys as the CLI's JSON config.
"""

import json as _json

from . import _dflow
from ._dflow import (
    Error,
    InvalidInput,
    NonFiniteLoss,
    TransformField,
    chamfer_distance,
    decimate,
    filter_pairs,
    hemisphere_poses,
    knn,
    set_thread_count,
    success,
    volume_iou,
)

__all__ = [
    "Error",
    "InvalidInput",
    "NonFiniteLoss",
    "TransformField",
    "chamfer_distance",
    "decimate",
    "default_config",
    "evaluate",
    "filter_pairs",
    "hemisphere_poses",
    "knn",
    "make_synthetic",
    "optimize",
    "set_thread_count",
    "success",
    "volume_iou",
]


def _dump(config):
    return "" if config is None else _json.dumps(config)


def default_config():
    return _json.loads(_dflow.default_config())


def optimize(vertices, faces, anchor_vertices, anchor_targets, config=None):
    """Fits the deformation graph to anchors; returns a dict with the dense
    `field`, graph `nodes`, per-node params and the loss `history`
    (columns l_arap, l_con, l_dg)."""
    return _dflow.optimize(vertices, faces, list(anchor_vertices), anchor_targets, _dump(config))


def evaluate(pred_vertices, pred_faces, gt_vertices, gt_faces, config=None):
    return _json.loads(_dflow.evaluate(pred_vertices, pred_faces, gt_vertices, gt_faces, _dump(config)))


def make_synthetic(kind, angle_deg=45.0, pairs=500, contamination=0.0, seed=0):
    return _dflow.make_synthetic(kind, angle_deg, pairs, contamination, seed)
