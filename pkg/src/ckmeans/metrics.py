"""Clustering agreement scores."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError


def _contingency(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1)
    return table


def _entropy(p):
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def metric_nmi(labels_a, labels_b) -> float:
    """Normalised mutual information, arithmetic-mean normalisation."""
    table = _contingency(labels_a, labels_b)
    if table.size == 0:
        return 1.0
    pxy = table / table.sum()
    ha, hb = _entropy(pxy.sum(axis=1)), _entropy(pxy.sum(axis=0))
    if ha == 0.0 and hb == 0.0:
        return 1.0  # both labellings are a single cluster
    outer = np.outer(pxy.sum(axis=1), pxy.sum(axis=0))
    nz = pxy > 0
    mi = float((pxy[nz] * np.log(pxy[nz] / outer[nz])).sum())
    return float(np.clip(mi / ((ha + hb) / 2.0), 0.0, 1.0))


def metric_accuracy(labels_pred, labels_true, k=None) -> float:
    """Fraction of points correct under the best one-to-one cluster renaming."""
    pred = np.asarray(labels_pred)
    true = np.asarray(labels_true)
    if pred.shape != true.shape or pred.ndim != 1:
        raise DimensionError(f"label vectors differ in shape: {pred.shape} vs {true.shape}")
    if pred.size == 0:
        return 1.0
    size = max(int(pred.max()), int(true.max())) + 1
    if k is not None:
        size = max(size, int(k))
    table = np.zeros((size, size))
    np.add.at(table, (pred, true), 1)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / pred.size)
