"""AUC metrics (rank statistic with half-weight ties, macro one-vs-rest)."""

from __future__ import annotations

import numpy as np


def auc_binary(scores, labels) -> float:
    """Probability a positive outranks a negative, ties counted 0.5.

    Computed from average ranks, which equals pair counting exactly.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1D sequences")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: both label values must be present")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_s = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average rank, 1-based
        i = j + 1
    rank_sum = float(ranks[y == 1].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def auc_multiclass(probs, labels) -> float:
    """Macro one-vs-rest AUC over the categories present in labels.

    For two categories this reduces exactly to auc_binary on the positive
    column. Rows must be probability vectors (sum 1 within 1e-6).
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2 or p.shape[0] != y.shape[0]:
        raise ValueError("probs must be N x C aligned with N labels")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("probability rows must sum to 1 within 1e-6")
    present = np.unique(y)
    if len(present) < 2:
        raise ValueError("AUC undefined: fewer than 2 categories present")
    if present.min() < 0 or present.max() >= p.shape[1]:
        raise ValueError("labels outside probability columns")
    if p.shape[1] == 2:
        return auc_binary(p[:, 1], (y == 1).astype(np.int64))
    per_class = [auc_binary(p[:, c], (y == c).astype(np.int64)) for c in present]
    return float(np.mean(per_class))
