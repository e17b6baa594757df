"""Evaluation measures for temporal segmentations.

Two complementary scores, both computed per class and averaged over the
classes that actually occur:

* frame F1: F1 over hard per-frame assignments, blind to temporal structure;
* segment F1: same-class ground-truth and predicted segments are matched
  one-to-one to maximize total interval-overlap F1, and the matched total is
  normalized by the larger segment count, penalizing both over- and
  under-segmentation.

Classes with no frames on either side are *absent* (scored ``None``) and
excluded from means, mirroring the "/" cells of per-video score tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    ClassCatalog,
    LabelSeries,
    Segment,
    Segmentation,
    SeriesError,
)


@dataclass(frozen=True)
class ClassScores:
    """Per-class scores in [0, 1]; ``None`` marks an absent class."""

    per_class: dict[int, Optional[float]]

    @property
    def mean(self) -> float:
        present = [v for v in self.per_class.values() if v is not None]
        if not present:
            raise SeriesError("no present classes to average")
        return sum(present) / len(present)

    def present_classes(self) -> list[int]:
        return sorted(c for c, v in self.per_class.items() if v is not None)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Frame counts indexed [ground truth class][predicted class]."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise SeriesError("confusion matrix must be square")
        if counts.min() < 0:
            raise SeriesError("confusion counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_normalized(self) -> np.ndarray:
        """Rows rescaled to sum to 1; all-zero rows stay zero."""
        sums = self.counts.sum(axis=1, keepdims=True)
        out = np.divide(
            self.counts, sums, out=np.zeros(self.counts.shape), where=sums > 0
        )
        return out


def _check_lengths(gt: LabelSeries, pred: LabelSeries) -> None:
    if len(gt) != len(pred):
        raise SeriesError(
            f"length mismatch: ground truth has {len(gt)} frames, "
            f"prediction has {len(pred)}"
        )


def _num_classes(catalog: Optional[ClassCatalog], *maxima: int) -> int:
    if catalog is not None:
        return catalog.num_classes
    return max(maxima) + 1


def ff1(
    gt: LabelSeries, pred: LabelSeries, catalog: Optional[ClassCatalog] = None
) -> ClassScores:
    """Frame-wise per-class F1 = 2TP / (2TP + FP + FN)."""
    _check_lengths(gt, pred)
    g, p = gt.labels, pred.labels
    n_cls = _num_classes(catalog, int(g.max()), int(p.max()))
    tp = np.bincount(g[g == p], minlength=n_cls)
    gt_count = np.bincount(g, minlength=n_cls)
    pred_count = np.bincount(p, minlength=n_cls)
    fp = pred_count - tp
    fn = gt_count - tp
    scores: dict[int, Optional[float]] = {}
    for c in range(n_cls):
        denom = 2 * tp[c] + fp[c] + fn[c]
        scores[c] = None if denom == 0 else 2 * int(tp[c]) / int(denom)
    return ClassScores(scores)


def _interval_f1(a: Segment, b: Segment) -> float:
    overlap = min(a.end, b.end) - max(a.start, b.start) + 1
    if overlap <= 0:
        return 0.0
    return 2.0 * overlap / (len(a) + len(b))


def overlap_f1_matrix(
    gt_segments: list[Segment], pred_segments: list[Segment]
) -> np.ndarray:
    """Pairwise interval-overlap F1 between two same-class segment lists."""
    mat = np.zeros((len(gt_segments), len(pred_segments)))
    for i, g in enumerate(gt_segments):
        for j, p in enumerate(pred_segments):
            mat[i, j] = _interval_f1(g, p)
    return mat


def asf1(
    gt: Segmentation, pred: Segmentation, catalog: Optional[ClassCatalog] = None
) -> ClassScores:
    """Segment-level per-class F1 via optimal one-to-one overlap matching."""
    if gt.total_frames != pred.total_frames:
        raise SeriesError(
            f"frame-count mismatch: ground truth covers {gt.total_frames} "
            f"frames, prediction covers {pred.total_frames}"
        )
    max_class = max(s.class_id for s in gt.segments + pred.segments)
    n_cls = _num_classes(catalog, max_class)
    scores: dict[int, Optional[float]] = {}
    for c in range(n_cls):
        g_segs = [s for s in gt.segments if s.class_id == c]
        p_segs = [s for s in pred.segments if s.class_id == c]
        if not g_segs and not p_segs:
            scores[c] = None
        elif not g_segs or not p_segs:
            scores[c] = 0.0
        else:
            mat = overlap_f1_matrix(g_segs, p_segs)
            rows, cols = linear_sum_assignment(mat, maximize=True)
            scores[c] = float(mat[rows, cols].sum()) / max(len(g_segs), len(p_segs))
    return ClassScores(scores)


def confusion(
    gt: LabelSeries, pred: LabelSeries, catalog: Optional[ClassCatalog] = None
) -> ConfusionMatrix:
    """Frame counts per (ground truth, predicted) class pair."""
    _check_lengths(gt, pred)
    g, p = gt.labels, pred.labels
    n_cls = _num_classes(catalog, int(g.max()), int(p.max()))
    flat = np.bincount(g * n_cls + p, minlength=n_cls * n_cls)
    return ConfusionMatrix(flat.reshape(n_cls, n_cls))
