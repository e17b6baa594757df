"""Negative rejection: turn label-window disagreement into a per-frame
probability of the negative class and merge it with the positive posterior.

The rejection statistic is the variation ratio of the hard labels in a
window of size K centered on each frame: 1 minus the relative frequency of
the window's most common label. Windows are truncated at sequence edges and
normalized by the actual window cardinality, so the value is always a true
ratio in [0, 1 - 1/W].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    MERGED,
    POSITIVE_ONLY,
    LabelSeries,
    PosteriorSeries,
    SeriesError,
)


@dataclass(frozen=True)
class RejectionConfig:
    """Window size K for the rejection statistic."""

    window_k: int

    def __post_init__(self):
        if self.window_k < 1:
            raise SeriesError("window_k must be >= 1")

    @property
    def half_width(self) -> int:
        return self.window_k // 2


def _check_positive_only(arr: np.ndarray) -> None:
    if arr.min() < 1:
        raise SeriesError("rejection input must be positive-only")


def variation_ratio(labels: LabelSeries, i: int, cfg: RejectionConfig) -> float:
    """Rejection probability for frame i: 1 - mode_count / window_size."""
    arr = labels.labels
    n = arr.size
    if not 0 <= i < n:
        raise SeriesError(f"frame index {i} out of range for {n} frames")
    _check_positive_only(arr)
    h = cfg.half_width
    window = arr[max(0, i - h) : min(n, i + h + 1)]
    mode_count = int(np.bincount(window).max())
    return 1.0 - mode_count / window.size


def negative_probability_series(
    labels: LabelSeries, cfg: RejectionConfig
) -> np.ndarray:
    """Variation ratio at every frame, as a length-N float array.

    Sliding-window counts keep this O(N) regardless of K: each step moves
    both window edges by at most one frame, and the running maximum
    multiplicity can only change by one per insertion/removal.
    """
    arr = labels.labels
    _check_positive_only(arr)
    n = arr.size
    h = cfg.half_width
    top = int(arr.max())
    counts = np.zeros(top + 1, dtype=np.int64)
    count_of_counts = np.zeros(n + 2, dtype=np.int64)
    max_mult = 0
    lo, hi = 0, -1  # current window is arr[lo..hi]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        new_hi = min(n - 1, i + h)
        while hi < new_hi:
            hi += 1
            lab = arr[hi]
            c = counts[lab]
            count_of_counts[c] -= 1
            counts[lab] = c + 1
            count_of_counts[c + 1] += 1
            if c + 1 > max_mult:
                max_mult = c + 1
        new_lo = max(0, i - h)
        while lo < new_lo:
            lab = arr[lo]
            c = counts[lab]
            count_of_counts[c] -= 1
            counts[lab] = c - 1
            count_of_counts[c - 1] += 1
            if c == max_mult and count_of_counts[c] == 0:
                max_mult = c - 1
            lo += 1
        out[i] = 1.0 - max_mult / (hi - lo + 1)
    return out


def merge_posterior(
    positive: PosteriorSeries, p_neg: np.ndarray
) -> PosteriorSeries:
    """Combine the positive-only posterior with the per-frame negative
    probability into a full posterior over M+1 classes.

    Negative and positive assignments are disjoint events, so row i becomes
    [p_neg[i], (1-p_neg[i]) * positive[i]].
    """
    if positive.kind != POSITIVE_ONLY:
        raise SeriesError("merge_posterior expects a positive-only series")
    p_neg = np.asarray(p_neg, dtype=np.float64)
    if p_neg.ndim != 1 or p_neg.size != len(positive):
        raise SeriesError(
            f"length mismatch: {len(positive)} posterior rows vs "
            f"{p_neg.size} negative probabilities"
        )
    if p_neg.min() < 0.0 or p_neg.max() > 1.0:
        raise SeriesError("negative probabilities must lie in [0, 1]")
    merged = np.empty((len(positive), positive.num_columns + 1))
    merged[:, 0] = p_neg
    merged[:, 1:] = (1.0 - p_neg)[:, None] * positive.rows
    return PosteriorSeries(merged, kind=MERGED)


def map_assign(posterior: PosteriorSeries) -> LabelSeries:
    """Per-frame argmax labels; ties go to the lowest class id.

    For positive-only series column j maps to class j+1, so the output never
    contains class 0; for merged series it may.
    """
    idx = np.argmax(posterior.rows, axis=1)
    if posterior.kind == POSITIVE_ONLY:
        idx = idx + 1
    return LabelSeries(idx)
