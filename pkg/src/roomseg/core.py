"""Shared domain types for the localization pipeline.

Frames are abstract 0-based indices; class id 0 is permanently reserved for
the negative ("not in any known location") class, ids 1..M are the positive
location classes. Segment ends are inclusive. All types are immutable value
objects after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Sum tolerance for probability rows.
ROW_SUM_TOL = 1e-9


class SeriesError(ValueError):
    """Invalid label/posterior series or segmentation."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ClassCatalog:
    """The M positive location classes plus the reserved negative class 0.

    ``names`` has exactly M+1 entries indexed by class id; entry 0 names the
    negative class.
    """

    positive_count: int
    names: tuple[str, ...]

    def __post_init__(self):
        if self.positive_count < 1:
            raise SeriesError("catalog needs at least one positive class")
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != self.positive_count + 1:
            raise SeriesError(
                f"catalog with {self.positive_count} positive classes needs "
                f"{self.positive_count + 1} names, got {len(self.names)}"
            )

    @classmethod
    def generic(cls, positive_count: int) -> "ClassCatalog":
        """Catalog with placeholder display names."""
        names = ("negative",) + tuple(f"class {c}" for c in range(1, positive_count + 1))
        return cls(positive_count, names)

    @property
    def num_classes(self) -> int:
        """Total number of class ids, M+1."""
        return self.positive_count + 1

    def class_ids(self) -> range:
        return range(self.num_classes)


@dataclass(frozen=True)
class LabelSeries:
    """Per-frame hard class assignments over N >= 1 frames."""

    labels: np.ndarray
    frame_rate: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 1 or arr.size == 0:
            raise SeriesError("empty series")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == arr.astype(np.int64)):
                raise SeriesError("labels must be integers")
        arr = arr.astype(np.int64)
        if arr.min() < 0:
            raise SeriesError("labels must be nonnegative class ids")
        if not self.frame_rate > 0:
            raise SeriesError("frame_rate must be positive")
        object.__setattr__(self, "labels", _readonly(arr))
        object.__setattr__(self, "frame_rate", float(self.frame_rate))

    def __len__(self) -> int:
        return int(self.labels.size)

    def validate_against(self, catalog: ClassCatalog) -> None:
        top = int(self.labels.max())
        if top > catalog.positive_count:
            raise SeriesError(
                f"label {top} out of range for catalog with M={catalog.positive_count}"
            )


POSITIVE_ONLY = "positive_only"
MERGED = "merged"


@dataclass(frozen=True)
class PosteriorSeries:
    """N rows of per-frame class probabilities.

    ``positive_only`` rows have one column per positive class (column j is
    class j+1); ``merged`` rows carry the negative class in column 0.
    """

    rows: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in (POSITIVE_ONLY, MERGED):
            raise SeriesError(f"unknown posterior kind {self.kind!r}")
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise SeriesError("empty series")
        min_cols = 2 if self.kind == MERGED else 1
        if rows.shape[1] < min_cols:
            raise SeriesError(f"{self.kind} series needs >= {min_cols} columns")
        if rows.min() < 0.0 or rows.max() > 1.0:
            raise SeriesError("probabilities must lie in [0, 1]")
        sums = rows.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if bad.size:
            raise SeriesError(f"row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        object.__setattr__(self, "rows", _readonly(rows))

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def num_columns(self) -> int:
        return int(self.rows.shape[1])

    @property
    def positive_count(self) -> int:
        """M, the number of positive classes covered by the rows."""
        c = self.num_columns
        return c - 1 if self.kind == MERGED else c


@dataclass(frozen=True)
class Segment:
    """A maximal run of frames sharing one class; ``end`` is inclusive."""

    start: int
    end: int
    class_id: int

    def __post_init__(self):
        if self.start > self.end:
            raise SeriesError(f"segment start {self.start} > end {self.end}")
        if self.class_id < 0:
            raise SeriesError("class_id must be nonnegative")

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class Segmentation:
    """Ordered segments tiling frames 0..total_frames-1 with no gaps."""

    segments: tuple[Segment, ...]
    total_frames: int

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise SeriesError("empty series")
        if segs[0].start != 0:
            raise SeriesError("non-contiguous segmentation: first segment must start at 0")
        for prev, cur in zip(segs, segs[1:]):
            if cur.start != prev.end + 1:
                raise SeriesError(
                    f"non-contiguous segmentation: segment at {cur.start} "
                    f"does not continue from {prev.end}"
                )
            if cur.class_id == prev.class_id:
                raise SeriesError(
                    f"adjacent segments at {cur.start} share class {cur.class_id}"
                )
        if segs[-1].end != self.total_frames - 1:
            raise SeriesError(
                f"non-contiguous segmentation: last end {segs[-1].end} != "
                f"total_frames-1 ({self.total_frames - 1})"
            )

    def __len__(self) -> int:
        return len(self.segments)


def labels_to_segmentation(labels: LabelSeries) -> Segmentation:
    """Collapse a label series into its maximal constant runs."""
    arr = labels.labels
    breaks = np.nonzero(arr[1:] != arr[:-1])[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [arr.size - 1]))
    segs = tuple(
        Segment(int(s), int(e), int(arr[s])) for s, e in zip(starts, ends)
    )
    return Segmentation(segs, total_frames=arr.size)


def segmentation_to_labels(seg: Segmentation, frame_rate: float = 1.0) -> LabelSeries:
    """Expand segments back to one label per frame."""
    out = np.empty(seg.total_frames, dtype=np.int64)
    for s in seg.segments:
        out[s.start : s.end + 1] = s.class_id
    return LabelSeries(out, frame_rate=frame_rate)


def dwell_times(
    seg: Segmentation, catalog: ClassCatalog, frame_rate: float = 1.0
) -> dict[int, float]:
    """Seconds spent per class; only classes that actually occur are listed.

    Summing the values recovers total_frames / frame_rate.
    """
    if not frame_rate > 0:
        raise SeriesError("frame_rate must be positive")
    counts: dict[int, int] = {}
    for s in seg.segments:
        if s.class_id > catalog.positive_count:
            raise SeriesError(
                f"segment class {s.class_id} out of range for catalog "
                f"with M={catalog.positive_count}"
            )
        counts[s.class_id] = counts.get(s.class_id, 0) + len(s)
    return {c: counts[c] / frame_rate for c in sorted(counts)}
