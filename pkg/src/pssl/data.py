"""Labeled and partially labeled databases.

Records are kept as two parallel arrays: flat point indices and labels in
{0, 1, UNLABELED}. Order is meaningful; the optional segmentation marks the
boundaries of the labeled prefix S, the to-be-labeled block T and the
unlabeled suffix D.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DomainError

UNLABELED = -1


class LabeledExample(NamedTuple):
    point: int
    label: int  # 0, 1 or UNLABELED


@dataclass(frozen=True)
class PartiallyLabeledDatabase:
    points: np.ndarray
    labels: np.ndarray
    #: ``(end_of_S, end_of_T)``; D is everything after ``end_of_T``.
    segments: tuple[int, int] | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.int64)
        lab = np.ascontiguousarray(self.labels, dtype=np.int8)
        if pts.shape != lab.shape or pts.ndim != 1:
            raise DomainError("points and labels must be 1-d arrays of equal length")
        if not np.isin(lab, (0, 1, UNLABELED)).all():
            raise DomainError("labels must be 0, 1 or UNLABELED")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        if self.segments is not None:
            s_end, t_end = self.segments
            if not 0 <= s_end <= t_end <= pts.size:
                raise DomainError(f"bad segmentation {self.segments} for {pts.size} records")
            if (lab[:s_end] == UNLABELED).any():
                raise DomainError("the S segment must be fully labeled")
            if (lab[t_end:] != UNLABELED).any():
                raise DomainError("the D segment must be unlabeled")

    @classmethod
    def concat(cls, S_points, S_labels, T_points=(), D_points=()) -> PartiallyLabeledDatabase:
        """Build ``S o T o D`` with T and D unlabeled."""
        S_points = np.asarray(S_points, dtype=np.int64)
        T_points = np.asarray(T_points, dtype=np.int64)
        D_points = np.asarray(D_points, dtype=np.int64)
        points = np.concatenate([S_points, T_points, D_points])
        labels = np.concatenate([
            np.asarray(S_labels, dtype=np.int8),
            np.full(T_points.size + D_points.size, UNLABELED, dtype=np.int8),
        ])
        s_end = S_points.size
        return cls(points, labels, (s_end, s_end + T_points.size))

    @classmethod
    def from_records(cls, records: Iterable[tuple[int, int]]) -> PartiallyLabeledDatabase:
        recs = list(records)
        return cls(np.array([r[0] for r in recs], dtype=np.int64), np.array([r[1] for r in recs], dtype=np.int8))

    def __len__(self) -> int:
        return int(self.points.size)

    def __getitem__(self, i: int) -> LabeledExample:
        return LabeledExample(int(self.points[i]), int(self.labels[i]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartiallyLabeledDatabase):
            return NotImplemented
        return (
            self.segments == other.segments
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.labels, other.labels)
        )

    def _segment(self, which: str) -> slice:
        if self.segments is None:
            raise DomainError("database has no segmentation")
        s_end, t_end = self.segments
        return {"S": slice(0, s_end), "T": slice(s_end, t_end), "D": slice(t_end, None)}[which]

    def segment(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        sl = self._segment(which)
        return self.points[sl], self.labels[sl]

    def with_record(self, index: int, record: tuple[int, int]) -> PartiallyLabeledDatabase:
        """Copy with record ``index`` replaced; segmentation is kept and rechecked."""
        if not 0 <= index < len(self):
            raise DomainError(f"record index {index} outside [0, {len(self)})")
        pts = self.points.copy()
        lab = self.labels.copy()
        pts[index], lab[index] = record
        return PartiallyLabeledDatabase(pts, lab, self.segments)

    def to_json(self) -> dict:
        out = {"points": self.points.tolist(), "labels": [None if v == UNLABELED else int(v) for v in self.labels]}
        if self.segments is not None:
            out["segments"] = list(self.segments)
        return out

    @classmethod
    def from_json(cls, data: dict) -> PartiallyLabeledDatabase:
        labels = [UNLABELED if v is None else int(v) for v in data["labels"]]
        seg = tuple(data["segments"]) if "segments" in data else None
        return cls(np.asarray(data["points"], dtype=np.int64), np.asarray(labels, dtype=np.int8), seg)
