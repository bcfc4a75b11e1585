"""Ordered store of enrolled target speakers and their i-vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DuplicateTargetError


@dataclass(frozen=True)
class TargetList:
    """Enrollment-ordered (target_id, i-vector) pairs with unique ids."""

    entries: tuple[tuple[str, np.ndarray], ...] = ()

    def __post_init__(self):
        normalized = tuple(
            (str(tid), np.asarray(vec, dtype=np.float64)) for tid, vec in self.entries
        )
        object.__setattr__(self, "entries", normalized)
        seen = set()
        for tid, vec in normalized:
            if tid in seen:
                raise DuplicateTargetError(f"target id {tid!r} already enrolled")
            seen.add(tid)
            if vec.ndim != 1:
                raise ValueError(f"i-vector for {tid!r} must be 1-D")
            if vec.size != normalized[0][1].size:
                raise DimensionMismatchError(
                    f"i-vector for {tid!r} has dimension {vec.size}, "
                    f"list holds {normalized[0][1].size}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> list[str]:
        return [tid for tid, _ in self.entries]

    @property
    def vectors(self) -> list[np.ndarray]:
        return [vec for _, vec in self.entries]

    @property
    def dim(self) -> int | None:
        return self.entries[0][1].size if self.entries else None

    def with_entry(self, target_id: str, omega: np.ndarray) -> "TargetList":
        """New list with one more target appended; rejects duplicate ids."""
        return TargetList(self.entries + ((str(target_id), omega),))
