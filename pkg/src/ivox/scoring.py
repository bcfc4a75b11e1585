"""Cosine scoring: divergence metric, prediction scores and decisions.

The prediction score maps the angle between two i-vectors through a
piecewise rule into [0, 1]; thresholding the score gives accept/reject
decisions. The divergence on normalized profiles is the same arccos
construction and satisfies the metric axioms.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyTargetListError,
    InvalidThresholdError,
    ZeroVectorError,
)

HALF_PI = np.pi / 2.0
THREE_HALF_PI = 3.0 * np.pi / 2.0


@dataclass(frozen=True)
class NormalizedProfile:
    """Non-negative vector scaled to unit L2 norm by the constructor."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"profile must be a non-empty vector, got {values.shape}")
        if np.any(values < 0):
            raise ValueError("profile entries must be non-negative")
        norm = np.sqrt(values @ values)
        if norm == 0.0:
            raise ZeroVectorError("cannot normalize an all-zero profile")
        object.__setattr__(self, "values", values / norm)

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ScoreEntry:
    test_id: str
    target_id: str
    angle: float
    score: float
    decisions: tuple[bool, ...]


@dataclass(frozen=True)
class ScoreReport:
    """Cross-product scores with per-threshold decisions, test-major order."""

    thresholds: tuple[float, ...]
    entries: tuple[ScoreEntry, ...]

    def __post_init__(self):
        for entry in self.entries:
            if not 0.0 <= entry.score <= 1.0:
                raise ValueError(f"score out of [0, 1]: {entry.score}")
            if not 0.0 <= entry.angle <= np.pi:
                raise ValueError(f"angle out of [0, pi]: {entry.angle}")
            if len(entry.decisions) != len(self.thresholds):
                raise ValueError("one decision per threshold required")

    def accepted(self, threshold: float) -> list[ScoreEntry]:
        i = self.thresholds.index(threshold)
        return [e for e in self.entries if e.decisions[i]]

    def false_accept_count(self, threshold: float) -> int:
        """Accepted pairs whose target id differs from the test id."""
        return sum(1 for e in self.accepted(threshold) if e.target_id != e.test_id)

    def top_match(self, test_id: str) -> ScoreEntry:
        candidates = [e for e in self.entries if e.test_id == test_id]
        if not candidates:
            raise EmptyTargetListError(f"no entries for test {test_id!r}")
        return max(candidates, key=lambda e: e.score)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between a and b, clamped to [-1, 1].

    The denominator is the square root of the product of squared norms,
    which makes the self-similarity of any vector exactly 1.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(
            f"vectors must share one dimension, got {a.shape} and {b.shape}"
        )
    aa = float(a @ a)
    bb = float(b @ b)
    if aa == 0.0 or bb == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for zero vectors")
    return float(np.clip(float(a @ b) / np.sqrt(aa * bb), -1.0, 1.0))


def divergence(px: NormalizedProfile, py: NormalizedProfile) -> float:
    """Angular divergence arccos(<px, py>) in radians.

    Zero for identical profiles, pi/2 for disjoint supports, symmetric,
    and satisfies the triangle inequality.
    """
    if px.dim != py.dim:
        raise DimensionMismatchError(
            f"profiles have dimensions {px.dim} and {py.dim}"
        )
    overlap = np.clip(px.values @ py.values, 0.0, 1.0)
    return float(np.arccos(overlap))


def angle_to_score(angle: float) -> float:
    """Piecewise mapping of an angle to a prediction score.

    cos(A) on [0, pi/2]; 0 on (pi/2, 3*pi/2]; cos(2*pi - A) beyond. For
    angles produced by arccos the last branch is unreachable.
    """
    if 0.0 <= angle <= HALF_PI:
        return float(np.cos(angle))
    if HALF_PI < angle <= THREE_HALF_PI:
        return 0.0
    return float(np.cos(2.0 * np.pi - angle))


def predict_score(w_target: np.ndarray, w_test: np.ndarray) -> tuple[float, float]:
    """Angle between two i-vectors and its prediction score in [0, 1].

    Identical vectors score exactly 1.0; any vector at more than a right
    angle from the target scores 0.
    """
    angle = float(np.arccos(cosine_similarity(w_target, w_test)))
    return angle, angle_to_score(angle)


def decide(score: float, threshold: float) -> bool:
    """Accept (True) iff score >= threshold; threshold must be in [0, 1]."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidThresholdError(f"threshold must be in [0, 1], got {threshold}")
    return score >= threshold


def score_matrix(
    tests,
    targets,
    thresholds,
    test_ids=None,
    target_ids=None,
) -> ScoreReport:
    """Score every (test, target) pair and decide at every threshold.

    Entries are ordered test-major with target index ascending. Ids
    default to the element indices.
    """
    tests = [np.asarray(t, dtype=np.float64) for t in tests]
    targets = [np.asarray(t, dtype=np.float64) for t in targets]
    test_ids = [str(i) for i in range(len(tests))] if test_ids is None else list(test_ids)
    target_ids = (
        [str(i) for i in range(len(targets))] if target_ids is None else list(target_ids)
    )
    if len(test_ids) != len(tests) or len(target_ids) != len(targets):
        raise DimensionMismatchError("one id per vector required")
    thresholds = tuple(float(t) for t in thresholds)
    for t in thresholds:
        if not 0.0 <= t <= 1.0:
            raise InvalidThresholdError(f"threshold must be in [0, 1], got {t}")

    entries = []
    for test_id, w_test in zip(test_ids, tests):
        for target_id, w_target in zip(target_ids, targets):
            try:
                angle, score = predict_score(w_target, w_test)
            except (ZeroVectorError, DimensionMismatchError) as exc:
                raise type(exc)(f"pair ({test_id!r}, {target_id!r}): {exc}") from exc
            decisions = tuple(decide(score, t) for t in thresholds)
            entries.append(ScoreEntry(test_id, target_id, angle, score, decisions))
    return ScoreReport(thresholds, tuple(entries))


def format_threshold(t: float) -> str:
    return f"{t:g}"


def write_score_csv(report: ScoreReport, stream: io.TextIOBase) -> None:
    """Spec CSV: test_id,target_id,angle_rad,score,decision@<t>... rows.

    Scores carry 4 decimals; full precision stays in the ScoreReport.
    """
    columns = ["test_id", "target_id", "angle_rad", "score"]
    columns += [f"decision@{format_threshold(t)}" for t in report.thresholds]
    stream.write(",".join(columns) + "\n")
    for e in report.entries:
        row = [e.test_id, e.target_id, f"{e.angle:.6f}", f"{e.score:.4f}"]
        row += ["accept" if d else "reject" for d in e.decisions]
        stream.write(",".join(row) + "\n")


def score_csv_text(report: ScoreReport) -> str:
    buf = io.StringIO()
    write_score_csv(report, buf)
    return buf.getvalue()
