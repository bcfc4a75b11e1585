"""Relevance-MAP adaptation of UBM means and supervector assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyUtteranceError
from .features import FeatureMatrix
from .gmm import GmmModel, responsibilities_batch

DEFAULT_RELEVANCE = 16.0


@dataclass(frozen=True)
class Supervector:
    """Concatenated component means of a GMM, dimension feature_dim * n_components."""

    values: np.ndarray
    feature_dim: int
    n_components: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (self.feature_dim * self.n_components,):
            raise ValueError(
                f"expected {self.feature_dim * self.n_components} values, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("supervector contains non-finite values")

    @property
    def dim(self) -> int:
        return self.values.size


def map_adapt_means(
    ubm: GmmModel, utterance, relevance: float = DEFAULT_RELEVANCE
) -> GmmModel:
    """Shift UBM means toward the utterance's posterior-weighted statistics.

    For each component, with soft count n_i and posterior data mean E_i,
    the adapted mean is alpha_i*E_i + (1-alpha_i)*mean_i where
    alpha_i = n_i/(n_i + relevance). Components the utterance never
    touches keep the UBM mean; weights and variances are copied
    unchanged.
    """
    if relevance <= 0:
        raise ValueError(f"relevance must be positive, got {relevance}")
    rows = utterance.rows if isinstance(utterance, FeatureMatrix) else np.asarray(
        utterance, dtype=np.float64
    )
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise EmptyUtteranceError("adaptation needs at least one feature frame")
    if rows.shape[1] != ubm.dim:
        raise DimensionMismatchError(
            f"utterance dimension {rows.shape[1]} does not match UBM's {ubm.dim}"
        )

    gamma = responsibilities_batch(ubm, rows)
    counts = gamma.sum(axis=0)
    # E_i is left at the prior mean when n_i = 0; alpha_i = 0 makes the
    # choice irrelevant but keeps the arithmetic finite.
    safe = np.where(counts > 0, counts, 1.0)
    data_means = np.where(
        (counts > 0)[:, None], gamma.T @ rows / safe[:, None], ubm.means
    )
    alpha = (counts / (counts + relevance))[:, None]
    adapted = alpha * data_means + (1.0 - alpha) * ubm.means
    return GmmModel(ubm.weights.copy(), adapted, ubm.variances.copy())


def supervector(model: GmmModel) -> Supervector:
    """Append the component means in index order into one long vector."""
    return Supervector(
        model.means.reshape(-1).copy(), model.dim, model.n_components
    )
