"""Diagonal-covariance Gaussian mixture models and EM training.

The same GmmModel value serves as the universal background model and,
after adaptation, as a per-utterance speaker model. Models are immutable;
training returns a new model plus its log-likelihood trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, TooFewFramesError
from .features import FeatureMatrix

LOG_2PI = float(np.log(2.0 * np.pi))

KMEANS_ITERS = 10
KMEANS_SUBSAMPLE_PER_COMPONENT = 50
VARIANCE_FLOOR_FRACTION = 1e-6


@dataclass(frozen=True)
class GmmModel:
    """Mixture weights, means and diagonal variances; shapes (L,), (L,F), (L,F)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        var = np.asarray(self.variances, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)
        if mu.ndim != 2 or var.shape != mu.shape or w.shape != (mu.shape[0],):
            raise ValueError(
                f"inconsistent shapes: weights {w.shape}, means {mu.shape}, "
                f"variances {var.shape}"
            )
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be non-negative and sum to 1")
        if not np.all(np.isfinite(mu)):
            raise ValueError("means must be finite")
        if np.any(var <= 0) or not np.all(np.isfinite(var)):
            raise ValueError("variances must be positive and finite")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _as_rows(data) -> np.ndarray:
    if isinstance(data, FeatureMatrix):
        return data.rows
    return np.asarray(data, dtype=np.float64)


def _log_weights(weights: np.ndarray) -> np.ndarray:
    out = np.full(weights.shape, -np.inf)
    np.log(weights, out=out, where=weights > 0)
    return out


def component_log_densities(model: GmmModel, rows: np.ndarray) -> np.ndarray:
    """log N(x_t; mean_i, diag var_i) for every frame t and component i.

    Returns shape (n_frames, L).
    """
    rows = np.atleast_2d(rows)
    if rows.shape[1] != model.dim:
        raise DimensionMismatchError(
            f"frames have dimension {rows.shape[1]}, model expects {model.dim}"
        )
    inv_var = 1.0 / model.variances
    # Expanded quadratic form keeps this at three matrix products.
    quad = (
        rows**2 @ inv_var.T
        - 2.0 * (rows @ (model.means * inv_var).T)
        + np.sum(model.means**2 * inv_var, axis=1)
    )
    log_norm = -0.5 * (model.dim * LOG_2PI + np.sum(np.log(model.variances), axis=1))
    return log_norm - 0.5 * quad


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    peak = np.max(a, axis=axis, keepdims=True)
    out = peak.squeeze(axis) + np.log(np.sum(np.exp(a - peak), axis=axis))
    return out


def per_frame_log_density(model: GmmModel, rows: np.ndarray) -> np.ndarray:
    """Mixture log density of each frame, computed via log-sum-exp."""
    joint = component_log_densities(model, rows) + _log_weights(model.weights)
    return _logsumexp(joint, axis=1)


def log_density(model: GmmModel, x: np.ndarray) -> float:
    """Mixture log density at a single point."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError(f"x must be a vector, got shape {x.shape}")
    return float(per_frame_log_density(model, x[None, :])[0])


def responsibilities_batch(model: GmmModel, rows: np.ndarray) -> np.ndarray:
    """Posterior component probabilities per frame, shape (n_frames, L)."""
    joint = component_log_densities(model, rows) + _log_weights(model.weights)
    joint -= _logsumexp(joint, axis=1)[:, None]
    return np.exp(joint)


def responsibilities(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Posterior component probabilities at a single point, summing to 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError(f"x must be a vector, got shape {x.shape}")
    return responsibilities_batch(model, x[None, :])[0]


def _kmeans_init(rows: np.ndarray, n_components: int, rng: np.random.Generator):
    """k-means++ seeding plus a few Lloyd iterations on a subsample."""
    limit = KMEANS_SUBSAMPLE_PER_COMPONENT * n_components
    if rows.shape[0] > limit:
        idx = rng.choice(rows.shape[0], size=limit, replace=False)
        sample = rows[np.sort(idx)]
    else:
        sample = rows

    centers = np.empty((n_components, rows.shape[1]))
    centers[0] = sample[rng.integers(sample.shape[0])]
    d2 = np.sum((sample - centers[0]) ** 2, axis=1)
    for i in range(1, n_components):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            centers[i] = sample[rng.choice(sample.shape[0], p=probs)]
        else:
            centers[i] = sample[rng.integers(sample.shape[0])]
        d2 = np.minimum(d2, np.sum((sample - centers[i]) ** 2, axis=1))

    for _ in range(KMEANS_ITERS):
        dist = (
            np.sum(sample**2, axis=1)[:, None]
            - 2.0 * sample @ centers.T
            + np.sum(centers**2, axis=1)
        )
        assign = np.argmin(dist, axis=1)
        for i in range(n_components):
            members = sample[assign == i]
            if members.shape[0]:
                centers[i] = members.mean(axis=0)
            else:
                centers[i] = sample[np.argmax(np.min(dist, axis=1))]
    return centers, sample, assign


def train_ubm(
    data,
    n_components: int,
    max_iters: int = 50,
    tol: float = 1e-5,
    seed: int = 0,
) -> tuple[GmmModel, list[float]]:
    """Fit a diagonal GMM to pooled frames by EM; frames are treated i.i.d.

    Initialization is k-means++ on a subsample followed by Lloyd
    iterations, all driven by `seed`, so the result is deterministic.
    Returns the model and the per-iteration average log-likelihood trace,
    which is non-decreasing up to floating rounding. Training stops after
    `max_iters` M-steps or when the relative trace improvement drops
    below `tol`.
    """
    rows = _as_rows(data)
    n_frames = rows.shape[0]
    if n_components < 1:
        raise ValueError(f"n_components must be >= 1, got {n_components}")
    if n_frames < n_components:
        raise TooFewFramesError(
            f"{n_frames} frames cannot support {n_components} components"
        )

    global_var = rows.var(axis=0)
    floor = VARIANCE_FLOOR_FRACTION * global_var
    floor[floor == 0] = 1e-12
    safe_global_var = np.maximum(global_var, floor)

    rng = np.random.default_rng(seed)
    centers, sample, assign = _kmeans_init(rows, n_components, rng)
    weights = np.empty(n_components)
    variances = np.empty_like(centers)
    for i in range(n_components):
        members = sample[assign == i]
        weights[i] = max(members.shape[0], 1)
        if members.shape[0] > 1:
            variances[i] = np.maximum(members.var(axis=0), floor)
        else:
            variances[i] = safe_global_var
    weights /= weights.sum()
    model = GmmModel(weights, centers, variances)

    trace: list[float] = []
    for _ in range(max_iters):
        joint = component_log_densities(model, rows) + _log_weights(model.weights)
        frame_ll = _logsumexp(joint, axis=1)
        trace.append(float(frame_ll.mean()))
        if len(trace) > 1:
            prev = trace[-2]
            if abs(trace[-1] - prev) < tol * max(abs(prev), 1e-12):
                break

        gamma = np.exp(joint - frame_ll[:, None])
        counts = gamma.sum(axis=0)
        empty = counts <= 1e-10
        safe_counts = np.where(empty, 1.0, counts)
        means = gamma.T @ rows / safe_counts[:, None]
        variances = np.maximum(gamma.T @ rows**2 / safe_counts[:, None] - means**2, floor)
        if np.any(empty):
            # Deterministic recovery: park each dead component on the
            # worst-explained frame with one frame's worth of weight.
            worst = int(np.argmin(frame_ll))
            means[empty] = rows[worst]
            variances[empty] = safe_global_var
            weights = safe_counts / safe_counts.sum()
        else:
            weights = counts / n_frames
        model = GmmModel(weights, means, variances)

    return model, trace
