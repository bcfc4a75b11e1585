"""Pipeline configuration: defaults, key=value files and flag overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .audio import WINDOW_KINDS
from .errors import InvalidConfigError


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline, with the documented defaults.

    sample_rate, when set, makes featurize reject files at other rates;
    None accepts any supported rate.
    """

    sample_rate: int | None = None
    frame_ms: float = 20.0
    shift_ms: float = 10.0
    window: str = "hamming"
    n_filters: int = 40
    n_ceps: int = 13
    delta_s: int = 2
    n_components: int = 64
    em_max_iters: int = 50
    em_tol: float = 1e-5
    seed: int = 0
    relevance: float = 16.0
    ivector_dim: int = 400
    whiten: bool = True
    thresholds: tuple[float, ...] = (0.8, 0.9, 1.0)

    def __post_init__(self):
        if self.window.lower() not in WINDOW_KINDS:
            raise InvalidConfigError(
                f"window must be one of {WINDOW_KINDS}, got {self.window!r}"
            )
        for name in ("n_filters", "n_ceps", "delta_s", "n_components",
                     "em_max_iters", "ivector_dim"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.frame_ms >= self.shift_ms > 0:
            raise InvalidConfigError(
                f"need frame_ms >= shift_ms > 0, got {self.frame_ms}/{self.shift_ms}"
            )
        if self.em_tol <= 0 or self.relevance <= 0:
            raise InvalidConfigError("em_tol and relevance must be positive")
        for t in self.thresholds:
            if not 0.0 <= t <= 1.0:
                raise InvalidConfigError(f"threshold must be in [0, 1], got {t}")

    @property
    def feature_dim(self) -> int:
        return 3 * self.n_ceps

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


_PARSERS = {
    "sample_rate": lambda s: None if s.lower() == "none" else int(s),
    "frame_ms": float,
    "shift_ms": float,
    "window": str,
    "n_filters": int,
    "n_ceps": int,
    "delta_s": int,
    "n_components": int,
    "em_max_iters": int,
    "em_tol": float,
    "seed": int,
    "relevance": float,
    "ivector_dim": int,
    "whiten": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "thresholds": lambda s: tuple(float(t) for t in s.split(",") if t.strip()),
}


def parse_thresholds(text: str) -> tuple[float, ...]:
    try:
        return _PARSERS["thresholds"](text)
    except ValueError as exc:
        raise InvalidConfigError(f"bad threshold list {text!r}: {exc}") from exc


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read `key = value` lines ('#' comments allowed) over the defaults."""
    base = base or PipelineConfig()
    changes = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            changes[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise InvalidConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return base.replace(**changes)
