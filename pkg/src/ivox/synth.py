"""Seeded synthetic corpus: per-speaker generating GMMs over feature space.

Stands in for real speech corpora in tests and the acceptance suite.
Each synthetic speaker is a random diagonal GMM in 39-dimensional
feature space; its utterances are i.i.d. draws from that mixture, so two
utterances of the same speaker share a distribution while different
speakers differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .gmm import GmmModel

MEAN_SPREAD = 2.0


@dataclass(frozen=True)
class CorpusFile:
    path: Path
    speaker_id: str
    role: str  # "enroll" or "test"


def make_speaker(rng: np.random.Generator, n_components: int = 4, dim: int = 39) -> GmmModel:
    """Random diagonal GMM acting as one speaker's true distribution."""
    weights = rng.uniform(0.5, 1.5, n_components)
    weights /= weights.sum()
    means = rng.normal(0.0, MEAN_SPREAD, (n_components, dim))
    variances = rng.uniform(0.5, 1.5, (n_components, dim))
    return GmmModel(weights, means, variances)


def sample_utterance(model: GmmModel, n_frames: int, rng: np.random.Generator) -> np.ndarray:
    """n_frames i.i.d. draws from the mixture, shape (n_frames, dim)."""
    comps = rng.choice(model.n_components, size=n_frames, p=model.weights)
    noise = rng.standard_normal((n_frames, model.dim))
    return model.means[comps] + noise * np.sqrt(model.variances[comps])


def generate_corpus(
    out_dir,
    n_speakers: int = 30,
    n_components: int = 4,
    dim: int = 39,
    n_enroll: int = 2,
    n_test: int = 1,
    frames_per_utterance: int = 500,
    seed: int = 0,
) -> list[CorpusFile]:
    """Write feature files for every utterance plus a manifest.tsv.

    Deterministic for a given seed: reruns produce byte-identical files.
    File names are <speaker>_<role><index>.ivfx.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    produced: list[CorpusFile] = []
    width = len(str(max(n_speakers - 1, 0)))
    for k in range(n_speakers):
        speaker_id = f"spk{k:0{width}d}"
        speaker = make_speaker(rng, n_components, dim)
        for role, count in (("enroll", n_enroll), ("test", n_test)):
            for i in range(count):
                rows = sample_utterance(speaker, frames_per_utterance, rng)
                path = out_dir / f"{speaker_id}_{role}{i}.ivfx"
                formats.write_features(path, rows)
                produced.append(CorpusFile(path, speaker_id, role))

    manifest = out_dir / "manifest.tsv"
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("file\tspeaker\trole\n")
        for item in produced:
            fh.write(f"{item.path.name}\t{item.speaker_id}\t{item.role}\n")
    return produced
