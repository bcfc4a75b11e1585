"""Command-line surface: featurize, train-ubm, train-tv, enroll, identify.

Exit codes: 0 success, 1 data/partial failure, 2 usage error. Every
command is deterministic given its inputs and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats, synth
from .adaptation import map_adapt_means, supervector
from .audio import read_wav
from .config import PipelineConfig, load_config, parse_thresholds
from .errors import (
    DimensionMismatchError,
    EmptyTargetListError,
    IvoxError,
    TooFewFramesError,
    TooFewSupervectorsError,
    UnsupportedFormatError,
)
from .features import extract_features
from .gmm import train_ubm
from .scoring import format_threshold, score_matrix, write_score_csv
from .targets import TargetList
from .total_variability import extract_ivector, fit


def _resolve_config(args) -> PipelineConfig:
    config = PipelineConfig()
    if getattr(args, "config", None):
        config = load_config(args.config, config)
    overrides = {}
    for flag, key in (
        ("seed", "seed"),
        ("window", "window"),
        ("components", "n_components"),
        ("ivector_dim", "ivector_dim"),
        ("relevance", "relevance"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "threshold", None):
        overrides["thresholds"] = parse_thresholds(args.threshold)
    return config.replace(**overrides)


def _extraction_kwargs(config: PipelineConfig) -> dict:
    return dict(
        frame_ms=config.frame_ms,
        shift_ms=config.shift_ms,
        window=config.window,
        n_filters=config.n_filters,
        n_ceps=config.n_ceps,
        delta_s=config.delta_s,
    )


def _load_feature_rows(path, config: PipelineConfig) -> np.ndarray:
    """Accept a WAV (featurized on the fly) or an IVFX feature file."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == b"RIFF":
        signal = read_wav(path)
        if config.sample_rate is not None and signal.sample_rate != config.sample_rate:
            raise UnsupportedFormatError(
                f"{path}: sample rate {signal.sample_rate} != configured "
                f"{config.sample_rate}"
            )
        return extract_features(signal, **_extraction_kwargs(config)).rows
    if magic == formats.FEATURES_MAGIC:
        return formats.read_features(path)
    raise UnsupportedFormatError(f"{path}: neither a WAV nor an IVFX file")


def cmd_featurize(args) -> int:
    config = _resolve_config(args)
    failures = 0
    for wav in args.inputs:
        out_dir = Path(args.out_dir) if args.out_dir else Path(wav).parent
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / (Path(wav).stem + ".ivfx")
        try:
            signal = read_wav(wav)
            if config.sample_rate is not None and signal.sample_rate != config.sample_rate:
                raise UnsupportedFormatError(
                    f"{wav}: sample rate {signal.sample_rate} != configured "
                    f"{config.sample_rate}"
                )
            feats = extract_features(signal, **_extraction_kwargs(config))
        except (IvoxError, FileNotFoundError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
            continue
        formats.write_features(out_path, feats)
        if args.csv:
            formats.write_features_csv(out_path.with_suffix(".csv"), feats)
        print(f"{wav}: {feats.n_frames} x {feats.dim} -> {out_path}")
    return 1 if failures else 0


def _pool_feature_files(paths) -> np.ndarray:
    blocks = [formats.read_features(p) for p in paths]
    dims = {b.shape[1] for b in blocks}
    if len(dims) > 1:
        raise DimensionMismatchError(f"feature files disagree on dimension: {sorted(dims)}")
    return np.vstack(blocks)


def cmd_train_ubm(args) -> int:
    config = _resolve_config(args)
    rows = _pool_feature_files(args.inputs)
    if rows.shape[0] < config.n_components:
        raise TooFewFramesError(
            f"{rows.shape[0]} frames cannot support {config.n_components} components"
        )
    model, trace = train_ubm(
        rows,
        config.n_components,
        max_iters=config.em_max_iters,
        tol=config.em_tol,
        seed=config.seed,
    )
    for i, value in enumerate(trace):
        print(f"iter {i}: avg loglik {value:.6f}")
    formats.write_gmm(args.out, model)
    print(f"UBM ({model.n_components} components, dim {model.dim}) -> {args.out}")
    if args.plot:
        from .plots import save_loglik_figure

        save_loglik_figure(trace, args.plot)
        print(f"loglik figure -> {args.plot}")
    return 0


def cmd_train_tv(args) -> int:
    config = _resolve_config(args)
    ubm = formats.read_gmm(args.ubm)
    if len(args.inputs) < 2:
        raise TooFewSupervectorsError(
            f"need at least 2 training utterances, got {len(args.inputs)}"
        )
    svs = []
    for path in args.inputs:
        rows = formats.read_features(path)
        adapted = map_adapt_means(ubm, rows, config.relevance)
        svs.append(supervector(adapted))

    m = supervector(ubm)
    cap = min(m.dim, len(svs) - 1)
    c = config.ivector_dim
    if c > cap:
        print(
            f"warning: i-vector dimension reduced from {c} to {cap} "
            f"(min of supervector dim {m.dim}, utterances-1 {len(svs) - 1})",
            file=sys.stderr,
        )
        c = cap
    model = fit(svs, m, c, whiten=config.whiten)
    formats.write_tv_model(args.out, model)
    print(
        f"TV model (D={model.supervector_dim}, c={model.ivector_dim}, "
        f"whiten={'on' if model.whiten else 'off'}) -> {args.out}"
    )
    return 0


def _ivector_for_files(paths, ubm, tv, config: PipelineConfig) -> np.ndarray:
    rows = np.vstack([_load_feature_rows(p, config) for p in paths])
    adapted = map_adapt_means(ubm, rows, config.relevance)
    return extract_ivector(supervector(adapted), tv)


def _check_model_dims(ubm, tv) -> None:
    expected = ubm.dim * ubm.n_components
    if tv.supervector_dim != expected:
        raise DimensionMismatchError(
            f"TV model supervector dimension {tv.supervector_dim} does not match "
            f"UBM's {expected} ({ubm.n_components} x {ubm.dim})"
        )


def cmd_enroll(args) -> int:
    config = _resolve_config(args)
    ubm = formats.read_gmm(args.ubm)
    tv = formats.read_tv_model(args.tv)
    _check_model_dims(ubm, tv)
    omega = _ivector_for_files(args.inputs, ubm, tv, config)

    path = Path(args.targets)
    targets = formats.read_target_list(path) if path.exists() else TargetList()
    targets = targets.with_entry(args.id, omega)
    formats.write_target_list(path, targets)
    print(f"enrolled {args.id} (i-vector dim {omega.size}) -> {path} ({len(targets)} targets)")
    return 0


def cmd_identify(args) -> int:
    config = _resolve_config(args)
    ubm = formats.read_gmm(args.ubm)
    tv = formats.read_tv_model(args.tv)
    _check_model_dims(ubm, tv)
    targets = formats.read_target_list(args.targets)
    if len(targets) == 0:
        raise EmptyTargetListError(f"{args.targets} holds no enrolled targets")

    test_id = Path(args.input).stem
    omega = _ivector_for_files([args.input], ubm, tv, config)
    report = score_matrix(
        [omega],
        targets.vectors,
        config.thresholds,
        test_ids=[test_id],
        target_ids=targets.ids,
    )

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_score_csv(report, fh)
        summary = sys.stdout
    else:
        write_score_csv(report, sys.stdout)
        summary = sys.stderr

    best = report.top_match(test_id)
    print(f"top-1: {best.target_id} score {best.score:.4f}", file=summary)
    for t in report.thresholds:
        ids = [e.target_id for e in report.accepted(t)]
        listing = ", ".join(ids) if ids else "(none)"
        print(f"accept@{format_threshold(t)} ({len(ids)}): {listing}", file=summary)

    if args.plot:
        from .plots import save_score_figure

        save_score_figure(report, args.plot)
        print(f"score figure -> {args.plot}", file=summary)
    return 0


def cmd_synth_corpus(args) -> int:
    config = _resolve_config(args)
    produced = synth.generate_corpus(
        args.out_dir,
        n_speakers=args.speakers,
        n_components=args.gmm_components,
        dim=args.dim,
        n_enroll=args.enroll,
        n_test=args.test,
        frames_per_utterance=args.frames,
        seed=config.seed,
    )
    print(f"{len(produced)} utterances -> {args.out_dir}")
    return 0


def _add_common(parser: argparse.ArgumentParser, *, thresholds: bool = False) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, help="random seed override")
    parser.add_argument("--window", choices=("hamming", "hanning"),
                        help="analysis window override")
    parser.add_argument("--components", type=int, metavar="J",
                        help="UBM component count override")
    parser.add_argument("--ivector-dim", type=int, metavar="C",
                        help="i-vector dimension override")
    parser.add_argument("--relevance", type=float,
                        help="MAP relevance factor override")
    if thresholds:
        parser.add_argument("--threshold", metavar="LIST",
                            help="comma-separated decision thresholds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ivox",
        description="Speaker identification with MAP supervectors, "
        "i-vectors and cosine scoring.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("featurize", help="WAV files to IVFX feature files")
    p.add_argument("inputs", nargs="+", metavar="WAV")
    p.add_argument("--out-dir", help="output directory (default: next to input)")
    p.add_argument("--csv", action="store_true", help="also write CSV exports")
    _add_common(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train-ubm", help="fit the background GMM by EM")
    p.add_argument("inputs", nargs="+", metavar="FEATURES")
    p.add_argument("--out", required=True, help="output IVGM model path")
    p.add_argument("--plot", help="also render the log-likelihood trace PNG")
    _add_common(p)
    p.set_defaults(func=cmd_train_ubm)

    p = sub.add_parser("train-tv", help="fit the total-variability projection")
    p.add_argument("inputs", nargs="+", metavar="FEATURES")
    p.add_argument("--ubm", required=True, help="trained IVGM model")
    p.add_argument("--out", required=True, help="output IVTV model path")
    _add_common(p)
    p.set_defaults(func=cmd_train_tv)

    p = sub.add_parser("enroll", help="add a target speaker to the target list")
    p.add_argument("inputs", nargs="+", metavar="FILE",
                   help="WAV or IVFX utterances for this speaker")
    p.add_argument("--ubm", required=True)
    p.add_argument("--tv", required=True)
    p.add_argument("--targets", required=True, help="target-list file (IVTL)")
    p.add_argument("--id", required=True, help="unique target id")
    _add_common(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("identify", help="score a test utterance against all targets")
    p.add_argument("input", metavar="FILE", help="WAV or IVFX test utterance")
    p.add_argument("--ubm", required=True)
    p.add_argument("--tv", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--out", help="score CSV path (default: stdout)")
    p.add_argument("--plot", help="also render the score figure PNG")
    _add_common(p, thresholds=True)
    p.set_defaults(func=cmd_identify)

    # Test-support generator; deliberately absent from the help listing.
    p = sub.add_parser("synth-corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--speakers", type=int, default=30)
    p.add_argument("--gmm-components", type=int, default=4)
    p.add_argument("--dim", type=int, default=39)
    p.add_argument("--enroll", type=int, default=2)
    p.add_argument("--test", type=int, default=1)
    p.add_argument("--frames", type=int, default=500)
    _add_common(p)
    p.set_defaults(func=cmd_synth_corpus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (IvoxError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
