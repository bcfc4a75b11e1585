import numpy as np
import pytest

from ivox import formats
from ivox.cli import main
from ivox.targets import TargetList

from conftest import write_pcm16_wav, write_raw_wav


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Small synthetic corpus plus trained models, built once via the CLI."""
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    code = main([
        "synth-corpus", "--out-dir", str(data), "--speakers", "5",
        "--gmm-components", "2", "--dim", "8", "--frames", "150", "--seed", "5",
    ])
    assert code == 0
    enroll = sorted(str(p) for p in data.glob("*_enroll*.ivfx"))
    tests = sorted(str(p) for p in data.glob("*_test*.ivfx"))
    ubm = str(root / "ubm.ivgm")
    tv = str(root / "tv.ivtv")
    targets = str(root / "targets.ivtl")
    assert main(["train-ubm", *enroll, "--components", "4", "--out", ubm]) == 0
    assert main(["train-tv", *enroll, "--ubm", ubm, "--out", tv]) == 0
    for speaker in sorted({p.split("/")[-1].split("_")[0] for p in enroll}):
        files = [p for p in enroll if f"{speaker}_" in p]
        assert main([
            "enroll", *files, "--ubm", ubm, "--tv", tv,
            "--targets", targets, "--id", speaker,
        ]) == 0
    return {
        "root": root, "data": data, "enroll": enroll, "tests": tests,
        "ubm": ubm, "tv": tv, "targets": targets,
    }


class TestFeaturize:
    def test_writes_feature_file(self, tmp_path, capsys, rng):
        wav = tmp_path / "one.wav"
        write_pcm16_wav(wav, rng.uniform(-0.5, 0.5, 16000), 16000)
        code, out, _ = run(capsys, "featurize", str(wav), "--out-dir", str(tmp_path))
        assert code == 0
        rows = formats.read_features(tmp_path / "one.ivfx")
        assert rows.shape == (99, 39)
        assert "99 x 39" in out

    def test_csv_export(self, tmp_path, capsys, rng):
        wav = tmp_path / "one.wav"
        write_pcm16_wav(wav, rng.uniform(-0.5, 0.5, 8000), 16000)
        code, _, _ = run(capsys, "featurize", str(wav), "--csv",
                         "--out-dir", str(tmp_path))
        assert code == 0
        csv_rows = np.loadtxt(tmp_path / "one.csv", delimiter=",")
        np.testing.assert_array_equal(csv_rows, formats.read_features(tmp_path / "one.ivfx"))

    def test_partial_failure_exit_code(self, tmp_path, capsys, rng):
        good = tmp_path / "good.wav"
        bad = tmp_path / "bad.wav"
        write_pcm16_wav(good, rng.uniform(-0.5, 0.5, 8000), 16000)
        write_raw_wav(bad, channels=2, payload=b"\x00" * 8)
        code, out, err = run(capsys, "featurize", str(good), str(bad),
                             "--out-dir", str(tmp_path))
        assert code == 1
        assert (tmp_path / "good.ivfx").exists()
        assert not (tmp_path / "bad.ivfx").exists()
        assert "channels=2" in err

    def test_no_inputs_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["featurize"])
        assert exc.value.code == 2

    def test_flag_overrides_config_file(self, tmp_path, capsys, rng):
        samples = rng.uniform(-0.5, 0.5, 8000)
        wav = tmp_path / "w.wav"
        write_pcm16_wav(wav, samples, 16000)
        cfg = tmp_path / "ivox.cfg"
        cfg.write_text("window = hanning\n")

        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert run(capsys, "featurize", str(wav), "--config", str(cfg),
                   "--out-dir", str(out_a))[0] == 0
        assert run(capsys, "featurize", str(wav), "--config", str(cfg),
                   "--window", "hamming", "--out-dir", str(out_b))[0] == 0

        from ivox.audio import read_wav
        from ivox.features import extract_features
        hamming = extract_features(read_wav(wav), window="hamming").rows
        hanning = extract_features(read_wav(wav), window="hanning").rows
        np.testing.assert_array_equal(formats.read_features(out_a / "w.ivfx"), hanning)
        np.testing.assert_array_equal(formats.read_features(out_b / "w.ivfx"), hamming)


class TestTraining:
    def test_train_ubm_trace_and_determinism(self, corpus, tmp_path, capsys):
        out_a = tmp_path / "a.ivgm"
        out_b = tmp_path / "b.ivgm"
        code, out, _ = run(capsys, "train-ubm", *corpus["enroll"],
                           "--components", "4", "--out", str(out_a))
        assert code == 0
        values = [float(line.split()[-1]) for line in out.splitlines()
                  if line.startswith("iter")]
        assert len(values) >= 2
        assert all(b >= a - 1e-8 * abs(a) for a, b in zip(values, values[1:]))
        assert run(capsys, "train-ubm", *corpus["enroll"], "--components", "4",
                   "--out", str(out_b))[0] == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_train_ubm_too_many_components(self, corpus, tmp_path, capsys):
        code, _, err = run(capsys, "train-ubm", corpus["enroll"][0],
                           "--components", "500", "--out", str(tmp_path / "x.ivgm"))
        assert code == 1
        assert "components" in err

    def test_train_tv_caps_dimension_with_warning(self, corpus, tmp_path, capsys):
        out = tmp_path / "tv.ivtv"
        code, _, err = run(capsys, "train-tv", *corpus["enroll"],
                           "--ubm", corpus["ubm"], "--out", str(out))
        assert code == 0
        assert "reduced from 400 to 9" in err
        model = formats.read_tv_model(out)
        assert model.ivector_dim <= 9

    def test_train_tv_deterministic(self, corpus, tmp_path, capsys):
        out_a, out_b = tmp_path / "a.ivtv", tmp_path / "b.ivtv"
        for out in (out_a, out_b):
            assert run(capsys, "train-tv", *corpus["enroll"], "--ubm", corpus["ubm"],
                       "--out", str(out))[0] == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_tv_mean_is_the_ubm_supervector(self, corpus):
        from ivox.adaptation import supervector

        ubm = formats.read_gmm(corpus["ubm"])
        tv = formats.read_tv_model(corpus["tv"])
        np.testing.assert_array_equal(tv.mean_supervector, supervector(ubm).values)

    def test_identical_utterances_collapse_the_subspace(self, corpus, tmp_path, capsys):
        """Repeating one utterance leaves a single direction of variability."""
        out = tmp_path / "degenerate.ivtv"
        same = corpus["enroll"][0]
        with pytest.warns(UserWarning, match="reduced"):
            code, _, err = run(capsys, "train-tv", same, same, same,
                               "--ubm", corpus["ubm"], "--out", str(out))
        assert code == 0
        assert "reduced from 400 to 2" in err  # cap at N-1 first
        assert formats.read_tv_model(out).ivector_dim == 1

    def test_train_tv_needs_two_utterances(self, corpus, tmp_path, capsys):
        code, _, err = run(capsys, "train-tv", corpus["enroll"][0],
                           "--ubm", corpus["ubm"], "--out", str(tmp_path / "x.ivtv"))
        assert code == 1
        assert "at least 2" in err

    def test_plot_rendering_is_deterministic(self, corpus, tmp_path, capsys):
        plots = [tmp_path / "a.png", tmp_path / "b.png"]
        for i, png in enumerate(plots):
            assert run(capsys, "train-ubm", *corpus["enroll"], "--components", "4",
                       "--out", str(tmp_path / f"m{i}.ivgm"), "--plot", str(png))[0] == 0
        assert plots[0].read_bytes() == plots[1].read_bytes()


class TestEnroll:
    def test_duplicate_id_rejected(self, corpus, capsys):
        code, _, err = run(capsys, "enroll", corpus["enroll"][0],
                           "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                           "--targets", corpus["targets"], "--id", "spk0")
        assert code == 1
        assert "already enrolled" in err

    def test_target_list_contents(self, corpus):
        targets = formats.read_target_list(corpus["targets"])
        assert targets.ids == ["spk0", "spk1", "spk2", "spk3", "spk4"]
        model = formats.read_tv_model(corpus["tv"])
        assert targets.dim == model.ivector_dim

    def test_mismatched_models_rejected(self, corpus, tmp_path, capsys):
        other_ubm = str(tmp_path / "other.ivgm")
        assert main(["train-ubm", *corpus["enroll"], "--components", "2",
                     "--out", other_ubm]) == 0
        capsys.readouterr()
        code, _, err = run(capsys, "enroll", corpus["enroll"][0],
                           "--ubm", other_ubm, "--tv", corpus["tv"],
                           "--targets", str(tmp_path / "t.ivtl"), "--id", "x")
        assert code == 1
        assert "does not match" in err


class TestIdentify:
    def test_self_match_scores_one(self, corpus, tmp_path, capsys):
        """Identifying the exact utterance a target was enrolled from
        reproduces its i-vector bit for bit, so the score is 1.0."""
        solo_targets = tmp_path / "solo.ivtl"
        assert run(capsys, "enroll", corpus["enroll"][0],
                   "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                   "--targets", str(solo_targets), "--id", "solo")[0] == 0
        for speaker in ("spk1", "spk2"):
            files = [p for p in corpus["enroll"] if f"{speaker}_" in p]
            assert run(capsys, "enroll", *files,
                       "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                       "--targets", str(solo_targets), "--id", speaker)[0] == 0
        out = tmp_path / "scores.csv"
        code, out_text, _ = run(capsys, "identify", corpus["enroll"][0],
                                "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                                "--targets", str(solo_targets), "--out", str(out))
        assert code == 0
        assert "top-1: solo score 1.0000" in out_text
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 1 + 3  # header + one row per target

    def test_fresh_utterances_identify_their_speakers(self, corpus, tmp_path, capsys):
        correct = 0
        for test_file in corpus["tests"]:
            speaker = test_file.split("/")[-1].split("_")[0]
            code, out_text, _ = run(capsys, "identify", test_file,
                                    "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                                    "--targets", corpus["targets"],
                                    "--out", str(tmp_path / "s.csv"))
            assert code == 0
            if f"top-1: {speaker} " in out_text:
                correct += 1
        assert correct == len(corpus["tests"])

    def test_accept_sets_nested(self, corpus, tmp_path, capsys):
        code, out_text, _ = run(capsys, "identify", corpus["tests"][0],
                                "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                                "--targets", corpus["targets"],
                                "--threshold", "0.5,0.8,0.95",
                                "--out", str(tmp_path / "s.csv"))
        assert code == 0
        sets = {}
        for line in out_text.splitlines():
            if line.startswith("accept@"):
                label, _, rest = line.partition(":")
                names = {n.strip() for n in rest.split(",") if n.strip() and "(none)" not in n}
                sets[label.split(" ")[0]] = names
        assert sets["accept@0.95"] <= sets["accept@0.8"] <= sets["accept@0.5"]

    def test_csv_and_plot_deterministic(self, corpus, tmp_path, capsys):
        outs = [(tmp_path / "a.csv", tmp_path / "a.png"),
                (tmp_path / "b.csv", tmp_path / "b.png")]
        for csv, png in outs:
            assert run(capsys, "identify", corpus["tests"][0],
                       "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                       "--targets", corpus["targets"],
                       "--out", str(csv), "--plot", str(png))[0] == 0
        assert outs[0][0].read_bytes() == outs[1][0].read_bytes()
        assert outs[0][1].read_bytes() == outs[1][1].read_bytes()

    def test_csv_to_stdout_when_no_out(self, corpus, capsys):
        code, out_text, err_text = run(capsys, "identify", corpus["tests"][0],
                                       "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                                       "--targets", corpus["targets"])
        assert code == 0
        assert out_text.startswith("test_id,target_id,angle_rad,score")
        assert "top-1:" in err_text

    def test_empty_target_list(self, corpus, tmp_path, capsys):
        empty = tmp_path / "empty.ivtl"
        formats.write_target_list(empty, TargetList())
        code, _, err = run(capsys, "identify", corpus["tests"][0],
                           "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                           "--targets", str(empty))
        assert code == 1
        assert "no enrolled targets" in err


class TestFigureSevenNarrativeEndToEnd:
    def test_four_impostors_above_point_eight(self, corpus, tmp_path, capsys):
        """Constructed target list mirrors the narrative: the test matches
        target 9 while ids 11, 25, 26, 27 clear the 0.8 threshold."""
        from ivox.adaptation import map_adapt_means, supervector
        from ivox.total_variability import extract_ivector

        ubm = formats.read_gmm(corpus["ubm"])
        tv = formats.read_tv_model(corpus["tv"])
        rows = formats.read_features(corpus["tests"][0])
        w = extract_ivector(supervector(map_adapt_means(ubm, rows)), tv)
        unit = w / np.linalg.norm(w)

        gen = np.random.default_rng(17)

        def at_cosine(c):
            perp = gen.normal(size=unit.size)
            perp -= (perp @ unit) * unit
            perp /= np.linalg.norm(perp)
            return c * unit + np.sqrt(1 - c * c) * perp

        targets = TargetList()
        for i in range(1, 31):
            tid = str(i)
            if tid == "9":
                vec = w.copy()
            elif tid in ("11", "25", "26", "27"):
                vec = at_cosine(0.85)
            else:
                vec = at_cosine(0.3)
            targets = targets.with_entry(tid, vec)
        tl_path = tmp_path / "constructed.ivtl"
        formats.write_target_list(tl_path, targets)

        csv_path = tmp_path / "fig7.csv"
        code, out_text, _ = run(capsys, "identify", corpus["tests"][0],
                                "--ubm", corpus["ubm"], "--tv", corpus["tv"],
                                "--targets", str(tl_path), "--out", str(csv_path))
        assert code == 0
        assert "top-1: 9 score 1.0000" in out_text
        accept_lines = {line.split(" ")[0]: line for line in out_text.splitlines()
                        if line.startswith("accept@")}
        assert accept_lines["accept@0.8"].startswith("accept@0.8 (5):")
        for tid in ("9", "11", "25", "26", "27"):
            assert tid in accept_lines["accept@0.8"]
        assert accept_lines["accept@0.9"] == "accept@0.9 (1): 9"
        assert accept_lines["accept@1"] == "accept@1 (1): 9"
        assert len(csv_path.read_text().strip().split("\n")) == 31


class TestAudioPipelineEndToEnd:
    def test_wav_enroll_and_identify(self, tmp_path, capsys, rng):
        """Whole audio path: WAVs through featurize, training, enrollment
        and identification of an enrolled recording."""
        wavs = []
        for i in range(3):
            wav = tmp_path / f"voice{i}.wav"
            # different colored noise per "speaker"
            raw = rng.normal(size=12000)
            kernel = rng.uniform(-1, 1, 2 * i + 1)
            samples = np.convolve(raw, kernel, mode="same")
            samples = 0.4 * samples / np.max(np.abs(samples))
            write_pcm16_wav(wav, samples, 16000)
            wavs.append(str(wav))

        feat_dir = tmp_path / "feats"
        assert run(capsys, "featurize", *wavs, "--out-dir", str(feat_dir))[0] == 0
        feats = sorted(str(p) for p in feat_dir.glob("*.ivfx"))
        ubm = str(tmp_path / "ubm.ivgm")
        tv = str(tmp_path / "tv.ivtv")
        targets = str(tmp_path / "targets.ivtl")
        assert run(capsys, "train-ubm", *feats, "--components", "4", "--out", ubm)[0] == 0
        assert run(capsys, "train-tv", *feats, "--ubm", ubm, "--out", tv)[0] == 0
        for i, wav in enumerate(wavs):
            assert run(capsys, "enroll", wav, "--ubm", ubm, "--tv", tv,
                       "--targets", targets, "--id", f"voice{i}")[0] == 0

        code, out_text, _ = run(capsys, "identify", wavs[1], "--ubm", ubm,
                                "--tv", tv, "--targets", targets,
                                "--out", str(tmp_path / "scores.csv"))
        assert code == 0
        assert "top-1: voice1 score 1.0000" in out_text


class TestSynthCorpus:
    def test_deterministic_given_seed(self, tmp_path, capsys):
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            assert run(capsys, "synth-corpus", "--out-dir", str(d), "--speakers", "3",
                       "--dim", "6", "--frames", "50", "--seed", "9")[0] == 0
        files_a = sorted(p.name for p in dirs[0].iterdir())
        files_b = sorted(p.name for p in dirs[1].iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_manifest_contents(self, tmp_path, capsys):
        d = tmp_path / "c"
        assert run(capsys, "synth-corpus", "--out-dir", str(d), "--speakers", "2",
                   "--dim", "4", "--frames", "30")[0] == 0
        lines = (d / "manifest.tsv").read_text().strip().split("\n")
        assert lines[0] == "file\tspeaker\trole"
        assert len(lines) == 1 + 2 * 3  # 2 speakers x (2 enroll + 1 test)


class TestTopLevel:
    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_missing_model_file(self, corpus, tmp_path, capsys):
        code, _, err = run(capsys, "identify", corpus["tests"][0],
                           "--ubm", str(tmp_path / "nope.ivgm"),
                           "--tv", corpus["tv"], "--targets", corpus["targets"])
        assert code == 1
        assert "error" in err
