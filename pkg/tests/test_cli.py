import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from svcforge.audio import write_wav
from svcforge.cli import main
from svcforge.svcf import read_tensor, write_tensor
from svcforge.synth import sawtooth, sine

SRC_DIR = str(Path(__file__).resolve().parent.parent / "src")


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    summary = json.loads(captured.out) if captured.out.strip() else None
    return code, summary


@pytest.fixture()
def wavs(tmp_path):
    a = tmp_path / "a.wav"
    b = tmp_path / "b.wav"
    write_wav(sine(440, 0.6), a)
    write_wav(sawtooth(220, 0.6), b)
    return a, b


def _file_map(tmp_path):
    return {p.name: p.read_bytes() for p in sorted(tmp_path.rglob("*.svcf"))}


def test_extract_deterministic_across_runs_and_jobs(tmp_path, wavs, capsys):
    a, b = wavs
    snapshots = []
    for run_dir, jobs in [("one", "1"), ("two", "1"), ("par", "2")]:
        out = tmp_path / run_dir
        code, summary = run_cli(capsys, "extract", "--in", str(a), "--in", str(b),
                                "--out-dir", str(out), "--seed", "1",
                                "--jobs", jobs)
        assert code == 0
        assert len(summary["files"]) == 2
        snapshots.append(_file_map(out))
    assert snapshots[0] == snapshots[1] == snapshots[2]


def test_extract_summary_is_machine_readable(tmp_path, wavs, capsys):
    a, _ = wavs
    code, summary = run_cli(capsys, "extract", "--in", str(a),
                            "--out-dir", str(tmp_path / "f"), "--seed", "0")
    assert code == 0
    entry = summary["files"][0]
    assert set(entry["outputs"]) == {"mel", "loudness", "f0"}
    mel = read_tensor(entry["outputs"]["mel"])
    assert mel.shape == (entry["frames"], 80)


def test_f0_stats_and_convert_pitch_cross_domain(tmp_path, wavs, capsys):
    a, _ = wavs
    feat = tmp_path / "feat"
    run_cli(capsys, "extract", "--in", str(a), "--out-dir", str(feat), "--seed", "0")
    stats = tmp_path / "src.json"
    code, summary = run_cli(capsys, "f0-stats", "--in", str(a),
                            "--speaker-id", "src", "--out", str(stats))
    assert code == 0
    assert summary["n_voiced_frames"] > 0

    out = tmp_path / "conv.svcf"
    code, summary = run_cli(capsys, "convert-pitch",
                            "--in", str(feat / "a.f0.svcf"), "--out", str(out),
                            "--source-stats", str(stats),
                            "--target-stats", str(stats),
                            "--policy", "cross-domain")
    assert code == 0
    # matched stats: the quantized mean shift is 0, offset contributes +600
    assert summary["median_shift_cents"] == pytest.approx(600.0, abs=1e-6)
    assert summary["policy"]["cross_domain_offset_semitones"] == 6.0


def test_manifest_compose_reference_totals(capsys):
    code, summary = run_cli(capsys, "manifest", "compose", "--spec", "final")
    assert code == 0
    assert summary["total_hours"] == pytest.approx(750.14, abs=0.01)
    for name, hours in [("v1_sing_en", 4.21), ("v2_ssmix_en", 631.79),
                        ("v3_sing_langmix", 122.56)]:
        code, summary = run_cli(capsys, "manifest", "compose", "--spec", name)
        assert code == 0
        assert summary["total_hours"] == pytest.approx(hours, abs=0.01)
        for target in ("IDF1", "IDM1", "CDF1", "CDM1"):
            assert target in summary["speakers"]


def test_manifest_compose_writes_filtered_output(tmp_path, capsys):
    out = tmp_path / "v1.jsonl"
    code, summary = run_cli(capsys, "manifest", "compose", "--spec", "v1_sing_en",
                            "--out", str(out))
    assert code == 0
    assert out.exists()
    assert len(out.read_text().splitlines()) == summary["entries"]


def test_manifest_compose_spec_json(tmp_path, capsys):
    spec_doc = {"name": "zh_singing", "languages": ["zh"], "kinds": ["singing"],
                "always_include_datasets": []}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_doc))
    code, summary = run_cli(capsys, "manifest", "compose", "--spec", str(spec_path))
    assert code == 0
    # opencpop + opensinger + m4singer + popcs + ksing
    assert summary["total_hours"] == pytest.approx(93.64, abs=0.01)


def test_perturb_deterministic(tmp_path, wavs, capsys):
    a, _ = wavs
    outs = []
    for tag in ("x", "y"):
        pa, pb = tmp_path / f"{tag}_a.wav", tmp_path / f"{tag}_b.wav"
        code, _ = run_cli(capsys, "perturb", "--in", str(a), "--out-a", str(pa),
                          "--out-b", str(pb), "--seed", "7")
        assert code == 0
        outs.append((pa.read_bytes(), pb.read_bytes()))
    assert outs[0] == outs[1]


def test_segment_vad(tmp_path, wavs, capsys):
    a, _ = wavs
    out = tmp_path / "seg.json"
    code, summary = run_cli(capsys, "segment", "--in", str(a), "--mode", "vad",
                            "--out", str(out))
    assert code == 0
    assert summary["n_segments"] == 1
    assert json.loads(out.read_text()) == summary["segments"]


def test_segment_rest_notes(tmp_path, capsys):
    notes = [{"onset_sec": 0.0, "offset_sec": 1.0, "pitch": 60},
             {"onset_sec": 2.0, "offset_sec": 3.0, "pitch": 62}]
    notes_path = tmp_path / "notes.json"
    notes_path.write_text(json.dumps(notes))
    code, summary = run_cli(capsys, "segment", "--mode", "rest",
                            "--notes", str(notes_path), "--clip-duration", "3.0")
    assert code == 0
    assert summary["n_segments"] == 2


def test_ddpm_train_finetune_sample_deterministic(tmp_path, capsys):
    model_dir = tmp_path / "model"
    code, summary = run_cli(capsys, "ddpm", "train", "--out-dir", str(model_dir),
                            "--seed", "3", "--steps", "120")
    assert code == 0
    assert summary["mean_last_50"] < summary["first_loss"]

    ft_dir = tmp_path / "ft"
    code, _ = run_cli(capsys, "ddpm", "finetune", "--model-dir", str(model_dir),
                      "--out-dir", str(ft_dir), "--seed", "4",
                      "--iterations", "50")
    assert code == 0
    # non-CLN tensors byte-identical between base and fine-tuned model
    for name in ("w1", "b1", "w2", "b2"):
        assert (model_dir / f"{name}.svcf").read_bytes() == \
            (ft_dir / f"{name}.svcf").read_bytes()
    changed = any(
        (model_dir / f"{n}.svcf").read_bytes() != (ft_dir / f"{n}.svcf").read_bytes()
        for n in ("cln_w_gamma", "cln_b_gamma", "cln_w_beta", "cln_b_beta")
    )
    assert changed

    s1, s2 = tmp_path / "s1.svcf", tmp_path / "s2.svcf"
    for out in (s1, s2):
        code, _ = run_cli(capsys, "ddpm", "sample", "--model-dir", str(ft_dir),
                          "--out", str(out), "--seed", "11")
        assert code == 0
    assert s1.read_bytes() == s2.read_bytes()


def test_ddpm_sample_oracle_mode(tmp_path, capsys):
    out = tmp_path / "o.svcf"
    code, summary = run_cli(capsys, "ddpm", "sample", "--oracle-mean", "0.5",
                            "--oracle-std", "0.0", "--out", str(out),
                            "--seed", "5", "--dim", "4")
    assert code == 0
    assert np.allclose(read_tensor(out), 0.5, atol=1e-5)


def test_eval_cossim(tmp_path, capsys):
    write_tensor(tmp_path / "a.svcf", np.array([1.0, 0.0], dtype=np.float32))
    write_tensor(tmp_path / "b.svcf", np.array([[1.0, 0.0], [0.0, 1.0]],
                                               dtype=np.float32))
    code, summary = run_cli(capsys, "eval", "cossim", "--a",
                            str(tmp_path / "a.svcf"), "--b", str(tmp_path / "b.svcf"))
    assert code == 0
    assert summary["n_pairs"] == 2
    assert summary["cossim"] == pytest.approx(0.5)


def test_eval_f0(tmp_path, capsys):
    track = np.array([[220.0, 1.0], [0.0, 0.0]], dtype=np.float32)
    write_tensor(tmp_path / "a.svcf", track)
    write_tensor(tmp_path / "b.svcf", track)
    code, summary = run_cli(capsys, "eval", "f0", "--a", str(tmp_path / "a.svcf"),
                            "--b", str(tmp_path / "b.svcf"))
    assert code == 0
    assert summary["rmse_cents"] == 0.0
    assert summary["vuv_error_rate"] == 0.0


def test_config_show_lists_defaults(capsys):
    code, summary = run_cli(capsys, "config", "show")
    assert code == 0
    assert summary["defaults_version"] == "1"
    values = summary["values"]
    assert values["SAMPLE_RATE"] == 24000
    assert values["DIFFUSION_STEPS"] == 100
    assert values["GUIDANCE_SCALE"] == 1.0
    assert len(values) > 30


def test_exit_codes(tmp_path, capsys):
    # usage error: missing required flag
    code, _ = run_cli(capsys, "extract")
    assert code == 1
    # usage error: mode-dependent flag missing
    code, _ = run_cli(capsys, "segment", "--mode", "rest")
    assert code == 1
    # data error: missing input file
    code, _ = run_cli(capsys, "extract", "--in", str(tmp_path / "nope.wav"),
                      "--out-dir", str(tmp_path), "--seed", "0")
    assert code == 2
    # unknown spec name is a data error
    code, _ = run_cli(capsys, "manifest", "compose", "--spec", "bogus")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["extract", "--help"],
    ["f0-stats", "--help"],
    ["convert-pitch", "--help"],
    ["perturb", "--help"],
    ["segment", "--help"],
    ["manifest", "compose", "--help"],
    ["ddpm", "train", "--help"],
    ["ddpm", "finetune", "--help"],
    ["ddpm", "sample", "--help"],
    ["eval", "cossim", "--help"],
    ["eval", "f0", "--help"],
    ["config", "show", "--help"],
])
def test_help_available_everywhere(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--help" in out or "usage" in out


def test_help_mentions_units(capsys):
    with pytest.raises(SystemExit):
        main(["perturb", "--help"])
    out = capsys.readouterr().out
    for needle in ("semitones", "dB"):
        assert needle in out


def test_failed_run_leaves_no_partial_outputs(tmp_path, capsys):
    # second input is missing: the first file's outputs may exist (per-file
    # work is independent), but nothing partial is ever left behind
    good = tmp_path / "good.wav"
    write_wav(sine(440, 0.3), good)
    out_dir = tmp_path / "out"
    code, _ = run_cli(capsys, "extract", "--in", str(tmp_path / "missing.wav"),
                      "--out-dir", str(out_dir), "--seed", "0")
    assert code == 2
    leftovers = list(out_dir.glob("missing.*"))
    assert leftovers == []


def test_module_entrypoint_subprocess(tmp_path):
    env = {"PYTHONPATH": SRC_DIR, "PATH": "/usr/bin:/bin"}
    result = subprocess.run(
        [sys.executable, "-m", "svcforge", "manifest", "compose",
         "--spec", "final"],
        capture_output=True, text=True, env=env,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["total_hours"] == pytest.approx(750.14, abs=0.01)
