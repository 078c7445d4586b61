"""End-to-end CLI behavior: flags, env overrides, exit codes, artifacts."""

import pytest

from lacunet.cli import build_parser, run
from lacunet.dataset import load_dataset
from lacunet.trainer import load_checkpoint


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def tiny_generate_args(out, samples=6):
    return [
        "generate", "--samples", str(samples), "--nx", "16", "--nt", "16",
        "--min-disks", "1", "--max-disks", "2", "--seed", "5",
        "--out", str(out),
    ]


def tiny_train_args(data, out, metrics=None, epochs=2):
    argv = [
        "train", "--data", str(data), "--epochs", str(epochs), "--batch", "2",
        "--lr", "1e-3", "--layers", "1", "--width", "8", "--split", "0.7",
        "--seed", "3", "--out", str(out), "--zero-timing",
    ]
    if metrics is not None:
        argv += ["--metrics", str(metrics)]
    return argv


@pytest.fixture
def small_run(tmp_path, capsys):
    data = tmp_path / "d.lacd"
    model = tmp_path / "m.lacm"
    metrics = tmp_path / "m.csv"
    assert call(capsys, *tiny_generate_args(data))[0] == 0
    assert call(capsys, *tiny_train_args(data, model, metrics))[0] == 0
    return data, model, metrics


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as e:
        run(["generate", "--help"])
    assert e.value.code == 0
    text = capsys.readouterr().out
    for flag in ("--samples", "--min-disks", "--max-disks", "--max-radius",
                 "--seed", "--out", "--threads"):
        assert flag in text
    # defaults are part of the help text
    assert "(default: 10000)" in text
    assert "(default: 5.0)" in text
    assert "(default: 42)" in text


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        run(["generate", "--bogus", "1"])
    assert e.value.code == 2


def test_generate_writes_dataset_and_prints_config(tmp_path, capsys):
    out = tmp_path / "d.lacd"
    code, stdout, _ = call(capsys, *tiny_generate_args(out))
    assert code == 0
    assert "resolved configuration:" in stdout
    assert "seed = 5" in stdout
    assert "seed in effect: 5" in stdout
    d = load_dataset(out)
    assert len(d.samples) == 6
    assert d.grid.Nx == 16


def test_generate_deterministic_across_runs_and_threads(tmp_path, capsys):
    a, b, c = tmp_path / "a.lacd", tmp_path / "b.lacd", tmp_path / "c.lacd"
    call(capsys, *tiny_generate_args(a))
    call(capsys, *tiny_generate_args(b))
    call(capsys, *(tiny_generate_args(c) + ["--threads", "4"]))
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_train_produces_checkpoint_and_metrics(small_run):
    data, model, metrics = small_run
    ckpt = load_checkpoint(model)
    assert ckpt.params.widths == (64, 8, 256)  # 16x16 grid with an 8x8 sub-grid
    lines = metrics.read_text().strip().split("\n")
    assert len(lines) == 3  # header + 2 epochs


def test_train_deterministic_outputs(tmp_path, capsys):
    data = tmp_path / "d.lacd"
    call(capsys, *tiny_generate_args(data))
    m1, m2 = tmp_path / "1.lacm", tmp_path / "2.lacm"
    c1, c2 = tmp_path / "1.csv", tmp_path / "2.csv"
    call(capsys, *tiny_train_args(data, m1, c1))
    call(capsys, *tiny_train_args(data, m2, c2))
    assert m1.read_bytes() == m2.read_bytes()
    assert c1.read_bytes() == c2.read_bytes()


def test_eval_stored_dataset(small_run, capsys):
    data, model, _ = small_run
    code, stdout, _ = call(
        capsys, "eval", "--model", str(model), "--data", str(data),
    )
    assert code == 0
    line = [l for l in stdout.splitlines() if l.startswith("accuracy=")][0]
    fields = dict(kv.split("=") for kv in line.split())
    assert 0.0 <= float(fields["accuracy"]) <= 1.0
    assert int(fields["nodes_total"]) == 6 * 16 * 16
    assert "per_sample_accuracy" in fields


def test_eval_fresh_test_set(small_run, capsys):
    _, model, _ = small_run
    code, stdout, _ = call(
        capsys, "eval", "--model", str(model), "--test-samples", "4",
        "--seed", "17", "--nx", "16", "--nt", "16",
    )
    assert code == 0
    assert any(l.startswith("accuracy=") for l in stdout.splitlines())


def test_eval_grid_model_mismatch(small_run, tmp_path, capsys):
    _, model, _ = small_run
    code, _, err = call(
        capsys, "eval", "--model", str(model), "--test-samples", "2",
    )  # default 64x64 grid but 16x16 model
    assert code == 1
    assert "checkpoint maps" in err


def test_render_and_oracle_outputs(small_run, tmp_path, capsys):
    _, model, _ = small_run
    prefix = tmp_path / "img"
    code, stdout, _ = call(
        capsys, "render", "--model", str(model), "--nx", "16", "--nt", "16",
        "--disk", "0,5,2", "--out-prefix", str(prefix), "--pixel-size", "1",
    )
    assert code == 0
    for suffix in ("_ref.ppm", "_nn.ppm", "_qf.ppm", "_diff.ppm"):
        assert (tmp_path / f"img{suffix}").exists()

    code, _, _ = call(
        capsys, "oracle", "--nx", "16", "--nt", "16", "--disk", "0,5,2",
        "--disk=-4,2,1.5", "--secondary", "--out-prefix", str(tmp_path / "orc"),
        "--pixel-size", "1",
    )
    assert code == 0
    for suffix in ("_qf.ppm", "_ref.ppm", "_secondary.ppm"):
        assert (tmp_path / f"orc{suffix}").exists()


def test_bad_disk_flag(capsys):
    with pytest.raises(SystemExit) as e:
        run(["oracle", "--disk", "1,2", "--out-prefix", "x"])
    assert e.value.code == 2


def test_missing_file_exits_1(tmp_path, capsys):
    code, _, err = call(
        capsys, "train", "--data", str(tmp_path / "nope.lacd"),
        "--out", str(tmp_path / "m.lacm"),
    )
    assert code == 1
    assert "error:" in err


def test_corrupt_dataset_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.lacd"
    bad.write_bytes(b"JUNKJUNKJUNK")
    code, _, err = call(
        capsys, "train", "--data", str(bad), "--out", str(tmp_path / "m.lacm"),
    )
    assert code == 1
    assert "bad magic" in err


def test_env_override_and_flag_precedence(tmp_path, capsys, monkeypatch):
    out = tmp_path / "env.lacd"
    monkeypatch.setenv("LACUNET_SAMPLES", "3")
    code, stdout, _ = call(
        capsys, "generate", "--nx", "16", "--nt", "16", "--seed", "5",
        "--out", str(out),
    )
    assert code == 0
    assert len(load_dataset(out).samples) == 3
    # explicit flag beats the environment
    out2 = tmp_path / "env2.lacd"
    code, stdout, _ = call(
        capsys, "generate", "--samples", "4", "--nx", "16", "--nt", "16",
        "--seed", "5", "--out", str(out2),
    )
    assert code == 0
    assert len(load_dataset(out2).samples) == 4


def test_parser_covers_all_subcommands():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0]
    assert set(sub.choices) == {"generate", "train", "eval", "render", "oracle"}
