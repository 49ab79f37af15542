import os

import pytest

from fracpath.cli import main
from fracpath.config import ConfigError, config_from_text
from fracpath.experiments import run_experiment
from fracpath.oracles import build_oracles, load_oracle_file, write_oracle_file
from fracpath.verify import render_table, run_checks

BERMAN_CFG = """
experiment = berman
generator.family = fbm
generator.hurst = 0.5
generator.n_steps = 1024
params.alpha = -0.3
params.p = 2
params.n_windows = 6
seeds = 1,2
refinements = 1
"""


def test_config_parse_and_hash():
    cfg = config_from_text(BERMAN_CFG)
    assert cfg.experiment == "berman"
    assert cfg.generator.params["hurst"] == 0.5
    assert cfg.seeds == (1, 2)
    assert len(cfg.config_hash()) == 64
    assert config_from_text(BERMAN_CFG).config_hash() == cfg.config_hash()


@pytest.mark.parametrize(
    "mutation,match",
    [
        ("params.alpha = -0.8", "admissible"),
        ("generator.hurst = 1.5", "hurst"),
        ("experiment = warp", "experiment"),
        ("seeds = ", "seed"),
    ],
)
def test_config_validation_errors(mutation, match):
    key = mutation.split("=")[0].strip()
    lines = [l for l in BERMAN_CFG.splitlines() if not l.startswith(key)]
    with pytest.raises(ConfigError, match=match):
        config_from_text("\n".join(lines + [mutation]))


def test_config_syntax_errors():
    with pytest.raises(ConfigError, match="duplicate"):
        config_from_text(BERMAN_CFG + "\nseeds = 3")
    with pytest.raises(ConfigError, match="expected"):
        config_from_text("experiment берман")


def test_key_estimate_config_hypothesis_check():
    text = """
experiment = key_estimate
generator.family = fbm
generator.hurst = 0.7
bv.kind = indicator_interval
bv.a = 0.25
bv.b = 0.75
params.s = 0.6
params.theta = 0.65
params.p = 2
params.q = 2
params.beta = 0.35
params.r = 2
"""
    with pytest.raises(ConfigError, match="1/p"):
        config_from_text(text)


def test_run_berman_experiment_outputs(tmp_path):
    cfg = config_from_text(BERMAN_CFG)
    out = run_experiment(cfg, threads=1, out_dir=str(tmp_path / "o"))
    names = sorted(os.listdir(out))
    assert "results.csv" in names and "summary.csv" in names and "manifest.txt" in names
    assert "windows_s1_r0.csv" in names
    assert any(n.startswith("plotdata_") and n.endswith(".csv") for n in names)
    assert any(n.startswith("plotdata_") and n.endswith(".png") for n in names)
    header = (tmp_path / "o" / "windows_s1_r0.csv").read_text().splitlines()[0]
    assert header == "t_start,t_end,tau,sigma,empirical_K"
    manifest = (tmp_path / "o" / "manifest.txt").read_text()
    assert "config_hash = " in manifest and "rng = Philox4x64" in manifest


def test_thread_count_never_changes_bytes(tmp_path):
    cfg = config_from_text(BERMAN_CFG)
    out1 = run_experiment(cfg, threads=1, out_dir=str(tmp_path / "t1"))
    out8 = run_experiment(cfg, threads=8, out_dir=str(tmp_path / "t8"))
    for name in sorted(os.listdir(out1)):
        if name.endswith(".csv") or name.endswith(".txt"):
            a = (tmp_path / "t1" / name).read_bytes()
            b = (tmp_path / "t8" / name).read_bytes()
            assert a == b, name


def test_rerun_is_byte_identical(tmp_path):
    cfg = config_from_text(BERMAN_CFG)
    out1 = run_experiment(cfg, threads=2, out_dir=str(tmp_path / "a"))
    out2 = run_experiment(cfg, threads=2, out_dir=str(tmp_path / "b"))
    for name in sorted(os.listdir(out1)):
        if name.endswith(".csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_floats_full_precision(tmp_path):
    cfg = config_from_text(BERMAN_CFG)
    out = run_experiment(cfg, threads=1, out_dir=str(tmp_path / "p"))
    line = (tmp_path / "p" / "results.csv").read_text().splitlines()[1]
    floats = [c for c in line.split(",") if "." in c]
    assert any(len(c.replace("-", "").replace(".", "").lstrip("0")) >= 15 for c in floats)


SMALL_CONFIGS = {
    "occupation": """
experiment = occupation
generator.family = fbm
generator.hurst = 0.4
generator.n_steps = 2048
seeds = 1
""",
    "potential": """
experiment = potential
generator.family = linear
generator.n_steps = 512
params.gamma = 0.3
params.q = 2
seeds = 1
""",
    "variability": """
experiment = variability
generator.family = linear
generator.n_steps = 512
bv.kind = indicator_interval
bv.a = 0.25
bv.b = 0.75
params.s = 0.5
params.p = 1
seeds = 1
refinements = 3
""",
    "compose": """
experiment = compose
generator.family = fbm
generator.hurst = 0.6
generator.n_steps = 512
bv.kind = indicator_interval
bv.a = 0.25
bv.b = 0.75
params.s = 0.5
params.p = 2
seeds = 1
""",
    "seminorm": """
experiment = seminorm
generator.family = fbm
generator.hurst = 0.6
generator.n_steps = 1024
params.theta = 0.4
params.p = 2
seeds = 1
""",
    "key_estimate": """
experiment = key_estimate
generator.family = fbm
generator.hurst = 0.7
generator.n_steps = 512
bv.kind = indicator_interval
bv.a = 0.25
bv.b = 0.75
params.s = 0.6
params.theta = 0.65
params.p = 2
params.q = inf
params.beta = 0.35
params.r = 2
seeds = 1
""",
    "integrate": """
experiment = integrate
generator.family = fbm
generator.hurst = 0.8
generator.n_steps = 512
bv.kind = indicator_interval
bv.a = -0.5
bv.b = 0.5
params.gamma = 0.4
params.p = 2
params.delta = 0.7
params.q = 2
seeds = 1
""",
}


@pytest.mark.parametrize("name", sorted(SMALL_CONFIGS))
def test_each_experiment_runs(name, tmp_path):
    cfg = config_from_text(SMALL_CONFIGS[name])
    out = run_experiment(cfg, threads=1, out_dir=str(tmp_path / name))
    rows = (tmp_path / name / "results.csv").read_text().splitlines()
    assert len(rows) >= 2
    if name == "integrate":
        vh = (tmp_path / name / "verdicts.csv").read_text().splitlines()[0]
        assert vh == "case_id,hypothesis_pass,integral,ratio,refinement_delta"
    if name == "compose":
        assert (tmp_path / name / "composition_s1_r0.csv").exists()


def test_verify_suite_filters():
    results = run_checks("trivial_*", seed=0)
    assert results and all(r.passed for r in results)
    assert all(r.check_id.startswith("trivial_") for r in results)
    empty = run_checks("no_such_check_*", seed=0)
    assert empty == []
    table = render_table(empty)
    assert "warning_no_checks_matched" in table


def test_verify_suite_full_pass():
    # the whole named-check registry (oracles + invariants) at desk scale
    results = run_checks("*", seed=1)
    failed = [r.check_id for r in results if not r.passed]
    assert len(results) > 40
    assert not failed, failed


def test_verify_experiment_byte_identical(tmp_path):
    cfg = config_from_text(
        "experiment = verify\nparams.filter = trivial_*\nseeds = 1\n"
    )
    out1 = run_experiment(cfg, threads=1, out_dir=str(tmp_path / "v1"))
    out2 = run_experiment(cfg, threads=1, out_dir=str(tmp_path / "v2"))
    for name in ("verify.csv", "results.csv"):
        assert (tmp_path / "v1" / name).read_bytes() == (tmp_path / "v2" / name).read_bytes()


def test_fgn_cholesky_fallback_covariance():
    # the small-N fallback must carry the same exact fGn covariance
    from fracpath.pathgen import _fgn_autocov, _fgn_cholesky, stream

    import numpy as np

    rng = stream(123, 0)
    n, reps, hurst = 24, 3000, 0.8
    acc = np.zeros((n, n))
    for _ in range(reps):
        x = _fgn_cholesky(n, hurst, rng)
        acc += np.outer(x, x)
    emp = acc / reps
    r = _fgn_autocov(n, hurst)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    assert np.abs(emp - r[idx]).max() < 0.15


def test_oracle_corpus_roundtrip(tmp_path):
    f = tmp_path / "oracles.txt"
    write_oracle_file(f)
    loaded = load_oracle_file(f)
    built = {k: v for k, v, _ in build_oracles()}
    assert loaded == pytest.approx(built)
    packaged = load_oracle_file()
    for key, value in built.items():
        assert packaged[key] == pytest.approx(value, rel=1e-9), key


def test_cli_exit_codes(tmp_path, capsys):
    cfg_file = tmp_path / "b.cfg"
    cfg_file.write_text(BERMAN_CFG + f"output_dir = {tmp_path / 'out'}\n")
    assert main(["berman", "--config", str(cfg_file), "--threads", "2"]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text(BERMAN_CFG.replace("-0.3", "-0.9"))
    assert main(["berman", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("config_error = ")
    assert main(["occupation", "--config", str(cfg_file)]) == 2  # command/config mismatch
    assert main(["verify", "--filter", "trivial_restrict_*"]) == 0
    assert main(["oracle-build", "--out", str(tmp_path / "o.txt")]) == 0


def test_cli_single_seed_override(tmp_path):
    cfg_file = tmp_path / "b.cfg"
    cfg_file.write_text(BERMAN_CFG + f"output_dir = {tmp_path / 'o1'}\n")
    assert main(["berman", "--config", str(cfg_file), "--seed", "7"]) == 0
    rows = (tmp_path / "o1" / "results.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("7,")


def test_env_thread_default_does_not_change_bytes(tmp_path, monkeypatch):
    cfg_file = tmp_path / "b.cfg"
    cfg_file.write_text(BERMAN_CFG + f"output_dir = {tmp_path / 'env4'}\n")
    monkeypatch.setenv("FRACPATH_THREADS", "4")
    assert main(["berman", "--config", str(cfg_file)]) == 0
    monkeypatch.delenv("FRACPATH_THREADS")
    cfg_file.write_text(BERMAN_CFG + f"output_dir = {tmp_path / 'env1'}\n")
    assert main(["berman", "--config", str(cfg_file)]) == 0
    a = (tmp_path / "env4" / "results.csv").read_bytes()
    b = (tmp_path / "env1" / "results.csv").read_bytes()
    assert a == b
