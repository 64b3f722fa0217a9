from pathlib import Path

from click.testing import CliRunner

from dressim.cli import main

PLANS = Path(__file__).parent.parent / "src/dressim/data/plans"


def test_replay_golden_passes():
    runner = CliRunner()
    result = runner.invoke(main, ["replay-golden"])
    assert result.exit_code == 0
    assert result.output.startswith("PASS")


def test_replay_golden_divergence_exit_code():
    runner = CliRunner()
    result = runner.invoke(main, ["replay-golden", "--timeout", "20"])
    assert result.exit_code == 1
    assert result.output.startswith("FAIL")


def test_run_writes_artifacts(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["run", "--plan", str(PLANS / "pain_trial_1.json"), "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    assert "trial 0: Aborted" in result.output
    assert (tmp_path / "pain_trial_1_000.jsonl").exists()
    assert (tmp_path / "pain_trial_1_summary.csv").exists()


def test_run_out_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("DRESSIM_OUT", str(tmp_path / "envout"))
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--plan", str(PLANS / "pain_trial_1.json")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "envout" / "pain_trial_1_000.jsonl").exists()


def test_run_bad_plan_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "scenario": {"version": 1, "bogus": 1}}')
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--plan", str(bad)])
    assert result.exit_code == 2
    assert "error" in result.output


def test_summarize_dir(tmp_path):
    runner = CliRunner()
    runner.invoke(
        main, ["run", "--plan", str(PLANS / "human_snag.json"), "--out", str(tmp_path)]
    )
    result = runner.invoke(main, ["summarize", "--in", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "snags=1" in result.output
    result = runner.invoke(main, ["summarize", "--in", str(tmp_path), "--csv"])
    assert result.exit_code == 0
    assert result.output.startswith("Trials,Snags,Pot. Snags")


def test_summarize_empty_dir(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["summarize", "--in", str(tmp_path)])
    assert result.exit_code == 2
