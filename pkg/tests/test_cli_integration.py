from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pandas as pd
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC_ROOT = REPO_ROOT / "src"
if str(SRC_ROOT) not in sys.path:
    sys.path.insert(0, str(SRC_ROOT))

from heat_transport.oracles import write_state_file  # noqa: E402
from heat_transport.sweep import RESULT_COLUMNS  # noqa: E402
from heat_transport.tensor_algebra import DensityMatrix  # noqa: E402


def _run_cli(args: list[str]) -> subprocess.CompletedProcess[str]:
    env = dict(os.environ)
    existing = env.get("PYTHONPATH")
    env["PYTHONPATH"] = str(SRC_ROOT) if not existing else f"{SRC_ROOT}{os.pathsep}{existing}"
    return subprocess.run(
        [sys.executable, "-m", "heat_transport.cli", *args],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
        check=False,
        env=env,
    )


def _read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def test_cli_run_writes_csv(tmp_path: Path) -> None:
    out_path = tmp_path / "single.csv"
    completed = _run_cli(["run", "configs/single-point.yaml", "--out", str(out_path)])

    assert completed.returncode == 0, completed.stderr
    assert f"wrote: {out_path}" in completed.stdout
    frame = _read_csv(out_path)
    assert list(frame.columns) == list(RESULT_COLUMNS)
    assert len(frame) == 1
    assert frame.loc[0, "full_converged"] == "true"
    assert frame.loc[0, "trace_distance"] != ""
    assert frame.loc[0, "discord"] == ""


def test_cli_run_applies_set_overrides_and_per_time(tmp_path: Path) -> None:
    base_path = tmp_path / "base.csv"
    scaled_path = tmp_path / "scaled.csv"
    base = _run_cli(["run", "configs/single-point.yaml", "--out", str(base_path), "--set", "model.gamma=0.2"])
    scaled = _run_cli(
        ["run", "configs/single-point.yaml", "--out", str(scaled_path), "--set", "model.gamma=0.2", "--per-time"]
    )

    assert base.returncode == 0, base.stderr
    assert scaled.returncode == 0, scaled.stderr
    base_row = _read_csv(base_path).loc[0]
    scaled_row = _read_csv(scaled_path).loc[0]
    assert float(base_row["gamma"]) == 0.2
    assert float(scaled_row["full_J_h_energy"]) == pytest.approx(float(base_row["full_J_h_energy"]) / 0.3, rel=1e-9)


def test_cli_figure_preset_with_reduced_sweep(tmp_path: Path) -> None:
    out_path = tmp_path / "fig2.csv"
    summary_path = tmp_path / "fig2.json"
    completed = _run_cli(
        [
            "figure",
            "fig2",
            "--set",
            "sweep.points=2",
            "--set",
            "series=[{gamma: 0.5}]",
            "--out",
            str(out_path),
            "--summary-out",
            str(summary_path),
        ]
    )

    assert completed.returncode == 0, completed.stderr
    frame = _read_csv(out_path)
    assert list(frame["sweep_value"]) == ["0", "2"]
    assert set(frame["gamma"]) == {"0.5"}
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert summary["meta"]["source"] == "heat_transport.cli figure"
    assert summary["summary"]["row_count"] == 2
    assert summary["experiment"]["name"] == "fig2"


def test_cli_rejects_invalid_config(tmp_path: Path) -> None:
    config_path = tmp_path / "bad.yaml"
    config_path.write_text("model:\n  gamme: 0.5\n", encoding="utf-8")
    completed = _run_cli(["run", str(config_path), "--out", str(tmp_path / "bad.csv")])

    assert completed.returncode == 2
    assert "[unknown_key] model.gamme" in completed.stdout
    assert not (tmp_path / "bad.csv").exists()


def test_cli_rejects_malformed_set_argument(tmp_path: Path) -> None:
    completed = _run_cli(["run", "configs/single-point.yaml", "--set", "model.gamma", "--out", str(tmp_path / "x.csv")])

    assert completed.returncode == 2
    assert "error:" in completed.stderr


def test_cli_oracle_discord_of_bell_state(tmp_path: Path) -> None:
    state_path = write_state_file(tmp_path / "bell.txt", DensityMatrix.from_ket([1, 0, 0, 1]))
    completed = _run_cli(["oracle", "discord", str(state_path), "--grid-n", "100"])

    assert completed.returncode == 0, completed.stderr
    values = dict(line.split(": ", 1) for line in completed.stdout.splitlines())
    assert float(values["oracle_discord"]) == pytest.approx(1.0, abs=1e-9)
    assert float(values["discord"]) == pytest.approx(1.0, abs=1e-9)
    assert float(values["mutual_information"]) == pytest.approx(2.0, abs=1e-9)
