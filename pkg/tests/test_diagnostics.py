from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC_ROOT = REPO_ROOT / "src"
if str(SRC_ROOT) not in sys.path:
    sys.path.insert(0, str(SRC_ROOT))

from heat_transport.config import config_from_mapping  # noqa: E402
from heat_transport.diagnostics import (  # noqa: E402
    build_execution_context,
    build_run_summary,
    config_hash,
)
from heat_transport.sweep import ResultRow, SweepResult  # noqa: E402


def _row(index: int, **columns: object) -> ResultRow:
    return ResultRow(
        index=index,
        series=0,
        point=index,
        sweep_variable="delta",
        sweep_value=float(index),
        omega0=1.0,
        omega1=2.0,
        omega2=1.0,
        delta=float(index),
        gamma=0.3,
        tau=0.1,
        T1=10.0,
        T2=0.1,
        sys_coupling="ZZ",
        bath_coupling="XX",
        **columns,
    )


def test_config_hash_ignores_key_order() -> None:
    a = {"model": {"gamma": 0.5, "T1": 5.0}, "name": "x"}
    b = {"name": "x", "model": {"T1": 5.0, "gamma": 0.5}}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({"name": "y"})
    assert len(config_hash(a)) == 64


def test_execution_context_records_input_digest(tmp_path: Path) -> None:
    config_path = tmp_path / "exp.yaml"
    config_path.write_text("name: exp\n", encoding="utf-8")
    context = build_execution_context(config_path=config_path, command="run", argv=["run", str(config_path)])
    assert context["command"] == "run"
    assert context["argv"] == ["run", str(config_path)]
    assert context["input_files"][0]["exists"] is True
    assert context["input_files"][0]["size_bytes"] == len("name: exp\n")
    assert context["packages"]["numpy"] is not None

    missing = build_execution_context(config_path=tmp_path / "missing.yaml")
    assert missing["input_files"][0]["exists"] is False
    assert build_execution_context()["input_files"] == []


def test_run_summary_counts_and_undefined_rectification() -> None:
    experiment = config_from_mapping(
        {
            "name": "diode",
            "sweep": {"variable": "delta", "start": 0.0, "stop": 1.0, "points": 2},
            "run": {"modes": ["Full"], "outputs": ["J_h", "rectification"]},
        }
    )
    rows = [
        _row(0, full_J_h_energy=0.0, full_J_h_reversed=0.0, full_rectification=None),
        _row(1, full_J_h_energy=0.01, full_J_h_reversed=-0.0001, full_rectification=0.99),
    ]
    non_converged = [{"index": 1, "run": "Full/reversed", "rounds_used": 10, "last_step_distance": 1e-3}]
    summary = build_run_summary(experiment, SweepResult(rows=rows, non_converged=non_converged), source="test")

    assert summary["meta"]["source"] == "test"
    assert summary["meta"]["config_hash"] == config_hash(experiment.source)
    assert len(summary["meta"]["resolved_config_hash"]) == 64
    assert "execution_context" not in summary["meta"]
    assert summary["experiment"]["modes"] == ["Full"]
    assert summary["experiment"]["sweep_variable"] == "delta"
    assert summary["summary"] == {
        "row_count": 2,
        "series_count": 1,
        "point_count": 2,
        "non_converged_count": 1,
        "undefined_rectification_rows": [0],
    }
    assert summary["non_converged"] == non_converged
