from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC_ROOT = REPO_ROOT / "src"
if str(SRC_ROOT) not in sys.path:
    sys.path.insert(0, str(SRC_ROOT))

from heat_transport.config import (  # noqa: E402
    ConfigError,
    SweepSpec,
    apply_config_update,
    config_from_mapping,
    experiment_to_document,
    load_config_document,
    parse_config,
    parse_set_arguments,
)
from heat_transport.model import CouplingForm, SimulationMode  # noqa: E402


def test_empty_document_uses_defaults() -> None:
    experiment = parse_config("")
    params = experiment.params_for(0)
    assert (params.omega0, params.omega1, params.omega2) == (1.0, 1.0, 1.0)
    assert params.tau == pytest.approx(0.1)
    assert params.mode is SimulationMode.FULL
    assert experiment.initial_state_label == "ket11"
    np.testing.assert_allclose(experiment.initial_state.matrix, np.diag([0, 0, 0, 1]))
    assert experiment.modes == (SimulationMode.FULL, SimulationMode.LOCAL_APPROX)
    assert experiment.sweep_values() == [None]


def test_tau_follows_omega0_tau_and_omega0() -> None:
    experiment = parse_config("model:\n  omega0: 2.0\n  omega0_tau: 0.1\n")
    assert experiment.params_for(0).tau == pytest.approx(0.05)
    experiment = parse_config("model:\n  tau: 0.3\n  omega0_tau: 0.1\n")
    assert experiment.params_for(0).tau == pytest.approx(0.3)


def test_series_override_of_omega0_tau_replaces_explicit_tau() -> None:
    experiment = config_from_mapping({"model": {"tau": 0.3}, "series": [{}, {"omega0_tau": 0.2}]})
    assert experiment.params_for(0).tau == pytest.approx(0.3)
    assert experiment.params_for(1).tau == pytest.approx(0.2)


def test_sweep_value_overrides_model_and_series() -> None:
    experiment = config_from_mapping(
        {
            "model": {"gamma": 0.3, "sys_coupling": "ZZ", "bath_coupling": "XX"},
            "sweep": {"variable": "T2", "start": 1.0, "stop": 3.0, "points": 3},
            "series": [{"gamma": 0.8}],
        }
    )
    assert experiment.sweep_values() == [1.0, 2.0, 3.0]
    params = experiment.params_for(0, 2.0)
    assert params.T2 == 2.0
    assert params.gamma == 0.8
    assert params.sys_coupling is CouplingForm.ZZ


def test_single_point_sweep_returns_start() -> None:
    assert SweepSpec(variable="delta", start=0.4, stop=2.0, points=1).values() == [0.4]


def test_config_error_carries_issues() -> None:
    with pytest.raises(ConfigError) as excinfo:
        parse_config("model:\n  T1: -1\n", context="ctx")
    assert [issue.code for issue in excinfo.value.issues] == ["non_positive"]
    assert str(excinfo.value).startswith("ctx:error: [non_positive] model.T1")


def test_yaml_syntax_error_is_reported_as_issue() -> None:
    with pytest.raises(ConfigError) as excinfo:
        parse_config("model: [unclosed\n")
    assert excinfo.value.issues[0].code == "yaml_error"


def test_non_mapping_document_is_rejected() -> None:
    with pytest.raises(ConfigError):
        config_from_mapping(["not", "a", "mapping"])  # type: ignore[arg-type]


def test_with_run_overrides() -> None:
    experiment = parse_config("run:\n  tol: 1.0e-8\n")
    updated = experiment.with_run_overrides(tol=1e-11, max_rounds=50, per_time=True)
    assert (updated.tol, updated.max_rounds, updated.per_time) == (1e-11, 50, True)
    assert experiment.tol == 1e-8
    with pytest.raises(ValueError):
        experiment.with_run_overrides(tol=0.0)
    with pytest.raises(ValueError):
        experiment.with_run_overrides(max_rounds=0)


def test_set_arguments_parse_yaml_values() -> None:
    updates = parse_set_arguments(["model.gamma=0.2", "run.modes=[Full]", "name=demo"])
    assert updates == [("model.gamma", 0.2), ("run.modes", ["Full"]), ("name", "demo")]
    with pytest.raises(ValueError):
        parse_set_arguments(["model.gamma"])


def test_apply_config_update_returns_previous_value() -> None:
    document = {"model": {"gamma": 0.5}}
    assert apply_config_update(document, "model.gamma", 0.2) == 0.5
    assert apply_config_update(document, "sweep.points", 4) is None
    assert document == {"model": {"gamma": 0.2}, "sweep": {"points": 4}}
    with pytest.raises(ValueError):
        apply_config_update(document, "..", 1)


def test_experiment_document_revalidates_to_same_parameters() -> None:
    experiment = config_from_mapping(
        {
            "name": "roundtrip",
            "initial_state": [[0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
            "model": {"tau": 0.2, "omega1": 2.0},
            "sweep": {"variable": "gamma", "start": 0.1, "stop": 0.3, "points": 3},
            "run": {"modes": ["Full"], "outputs": ["J_h", "discord"]},
        }
    )
    again = config_from_mapping(experiment_to_document(experiment))
    for value in experiment.sweep_values():
        assert again.params_for(0, value) == experiment.params_for(0, value)
    assert again.modes == experiment.modes
    assert again.outputs == experiment.outputs
    np.testing.assert_array_equal(again.initial_state.matrix, experiment.initial_state.matrix)


@pytest.mark.parametrize(
    "name",
    ["resonant-delta-sweep.yaml", "offresonant-rectification.yaml", "single-point.yaml"],
)
def test_shipped_configs_validate(name: str) -> None:
    document = load_config_document(REPO_ROOT / "configs" / name)
    experiment = config_from_mapping(document)
    assert experiment.name == name.removesuffix(".yaml")
