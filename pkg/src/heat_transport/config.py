from __future__ import annotations  # 型注釈の前方参照を許可し、循環参照を避けるため

"""
Experiment configuration: YAML documents -> validated ExperimentConfig.

Units
- all energies and temperatures in units of omega0; tau defaults to omega0_tau / omega0
"""

from dataclasses import dataclass, field, replace  # 設定構造を明確にするため
from pathlib import Path  # ファイルパスを扱うため
from typing import Mapping, Sequence  # 設定の型を注釈するため

import numpy as np  # スイープ点の生成に使うため
import yaml  # YAML設定を読み込むため

from .model import CouplingForm, ModelParams, SimulationMode  # 物理パラメータの型を共有するため
from .tensor_algebra import DensityMatrix  # 初期状態の型
from .validation import (  # 検証ロジックを共通化するため
    MODEL_KEYS,
    ValidationIssue,
    as_real,
    flatten_config,
    format_validation_issues,
    has_validation_errors,
    matrix_from_entries,
    validate_config,
)

DEFAULT_MODEL: dict[str, object] = {  # モデルのデフォルト値
    "omega0": 1.0,
    "omega1": 1.0,
    "omega2": 1.0,
    "delta": 0.5,
    "gamma": 0.5,
    "omega0_tau": 0.1,
    "T1": 5.0,
    "T2": 1.0,
    "sys_coupling": CouplingForm.XX_YY.value,
    "bath_coupling": CouplingForm.XX_YY.value,
}
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ROUNDS = 200_000
DEFAULT_QUADRATURE_STEPS = 200


class ConfigError(ValueError):
    """Raised when an experiment document has error-level validation issues."""

    def __init__(self, issues: Sequence[ValidationIssue], context: str = "config_validation") -> None:
        self.issues = list(issues)
        lines = format_validation_issues(self.issues, prefix=context)
        super().__init__("\n".join(lines) if lines else "configuration validation failed.")


@dataclass(frozen=True)  # スイープ範囲を不変で扱う
class SweepSpec:
    """
    Linear sweep of one model parameter.

    Units
    - start/stop: same unit as the swept parameter (omega0 units)
    - points: count (1 gives the start value only)
    """

    variable: str  # delta / gamma / T1 / T2
    start: float  # 開始値
    stop: float  # 終了値
    points: int  # 点数

    def values(self) -> list[float]:
        if self.points == 1:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


@dataclass(frozen=True)  # 実験設定をまとめて扱う
class ExperimentConfig:
    """
    Fully validated experiment.

    ``model`` holds the resolved base parameters (without the sweep variable
    applied); ``series`` holds per-curve overrides of model keys.
    """

    name: str  # ラベル
    model: Mapping[str, object]  # デフォルト補完済みのモデル設定
    initial_state: DensityMatrix  # 初期状態
    initial_state_label: str  # 名前付き状態名または "matrix"
    sweep: SweepSpec | None  # スイープ（無ければ1点）
    series: tuple[Mapping[str, object], ...] = ({},)  # 系列ごとの上書き
    modes: tuple[SimulationMode, ...] = (SimulationMode.FULL, SimulationMode.LOCAL_APPROX)
    outputs: tuple[str, ...] = ("J_h", "W_sw")
    tol: float = DEFAULT_TOL
    max_rounds: int = DEFAULT_MAX_ROUNDS
    quadrature_steps: int = DEFAULT_QUADRATURE_STEPS
    per_time: bool = False
    source: Mapping[str, object] = field(default_factory=dict)  # 検証前の元文書

    def sweep_values(self) -> list[float | None]:
        return self.sweep.values() if self.sweep is not None else [None]

    def params_for(self, series_index: int, value: float | None = None) -> ModelParams:
        """ModelParams (mode Full) for one series at one sweep value."""
        merged = dict(self.model)
        overrides = dict(self.series[series_index])
        if "omega0_tau" in overrides and "tau" not in overrides:
            merged.pop("tau", None)
        merged.update(overrides)
        if self.sweep is not None and value is not None:
            merged[self.sweep.variable] = value
        return build_model_params(merged)

    def with_run_overrides(
        self,
        *,
        tol: float | None = None,
        max_rounds: int | None = None,
        per_time: bool | None = None,
    ) -> ExperimentConfig:
        updated = self
        if tol is not None:
            if not tol > 0.0:
                raise ValueError(f"tol must be positive, got {tol}.")
            updated = replace(updated, tol=float(tol))
        if max_rounds is not None:
            if int(max_rounds) < 1:
                raise ValueError(f"max_rounds must be at least 1, got {max_rounds}.")
            updated = replace(updated, max_rounds=int(max_rounds))
        if per_time is not None:
            updated = replace(updated, per_time=bool(per_time))
        return updated


def build_model_params(model: Mapping[str, object]) -> ModelParams:
    omega0 = as_real(model.get("omega0", DEFAULT_MODEL["omega0"]))
    if "tau" in model:
        tau = as_real(model["tau"])
    else:
        tau = as_real(model.get("omega0_tau", DEFAULT_MODEL["omega0_tau"])) / omega0  # omega0*tau から tau を決める
    return ModelParams(
        omega0=omega0,
        omega1=as_real(model.get("omega1", DEFAULT_MODEL["omega1"])),
        omega2=as_real(model.get("omega2", DEFAULT_MODEL["omega2"])),
        delta=as_real(model.get("delta", DEFAULT_MODEL["delta"])),
        gamma=as_real(model.get("gamma", DEFAULT_MODEL["gamma"])),
        tau=tau,
        T1=as_real(model.get("T1", DEFAULT_MODEL["T1"])),
        T2=as_real(model.get("T2", DEFAULT_MODEL["T2"])),
        sys_coupling=CouplingForm(str(model.get("sys_coupling", DEFAULT_MODEL["sys_coupling"]))),
        bath_coupling=CouplingForm(str(model.get("bath_coupling", DEFAULT_MODEL["bath_coupling"]))),
    )


def named_initial_state(name: str) -> DensityMatrix:
    """ket11 (both ground), ket00 (both excited) or maximally_mixed."""
    if name == "ket11":
        return DensityMatrix.from_ket([0, 0, 0, 1])
    if name == "ket00":
        return DensityMatrix.from_ket([1, 0, 0, 0])
    if name == "maximally_mixed":
        return DensityMatrix.maximally_mixed(4)
    raise ValueError(f"Unknown named state: {name}")


def _initial_state(raw: object) -> tuple[DensityMatrix, str]:
    if isinstance(raw, str):
        return named_initial_state(raw), raw
    return DensityMatrix(matrix_from_entries(raw)), "matrix"


def config_from_mapping(config: Mapping[str, object] | None, *, context: str = "config_validation") -> ExperimentConfig:
    """Validate ``config`` and fill defaults; raise ConfigError on any error-level issue."""
    document: Mapping[str, object] = config or {}
    if not isinstance(document, Mapping):
        raise ConfigError(
            [ValidationIssue(level="error", code="invalid_document", path="", message="Experiment document must be a mapping.")],
            context=context,
        )
    issues = validate_config(document)
    if has_validation_errors(issues):
        raise ConfigError(issues, context=context)
    flat = flatten_config(document)

    model: dict[str, object] = dict(DEFAULT_MODEL)
    for key in MODEL_KEYS:
        path = f"model.{key}"
        if path in flat:
            model[key] = flat[path]

    sweep = None
    if "sweep.variable" in flat:
        sweep = SweepSpec(
            variable=str(flat["sweep.variable"]),
            start=as_real(flat["sweep.start"]),
            stop=as_real(flat["sweep.stop"]),
            points=int(flat.get("sweep.points", 1)),
        )

    raw_series = flat.get("series") or [{}]
    series = tuple(dict(entry or {}) for entry in raw_series)
    modes = tuple(SimulationMode(str(m)) for m in flat.get("run.modes", [m.value for m in SimulationMode]))
    initial_state, label = _initial_state(flat.get("initial_state", "ket11"))

    experiment = ExperimentConfig(
        name=str(flat.get("name", "experiment")),
        model=model,
        initial_state=initial_state,
        initial_state_label=label,
        sweep=sweep,
        series=series,
        modes=modes,
        outputs=tuple(str(o) for o in flat.get("run.outputs", ["J_h", "W_sw"])),
        tol=as_real(flat.get("run.tol", DEFAULT_TOL)),
        max_rounds=int(flat.get("run.max_rounds", DEFAULT_MAX_ROUNDS)),
        quadrature_steps=int(flat.get("run.quadrature_steps", DEFAULT_QUADRATURE_STEPS)),
        per_time=bool(flat.get("run.per_time", False)),
        source=dict(document),
    )
    for index in range(len(series)):  # 系列ごとのパラメータが構築できることを確認する
        for value in experiment.sweep_values():
            experiment.params_for(index, value)
    return experiment


def parse_config(text: str, *, context: str = "config_validation") -> ExperimentConfig:
    """Parse a YAML experiment document."""
    try:
        document = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(
            [ValidationIssue(level="error", code="yaml_error", path="", message=str(exc))],
            context=context,
        ) from exc
    return config_from_mapping(document, context=context)


def load_config_document(path: Path) -> dict:
    document = yaml.safe_load(path.read_text(encoding="utf-8"))
    return document if document is not None else {}


def apply_config_update(config: dict, dotted_key: str, value: object) -> object:
    """Set ``dotted_key`` in a nested document and return the previous value."""
    keys = [part for part in dotted_key.split(".") if part]
    if not keys:
        raise ValueError("Invalid key path for --set.")
    cursor = config
    for key in keys[:-1]:
        if key not in cursor or not isinstance(cursor[key], dict):
            cursor[key] = {}
        cursor = cursor[key]
    previous = cursor.get(keys[-1])
    cursor[keys[-1]] = value
    return previous


def parse_set_arguments(raw_values: Sequence[str]) -> list[tuple[str, object]]:
    updates: list[tuple[str, object]] = []
    for raw in raw_values:
        if "=" not in raw:
            raise ValueError(f"Invalid --set value (expected key=value): {raw}")
        key, value_text = raw.split("=", 1)
        updates.append((key.strip(), yaml.safe_load(value_text)))
    return updates


def experiment_to_document(experiment: ExperimentConfig) -> dict:
    """Nested YAML-ready document that re-validates to ``experiment``."""
    document: dict[str, object] = {
        "name": experiment.name,
        "model": {
            key: value
            for key, value in experiment.model.items()
            if not (key == "omega0_tau" and "tau" in experiment.model)
        },
        "run": {
            "modes": [mode.value for mode in experiment.modes],
            "outputs": list(experiment.outputs),
            "tol": experiment.tol,
            "max_rounds": experiment.max_rounds,
            "quadrature_steps": experiment.quadrature_steps,
            "per_time": experiment.per_time,
        },
        "series": [dict(entry) for entry in experiment.series],
    }
    if experiment.initial_state_label == "matrix":
        document["initial_state"] = [
            [[float(entry.real), float(entry.imag)] for entry in row]
            for row in experiment.initial_state.matrix
        ]
    else:
        document["initial_state"] = experiment.initial_state_label
    if experiment.sweep is not None:
        document["sweep"] = {
            "variable": experiment.sweep.variable,
            "start": experiment.sweep.start,
            "stop": experiment.sweep.stop,
            "points": experiment.sweep.points,
        }
        document["model"].pop(experiment.sweep.variable, None)
    return document
