from __future__ import annotations

"""
Experiment-document validation.

Documents are flattened to dotted key paths first; every issue names the
path it concerns. Unknown keys are errors so that typos in physics
parameters never fall back to defaults silently.
"""

from dataclasses import dataclass
import math
from typing import Iterable, Mapping

import numpy as np

from .model import CouplingForm, SimulationMode
from .tensor_algebra import InvalidStateError, check_density_matrix


@dataclass(frozen=True)
class ValidationIssue:
    level: str  # "warning" | "error"
    code: str
    path: str
    message: str


MODEL_KEYS = (
    "omega0",
    "omega1",
    "omega2",
    "delta",
    "gamma",
    "omega0_tau",
    "tau",
    "T1",
    "T2",
    "sys_coupling",
    "bath_coupling",
)
KNOWN_KEYS = {
    *(f"model.{key}" for key in MODEL_KEYS),
    "initial_state",
    "sweep.variable",
    "sweep.start",
    "sweep.stop",
    "sweep.points",
    "series",
    "run.modes",
    "run.outputs",
    "run.tol",
    "run.max_rounds",
    "run.quadrature_steps",
    "run.per_time",
    "name",
}
SWEEP_VARIABLES = ("delta", "gamma", "T1", "T2")
OUTPUT_NAMES = ("J_h", "W_sw", "trace_distance", "discord", "rectification", "J_h_correlation")
NAMED_STATES = ("ket11", "ket00", "maximally_mixed")

_POSITIVE_KEYS = ("omega0", "omega1", "omega2", "omega0_tau", "tau")
_TEMPERATURE_KEYS = ("T1", "T2")
_NON_NEGATIVE_KEYS = ("delta", "gamma")


def flatten_config(config: Mapping[str, object], prefix: str = "") -> dict[str, object]:
    """Nested mappings become dotted paths; lists and scalars are leaves."""
    flat: dict[str, object] = {}
    for raw_key, value in config.items():
        key = f"{prefix}{raw_key}"
        if isinstance(value, Mapping):
            nested = flatten_config(value, prefix=f"{key}.")
            for nested_key, nested_value in nested.items():
                if nested_key in flat:
                    raise ValueError(f"Duplicate key path: {nested_key}")
                flat[nested_key] = nested_value
        else:
            if key in flat:
                raise ValueError(f"Duplicate key path: {key}")
            flat[key] = value
    return flat


def _add_issue(
    issues: list[ValidationIssue],
    *,
    level: str,
    code: str,
    path: str,
    message: str,
) -> None:
    issues.append(
        ValidationIssue(
            level=level,
            code=code,
            path=path,
            message=message,
        )
    )


def as_real(value: object) -> float:
    """Strict numeric coercion: bools and non-numeric strings are rejected."""
    if isinstance(value, bool) or value is None:
        raise TypeError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.strip())
    raise TypeError(f"expected a number, got {type(value).__name__}")


def as_complex(value: object) -> complex:
    if isinstance(value, bool) or value is None:
        raise TypeError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(as_real(value[0]), as_real(value[1]))
    raise TypeError(f"expected a number, [re, im] pair or complex string, got {value!r}")


def matrix_from_entries(raw: object) -> np.ndarray:
    """4x4 nested list of numbers, [re, im] pairs or complex strings."""
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ValueError("initial_state matrix must have 4 rows.")
    rows = []
    for index, row in enumerate(raw):
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ValueError(f"initial_state row {index} must have 4 entries.")
        rows.append([as_complex(entry) for entry in row])
    return np.array(rows, dtype=complex)


def _validate_unknown_keys(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    for key in sorted(flat):
        if key not in KNOWN_KEYS:
            _add_issue(
                issues,
                level="error",
                code="unknown_key",
                path=key,
                message="Unknown key. Check for typos; see docs/config_schema.md.",
            )


def _check_model_value(key: str, value: object, path: str, issues: list[ValidationIssue]) -> None:
    if key in ("sys_coupling", "bath_coupling"):
        try:
            CouplingForm(str(value))
        except ValueError:
            allowed = ", ".join(form.value for form in CouplingForm)
            _add_issue(
                issues,
                level="error",
                code="invalid_coupling",
                path=path,
                message=f"Unknown coupling form {value!r}; expected one of {allowed}.",
            )
        return
    try:
        number = as_real(value)
    except (TypeError, ValueError):
        _add_issue(issues, level="error", code="invalid_number", path=path, message=f"Expected a number, got {value!r}.")
        return
    if math.isnan(number):
        _add_issue(issues, level="error", code="invalid_number", path=path, message="Value is NaN.")
    elif key in _TEMPERATURE_KEYS:
        if number <= 0.0:
            _add_issue(issues, level="error", code="non_positive", path=path, message=f"Temperature must be positive, got {number}.")
    elif key in _POSITIVE_KEYS:
        if number <= 0.0 or math.isinf(number):
            _add_issue(issues, level="error", code="non_positive", path=path, message=f"Must be positive and finite, got {number}.")
    elif key in _NON_NEGATIVE_KEYS:
        if number < 0.0 or math.isinf(number):
            _add_issue(issues, level="error", code="negative_value", path=path, message=f"Must be finite and non-negative, got {number}.")


def _validate_model(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    for key in MODEL_KEYS:
        path = f"model.{key}"
        if path in flat:
            _check_model_value(key, flat[path], path, issues)
    if "model.tau" in flat and "model.omega0_tau" in flat:
        _add_issue(
            issues,
            level="warning",
            code="tau_overrides_omega0_tau",
            path="model.tau/model.omega0_tau",
            message="Both tau and omega0_tau are set. model.tau is used.",
        )


def _validate_initial_state(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    if "initial_state" not in flat:
        return
    raw = flat["initial_state"]
    if isinstance(raw, str):
        if raw not in NAMED_STATES:
            _add_issue(
                issues,
                level="error",
                code="invalid_initial_state",
                path="initial_state",
                message=f"Unknown named state {raw!r}; expected one of {', '.join(NAMED_STATES)} or a 4x4 matrix.",
            )
        return
    try:
        matrix = matrix_from_entries(raw)
        check_density_matrix(matrix)
    except (TypeError, ValueError, InvalidStateError) as exc:
        _add_issue(
            issues,
            level="error",
            code="invalid_initial_state",
            path="initial_state",
            message=str(exc),
        )


def _validate_sweep(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    sweep_keys = [key for key in flat if key.startswith("sweep.")]
    if not sweep_keys:
        return
    variable = flat.get("sweep.variable")
    if variable is None:
        _add_issue(issues, level="error", code="missing_sweep_variable", path="sweep.variable", message="sweep.* keys require sweep.variable.")
        return
    if variable not in SWEEP_VARIABLES:
        _add_issue(
            issues,
            level="error",
            code="invalid_sweep_variable",
            path="sweep.variable",
            message=f"Sweep variable must be one of {', '.join(SWEEP_VARIABLES)}, got {variable!r}.",
        )
        return

    bounds: dict[str, float] = {}
    for key in ("start", "stop"):
        path = f"sweep.{key}"
        if path not in flat:
            _add_issue(issues, level="error", code="missing_sweep_range", path=path, message="Sweep range bound is required.")
            continue
        try:
            value = as_real(flat[path])
        except (TypeError, ValueError):
            _add_issue(issues, level="error", code="invalid_number", path=path, message=f"Expected a number, got {flat[path]!r}.")
            continue
        if not math.isfinite(value):
            _add_issue(issues, level="error", code="non_finite_range", path=path, message="Sweep range must be finite.")
            continue
        bounds[key] = value
        if variable in _TEMPERATURE_KEYS and value <= 0.0:
            _add_issue(issues, level="error", code="non_positive", path=path, message="Temperature sweep bounds must be positive.")
        elif variable in _NON_NEGATIVE_KEYS and value < 0.0:
            _add_issue(issues, level="error", code="negative_value", path=path, message=f"{variable} sweep bounds must be non-negative.")

    points = flat.get("sweep.points", 1)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        _add_issue(issues, level="error", code="invalid_sweep_points", path="sweep.points", message=f"sweep.points must be an integer >= 1, got {points!r}.")

    if f"model.{variable}" in flat:
        _add_issue(
            issues,
            level="warning",
            code="sweep_overrides_model",
            path=f"model.{variable}",
            message=f"model.{variable} is ignored because it is the sweep variable.",
        )


def _validate_series(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    if "series" not in flat:
        return
    series = flat["series"]
    if not isinstance(series, list) or not series:
        _add_issue(issues, level="error", code="invalid_series", path="series", message="series must be a non-empty list of mappings.")
        return
    variable = flat.get("sweep.variable")
    for index, entry in enumerate(series):
        path = f"series[{index}]"
        if entry is None:
            continue
        if not isinstance(entry, Mapping):
            _add_issue(issues, level="error", code="invalid_series_entry", path=path, message="Each series entry must be a mapping of model overrides.")
            continue
        for key, value in entry.items():
            if key not in MODEL_KEYS:
                _add_issue(issues, level="error", code="unknown_key", path=f"{path}.{key}", message="Series entries may only override model keys.")
                continue
            if key == variable:
                _add_issue(issues, level="warning", code="sweep_overrides_model", path=f"{path}.{key}", message=f"{key} is ignored because it is the sweep variable.")
            _check_model_value(key, value, f"{path}.{key}", issues)


def _validate_run(flat: Mapping[str, object], issues: list[ValidationIssue]) -> None:
    modes: list[str] = [mode.value for mode in SimulationMode]
    if "run.modes" in flat:
        raw = flat["run.modes"]
        if not isinstance(raw, list) or not raw:
            _add_issue(issues, level="error", code="invalid_modes", path="run.modes", message="run.modes must be a non-empty list.")
            modes = []
        else:
            modes = []
            for value in raw:
                try:
                    mode = SimulationMode(str(value)).value
                except ValueError:
                    _add_issue(issues, level="error", code="invalid_modes", path="run.modes", message=f"Unknown mode {value!r}; expected Full or LocalApprox.")
                    continue
                if mode in modes:
                    _add_issue(issues, level="error", code="duplicate_mode", path="run.modes", message=f"Mode {mode} listed twice.")
                    continue
                modes.append(mode)

    outputs: list[str] = ["J_h", "W_sw"]
    if "run.outputs" in flat:
        raw = flat["run.outputs"]
        if not isinstance(raw, list) or not raw:
            _add_issue(issues, level="error", code="invalid_outputs", path="run.outputs", message="run.outputs must be a non-empty list.")
            outputs = []
        else:
            outputs = [str(value) for value in raw]
            for value in outputs:
                if value not in OUTPUT_NAMES:
                    _add_issue(
                        issues,
                        level="error",
                        code="invalid_outputs",
                        path="run.outputs",
                        message=f"Unknown output {value!r}; expected a subset of {', '.join(OUTPUT_NAMES)}.",
                    )
    if "trace_distance" in outputs and len(modes) != 2:
        _add_issue(issues, level="error", code="trace_distance_needs_both_modes", path="run.outputs", message="trace_distance requires both Full and LocalApprox in run.modes.")
    for output in ("discord", "J_h_correlation"):
        if output in outputs and SimulationMode.FULL.value not in modes:
            _add_issue(issues, level="error", code=f"{output}_needs_full_mode", path="run.outputs", message=f"{output} is computed on the Full-mode steady state; add Full to run.modes.")

    if "run.tol" in flat:
        try:
            tol = as_real(flat["run.tol"])
        except (TypeError, ValueError):
            tol = float("nan")
        if not (tol > 0.0 and math.isfinite(tol)):
            _add_issue(issues, level="error", code="invalid_tol", path="run.tol", message="run.tol must be a positive finite number.")
    for key, minimum in (("run.max_rounds", 1), ("run.quadrature_steps", 2)):
        if key not in flat:
            continue
        value = flat[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            _add_issue(issues, level="error", code="invalid_integer", path=key, message=f"{key} must be an integer >= {minimum}, got {value!r}.")
        elif key == "run.quadrature_steps" and value % 2:
            _add_issue(issues, level="error", code="odd_quadrature_steps", path=key, message="Composite Simpson needs an even number of intervals.")
    if "run.per_time" in flat and not isinstance(flat["run.per_time"], bool):
        _add_issue(issues, level="error", code="invalid_flag", path="run.per_time", message="run.per_time must be true or false.")
    if "name" in flat and not isinstance(flat["name"], str):
        _add_issue(issues, level="error", code="invalid_name", path="name", message="name must be a string.")


def validate_config(config: Mapping[str, object]) -> list[ValidationIssue]:
    issues: list[ValidationIssue] = []
    try:
        flat = flatten_config(config)
    except ValueError as exc:
        _add_issue(issues, level="error", code="duplicate_key", path="", message=str(exc))
        return issues
    _validate_unknown_keys(flat, issues)
    _validate_model(flat, issues)
    _validate_initial_state(flat, issues)
    _validate_sweep(flat, issues)
    _validate_series(flat, issues)
    _validate_run(flat, issues)
    return issues


def has_validation_errors(issues: Iterable[ValidationIssue]) -> bool:
    return any(issue.level == "error" for issue in issues)


def format_validation_issues(
    issues: Iterable[ValidationIssue],
    *,
    prefix: str = "config_validation",
) -> list[str]:
    lines: list[str] = []
    for issue in issues:
        lines.append(
            f"{prefix}:{issue.level}: [{issue.code}] {issue.path} - {issue.message}"
        )
    return lines
