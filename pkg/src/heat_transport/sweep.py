from __future__ import annotations  # 型注釈の前方参照を許可し、循環参照を避けるため

"""
Run an ExperimentConfig over its series and sweep points.
"""

from concurrent.futures import ThreadPoolExecutor  # 独立なスイープ点を並列に評価するため
from dataclasses import dataclass, fields  # 行データを構造化するため

from .collision_engine import (  # 定常状態と相関積分を共通ロジックで計算するため
    SteadyStateReport,
    classify_work_ratio,
    heat_current_correlation,
    run_to_steady_state,
)
from .config import ExperimentConfig  # 実験設定の型
from .log import get_logger  # 点ごとの進捗を記録するため
from .model import ModelParams, SimulationMode  # モデルパラメータの型
from .observables import (  # 状態比較の指標
    UndefinedRectificationError,
    quantum_discord,
    rectification_factor,
    trace_distance,
)

logger = get_logger(__name__)


@dataclass(frozen=True)  # 1行分の結果を不変で扱うため
class ResultRow:  # CSV の1行
    """
    One (series, sweep point) result.

    Units
    - J_h_*, W_sw, J_h_correlation, J_h_reversed: energy per round, or per unit time
      when the experiment sets per_time (divided by 3 tau)
    - trace_distance: [0, 1]; discord: bits
    - None marks a quantity that was not requested or is undefined (empty CSV field)
    """

    index: int  # 出力順の通し番号
    series: int  # 系列番号
    point: int  # スイープ点番号
    sweep_variable: str | None  # スイープ変数名
    sweep_value: float | None  # スイープ値
    omega0: float
    omega1: float
    omega2: float
    delta: float
    gamma: float
    tau: float
    T1: float
    T2: float
    sys_coupling: str
    bath_coupling: str
    full_J_h_energy: float | None = None
    full_J_h_ancilla: float | None = None
    full_W_sw: float | None = None
    full_work_class: str | None = None
    full_rounds_used: int | None = None
    full_converged: bool | None = None
    local_J_h_energy: float | None = None
    local_J_h_ancilla: float | None = None
    local_W_sw: float | None = None
    local_work_class: str | None = None
    local_rounds_used: int | None = None
    local_converged: bool | None = None
    trace_distance: float | None = None
    discord: float | None = None
    full_J_h_correlation: float | None = None
    full_J_h_reversed: float | None = None
    full_rectification: float | None = None
    local_J_h_reversed: float | None = None
    local_rectification: float | None = None

    def as_record(self) -> dict[str, object]:
        return {name: getattr(self, name) for name in RESULT_COLUMNS}


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))

_PREFIX = {SimulationMode.FULL: "full", SimulationMode.LOCAL_APPROX: "local"}


@dataclass(frozen=True)
class SweepTask:
    index: int
    series: int
    point: int
    value: float | None


def sweep_tasks(experiment: ExperimentConfig) -> list[SweepTask]:
    """Series-major enumeration of (series, point) pairs."""
    tasks: list[SweepTask] = []
    values = experiment.sweep_values()
    for series_index in range(len(experiment.series)):
        for point_index, value in enumerate(values):
            tasks.append(SweepTask(index=len(tasks), series=series_index, point=point_index, value=value))
    return tasks


def _mode_columns(
    experiment: ExperimentConfig,
    params: ModelParams,
    report: SteadyStateReport,
    scale: float,
) -> dict[str, object]:
    prefix = _PREFIX[params.mode]
    columns: dict[str, object] = {
        f"{prefix}_rounds_used": report.rounds_used,
        f"{prefix}_converged": report.converged,
    }
    if "J_h" in experiment.outputs:
        columns[f"{prefix}_J_h_energy"] = report.J_h_energy * scale
        columns[f"{prefix}_J_h_ancilla"] = report.J_h_ancilla * scale
    if "W_sw" in experiment.outputs:
        columns[f"{prefix}_W_sw"] = report.W_sw
        ratio = abs(report.W_sw) / abs(report.J_h_energy) if report.J_h_energy != 0.0 else None
        columns[f"{prefix}_work_class"] = classify_work_ratio(ratio)
    return columns


def _rectification_columns(
    experiment: ExperimentConfig,
    params: ModelParams,
    forward: SteadyStateReport,
    scale: float,
    task: SweepTask,
) -> tuple[dict[str, object], list[SteadyStateReport]]:
    prefix = _PREFIX[params.mode]
    backward = run_to_steady_state(
        experiment.initial_state,
        params.reversed_temperatures(),
        tol=experiment.tol,
        max_rounds=experiment.max_rounds,
    )
    columns: dict[str, object] = {f"{prefix}_J_h_reversed": backward.J_h_energy * scale}
    try:
        columns[f"{prefix}_rectification"] = rectification_factor(forward.J_h_energy, backward.J_h_energy)
    except UndefinedRectificationError:
        logger.info("event=rectification_undefined index=%d mode=%s", task.index, params.mode.value)
    return columns, [backward]


def evaluate_point(experiment: ExperimentConfig, task: SweepTask) -> tuple[ResultRow, list[tuple[str, SteadyStateReport]]]:
    """
    Steady states and requested observables of one sweep point.

    Returns the row and the (label, report) pairs of every steady-state run.
    """
    base = experiment.params_for(task.series, task.value)
    scale = 1.0 / (3.0 * base.tau) if experiment.per_time else 1.0  # 1ラウンドは 3 tau
    columns: dict[str, object] = {}
    reports: dict[SimulationMode, SteadyStateReport] = {}
    runs: list[tuple[str, SteadyStateReport]] = []

    for mode in experiment.modes:
        params = base.with_mode(mode)
        report = run_to_steady_state(
            experiment.initial_state,
            params,
            tol=experiment.tol,
            max_rounds=experiment.max_rounds,
        )
        reports[mode] = report
        runs.append((mode.value, report))
        columns.update(_mode_columns(experiment, params, report, scale))
        if "rectification" in experiment.outputs:
            extra, backward = _rectification_columns(experiment, params, report, scale, task)
            columns.update(extra)
            runs.extend((f"{mode.value}/reversed", r) for r in backward)

    full = reports.get(SimulationMode.FULL)
    local = reports.get(SimulationMode.LOCAL_APPROX)
    if "trace_distance" in experiment.outputs and full is not None and local is not None:
        columns["trace_distance"] = trace_distance(full.steady_rho, local.steady_rho)
    if "discord" in experiment.outputs and full is not None:
        columns["discord"] = quantum_discord(full.steady_rho).value
    if "J_h_correlation" in experiment.outputs and full is not None:
        columns["full_J_h_correlation"] = scale * heat_current_correlation(
            base.with_mode(SimulationMode.FULL),
            full.steady_rho,
            quadrature_steps=experiment.quadrature_steps,
        )

    row = ResultRow(
        index=task.index,
        series=task.series,
        point=task.point,
        sweep_variable=experiment.sweep.variable if experiment.sweep is not None else None,
        sweep_value=task.value,
        omega0=base.omega0,
        omega1=base.omega1,
        omega2=base.omega2,
        delta=base.delta,
        gamma=base.gamma,
        tau=base.tau,
        T1=base.T1,
        T2=base.T2,
        sys_coupling=base.sys_coupling.value,
        bath_coupling=base.bath_coupling.value,
        **columns,
    )
    logger.info(
        "event=point_done index=%d series=%d point=%d converged=%s",
        task.index,
        task.series,
        task.point,
        all(r.converged for _, r in runs),
    )
    return row, runs


@dataclass(frozen=True)
class SweepResult:
    rows: list[ResultRow]
    non_converged: list[dict[str, object]]  # {"index", "run", "rounds_used", "last_step_distance"}


def run_sweep_detailed(experiment: ExperimentConfig, threads: int = 1) -> SweepResult:
    """run_sweep plus the list of steady-state runs that did not converge."""
    if int(threads) < 1:
        raise ValueError(f"threads must be at least 1, got {threads}.")
    tasks = sweep_tasks(experiment)

    def _evaluate(task: SweepTask) -> tuple[ResultRow, list[tuple[str, SteadyStateReport]]]:
        return evaluate_point(experiment, task)

    if int(threads) == 1:
        results = [_evaluate(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(_evaluate, tasks))  # map は入力順を保つ

    rows: list[ResultRow] = []
    non_converged: list[dict[str, object]] = []
    for row, runs in results:
        rows.append(row)
        for label, report in runs:
            if not report.converged:
                non_converged.append(
                    {
                        "index": row.index,
                        "run": label,
                        "rounds_used": report.rounds_used,
                        "last_step_distance": report.last_step_distance,
                    }
                )
    return SweepResult(rows=rows, non_converged=non_converged)


def run_sweep(experiment: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """
    One ResultRow per (series, sweep point), ordered by series then point.

    Non-converged steady states are recorded in the row's *_converged column;
    the sweep always continues.
    """
    return run_sweep_detailed(experiment, threads=threads).rows
