from __future__ import annotations  # 型注釈の前方参照を許可するため

"""
Run-summary JSON: what was computed, from which inputs, with which numeric stack.
"""

from datetime import datetime, timezone  # 実行時刻の記録
import hashlib  # 入力と設定の指紋
from importlib import metadata  # 数値ライブラリのバージョン取得
import json  # 設定の正規化に使うため
from pathlib import Path  # 入力ファイルの扱い
import platform  # 実行環境の記録
import sys  # Python バージョンの記録
from typing import Any, Mapping, Sequence  # 型注釈

from .config import ExperimentConfig, experiment_to_document  # 検証済み設定を正規形に戻すため
from .sweep import SweepResult  # スイープ結果の型

_NUMERIC_PACKAGES = ("numpy", "scipy", "pandas", "pyyaml")


def config_hash(config: Mapping[str, Any]) -> str:
    """sha256 of the key-sorted JSON form; key order does not matter."""
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _input_record(path: Path) -> dict[str, Any]:
    record: dict[str, Any] = {"path": str(path), "exists": path.is_file()}
    if record["exists"]:
        with path.open("rb") as handle:
            record["sha256"] = hashlib.file_digest(handle, "sha256").hexdigest()
        record["size_bytes"] = path.stat().st_size
    return record


def _package_versions() -> dict[str, str | None]:
    versions: dict[str, str | None] = {}
    for name in _NUMERIC_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def build_execution_context(
    config_path: Path | None = None,
    command: str | None = None,
    argv: Sequence[str] | None = None,
) -> dict[str, Any]:
    """Command line, working directory, interpreter, numeric packages and input digests."""
    return {
        "command": command,
        "argv": [] if argv is None else list(argv),
        "cwd": str(Path.cwd().resolve()),
        "config_path": None if config_path is None else str(config_path.resolve()),
        "python_version": platform.python_version(),
        "implementation": sys.implementation.name,
        "platform": platform.platform(),
        "packages": _package_versions(),
        "input_files": [] if config_path is None else [_input_record(config_path)],
    }


def _undefined_rectification_rows(experiment: ExperimentConfig, result: SweepResult) -> list[int]:
    if "rectification" not in experiment.outputs:
        return []
    undefined: list[int] = []
    for row in result.rows:
        for prefix in ("full", "local"):  # 逆方向を計算したのに整流係数が空の行
            if getattr(row, f"{prefix}_J_h_reversed") is not None and getattr(row, f"{prefix}_rectification") is None:
                undefined.append(row.index)
                break
    return undefined


def build_run_summary(
    experiment: ExperimentConfig,
    result: SweepResult,
    source: str = "run",
    execution_context: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """
    meta (source, timestamp, hashes), the resolved experiment, counts and the
    list of steady-state runs that hit max_rounds.

    ``config_hash`` covers the document as written; ``resolved_config_hash``
    covers the validated experiment with defaults and --set overrides applied.
    """
    meta: dict[str, Any] = {
        "source": source,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config_hash": config_hash(experiment.source),
        "resolved_config_hash": config_hash(experiment_to_document(experiment)),
    }
    if execution_context is not None:
        meta["execution_context"] = dict(execution_context)

    return {
        "meta": meta,
        "experiment": {
            "name": experiment.name,
            "modes": [mode.value for mode in experiment.modes],
            "outputs": list(experiment.outputs),
            "sweep_variable": None if experiment.sweep is None else experiment.sweep.variable,
            "tol": experiment.tol,
            "max_rounds": experiment.max_rounds,
            "per_time": experiment.per_time,
        },
        "summary": {
            "row_count": len(result.rows),
            "series_count": len(experiment.series),
            "point_count": len(experiment.sweep_values()),
            "non_converged_count": len(result.non_converged),
            "undefined_rectification_rows": _undefined_rectification_rows(experiment, result),
        },
        "non_converged": list(result.non_converged),
    }
