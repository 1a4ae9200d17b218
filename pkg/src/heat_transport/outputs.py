from __future__ import annotations  # 型注釈の前方参照を許可し、循環参照を避けるため

"""
Output helpers for sweep results.
"""

import json  # JSON出力に使うため
import math  # 非有限値の判定に使うため
from pathlib import Path  # パスの操作をOS非依存で行うため
from typing import Any, Mapping, Sequence  # 型注釈のため

import pandas as pd  # CSV出力に使うため

from .sweep import RESULT_COLUMNS, ResultRow  # 行の型と列順を共有するため


def format_value(value: object) -> str:
    """12 significant digits for reals, true/false for flags, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    records = [{name: format_value(v) for name, v in row.as_record().items()} for row in rows]
    return pd.DataFrame(records, columns=list(RESULT_COLUMNS), dtype=str)


def emit_csv(rows: Sequence[ResultRow], destination: Path) -> Path:
    """Header plus one line per row, columns in ResultRow order."""
    if not rows:
        raise ValueError("emit_csv requires at least one row.")
    destination.parent.mkdir(parents=True, exist_ok=True)  # 出力先ディレクトリを作成する
    rows_to_frame(rows).to_csv(destination, index=False, lineterminator="\n")
    return destination


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Mapping):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_run_summary_json(path: Path, summary: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(_json_safe(summary), ensure_ascii=False, indent=2),
        encoding="utf-8",
    )
    return path
