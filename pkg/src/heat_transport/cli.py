from __future__ import annotations  # 型注釈の前方参照を許可して循環参照を避けるため

"""
CLI entrypoint for collision-model heat transport experiments.
"""

import argparse  # CLI引数を扱うため
import copy  # 設定の深いコピーに使うため
import logging  # ログレベルの切り替えに使うため
from pathlib import Path  # パスをOSに依存せず扱うため
import sys  # エラー出力に使うため

from .config import (  # 設定の読み込みと上書きに使うため
    ConfigError,
    ExperimentConfig,
    apply_config_update,
    config_from_mapping,
    load_config_document,
    parse_set_arguments,
)
from .diagnostics import build_execution_context, build_run_summary  # 構造化診断に使うため
from .log import configure_logging  # ログ出力の初期化
from .observables import quantum_discord  # 最適化付きの discord と比較するため
from .oracles import discord_grid_oracle, read_state_file  # oracle サブコマンド
from .outputs import emit_csv, write_run_summary_json  # 出力ファイル生成に使うため
from .paths import default_output_name, resolve_base_dir_from_config, resolve_output_path  # 出力先の解決
from .presets import PRESET_NAMES, preset_document  # 図のプリセット
from .sweep import run_sweep_detailed  # スイープ本体


def _apply_set_values(document: dict, raw_values: list[str] | None) -> dict:
    updated = copy.deepcopy(document)
    for key, value in parse_set_arguments(raw_values or []):
        apply_config_update(updated, key, value)
    return updated


def _build_experiment(document: dict, args: argparse.Namespace, *, context: str) -> ExperimentConfig:
    experiment = config_from_mapping(_apply_set_values(document, args.set_values), context=context)
    return experiment.with_run_overrides(
        tol=args.tol,
        max_rounds=args.max_rounds,
        per_time=True if args.per_time else None,
    )


def _run_experiment(
    experiment: ExperimentConfig,
    args: argparse.Namespace,
    *,
    base_dir: Path,
    command: str,
    config_path: Path | None,
    argv: list[str],
) -> int:
    result = run_sweep_detailed(experiment, threads=int(args.threads))
    out_path = resolve_output_path(base_dir, args.out, default_output_name(experiment.name))
    emit_csv(result.rows, out_path)
    print(f"wrote: {out_path}")
    if args.summary_out:
        summary_path = resolve_output_path(base_dir, args.summary_out, "out/run_summary.json")
        context = build_execution_context(config_path=config_path, command=command, argv=argv)
        write_run_summary_json(
            summary_path,
            build_run_summary(experiment, result, source=command, execution_context=context),
        )
        print(f"wrote: {summary_path}")
    if result.non_converged:
        print(f"non_converged: {len(result.non_converged)}")
    return 0


def run_from_config(config_path: Path, args: argparse.Namespace, argv: list[str]) -> int:
    """
    Run the sweep described by a YAML experiment document and write its CSV.
    """
    config_path = config_path.expanduser().resolve()
    document = load_config_document(config_path)  # 設定ファイルを読み込む
    experiment = _build_experiment(document, args, context="heat_transport.cli run")
    base_dir = resolve_base_dir_from_config(config_path)  # 相対パス解決の基準ディレクトリを取得する
    return _run_experiment(
        experiment,
        args,
        base_dir=base_dir,
        command="heat_transport.cli run",
        config_path=config_path,
        argv=argv,
    )


def figure_from_preset(name: str, args: argparse.Namespace, argv: list[str]) -> int:
    experiment = _build_experiment(preset_document(name), args, context=f"heat_transport.cli figure {name}")
    return _run_experiment(
        experiment,
        args,
        base_dir=Path.cwd(),
        command="heat_transport.cli figure",
        config_path=None,
        argv=argv,
    )


def oracle_discord(state_path: Path, grid_n: int) -> int:
    rho = read_state_file(state_path.expanduser())
    print(f"oracle_discord: {discord_grid_oracle(rho, grid_n=grid_n):.12g}")
    result = quantum_discord(rho)
    print(f"discord: {result.value:.12g}")
    print(f"mutual_information: {result.mutual_info:.12g}")
    return 0


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=str, default=None, help="CSV output path.")
    parser.add_argument("--per-time", action="store_true", help="Divide J_h by 3*tau (one round).")
    parser.add_argument("--tol", type=float, default=None, help="Steady-state trace-distance tolerance.")
    parser.add_argument("--max-rounds", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--set",
        dest="set_values",
        action="append",
        default=[],
        help="Override a dotted config key, e.g. --set model.gamma=0.2",
    )
    parser.add_argument("--summary-out", type=str, default=None, help="Optional run-summary JSON path.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heat_transport.cli")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run a sweep from an experiment YAML.")
    run_parser.add_argument("config", type=str, help="Path to experiment YAML.")
    _add_run_flags(run_parser)

    figure_parser = subparsers.add_parser("figure", help="Run a named figure preset.")
    figure_parser.add_argument("name", type=str, choices=PRESET_NAMES)
    _add_run_flags(figure_parser)

    oracle_parser = subparsers.add_parser("oracle", help="Brute-force reference values.")
    oracle_sub = oracle_parser.add_subparsers(dest="oracle_command", required=True)
    discord_parser = oracle_sub.add_parser("discord", help="Grid-search discord of a state file.")
    discord_parser.add_argument("state_file", type=str)
    discord_parser.add_argument("--grid-n", type=int, default=500)
    return parser


def main(argv: list[str] | None = None) -> int:  # CLIのメイン処理を実装する
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(raw_argv)
    configure_logging(logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING)

    try:
        if args.command == "run":
            return run_from_config(Path(args.config), args, raw_argv)
        if args.command == "figure":
            return figure_from_preset(str(args.name), args, raw_argv)
        if args.command == "oracle" and args.oracle_command == "discord":
            return oracle_discord(Path(args.state_file), int(args.grid_n))
    except ConfigError as exc:
        for issue_line in str(exc).splitlines():
            print(issue_line)
        raise SystemExit(2) from exc
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2) from exc
    return 1  # 未知のコマンドは異常終了として扱う


if __name__ == "__main__":  # 直接実行された場合のみCLIを起動する
    raise SystemExit(main())  # mainの戻り値を終了コードとして返す
