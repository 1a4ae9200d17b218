from __future__ import annotations

"""Output-path resolution so CLI runs do not depend on the working directory."""

from pathlib import Path


def resolve_base_dir_from_config(config_path: Path) -> Path:
    """
    Directory that relative output paths of a config are resolved against.

    The nearest parent holding ``pyproject.toml`` wins; otherwise the
    config's own directory.
    """
    resolved = config_path.expanduser().resolve()
    for root in (resolved.parent, *resolved.parents):
        if (root / "pyproject.toml").is_file():
            return root
    return resolved.parent


def resolve_output_path(base_dir: Path, raw_path: str | Path | None, default: str) -> Path:
    path = Path(default) if raw_path is None else Path(raw_path).expanduser()
    return path if path.is_absolute() else (base_dir / path)


def default_output_name(label: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label) or "experiment"
    return f"out/{safe}.csv"
