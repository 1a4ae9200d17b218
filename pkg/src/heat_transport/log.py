from __future__ import annotations

"""Logger factory shared by the engine, the sweep runner and the CLI."""

import logging

_ROOT_NAME = "heat_transport"
_FORMAT = "level=%(levelname)s logger=%(name)s %(message)s"
_configured = False


def configure_logging(level: int = logging.WARNING) -> None:
    global _configured
    root = logging.getLogger(_ROOT_NAME)
    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level)


def get_logger(name: str) -> logging.Logger:
    """Return a logger under the package namespace (``heat_transport.<name>``)."""
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{_ROOT_NAME}.{short}")
