"""Atomic file output: write to a temporary sibling, then rename into place."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path


def atomic_write(path, body, mode: str = "w") -> Path:
    """Call ``body(fh)`` on a temp file next to ``path`` and rename it over ``path``.

    Nothing is left at ``path`` if ``body`` raises. I/O failures surface as
    ``OSError`` carrying the path.
    """
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=parent)
    try:
        kw = {"encoding": "utf-8", "newline": ""} if "b" not in mode else {}
        with os.fdopen(fd, mode, **kw) as fh:
            body(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path
