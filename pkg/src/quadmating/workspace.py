"""Deterministic result cache keyed by operation and canonical arguments."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

SCHEMA_VERSION = 1
ENV_VAR = "QUADMATING_WORKSPACE"


def dumps_canonical(obj) -> str:
    """Stable JSON encoding: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


class Workspace:
    """File-backed cache; hits are byte-identical to recomputation."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, op: str, args: dict) -> Path:
        digest = hashlib.sha256(dumps_canonical(args).encode()).hexdigest()[:24]
        return self.root / f"{op}__{digest}.json"

    def get(self, op: str, args: dict) -> str | None:
        path = self._path(op, args)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
        except (ValueError, OSError):
            return None
        if entry.get("schema") != SCHEMA_VERSION or entry.get("op") != op:
            return None
        return entry["result"]

    def put(self, op: str, args: dict, result: str) -> None:
        entry = {"schema": SCHEMA_VERSION, "op": op, "args": args, "result": result}
        path = self._path(op, args)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(dumps_canonical(entry))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def default_workspace() -> Workspace | None:
    root = os.environ.get(ENV_VAR)
    return Workspace(root) if root else None
