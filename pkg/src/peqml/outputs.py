"""Atomic CSV/JSON writers and output-directory resolution."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

OUTPUT_ENV = "PEQML_OUTPUT_DIR"


def resolve_output_dir(cli_value: str | None, config_value: str | None) -> Path:
    """Command line, then $PEQML_OUTPUT_DIR, then the config, then ./results."""
    for value in (cli_value, os.environ.get(OUTPUT_ENV), config_value):
        if value:
            return Path(value)
    return Path("results")


class OutputDir:
    """Writes files below one root, each via a temporary file and a rename."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, name: str) -> Path:
        target = (self.root / name).resolve()
        root = self.root.resolve()
        if root != target and root not in target.parents:
            raise ValueError(f"refusing to write {name!r} outside {self.root}")
        return target

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    def write_json(self, name: str, data) -> Path:
        return self.write_text(name, json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")

    def write_rows(self, name: str, rows: Iterable[Mapping], fields: list[str] | None = None) -> Path:
        return self.write_text(name, rows_to_csv(rows, fields))

    def write_matrix(self, name: str, m: np.ndarray) -> Path:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in np.asarray(m):
            writer.writerow([_fmt(v) for v in row])
        return self.write_text(name, buf.getvalue())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def rows_to_csv(rows: Iterable[Mapping], fields: list[str] | None = None) -> str:
    rows = list(rows)
    if fields is None:
        fields = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k)) for k in fields})
    return buf.getvalue()


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, range)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj
