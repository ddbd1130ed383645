"""CSV datasets and the run manifest.

Every CSV starts with ``#``-prefixed header lines echoing the parameters that
produced it. Files are staged in a temporary directory and moved into place
only after all of them were written, so a failed run leaves nothing behind.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MANIFEST = "manifest.json"


@dataclass
class Dataset:
    name: str
    columns: list[str]
    data: np.ndarray
    header: list[str] = field(default_factory=list)
    seed: int | None = None

    @property
    def config_hash(self) -> str:
        return hashlib.sha256("\n".join(self.header).encode()).hexdigest()

    @property
    def rows(self) -> int:
        return int(np.asarray(self.data).shape[0])

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.data)[:, self.columns.index(name)]


def _cell(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    return repr(float(x))


def write_csv(path: Path, ds: Dataset) -> None:
    data = np.asarray(ds.data)
    if data.ndim != 2 or data.shape[1] != len(ds.columns):
        raise ValueError(f"dataset {ds.name}: data shape {data.shape} does not match {len(ds.columns)} columns")
    with open(path, "w", newline="") as fh:
        for line in ds.header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.columns)
        for row in data:
            w.writerow([_cell(x) for x in row])


def read_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """(header lines, column names, float data) of a CSV written by write_csv."""
    header, lines = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                header.append(line[1:].strip())
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    return header, rows[0], data.reshape(len(rows) - 1, len(rows[0]))


def write_outputs(out_dir, datasets: list[Dataset], extra: dict | None = None) -> Path:
    """Write datasets plus manifest.json into out_dir atomically per run."""
    out_dir = Path(out_dir)
    names = [ds.name for ds in datasets]
    if len(set(names)) != len(names):
        raise ValueError("duplicate dataset names")
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        entries = []
        for ds in datasets:
            fname = f"{ds.name}.csv"
            write_csv(staging / fname, ds)
            entries.append({"file": fname, "columns": ds.columns, "rows": ds.rows,
                            "config_hash": ds.config_hash, "seed": ds.seed})
        manifest = {"datasets": entries}
        if extra:
            manifest.update(extra)
        with open(staging / MANIFEST, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for entry in entries:
            os.replace(staging / entry["file"], out_dir / entry["file"])
        os.replace(staging / MANIFEST, out_dir / MANIFEST)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return out_dir / MANIFEST
