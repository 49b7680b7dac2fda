"""Readers for the simulator's manifest/CSV output contract.

Expected layout next to ``manifest.json``:

* ``snapshots/snap_*.csv`` with header ``z,reE+,imE+,reE-,imE-,reSbc,imSbc``
* ``observables.csv`` with header ``t,width_sq,first_moment,n_tot,peak,ratio_re,ratio_im``
* overlay files ``<name>.csv`` with a ``t`` column plus named series
* ``chi_<tag>.csv`` with the eight re/im susceptibility columns
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SchemaError", "Manifest", "load_manifest", "read_csv_columns"]

SNAPSHOT_COLUMNS = ["z", "reE+", "imE+", "reE-", "imE-", "reSbc", "imSbc"]
OBSERVABLE_COLUMNS = ["t", "width_sq", "first_moment", "n_tot", "peak", "ratio_re", "ratio_im"]
CHI_COLUMNS = ["omega", "re_pp", "im_pp", "re_pm", "im_pm", "re_mp", "im_mp", "re_mm", "im_mm"]


class SchemaError(ValueError):
    """An output file does not match the documented column contract."""


@dataclass(frozen=True)
class Manifest:
    path: Path
    data: dict

    @property
    def root(self) -> Path:
        return self.path.parent

    @property
    def name(self) -> str:
        return str(self.data.get("name", self.path.parent.name))

    @property
    def units(self) -> str:
        return str(self.data.get("units", ""))

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.data.get("times", []), dtype=float)

    @property
    def files(self) -> dict:
        return dict(self.data.get("files", {}))

    def grid_shape(self) -> tuple[int, int]:
        grid = self.data.get("config", {}).get("grid", {})
        return len(self.times), int(grid.get("n_points", 0))


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.exists():
        raise SchemaError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if "files" not in data:
        raise SchemaError(f"{path}: manifest has no 'files' section")
    return Manifest(path=path, data=data)


def read_csv_columns(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    """Read a comma-separated file and return the required columns by name."""
    if not path.exists():
        raise SchemaError(f"missing data file: {path}")
    with path.open(encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path.name}: missing column(s) {missing}; found {header}"
            )
        body = handle.read()
        if not body.strip():
            raise SchemaError(f"{path.name}: no data rows")
        try:
            raw = np.loadtxt(
                body.splitlines(), delimiter=",", dtype=float,
                usecols=[header.index(c) for c in required], ndmin=2,
            )
        except ValueError as exc:
            raise SchemaError(f"{path.name}: non-numeric data: {exc}") from exc
    if raw.size == 0:
        raise SchemaError(f"{path.name}: no data rows")
    return {c: raw[:, i] for i, c in enumerate(required)}
