"""Typed access to sweep CSVs: metadata header, series rows, numeric columns."""

from __future__ import annotations

import csv
from dataclasses import dataclass

__all__ = ["FigureDataError", "ResultTable", "load_table", "require_columns", "numeric"]


class FigureDataError(ValueError):
    """Input CSV does not carry what the figure needs."""


@dataclass(frozen=True)
class ResultTable:
    """One parsed results file: '#' metadata, column names, string rows."""

    path: str
    columns: tuple[str, ...]
    rows: list[dict]
    meta: dict

    def series(self, name: str) -> list[dict]:
        return [row for row in self.rows if row.get("series") == name]


def load_table(path) -> ResultTable:
    meta: dict = {}
    data_lines: list[str] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition(" = ")
                    meta[key.strip()] = value.strip()
                else:
                    data_lines.append(line)
    except OSError as err:
        raise FigureDataError(f"cannot read {path}: {err}") from None
    reader = csv.DictReader(data_lines)
    if reader.fieldnames is None:
        raise FigureDataError(f"{path}: no column header line")
    return ResultTable(
        path=str(path), columns=tuple(reader.fieldnames), rows=list(reader), meta=meta
    )


def require_columns(table: ResultTable, needed) -> None:
    """Fail before any plotting if the schema does not match.

    The message carries the full diff so a stale results file is
    diagnosable from the error alone.
    """
    missing = [name for name in needed if name not in table.columns]
    if missing:
        raise FigureDataError(
            f"{table.path}: missing column(s) {missing}; "
            f"required {list(needed)}, file has {list(table.columns)}"
        )


def numeric(rows, *names) -> list[tuple[float, ...]]:
    """Rows as float tuples, keeping only rows where every named cell is set."""
    out = []
    for row in rows:
        cells = [row.get(name, "") for name in names]
        if all(cell != "" for cell in cells):
            out.append(tuple(float(cell) for cell in cells))
    return out
