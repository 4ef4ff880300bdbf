"""Readers for the experiment CSV files.

The plotting layer consumes the CSVs as its only interface to the
experiment runner; schemas are validated against the exact headers the
runner writes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

MODULATION_COLUMNS = ("manifold", "d", "kappa", "theta", "n", "trials",
                      "alpha_mc", "alpha_stderr", "alpha_eq19", "alpha_eq20",
                      "seed")
VARIANCE_PROFILE_COLUMNS = ("theta", "phi", "variance")


class SchemaError(ValueError):
    """CSV does not match the expected experiment schema."""


@dataclass(frozen=True)
class ModulationRow:
    manifold: str
    d: int
    kappa: float
    theta: float
    n: int
    trials: int
    alpha_mc: float
    alpha_stderr: float
    alpha_eq19: float
    alpha_eq20: float
    seed: int


@dataclass(frozen=True)
class VarianceProfileRow:
    theta: float
    phi: float
    variance: float


def _read_rows(path, expected_columns):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != expected_columns:
            raise SchemaError(
                f"{path}: header {header!r} does not match "
                f"{','.join(expected_columns)!r}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_modulation_csv(path) -> list:
    out = []
    for row in _read_rows(path, MODULATION_COLUMNS):
        if len(row) != len(MODULATION_COLUMNS):
            raise SchemaError(f"{path}: row has {len(row)} fields")
        try:
            out.append(ModulationRow(
                manifold=row[0], d=int(row[1]), kappa=float(row[2]),
                theta=float(row[3]), n=int(row[4]), trials=int(row[5]),
                alpha_mc=float(row[6]), alpha_stderr=float(row[7]),
                alpha_eq19=float(row[8]), alpha_eq20=float(row[9]),
                seed=int(row[10])))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    return out


def read_variance_profile_csv(path) -> list:
    out = []
    for row in _read_rows(path, VARIANCE_PROFILE_COLUMNS):
        if len(row) != len(VARIANCE_PROFILE_COLUMNS):
            raise SchemaError(f"{path}: row has {len(row)} fields")
        try:
            out.append(VarianceProfileRow(theta=float(row[0]),
                                          phi=float(row[1]),
                                          variance=float(row[2])))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    return out
