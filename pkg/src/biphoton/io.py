"""Deterministic writers: CSV with shortest round-trip floats, JSON, 16-bit PGM."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import C_MM_PER_PS, NM_PER_MM


def fmt(x: float) -> str:
    return repr(float(x))


def _row(values) -> str:
    return ",".join(map(repr, np.asarray(values, dtype=float).tolist()))


def write_matrix_csv(path, row_axis, col_axis, matrix, corner: str) -> None:
    """First row: corner label then the column axis; each later row: row-axis
    value then the matrix row."""
    m = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(corner + "," + _row(col_axis) + "\n")
        for a, r in zip(np.asarray(row_axis, dtype=float).tolist(), m):
            fh.write(repr(a) + "," + _row(r) + "\n")


def write_columns_csv(path, header: Sequence[str], columns) -> None:
    cols = [list(c) for c in columns]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for rec in zip(*cols):
            fh.write(",".join(v if isinstance(v, str) else repr(float(v)) for v in rec) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, obj) -> None:
    # json uses float.__repr__, i.e. shortest round-trip
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pgm(path, matrix, signed: bool = False) -> None:
    """16-bit binary PGM (P5), row-major, max-normalized.

    Unsigned data map [0, max] to [0, 65535]; signed data map
    [-max|x|, max|x|] to [0, 65535].
    """
    m = np.asarray(matrix, dtype=float)
    if signed:
        peak = float(np.max(np.abs(m))) or 1.0
        scaled = (m / peak + 1.0) / 2.0
    else:
        peak = float(m.max()) or 1.0
        scaled = np.clip(m / peak, 0.0, 1.0)
    data = np.rint(scaled * 65535.0).astype(">u2")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(h, w)


def omega_to_nm(omega) -> np.ndarray:
    return 2.0 * np.pi * C_MM_PER_PS * NM_PER_MM / np.asarray(omega, dtype=float)


def omega_minus_to_nm(omega_minus, omega_p: float) -> np.ndarray:
    """Signal-idler wavelength difference (nm) for a pair centred at wp/2."""
    om = np.asarray(omega_minus, dtype=float)
    return omega_to_nm(omega_p / 2.0 + om / 2.0) - omega_to_nm(omega_p / 2.0 - om / 2.0)
