"""Shared helpers for reading run artifacts back in tests."""

from pathlib import Path

import numpy as np


def read_summary(run_dir) -> dict:
    out = {}
    for line in Path(run_dir, "summary.txt").read_text().splitlines():
        key, _, value = line.partition(": ")
        out[key] = value
    return out


def read_series(run_dir) -> dict:
    path = Path(run_dir, "series.tsv")
    data = np.genfromtxt(path, delimiter="\t", names=True)
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def read_snapshot(path) -> dict:
    data = np.genfromtxt(path, delimiter="\t", names=True)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def summary_float(summary: dict, key: str) -> float:
    return float(summary[key])
