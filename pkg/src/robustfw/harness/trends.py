"""Trend metrics computed from trace CSVs only.

Everything here reads the files written by :func:`run_experiment`, so reports
can be regenerated without rerunning any solver.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional

import numpy as np

from .bench import read_trace_csv


def _col(rows: List[dict], name: str) -> np.ndarray:
    return np.array([float(r[name]) if r[name] != "" else math.nan for r in rows])


def best_so_far(rows: List[dict]) -> np.ndarray:
    return np.minimum.accumulate(_col(rows, "f_value"))


def lmo_calls_to_reach(rows: List[dict], threshold: float) -> Optional[int]:
    """LMO calls spent when the best logged f-value first drops to ``threshold``."""
    hit = np.flatnonzero(best_so_far(rows) <= threshold)
    if len(hit) == 0:
        return None
    return int(rows[hit[0]]["lmo_calls"])


def iterations_to_reach(rows: List[dict], threshold: float) -> Optional[int]:
    hit = np.flatnonzero(best_so_far(rows) <= threshold)
    return int(rows[hit[0]]["iteration"]) if len(hit) else None


def per_iteration_growth(rows: List[dict]) -> float:
    """Median step time over the last quarter divided by that of the first quarter."""
    dt = np.diff(_col(rows, "elapsed_seconds"))
    if len(dt) < 4:
        return math.nan
    k = len(dt) // 4
    early = np.median(dt[:k])
    return float(np.median(dt[-k:]) / early) if early > 0 else math.inf


def final_best(rows: List[dict]) -> float:
    return float(best_so_far(rows)[-1])


def load(folder, name: str, method: str) -> List[dict]:
    return read_trace_csv(Path(folder) / f"{name}__{method}.csv")
