"""Parameter sweeps of the distiller over (k, m) grids."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_bits
from .correctors import DistillConfig, moonshine
from .exceptions import DegenerateDataError, InsufficientDataError
from .randtests import BatteryConfig, run_battery


@dataclass(frozen=True)
class SweepCell:
    k: int
    m: int
    output_bits: int
    retention_fraction: float
    battery_pass_fraction: float | None
    status: str = "ok"

    @property
    def insufficient(self):
        return self.status != "ok"


@dataclass(frozen=True)
class SweepGrid:
    """Cells indexed ``cells[i][j]`` for ``m_values[i]`` and ``k_values[j]``."""

    k_values: list
    m_values: list
    cells: list
    input_bits: int

    def matrix(self, attr):
        return np.array(
            [[getattr(c, attr) for c in row] for row in self.cells], dtype=object
        )

    def cell(self, k, m):
        return self.cells[self.m_values.index(m)][self.k_values.index(k)]

    def to_csv(self, attr):
        """One row per m, one column per k; insufficient cells read ``insufficient``."""
        lines = ["m\\k," + ",".join(str(k) for k in self.k_values)]
        for m, row in zip(self.m_values, self.cells):
            vals = []
            for c in row:
                v = getattr(c, attr)
                if attr == "battery_pass_fraction" and c.insufficient:
                    vals.append("insufficient")
                elif isinstance(v, float):
                    vals.append(f"{v:.6f}")
                else:
                    vals.append(str(v))
            lines.append(f"{m}," + ",".join(vals))
        return "\n".join(lines) + "\n"

    @property
    def all_insufficient(self):
        return all(c.insufficient for row in self.cells for c in row)


def evaluate_cell(bits, k, m, battery=None, run_tests=True):
    """Distill with warmup over the whole input and score the output."""
    battery = battery or BatteryConfig()
    b = check_bits(bits)
    try:
        out, _ = moonshine(b, DistillConfig(k, m), 1.0)
    except (DegenerateDataError, InsufficientDataError):
        return SweepCell(k, m, 0, 0.0, None, "degenerate")
    retention = out.length / b.size if b.size else 0.0
    if out.length < battery.min_stream_bits:
        return SweepCell(k, m, out.length, retention, None, "insufficient")
    score = run_battery(out, battery).pass_fraction if run_tests else None
    return SweepCell(k, m, out.length, retention, score)


def sweep(bits, k_values, m_values, battery=None, jobs=1, run_tests=True):
    """Evaluate every (k, m) cell; results come back in (m, k) order."""
    b = check_bits(bits)
    k_values = sorted(int(k) for k in k_values)
    m_values = sorted(int(m) for m in m_values)
    grid = [(k, m) for m in m_values for k in k_values]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(lambda km: evaluate_cell(b, *km, battery, run_tests), grid))
    else:
        flat = [evaluate_cell(b, k, m, battery, run_tests) for k, m in grid]
    nk = len(k_values)
    cells = [flat[i * nk : (i + 1) * nk] for i in range(len(m_values))]
    return SweepGrid(k_values, m_values, cells, int(b.size))
