"""Exhaustive per-bin beam search: the upper bound every policy is held to."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .link import LinkModel

DEFAULT_BUDGET = 100_000_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class OracleResult:
    beams: np.ndarray  # (N, 2) best (theta_b, phi_b) per bin
    rsp_dbm: np.ndarray
    step_deg: float

    def __len__(self) -> int:
        return len(self.rsp_dbm)


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def grid_search(model: LinkModel, step_deg: float = 1.0,
                budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Evaluate every grid beam over the steering box at every bin.

    The grid runs from the lower box edge in ``step_deg`` increments.  Ties
    go to the first beam in theta-major order.
    """
    if step_deg <= 0:
        raise ValueError("step_deg must be positive")
    cfg = model.cfg
    thetas = _axis(*cfg.theta_b_range_deg, step_deg)
    phis = _axis(*cfg.phi_b_range_deg, step_deg)
    needed = len(thetas) * len(phis) * model.n_bins
    if needed > budget:
        raise BudgetExceeded(
            f"grid needs {needed:,} link evaluations ({len(thetas)}x{len(phis)} beams x "
            f"{model.n_bins} bins); budget is {budget:,}"
        )
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt, pp = tt.ravel(), pp.ravel()
    beams = np.zeros((model.n_bins, 2))
    best = np.zeros(model.n_bins)
    for i in range(model.n_bins):
        vals = model.rsp_grid(i, tt, pp)
        k = int(np.argmax(vals))
        beams[i] = tt[k], pp[k]
        best[i] = vals[k]
    return OracleResult(beams, best, step_deg)


def write_golden_csv(path, res: OracleResult, preamble=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin", "theta_star", "phi_star", "rsp_star"])
        for i, ((t, p), v) in enumerate(zip(res.beams, res.rsp_dbm), start=1):
            w.writerow([i, repr(float(t)), repr(float(p)), repr(float(v))])


def read_golden_csv(path) -> OracleResult:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for r in reader:
            rows.append((float(r["theta_star"]), float(r["phi_star"]), float(r["rsp_star"])))
    arr = np.array(rows)
    return OracleResult(arr[:, :2], arr[:, 2], float("nan"))
