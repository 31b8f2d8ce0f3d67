"""Link budget, per-bin RSP vectors and the blockage-scaled objective."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .antenna import BeamDirection, Panels, array_gain, element_gain
from .channel import path_loss
from .geometry import ScenarioConfig, Side, arrival_angles_gcs, bin_count, bin_positions
from .geometry import distances, gcs_to_lcs


class ConstraintWarning(UserWarning):
    """Received power above transmit power at some bin."""


@dataclass(frozen=True)
class LinkBudgetBreakdown:
    p_t_dbm: float
    a_e_t: float
    a_e_r: float
    a_b_t: float
    a_b_r: float
    pl_db: float
    p_r_dbm: float


@dataclass(frozen=True)
class _StaticTerms:
    """Beam-independent part of the budget at one rail position."""

    a_e_t: float
    a_e_r: float
    a_b_t: float
    pl_db: float
    mr_lcs: tuple[float, float]
    base_dbm: float


def _static_terms(x: float, tx_beam: BeamDirection, cfg: ScenarioConfig,
                  panels: Panels) -> _StaticTerms:
    d2d, d3d = distances(x, cfg)
    pl = path_loss(d2d, d3d, cfg).pl_db
    tx_lcs = gcs_to_lcs(arrival_angles_gcs(x, Side.RRH_TX, cfg), panels.rrh.orientation)
    rx_lcs = gcs_to_lcs(arrival_angles_gcs(x, Side.MR_RX, cfg), panels.mr.orientation)
    a_e_t = element_gain(tx_lcs, panels.rrh)
    a_e_r = element_gain(rx_lcs, panels.mr)
    a_b_t = array_gain(tx_lcs, tx_beam[0], tx_beam[1], panels.rrh)
    base = cfg.tx_power_dbm + a_e_t + a_e_r + a_b_t - pl
    return _StaticTerms(a_e_t, a_e_r, a_b_t, pl, tuple(rx_lcs), base)


def rsp(x: float, rx_beam: BeamDirection, cfg: ScenarioConfig, panels: Panels,
        tx_beam: BeamDirection | None = None) -> LinkBudgetBreakdown:
    """Received signal power at rail position ``x`` for one RX beam direction."""
    if tx_beam is None:
        tx_beam = BeamDirection(*cfg.tx_beam_deg)
    st = _static_terms(x, tx_beam, cfg, panels)
    a_b_r = array_gain(st.mr_lcs, rx_beam[0], rx_beam[1], panels.mr)
    return LinkBudgetBreakdown(cfg.tx_power_dbm, st.a_e_t, st.a_e_r, st.a_b_t, a_b_r,
                               st.pl_db, st.base_dbm + a_b_r)


class LinkModel:
    """Per-bin link budget with the beam-independent terms precomputed.

    ``rsp`` returns exactly the same floats as the module-level :func:`rsp`
    at the bin centres; scalar lookups are memoised.
    """

    def __init__(self, cfg: ScenarioConfig, panels: Panels,
                 tx_beam: BeamDirection | None = None):
        self.cfg = cfg
        self.panels = panels
        self.tx_beam = BeamDirection(*cfg.tx_beam_deg) if tx_beam is None else tx_beam
        self.positions = bin_positions(cfg)
        self.n_bins = bin_count(cfg)
        self._static = [_static_terms(float(x), self.tx_beam, cfg, panels) for x in self.positions]
        self._cache: dict[tuple[int, float, float], float] = {}

    def rsp(self, idx: int, theta_b: float, phi_b: float) -> float:
        """RSP at 0-based bin ``idx``."""
        key = (idx, theta_b, phi_b)
        val = self._cache.get(key)
        if val is None:
            st = self._static[idx]
            val = st.base_dbm + array_gain(st.mr_lcs, theta_b, phi_b, self.panels.mr)
            self._cache[key] = val
        return val

    def rsp_grid(self, idx: int, theta_b, phi_b) -> np.ndarray:
        st = self._static[idx]
        return st.base_dbm + array_gain(st.mr_lcs, theta_b, phi_b, self.panels.mr)

    def breakdown(self, idx: int, theta_b: float, phi_b: float) -> LinkBudgetBreakdown:
        st = self._static[idx]
        a_b_r = array_gain(st.mr_lcs, theta_b, phi_b, self.panels.mr)
        return LinkBudgetBreakdown(self.cfg.tx_power_dbm, st.a_e_t, st.a_e_r, st.a_b_t,
                                   a_b_r, st.pl_db, st.base_dbm + a_b_r)

    def fba_rsp(self) -> np.ndarray:
        th, ph = self.cfg.benchmark_beam_deg
        return np.array([self.rsp(i, th, ph) for i in range(self.n_bins)])


@dataclass
class RspVector:
    values_dbm: np.ndarray
    positions_m: np.ndarray
    beams: np.ndarray  # (N, 2) theta_b, phi_b in degrees
    breakdowns: list[LinkBudgetBreakdown] | None = None

    def __post_init__(self):
        self.values_dbm = np.asarray(self.values_dbm, dtype=float)
        self.positions_m = np.asarray(self.positions_m, dtype=float)
        self.beams = np.asarray(self.beams, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.values_dbm)

    def violations(self, p_t_dbm: float) -> np.ndarray:
        """0-based bins where received power exceeds transmit power."""
        return np.flatnonzero(self.values_dbm > p_t_dbm)


def check_power_constraint(v: RspVector, cfg: ScenarioConfig) -> np.ndarray:
    bad = v.violations(cfg.tx_power_dbm)
    if bad.size:
        warnings.warn(f"P_r > P_t at {bad.size} bins (first: bin {bad[0] + 1})",
                      ConstraintWarning, stacklevel=2)
    return bad


def rsp_vector(policy: Sequence, cfg: ScenarioConfig, panels: Panels,
               model: LinkModel | None = None) -> RspVector:
    """RSP at every bin centre with ``policy[n]`` as the RX beam at bin n."""
    n_bins = bin_count(cfg)
    beams = np.asarray(policy, dtype=float).reshape(-1, 2)
    if len(beams) != n_bins:
        raise ValueError(f"policy has {len(beams)} entries, scenario has {n_bins} bins")
    if model is None:
        model = LinkModel(cfg, panels)
    bds = [model.breakdown(i, float(t), float(p)) for i, (t, p) in enumerate(beams)]
    v = RspVector(np.array([b.p_r_dbm for b in bds]), model.positions, beams, bds)
    check_power_constraint(v, cfg)
    return v


def objective(v: RspVector, cfg: ScenarioConfig) -> float:
    return (1.0 - cfg.blockage_prob) * float(np.linalg.norm(v.values_dbm))


def summarize(v: RspVector, cfg: ScenarioConfig) -> dict:
    """Blockage-scaled L2 score next to the arithmetic and linear-power means."""
    vals = v.values_dbm
    return {
        "objective_l2": objective(v, cfg),
        "mean_rsp_dbm": float(np.mean(vals)),
        "mean_linear_rsp_dbm": float(10.0 * np.log10(np.mean(10.0 ** (vals / 10.0)))),
    }


RSP_COLUMNS = ("bin_index", "position_m", "theta_b", "phi_b", "rsp_dbm", "p_t_dbm", "a_e_t",
               "a_e_r", "a_b_t", "a_b_r", "pl_db", "reward_db")


def write_rsp_csv(path, v: RspVector, rewards=None, preamble: Sequence[str] = ()) -> None:
    """One row per bin; ``rewards`` (dB vs the benchmark beam) is optional.

    Breakdown columns are left empty when ``v`` carries none.
    """
    with open(path, "w", newline="") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RSP_COLUMNS)
        for i in range(len(v)):
            row = [i + 1, repr(float(v.positions_m[i])), repr(float(v.beams[i, 0])),
                   repr(float(v.beams[i, 1])), repr(float(v.values_dbm[i]))]
            if v.breakdowns is not None:
                b = v.breakdowns[i]
                row += [repr(float(x)) for x in (b.p_t_dbm, b.a_e_t, b.a_e_r, b.a_b_t, b.a_b_r, b.pl_db)]
            else:
                row += [""] * 6
            row.append("" if rewards is None else repr(float(rewards[i])))
            w.writerow(row)


def read_rsp_csv(path) -> dict[str, np.ndarray]:
    """Columns of a file written by :func:`write_rsp_csv` (empty cells become NaN)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    return {c: np.array([float(r[c]) if r[c] != "" else np.nan for r in rows]) for c in RSP_COLUMNS}
