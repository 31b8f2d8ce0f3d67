"""Episodic beam-steering MDP: one step per location bin."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .link import LinkModel

# (d_theta, d_phi) in units of the beam step, action ids 1..9
RELATIVE_ACTIONS: tuple[tuple[int, int], ...] = (
    (0, 0), (0, 1), (1, 0), (1, 1), (0, -1), (-1, 0), (-1, -1), (1, -1), (-1, 1),
)

CODEBOOK16: tuple[tuple[float, float], ...] = tuple(
    (th, ph)
    for th in (-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0)
    for ph in (-11.0, -22.0 / 3.0, -11.0 / 3.0, 0.0)
)


class EpisodeFinished(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvState:
    bin: int  # 1-based; N + 1 once the episode is over
    theta_b: float
    phi_b: float
    benchmark: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    state: EnvState
    rsp_dbm: float
    done: bool
    action: int


def _clip(v: float, box: tuple[float, float]) -> float:
    return min(max(v, box[0]), box[1])


class BeamEnv:
    """RX beam control along the rail.

    The observation handed to agents is the bin index only; the current beam
    lives in the state but is not observed.  With ``codebook`` given, action
    ``j`` (1-based) sets the beam to ``codebook[j-1]`` instead of nudging it.
    """

    def __init__(self, model: LinkModel, codebook: Sequence[tuple[float, float]] | None = None):
        self.model = model
        self.cfg = model.cfg
        self.n_bins = model.n_bins
        self.codebook = None if codebook is None else tuple(tuple(map(float, c)) for c in codebook)
        self.n_actions = len(RELATIVE_ACTIONS) if self.codebook is None else len(self.codebook)
        self._fba = model.fba_rsp()
        self.state: EnvState | None = None

    @property
    def fba_rsp(self) -> np.ndarray:
        return self._fba

    def reset(self) -> EnvState:
        self.state = EnvState(1, 0.0, 0.0, tuple(self.cfg.benchmark_beam_deg))
        return self.state

    def apply_action(self, theta: float, phi: float, action: int) -> tuple[float, float]:
        if not 1 <= action <= self.n_actions:
            raise ValueError(f"action id {action} outside 1..{self.n_actions}")
        if self.codebook is not None:
            return self.codebook[action - 1]
        dt, dp = RELATIVE_ACTIONS[action - 1]
        step = self.cfg.beam_step_deg
        return (_clip(theta + dt * step, self.cfg.theta_b_range_deg),
                _clip(phi + dp * step, self.cfg.phi_b_range_deg))

    def step(self, action: int) -> StepOutcome:
        s = self.state
        if s is None or s.bin > self.n_bins:
            raise EpisodeFinished("step() called on a finished episode; call reset()")
        theta, phi = self.apply_action(s.theta_b, s.phi_b, action)
        idx = s.bin - 1
        p_r = self.model.rsp(idx, theta, phi)
        if s.benchmark == tuple(self.cfg.benchmark_beam_deg):
            ref = self._fba[idx]
        else:
            ref = self.model.rsp(idx, *s.benchmark)
        nxt = replace(s, bin=s.bin + 1, theta_b=theta, phi_b=phi)
        self.state = nxt
        return StepOutcome(float(p_r - ref), nxt, float(p_r), nxt.bin > self.n_bins, action)

    def features(self, bin_: int) -> float:
        """Normalised rail position of a 1-based bin, in [0, 1]."""
        return (bin_ - 1) / max(self.n_bins - 1, 1)


def discounted_return(rewards: Sequence[float], alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise ValueError("discount must lie in (0, 1]")
    total = 0.0
    for t, r in enumerate(rewards):
        total += alpha**t * r
    return total


def write_trace_csv(path, outcomes: Sequence[StepOutcome], preamble: Sequence[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "bin", "action", "theta_b", "phi_b", "reward", "rsp"])
        for k, o in enumerate(outcomes, start=1):
            w.writerow([k, o.state.bin - 1, o.action, repr(float(o.state.theta_b)),
                        repr(float(o.state.phi_b)), repr(float(o.reward)), repr(float(o.rsp_dbm))])
