"""The five beam-control policies: DQN, tabular Q-learning, gamma-greedy,
fixed beam, and DQN over a 16-direction codebook."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import nn
from .env import CODEBOOK16, BeamEnv, StepOutcome
from .link import LinkModel, RspVector


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    episodes: int = 500
    buffer_size: int = 10_000
    batch_size: int = 32
    sync_every: int = 100
    lr: float = 1e-3
    discount: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.6
    hidden: tuple[int, ...] = (64, 64)
    reward_scale: float = 1.0
    reward_clip: float = 0.0  # clip scaled rewards to +-this; 0 disables
    grad_clip: float = 0.0
    qtable_lr: float = 0.1
    input_sharpness: float = 0.0

    def shape_reward(self, reward: float) -> float:
        """Reward as stored for learning: scaled, then optionally clipped."""
        r = reward / self.reward_scale
        if self.reward_clip > 0:
            r = min(max(r, -self.reward_clip), self.reward_clip)
        return r

    def epsilon(self, episode: int) -> float:
        """Linear anneal over the first ``eps_decay_frac`` of episodes (0-based)."""
        span = max(1, int(round(self.eps_decay_frac * self.episodes)))
        frac = min(1.0, episode / span)
        return self.eps_start + frac * (self.eps_end - self.eps_start)


@dataclass
class TrainReport:
    agent: str
    seed: int
    episode_returns: list[float]
    policy: list[tuple[float, float]]
    policy_rsp_dbm: list[float]
    average_reward_db: float
    wall_clock_s: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_clock_s")  # kept out of files so reruns are byte-identical
        d["policy"] = [list(p) for p in self.policy]
        return d


@dataclass
class Rollout:
    beams: np.ndarray  # (N, 2)
    rsp_dbm: np.ndarray
    rewards: np.ndarray
    outcomes: list[StepOutcome]

    @property
    def average_reward(self) -> float:
        return float(np.mean(self.rewards))


def greedy_rollout(env: BeamEnv, choose: Callable[[int], int]) -> Rollout:
    """Run one episode picking ``choose(bin)`` at each 1-based bin."""
    s = env.reset()
    outs = []
    done = False
    while not done:
        o = env.step(choose(s.bin))
        outs.append(o)
        s, done = o.state, o.done
    beams = np.array([(o.state.theta_b, o.state.phi_b) for o in outs])
    return Rollout(beams, np.array([o.rsp_dbm for o in outs]),
                   np.array([o.reward for o in outs]), outs)


class DQNAgent:
    def __init__(self, params: nn.QNetworkParams, env: BeamEnv):
        self.params = params
        self.env = env

    def q_values(self, bin_: int) -> np.ndarray:
        return nn.forward(self.params, np.array([self.env.features(bin_)]))

    def act(self, bin_: int) -> int:
        return int(np.argmax(self.q_values(bin_))) + 1


class QTableAgent:
    def __init__(self, table: np.ndarray, env: BeamEnv):
        self.table = table
        self.env = env

    def q_values(self, bin_: int) -> np.ndarray:
        return self.table[bin_ - 1]

    def act(self, bin_: int) -> int:
        return int(np.argmax(self.table[bin_ - 1])) + 1


def _report(name: str, seed: int, env: BeamEnv, agent, returns, t0: float) -> TrainReport:
    ro = greedy_rollout(env, agent.act)
    return TrainReport(
        agent=name, seed=seed, episode_returns=[float(r) for r in returns],
        policy=[(float(t), float(p)) for t, p in ro.beams],
        policy_rsp_dbm=[float(v) for v in ro.rsp_dbm],
        average_reward_db=ro.average_reward, wall_clock_s=time.perf_counter() - t0,
    )


def train_dqn(model: LinkModel, hp: Hyperparams, seed: int, codebook=None,
              name: str = "dqn") -> tuple[nn.QNetworkParams, TrainReport]:
    """Deep Q-learning with replay memory and a periodically synced target net.

    One gradient step per environment step once the buffer holds a batch.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    env = BeamEnv(model, codebook=codebook)
    sizes = [1, *hp.hidden, env.n_actions]
    params = nn.init_params(sizes, rng, input_sharpness=hp.input_sharpness)
    target = nn.sync_target(params)
    buf = nn.ReplayBuffer(hp.buffer_size, state_dim=1)
    feats = np.array([[env.features(b)] for b in range(1, env.n_bins + 2)])
    updates = 0
    returns = []
    for ep in range(hp.episodes):
        eps = hp.epsilon(ep)
        s = env.reset()
        total = 0.0
        done = False
        while not done:
            x = feats[s.bin - 1]
            if rng.random() < eps:
                a = int(rng.integers(env.n_actions))
            else:
                a = int(np.argmax(nn.forward(params, x)))
            o = env.step(a + 1)
            total += o.reward
            buf.add(x, a, hp.shape_reward(o.reward), feats[o.state.bin - 1], o.done)
            s, done = o.state, o.done
            if len(buf) >= hp.batch_size:
                loss, grad = nn.td_loss(params, target, buf.sample(hp.batch_size, rng), hp.discount)
                if not np.isfinite(loss):
                    raise TrainingDiverged(f"non-finite TD loss at episode {ep}")
                if hp.grad_clip > 0:
                    norm = float(np.linalg.norm(grad.flat()))
                    if norm > hp.grad_clip:
                        grad = nn.sgd_step(nn.zeros_like(grad), grad, -hp.grad_clip / norm)
                params = nn.sgd_step(params, grad, hp.lr)
                updates += 1
                if updates % hp.sync_every == 0:
                    target = nn.sync_target(params)
        returns.append(total)
    agent = DQNAgent(params, env)
    return params, _report(name, seed, env, agent, returns, t0)


def train_dqn_codebook16(model: LinkModel, hp: Hyperparams, seed: int):
    return train_dqn(model, hp, seed, codebook=CODEBOOK16, name="dqn16")


def train_qlearning(model: LinkModel, hp: Hyperparams, seed: int,
                    codebook=None) -> tuple[np.ndarray, TrainReport]:
    """Tabular Q-learning over (bin, action) with the DQN's epsilon schedule."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    env = BeamEnv(model, codebook=codebook)
    q = np.zeros((env.n_bins, env.n_actions))
    returns = []
    for ep in range(hp.episodes):
        eps = hp.epsilon(ep)
        s = env.reset()
        total = 0.0
        done = False
        while not done:
            i = s.bin - 1
            if rng.random() < eps:
                a = int(rng.integers(env.n_actions))
            else:
                a = int(np.argmax(q[i]))
            o = env.step(a + 1)
            total += o.reward
            target = hp.shape_reward(o.reward)
            if not o.done:
                target += hp.discount * q[i + 1].max()
            q[i, a] += hp.qtable_lr * (target - q[i, a])
            s, done = o.state, o.done
        returns.append(total)
    agent = QTableAgent(q, env)
    return q, _report("qlearning", seed, env, agent, returns, t0)


def run_fba(model: LinkModel) -> RspVector:
    th, ph = model.cfg.benchmark_beam_deg
    beams = np.tile([th, ph], (model.n_bins, 1))
    return RspVector(model.fba_rsp(), model.positions, beams)


def run_gamma_greedy(model: LinkModel) -> tuple[np.ndarray, RspVector]:
    """Per-bin local search over the 3x3 offsets around the previous beam.

    Candidates are visited with the tilt offset in the outer loop, both from
    -step to +step; the strict ``>`` keeps the first of tied maxima.
    """
    cfg = model.cfg
    step = cfg.beam_step_deg
    offsets = (-step, 0.0, step)
    theta, phi = 0.0, 0.0
    beams = np.zeros((model.n_bins, 2))
    best_vals = np.zeros(model.n_bins)
    for i in range(model.n_bins):
        best, arg = -200.0, (theta, phi)
        for g1 in offsets:
            for g2 in offsets:
                t = min(max(theta + g1, cfg.theta_b_range_deg[0]), cfg.theta_b_range_deg[1])
                p = min(max(phi + g2, cfg.phi_b_range_deg[0]), cfg.phi_b_range_deg[1])
                val = model.rsp(i, t, p)
                if val > best:
                    best, arg = val, (t, p)
        if best == -200.0:
            # nothing beat the initial floor: hold the beam, record its real RSP
            arg = (theta, phi)
            best = model.rsp(i, theta, phi)
        theta, phi = arg
        beams[i] = arg
        best_vals[i] = best
    return beams, RspVector(best_vals, model.positions, beams)


QTABLE_HEADER = "# hsrbeam-qtable v1"


def save_qtable(q: np.ndarray, path) -> None:
    """Text table, one row per bin, one column per action id."""
    with open(path, "w") as fh:
        fh.write(QTABLE_HEADER + "\n")
        fh.write(f"# shape={q.shape[0]}x{q.shape[1]}\n")
        for row in q:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_qtable(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# hsrbeam-qtable"):
        raise nn.WeightFileError(f"{path}: not a Q-table file")
    if lines[0] != QTABLE_HEADER:
        raise nn.WeightFileError(f"{path}: unsupported Q-table version {lines[0].split()[-1]!r}")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:] if ln and not ln.startswith("#")]
    return np.array(rows)
