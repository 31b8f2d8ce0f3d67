"""Post-training beam database and the utilisation / exploration test cycles."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .env import BeamEnv

DB_HEADER = "# hsrbeam-beamdb v1"
Z95 = 1.96


class DatabaseFormatError(ValueError):
    pass


@dataclass
class BeamDatabase:
    # entries[n] is a best-first list of [theta_b, phi_b, rsp_dbm] for 0-based bin n
    entries: list[list[list[float]]]
    p_utilize: float = 0.9

    @property
    def depth(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def sort(self) -> None:
        for row in self.entries:
            # stable: equal RSP keeps the Q-value order it was harvested in
            row.sort(key=lambda e: -e[2])

    def greedy_policy(self) -> np.ndarray:
        return np.array([[row[0][0], row[0][1]] for row in self.entries])


def build_database(agent, env: BeamEnv, depth: int = 5, p_utilize: float = 0.9) -> BeamDatabase:
    """Harvest the ``depth`` best actions per bin along the agent's greedy run.

    At each bin the top actions by Q-value are applied to the incumbent beam
    (the one the greedy policy arrived with), measured, and stored best-first
    by RSP.  ``agent`` needs ``q_values(bin)`` over the env's action ids.
    """
    if depth < 1:
        raise ValueError("database depth must be at least 1")
    if depth > env.n_actions:
        raise ValueError(f"depth {depth} exceeds the {env.n_actions} available actions")
    s = env.reset()
    entries = []
    done = False
    while not done:
        q = np.asarray(agent.q_values(s.bin))
        order = np.argsort(-q, kind="stable")[:depth]
        row = []
        for a in order:
            th, ph = env.apply_action(s.theta_b, s.phi_b, int(a) + 1)
            row.append([th, ph, env.model.rsp(s.bin - 1, th, ph)])
        entries.append(row)
        o = env.step(int(order[0]) + 1)
        s, done = o.state, o.done
    db = BeamDatabase(entries, p_utilize)
    db.sort()
    return db


@dataclass
class CycleStats:
    positions_m: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    rewards: np.ndarray  # (M, N)


def cycle_stats(rewards: np.ndarray, positions) -> CycleStats:
    """Per-bin mean, std and normal-approximation 95% CI over cycles (rows)."""
    rewards = np.atleast_2d(np.asarray(rewards, dtype=float))
    m = rewards.shape[0]
    mean = rewards.mean(axis=0)
    std = rewards.std(axis=0, ddof=1) if m > 1 else np.zeros(rewards.shape[1])
    # constant columns: report them exactly rather than with rounding residue
    const = np.all(rewards == rewards[0], axis=0)
    mean[const] = rewards[0, const]
    std[const] = 0.0
    half = Z95 * std / np.sqrt(m)
    return CycleStats(np.asarray(positions, dtype=float), mean, std, mean - half, mean + half,
                      rewards)


def run_test_cycles(db: BeamDatabase, env: BeamEnv, cycles: int, seed: int) -> CycleStats:
    """Drive ``cycles`` passes over the rail using the database.

    With probability ``p_utilize`` the best record is used, otherwise one of the
    remaining records uniformly; the measurement overwrites that record.
    """
    if cycles < 1:
        raise ValueError("need at least one cycle")
    if db.depth == 1 and db.p_utilize < 1.0:
        raise ValueError("exploration needs at least two database entries per bin")
    rng = np.random.default_rng(seed)
    model = env.model
    fba = env.fba_rsp
    rewards = np.zeros((cycles, len(db.entries)))
    for c in range(cycles):
        for i, row in enumerate(db.entries):
            if rng.random() < db.p_utilize:
                k = 0
            else:
                k = 1 + int(rng.integers(len(row) - 1))
            th, ph, _ = row[k]
            measured = model.rsp(i, th, ph)
            row[k][2] = measured
            row.sort(key=lambda e: -e[2])
            rewards[c, i] = measured - fba[i]
    return cycle_stats(rewards, model.positions)


def save_database(db: BeamDatabase, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(DB_HEADER + "\n")
        fh.write(f"# p_utilize={db.p_utilize!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin", "rank", "theta_b", "phi_b", "rsp_dbm"])
        for i, row in enumerate(db.entries, start=1):
            for r, (t, p, v) in enumerate(row, start=1):
                w.writerow([i, r, repr(float(t)), repr(float(p)), repr(float(v))])


def load_database(path) -> BeamDatabase:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DB_HEADER:
        raise DatabaseFormatError(f"{path}: missing '{DB_HEADER}' header")
    p_utilize = 0.9
    body = []
    for line in lines[1:]:
        if line.startswith("# p_utilize="):
            p_utilize = float(line.split("=", 1)[1])
        elif not line.startswith("#"):
            body.append(line)
    entries: dict[int, list] = {}
    for r in csv.DictReader(body):
        entries.setdefault(int(r["bin"]), []).append(
            (int(r["rank"]), [float(r["theta_b"]), float(r["phi_b"]), float(r["rsp_dbm"])]))
    rows = [[e for _, e in sorted(entries[b])] for b in sorted(entries)]
    return BeamDatabase(rows, p_utilize)


def write_stats_csv(path, st: CycleStats, preamble=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position", "mean", "std", "ci_low", "ci_high"])
        for row in zip(st.positions_m, st.mean, st.std, st.ci_low, st.ci_high):
            w.writerow([repr(float(v)) for v in row])
