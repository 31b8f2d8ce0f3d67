"""Command-line entry point: ``hsrbeam {simulate,train,eval,oracle,cycles}``.

Exit status is 0 on success, 1 when a run fails, 2 for usage or config errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, agents, beamdb, nn, oracle, plots
from .channel import DomainError
from .config import AGENT_NAMES, LEARNED_AGENTS, ExperimentConfig, load_config
from .env import CODEBOOK16, BeamEnv
from .geometry import ConfigError
from .link import LinkModel, RspVector, rsp_vector, summarize, write_rsp_csv

log = logging.getLogger("hsrbeam")

OUT_ENV = "HSRBEAM_OUT"


class UsageError(Exception):
    pass


class Run:
    """Resolved config, output directory and provenance for one invocation."""

    def __init__(self, args):
        self.cfg: ExperimentConfig = load_config(args.config)
        if args.agent:
            self.cfg.agents = tuple(dict.fromkeys(args.agent))
        self.seeds = (args.seed,) if args.seed is not None else self.cfg.seeds
        out = args.out or os.environ.get(OUT_ENV) or self.cfg.output_dir
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.hash = self.cfg.config_hash()
        self.command = args.command
        self._model = None

    @property
    def model(self) -> LinkModel:
        if self._model is None:
            self._model = LinkModel(self.cfg.scenario, self.cfg.panels)
        return self._model

    def preamble(self, seed, **extra) -> list[str]:
        lines = [f"hsrbeam {__version__} {self.command}", f"config_hash={self.hash}", f"seed={seed}"]
        lines += [f"{k}={v}" for k, v in extra.items()]
        return lines

    def provenance(self, seed) -> dict:
        return {"hsrbeam_version": __version__, "command": self.command,
                "config_hash": self.hash, "seed": seed}

    def subtitle(self, seed) -> str:
        return f"config {self.hash}, seed {seed}"

    def path(self, name: str) -> Path:
        return self.out / name


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _policy_vector(run: Run, model: LinkModel, beams) -> RspVector:
    return rsp_vector(beams, model.cfg, model.panels, model=model)


def _train(run: Run, agent: str, seed: int):
    """Train one learned agent; returns (trained object, report)."""
    hp = run.cfg.hyperparams_for(agent)
    log.info("training %s seed %d (%d episodes)", agent, seed, hp.episodes)
    if agent == "qlearning":
        return agents.train_qlearning(run.model, hp, seed)
    if agent == "dqn":
        return agents.train_dqn(run.model, hp, seed)
    return agents.train_dqn_codebook16(run.model, hp, seed)


def _run_agent(run: Run, agent: str, seed: int):
    """RSP vector and per-bin reward for one agent at one seed."""
    if agent == "fba":
        v = agents.run_fba(run.model)
        v = _policy_vector(run, run.model, v.beams)
        return v, np.zeros(len(v)), None
    if agent == "gamma_greedy":
        model = LinkModel(run.cfg.gamma_greedy_scenario(), run.cfg.panels)
        beams, _ = agents.run_gamma_greedy(model)
        v = _policy_vector(run, model, beams)
        return v, v.values_dbm - model.fba_rsp(), None
    _, report = _train(run, agent, seed)
    v = _policy_vector(run, run.model, report.policy)
    return v, v.values_dbm - run.model.fba_rsp(), report


def cmd_simulate(run: Run) -> None:
    curves, summary = [], {}
    for agent in run.cfg.agents:
        seeds = run.seeds if agent in LEARNED_AGENTS else run.seeds[:1]
        per_seed = {}
        for seed in seeds:
            v, reward, _ = _run_agent(run, agent, seed)
            label = f"{agent}_s{seed}" if agent in LEARNED_AGENTS else agent
            write_rsp_csv(run.path(f"rsp_{label}.csv"), v, reward, run.preamble(seed, agent=agent))
            curves.append((agent, seed, v, reward))
            per_seed[str(seed)] = {"average_reward_db": float(np.mean(reward)), **summarize(v, run.model.cfg)}
        avgs = [d["average_reward_db"] for d in per_seed.values()]
        summary[agent] = {"average_reward_db": float(np.mean(avgs)), "per_seed": per_seed}
        log.info("%s: average reward %.3f dB", agent, summary[agent]["average_reward_db"])
    if len(curves) > 1:
        with open(run.path("rsp_combined.csv"), "w", newline="") as fh:
            for line in run.preamble(",".join(map(str, run.seeds))):
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["agent", "seed", "bin_index", "position_m", "theta_b", "phi_b", "rsp_dbm", "reward_db"])
            for agent, seed, v, reward in curves:
                for i in range(len(v)):
                    w.writerow([agent, seed, i + 1, repr(float(v.positions_m[i])), repr(float(v.beams[i, 0])),
                                repr(float(v.beams[i, 1])), repr(float(v.values_dbm[i])), repr(float(reward[i]))])
    _write_json(run.path("summary.json"), {**run.provenance(list(run.seeds)), "agents": summary})
    first = {}
    for agent, _, v, _ in curves:
        first.setdefault(agent, (v.positions_m, v.values_dbm))
    sub = run.subtitle(run.seeds[0])
    x0 = run.cfg.scenario.rrh_offset_m
    plots.rsp_comparison(first, run.path("rsp_comparison.png"), x0, sub)
    plots.rsp_comparison(first, run.path("rsp_comparison_zoom.png"), x0, sub, zoom=(x0 - 300, x0 + 300))


def cmd_train(run: Run) -> None:
    chosen = [a for a in run.cfg.agents if a in LEARNED_AGENTS]
    if not chosen:
        raise UsageError(f"train needs a learned agent ({', '.join(LEARNED_AGENTS)})")
    fba = run.model.fba_rsp()
    for agent in chosen:
        for seed in run.seeds:
            trained, report = _train(run, agent, seed)
            stem = f"{agent}_s{seed}"
            if agent == "qlearning":
                agents.save_qtable(trained, run.path(stem + ".qtable"))
            else:
                nn.save_params(trained, run.path(stem + ".weights"))
            _write_json(run.path(stem + "_report.json"), {**run.provenance(seed), **report.to_dict()})
            v = _policy_vector(run, run.model, report.policy)
            write_rsp_csv(run.path(stem + "_policy.csv"), v, v.values_dbm - fba,
                          run.preamble(seed, agent=agent))
            plots.training_curve(report.episode_returns, run.path(stem + "_training.png"),
                                 plots.LABELS[agent], run.subtitle(seed))
            log.info("%s seed %d: average reward %.3f dB", agent, seed, report.average_reward_db)


def _load_agent(run: Run, weights: Path, agent: str | None):
    """Rebuild a greedy agent from a weight or Q-table file."""
    if not weights.is_file():
        raise FileNotFoundError(f"weight file not found: {weights}")
    with open(weights, "rb") as fh:
        head = fh.read(8)
    if head == nn.WEIGHT_MAGIC:
        params = nn.load_params(weights)
        n_out = params.layer_sizes[-1]
        kind = agent or {9: "dqn", 16: "dqn16"}.get(n_out)
        if kind not in ("dqn", "dqn16"):
            raise nn.WeightFileError(f"{weights}: network with {n_out} outputs matches no agent")
        env = BeamEnv(run.model, codebook=CODEBOOK16 if kind == "dqn16" else None)
        if n_out != env.n_actions:
            raise nn.WeightFileError(f"{weights}: {n_out} outputs but {kind} has {env.n_actions} actions")
        return kind, agents.DQNAgent(params, env), env
    table = agents.load_qtable(weights)
    env = BeamEnv(run.model)
    if table.shape != (env.n_bins, env.n_actions):
        raise nn.WeightFileError(f"{weights}: Q-table shape {table.shape} does not fit the scenario")
    return "qlearning", agents.QTableAgent(table, env), env


def _single_agent(run: Run, args) -> str | None:
    if args.agent and len(set(args.agent)) > 1:
        raise UsageError("give at most one --agent with --weights")
    return args.agent[0] if args.agent else None


def cmd_eval(run: Run, args) -> None:
    kind, agent, env = _load_agent(run, Path(args.weights), _single_agent(run, args))
    seed = run.seeds[0]
    ro = agents.greedy_rollout(env, agent.act)
    v = _policy_vector(run, run.model, ro.beams)
    stem = f"eval_{kind}_s{seed}"
    write_rsp_csv(run.path(stem + ".csv"), v, ro.rewards, run.preamble(seed, agent=kind))
    _write_json(run.path(stem + ".json"), {**run.provenance(seed), "agent": kind,
                                          "weights": Path(args.weights).name,
                                          "average_reward_db": ro.average_reward,
                                          **summarize(v, run.model.cfg)})
    log.info("%s: average reward %.3f dB", kind, ro.average_reward)


def cmd_oracle(run: Run, args) -> None:
    oc = run.cfg.oracle
    step = args.step if args.step is not None else oc.step_deg
    res = oracle.grid_search(run.model, step, oc.budget)
    seed = run.seeds[0]
    oracle.write_golden_csv(run.path("oracle_golden.csv"), res, run.preamble(seed, step_deg=step))
    x = run.model.positions
    plots.rsp_comparison({"oracle": (x, res.rsp_dbm), "fba": (x, run.model.fba_rsp())},
                         run.path("oracle.png"), run.cfg.scenario.rrh_offset_m, run.subtitle(seed))
    log.info("oracle: mean gain over FBA %.3f dB", float(np.mean(res.rsp_dbm - run.model.fba_rsp())))


def cmd_cycles(run: Run, args) -> None:
    cc = run.cfg.cycles
    count = args.cycles if args.cycles is not None else cc.count
    seed = run.seeds[0]
    if args.database:
        path = Path(args.database)
        if not path.is_file():
            raise FileNotFoundError(f"database file not found: {path}")
        db = beamdb.load_database(path)
        kind = _single_agent(run, args) or path.stem
        env = BeamEnv(run.model)
    elif args.weights:
        kind, agent, env = _load_agent(run, Path(args.weights), _single_agent(run, args))
        db = beamdb.build_database(agent, env, cc.depth, cc.p_utilize)
        beamdb.save_database(db, run.path(f"{kind}_s{seed}.beamdb"))
    else:
        raise UsageError("cycles needs --weights or --database")
    if len(db.entries) != env.n_bins:
        raise beamdb.DatabaseFormatError(f"database has {len(db.entries)} bins, scenario has {env.n_bins}")
    st = beamdb.run_test_cycles(db, env, count, seed)
    stem = f"cycles_{kind}_s{seed}"
    beamdb.write_stats_csv(run.path(stem + ".csv"), st,
                           run.preamble(seed, agent=kind, cycles=count, p_utilize=db.p_utilize, depth=db.depth))
    plots.cycle_stats(st, run.path(stem + ".png"), plots.LABELS.get(kind, kind), run.subtitle(seed))
    log.info("%s: mean gap %.3f dB, mean std %.3f dB", kind, float(st.mean.mean()), float(st.std.mean()))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config (default: built-in scenario)")
    common.add_argument("--seed", type=int, help="run this seed only, overriding the config's list")
    common.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else the config's output_dir)")
    common.add_argument("--agent", action="append", choices=AGENT_NAMES,
                        help="agent to run; repeat for several (default: the config's list)")
    common.add_argument("-q", "--quiet", action="store_true", help="only report errors")

    p = argparse.ArgumentParser(prog="hsrbeam", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hsrbeam {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run agents end to end, write RSP curves")
    sub.add_parser("train", parents=[common], help="train learned agents, save weights and reports")
    ev = sub.add_parser("eval", parents=[common], help="greedy rollout of saved weights")
    ev.add_argument("--weights", required=True, help=".weights or .qtable file from train")
    orc = sub.add_parser("oracle", parents=[common], help="exhaustive grid search, golden CSV")
    orc.add_argument("--step", type=float, help="grid step in degrees (default from config)")
    cy = sub.add_parser("cycles", parents=[common], help="beam-database test cycles")
    cy.add_argument("--weights", help="build the database from these weights")
    cy.add_argument("--database", help="reuse a saved database file instead")
    cy.add_argument("--cycles", type=int, help="number of cycles M (default from config)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="hsrbeam: %(message)s", stream=sys.stderr, force=True)
    try:
        run = Run(args)
        if args.command == "simulate":
            cmd_simulate(run)
        elif args.command == "train":
            cmd_train(run)
        elif args.command == "eval":
            cmd_eval(run, args)
        elif args.command == "oracle":
            cmd_oracle(run, args)
        else:
            cmd_cycles(run, args)
    except (ConfigError, UsageError) as exc:
        log.error("error: %s", exc)
        return 2
    except FileNotFoundError as exc:
        log.error("error: %s", exc)
        return 2 if args.config and not Path(args.config).exists() else 1
    except (nn.WeightFileError, beamdb.DatabaseFormatError, DomainError, agents.TrainingDiverged,
            oracle.BudgetExceeded, ValueError, OSError) as exc:
        log.error("error: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
