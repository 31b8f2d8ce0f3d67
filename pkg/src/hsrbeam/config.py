"""Experiment configuration: one YAML file with nested sections.

Every key is optional; an empty file reproduces the default scenario.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .agents import Hyperparams
from .antenna import PanelConfig, Panels, mr_panel, rrh_panel
from .geometry import ConfigError, PanelOrientation, ScenarioConfig

AGENT_NAMES = ("fba", "gamma_greedy", "qlearning", "dqn", "dqn16")
LEARNED_AGENTS = ("qlearning", "dqn", "dqn16")

_TOP_KEYS = {"scenario", "rrh_panel", "mr_panel", "agents", "hyperparams", "agent_hyperparams",
             "gamma_greedy", "seeds", "output_dir", "cycles", "oracle"}


@dataclass(frozen=True)
class CycleConfig:
    count: int = 300
    depth: int = 5
    p_utilize: float = 0.9


@dataclass(frozen=True)
class OracleConfig:
    step_deg: float = 1.0
    budget: int = 100_000_000


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    panels: Panels | None = None
    agents: tuple[str, ...] = AGENT_NAMES
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    agent_hyperparams: dict[str, Hyperparams] = field(default_factory=dict)
    gamma_greedy_bin_radius_m: float = 0.5
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    output_dir: str = "out"
    cycles: CycleConfig = field(default_factory=CycleConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        if self.panels is None:
            self.panels = Panels(rrh_panel(self.scenario), mr_panel(self.scenario))
        if not self.seeds:
            raise ConfigError("seeds: list must not be empty")
        for a in self.agents:
            if a not in AGENT_NAMES:
                raise ConfigError(f"agents: unknown agent {a!r} (choose from {', '.join(AGENT_NAMES)})")

    def hyperparams_for(self, agent: str) -> Hyperparams:
        return self.agent_hyperparams.get(agent, self.hyperparams)

    def gamma_greedy_scenario(self) -> ScenarioConfig:
        return dataclasses.replace(self.scenario, bin_radius_m=self.gamma_greedy_bin_radius_m)

    def to_dict(self) -> dict:
        return {
            "scenario": dataclasses.asdict(self.scenario),
            "rrh_panel": dataclasses.asdict(self.panels.rrh),
            "mr_panel": dataclasses.asdict(self.panels.mr),
            "agents": list(self.agents),
            "hyperparams": dataclasses.asdict(self.hyperparams),
            "agent_hyperparams": {k: dataclasses.asdict(v) for k, v in sorted(self.agent_hyperparams.items())},
            "gamma_greedy": {"bin_radius_m": self.gamma_greedy_bin_radius_m},
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "cycles": dataclasses.asdict(self.cycles),
            "oracle": dataclasses.asdict(self.oracle),
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _build(cls, section: str, data, **extra):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected a mapping, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{section}: unknown field(s) {', '.join(unknown)}")
    kw = {}
    for k, v in data.items():
        kw[k] = tuple(v) if isinstance(v, list) else v
    kw.update(extra)
    try:
        return cls(**kw)
    except ConfigError as exc:
        raise ConfigError(f"{section}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def _panel(section: str, data, scenario: ScenarioConfig, factory) -> PanelConfig:
    data = dict(data or {})
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected a mapping")
    base = factory(scenario)
    orient = {k: data.pop(k) for k in ("bearing_deg", "downtilt_deg") if k in data}
    if orient:
        merged = {"bearing_deg": base.orientation.bearing_deg,
                  "downtilt_deg": base.orientation.downtilt_deg, **orient}
        data["orientation"] = _build(PanelOrientation, f"{section}.orientation", merged)
    kw = {f.name: getattr(base, f.name) for f in dataclasses.fields(PanelConfig)}
    unknown = sorted(set(data) - set(kw))
    if unknown:
        raise ConfigError(f"{section}: unknown field(s) {', '.join(unknown)}")
    kw.update(data)
    try:
        return PanelConfig(**kw)
    except (ConfigError, TypeError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


# The position-only DQN needs reward clipping and a shorter horizon to stay
# stable; the tabular and codebook agents keep the plain defaults.
AGENT_DEFAULT_OVERRIDES = {"dqn": {"reward_scale": 10.0, "reward_clip": 1.0, "discount": 0.5}}


def from_dict(raw: dict | None) -> ExperimentConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping of sections")
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"top level: unknown section(s) {', '.join(unknown)}")
    scenario = _build(ScenarioConfig, "scenario", raw.get("scenario"))
    panels = Panels(_panel("rrh_panel", raw.get("rrh_panel"), scenario, rrh_panel),
                    _panel("mr_panel", raw.get("mr_panel"), scenario, mr_panel))
    hp = _build(Hyperparams, "hyperparams", raw.get("hyperparams"))
    per_agent = {}
    user = raw.get("agent_hyperparams") or {}
    for name in user:
        if name not in LEARNED_AGENTS:
            raise ConfigError(f"agent_hyperparams: {name!r} is not a learned agent")
    for name in sorted(set(user) | set(AGENT_DEFAULT_OVERRIDES)):
        sub = {**AGENT_DEFAULT_OVERRIDES.get(name, {}), **(user.get(name) or {})}
        merged = {**dataclasses.asdict(hp), **sub}
        per_agent[name] = _build(Hyperparams, f"agent_hyperparams.{name}", merged)
    gg = raw.get("gamma_greedy") or {}
    if set(gg) - {"bin_radius_m"}:
        raise ConfigError("gamma_greedy: only 'bin_radius_m' is supported")
    seeds = raw.get("seeds", [0, 1, 2, 3, 4])
    if isinstance(seeds, int):
        seeds = [seeds]
    try:
        seeds = tuple(int(s) for s in seeds)
    except (TypeError, ValueError):
        raise ConfigError("seeds: expected a list of integers") from None
    agents = raw.get("agents", list(AGENT_NAMES))
    if isinstance(agents, str):
        agents = [agents]
    cfg = ExperimentConfig(
        scenario=scenario, panels=panels, agents=tuple(agents), hyperparams=hp,
        agent_hyperparams=per_agent,
        gamma_greedy_bin_radius_m=float(gg.get("bin_radius_m", 0.5)),
        seeds=seeds, output_dir=str(raw.get("output_dir", "out")),
        cycles=_build(CycleConfig, "cycles", raw.get("cycles")),
        oracle=_build(OracleConfig, "oracle", raw.get("oracle")),
    )
    try:
        cfg.gamma_greedy_scenario()
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"gamma_greedy: {exc}") from None
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return from_dict({})
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: malformed YAML{where}: {getattr(exc, 'problem', exc)}") from None
    return from_dict(raw)
