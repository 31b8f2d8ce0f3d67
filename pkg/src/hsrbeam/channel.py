"""LOS large-scale path loss with a break-point distance."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import SPEED_OF_LIGHT, ScenarioConfig


class DomainError(ValueError):
    """The path-loss model is not defined at the requested distance."""


@dataclass(frozen=True)
class PathLossResult:
    pl_db: float
    branch: str  # "PL1" or "PL2"
    d_bp_m: float


def break_point_distance(cfg: ScenarioConfig) -> float:
    return 2.0 * math.pi * cfg.rrh_height_m * cfg.mr_height_m * cfg.carrier_hz / SPEED_OF_LIGHT


def _pl1(d3d: float, cfg: ScenarioConfig) -> float:
    h = cfg.avg_building_height_m
    fc_ghz = cfg.carrier_hz / 1e9
    h_pow = h**1.72
    return (
        20.0 * math.log10(40.0 * math.pi * d3d * fc_ghz / 3.0)
        - min(0.044 * h_pow, 14.77)
        + min(0.03 * h_pow, 10.0) * math.log10(d3d)
        + 0.002 * math.log10(h) * d3d
    )


def path_loss(d2d: float, d3d: float, cfg: ScenarioConfig) -> PathLossResult:
    if d2d < 10.0:
        raise DomainError(f"d2D={d2d:.3f} m below the 10 m validity floor")
    if d2d > 10_000.0:
        raise DomainError(f"d2D={d2d:.3f} m beyond the 10 km validity ceiling")
    d_bp = break_point_distance(cfg)
    if d2d <= d_bp:
        return PathLossResult(_pl1(d3d, cfg), "PL1", d_bp)
    dh = cfg.rrh_height_m - cfg.mr_height_m
    d3d_bp = math.sqrt(d_bp * d_bp + dh * dh)
    pl = _pl1(d3d_bp, cfg) + 40.0 * math.log10(d3d / d3d_bp)
    return PathLossResult(pl, "PL2", d_bp)
