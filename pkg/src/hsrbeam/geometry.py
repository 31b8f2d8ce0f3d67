"""Rail / RRH layout, location bins, distances and angle frames.

Frame convention (GCS): x along the rail in the direction of travel, y
towards the trackside RRH, z up.  Zenith angles are measured from +z,
azimuths from +x towards +y.  All public functions take and return degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

SPEED_OF_LIGHT = 3.0e8


class ConfigError(ValueError):
    """Raised for physically invalid or inconsistent configuration values."""


@dataclass(frozen=True)
class ScenarioConfig:
    rail_length_m: float = 2000.0
    bin_radius_m: float = 2.5
    rrh_offset_m: float = 700.0
    d_min_m: float = 150.0
    d_s_m: float = 700.0
    rrh_height_m: float = 15.0
    mr_height_m: float = 5.0
    carrier_hz: float = 30e9
    tx_power_dbm: float = 31.0
    avg_building_height_m: float = 5.0
    blockage_prob: float = 0.0
    beam_step_deg: float = 3.0
    tx_beam_deg: tuple[float, float] = (0.0, 0.0)
    benchmark_beam_deg: tuple[float, float] = (0.0, 0.0)
    theta_b_range_deg: tuple[float, float] = (-90.0, 90.0)
    phi_b_range_deg: tuple[float, float] = (-180.0, 180.0)

    def __post_init__(self):
        if self.rail_length_m <= 0 or self.bin_radius_m <= 0:
            raise ConfigError("rail_length_m and bin_radius_m must be positive")
        ratio = self.rail_length_m / (2.0 * self.bin_radius_m)
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(
                f"rail_length_m={self.rail_length_m} is not an integer multiple of "
                f"2*bin_radius_m={2 * self.bin_radius_m}"
            )
        if not 5.0 <= self.avg_building_height_m <= 50.0:
            raise ConfigError("avg_building_height_m must lie in [5, 50] m")
        if not self.rrh_height_m > self.mr_height_m > 0:
            raise ConfigError("require rrh_height_m > mr_height_m > 0")
        if self.carrier_hz <= 0:
            raise ConfigError("carrier_hz must be positive")
        if not 0.0 <= self.blockage_prob <= 1.0:
            raise ConfigError("blockage_prob must lie in [0, 1]")
        if self.d_min_m <= 0:
            raise ConfigError("d_min_m must be positive")
        if self.beam_step_deg <= 0:
            raise ConfigError("beam_step_deg must be positive")
        for name in ("theta_b_range_deg", "phi_b_range_deg"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name} lower bound exceeds upper bound")
        object.__setattr__(self, "tx_beam_deg", tuple(float(v) for v in self.tx_beam_deg))
        object.__setattr__(
            self, "benchmark_beam_deg", tuple(float(v) for v in self.benchmark_beam_deg)
        )
        object.__setattr__(
            self, "theta_b_range_deg", tuple(float(v) for v in self.theta_b_range_deg)
        )
        object.__setattr__(self, "phi_b_range_deg", tuple(float(v) for v in self.phi_b_range_deg))

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


class GcsAngles(NamedTuple):
    theta_deg: float
    phi_deg: float


class LcsAngles(NamedTuple):
    theta_deg: float
    phi_deg: float


@dataclass(frozen=True)
class PanelOrientation:
    bearing_deg: float = 0.0
    downtilt_deg: float = 0.0

    def __post_init__(self):
        if not -180.0 < self.bearing_deg <= 180.0:
            raise ConfigError("bearing_deg must lie in (-180, 180]")
        if not -90.0 <= self.downtilt_deg <= 90.0:
            raise ConfigError("downtilt_deg must lie in [-90, 90]")


class Side(Enum):
    RRH_TX = "rrh"
    MR_RX = "mr"


def bin_count(cfg: ScenarioConfig) -> int:
    ratio = cfg.rail_length_m / (2.0 * cfg.bin_radius_m)
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ConfigError("rail length is not an integer number of location bins")
    return int(round(ratio)) + 1


def bin_position(n: int, cfg: ScenarioConfig) -> float:
    """Centre of location bin ``n`` (1-based) along the rail, in metres."""
    if not 1 <= n <= bin_count(cfg):
        raise IndexError(f"bin index {n} outside [1, {bin_count(cfg)}]")
    return (n - 1) * 2.0 * cfg.bin_radius_m


def bin_positions(cfg: ScenarioConfig) -> np.ndarray:
    return np.arange(bin_count(cfg)) * 2.0 * cfg.bin_radius_m


def distances(x, cfg: ScenarioConfig):
    """Return ``(d2D, d3D)`` between the MR at rail position ``x`` and the RRH."""
    dx = np.asarray(x, dtype=float) - cfg.rrh_offset_m
    d2d = np.sqrt(dx * dx + cfg.d_min_m**2)
    dh = cfg.rrh_height_m - cfg.mr_height_m
    d3d = np.sqrt(d2d * d2d + dh * dh)
    if np.ndim(d2d) == 0:
        return float(d2d), float(d3d)
    return d2d, d3d


def link_vector(x: float, side: Side, cfg: ScenarioConfig) -> np.ndarray:
    """GCS vector from the queried side's antenna towards the other end."""
    mr = np.array([x, 0.0, cfg.mr_height_m])
    rrh = np.array([cfg.rrh_offset_m, cfg.d_min_m, cfg.rrh_height_m])
    return rrh - mr if side is Side.MR_RX else mr - rrh


def _vector_to_angles(v: np.ndarray) -> tuple[float, float]:
    # atan2 form stays accurate near the poles, where acos loses digits
    theta = math.degrees(math.atan2(math.hypot(v[0], v[1]), v[2]))
    phi = math.degrees(math.atan2(v[1], v[0]))
    if phi <= -180.0:
        phi += 360.0
    return theta, phi


def _angles_to_vector(theta_deg: float, phi_deg: float) -> np.ndarray:
    t = math.radians(theta_deg)
    p = math.radians(phi_deg)
    return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])


def arrival_angles_gcs(x: float, side: Side, cfg: ScenarioConfig) -> GcsAngles:
    return GcsAngles(*_vector_to_angles(link_vector(x, side, cfg)))


def _rotation(o: PanelOrientation) -> np.ndarray:
    """Matrix taking panel-local vectors to GCS (yaw by bearing after tilt)."""
    a = math.radians(o.bearing_deg)
    b = math.radians(o.downtilt_deg)
    rz = np.array([[math.cos(a), -math.sin(a), 0.0], [math.sin(a), math.cos(a), 0.0], [0.0, 0.0, 1.0]])
    # positive downtilt tips the boresight below the horizon
    ry = np.array([[math.cos(b), 0.0, math.sin(b)], [0.0, 1.0, 0.0], [-math.sin(b), 0.0, math.cos(b)]])
    return rz @ ry


def gcs_to_lcs(a: GcsAngles, o: PanelOrientation) -> LcsAngles:
    v = _rotation(o).T @ _angles_to_vector(a.theta_deg, a.phi_deg)
    return LcsAngles(*_vector_to_angles(v))


def lcs_to_gcs(a: LcsAngles, o: PanelOrientation) -> GcsAngles:
    v = _rotation(o) @ _angles_to_vector(a.theta_deg, a.phi_deg)
    return GcsAngles(*_vector_to_angles(v))


def default_rrh_orientation(cfg: ScenarioConfig) -> PanelOrientation:
    # boresight aims at the rail abeam the neighbouring RRH, one spacing back
    bearing = math.degrees(math.atan2(-cfg.d_min_m, -cfg.d_s_m))
    return PanelOrientation(bearing_deg=bearing, downtilt_deg=0.0)


def default_mr_orientation(cfg: ScenarioConfig) -> PanelOrientation:
    bearing = math.degrees(math.atan2(cfg.d_min_m, cfg.d_s_m))
    return PanelOrientation(bearing_deg=bearing, downtilt_deg=0.0)
