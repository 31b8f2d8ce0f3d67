"""Element radiation pattern and planar-array combining gain."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import ConfigError, LcsAngles, PanelOrientation, ScenarioConfig
from .geometry import default_mr_orientation, default_rrh_orientation

GAIN_FLOOR_DB = -120.0
_MAG2_FLOOR = 1e-12


@dataclass(frozen=True)
class PanelConfig:
    n_h: int = 4
    n_v: int = 2
    d_v_over_lambda: float = 0.5
    d_h_over_lambda: float = 0.5
    theta_3db: float = 65.0
    phi_3db: float = 65.0
    sla_v: float = 30.0
    a_max: float = 30.0
    element_gain_max_dbi: float = 8.0
    orientation: PanelOrientation = field(default_factory=PanelOrientation)

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ConfigError("panel needs at least one element in each direction")
        if self.theta_3db <= 0 or self.phi_3db <= 0:
            raise ConfigError("3 dB beamwidths must be positive")
        if min(self.sla_v, self.a_max, self.element_gain_max_dbi) < 0:
            raise ConfigError("SLA_V, A_max and A_E,max must be non-negative")

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v


class BeamDirection(NamedTuple):
    theta_b_deg: float
    phi_b_deg: float


class Panels(NamedTuple):
    rrh: PanelConfig
    mr: PanelConfig


def rrh_panel(cfg: ScenarioConfig, **overrides) -> PanelConfig:
    """Trackside transmitter panel with the default Table-III values."""
    kw = dict(theta_3db=65.0, phi_3db=65.0, sla_v=30.0, a_max=30.0,
              element_gain_max_dbi=8.0, orientation=default_rrh_orientation(cfg))
    kw.update(overrides)
    return PanelConfig(**kw)


def mr_panel(cfg: ScenarioConfig, **overrides) -> PanelConfig:
    """Rooftop mobile-relay panel with the default Table-III values."""
    kw = dict(theta_3db=90.0, phi_3db=90.0, sla_v=25.0, a_max=25.0,
              element_gain_max_dbi=5.0, orientation=default_mr_orientation(cfg))
    kw.update(overrides)
    return PanelConfig(**kw)


def default_panels(cfg: ScenarioConfig) -> Panels:
    return Panels(rrh_panel(cfg), mr_panel(cfg))


def element_attenuation(lcs: LcsAngles, p: PanelConfig) -> float:
    theta, phi = lcs
    a_v = -min(12.0 * ((theta - 90.0) / p.theta_3db) ** 2, p.sla_v)
    a_h = -min(12.0 * (phi / p.phi_3db) ** 2, p.a_max)
    return -min(-(a_v + a_h), p.a_max)


def element_gain(lcs: LcsAngles, p: PanelConfig) -> float:
    return p.element_gain_max_dbi + element_attenuation(lcs, p)


def array_gain(lcs_arrival: LcsAngles, theta_b_deg, phi_b_deg, p: PanelConfig):
    """Composite array gain in dB towards ``lcs_arrival`` for steering angles.

    ``theta_b_deg`` / ``phi_b_deg`` may be scalars or broadcastable arrays; the
    result has their broadcast shape.  Magnitudes below 1e-12 report -120 dB.
    """
    th_e = np.radians(lcs_arrival[0])
    ph_e = np.radians(lcs_arrival[1])
    th_b = np.radians(np.asarray(theta_b_deg, dtype=float))[..., None, None]
    ph_b = np.radians(np.asarray(phi_b_deg, dtype=float))[..., None, None]
    n = np.arange(p.n_v)[:, None]  # (n - 1) for n = 1..N_V
    m = np.arange(p.n_h)[None, :]
    v = np.exp(1j * 2 * np.pi * (n * p.d_v_over_lambda * np.cos(th_e)
                                 + m * p.d_h_over_lambda * np.sin(th_e) * np.sin(ph_e)))
    w = np.exp(1j * 2 * np.pi * (n * p.d_v_over_lambda * np.sin(th_b)
                                 - m * p.d_h_over_lambda * np.cos(th_b) * np.sin(ph_b)))
    w = w / np.sqrt(p.n_h * p.n_v)
    mag2 = np.abs((w * v).sum(axis=(-2, -1))) ** 2
    out = np.where(mag2 < _MAG2_FLOOR, GAIN_FLOOR_DB,
                   10.0 * np.log10(np.maximum(mag2, _MAG2_FLOOR)))
    if out.ndim == 0:
        return float(out)
    return out
