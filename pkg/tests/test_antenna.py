import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsrbeam.antenna import (GAIN_FLOOR_DB, PanelConfig, array_gain, element_attenuation, element_gain,
                             mr_panel, rrh_panel)
from hsrbeam.geometry import ConfigError, LcsAngles


def aligned_beam(theta_e, phi_e):
    """Steering angles that make every weighted phasor add in phase."""
    return -math.degrees(math.asin(math.cos(math.radians(theta_e)))), phi_e


def test_boresight_no_attenuation(cfg):
    assert element_attenuation(LcsAngles(90.0, 0.0), rrh_panel(cfg)) == 0.0


def test_vertical_half_power(cfg):
    p = rrh_panel(cfg)
    assert element_attenuation(LcsAngles(90.0 + p.theta_3db, 0.0), p) == pytest.approx(-12.0)


def test_mr_back_lobe_cap(cfg):
    assert element_attenuation(LcsAngles(0.0, 180.0), mr_panel(cfg)) == pytest.approx(-25.0)


def test_peak_gains(cfg):
    assert element_gain(LcsAngles(90.0, 0.0), rrh_panel(cfg)) == 8.0
    assert element_gain(LcsAngles(90.0, 0.0), mr_panel(cfg)) == 5.0
    assert element_gain(LcsAngles(0.0, 180.0), mr_panel(cfg)) == pytest.approx(-20.0)


@settings(max_examples=300, deadline=None)
@given(theta=st.floats(0.0, 180.0), phi=st.floats(-180.0, 180.0))
def test_attenuation_bounds(cfg, theta, phi):
    p = rrh_panel(cfg)
    a = element_attenuation(LcsAngles(theta, phi), p)
    assert -p.a_max <= a <= 0.0


def test_broadside_full_gain():
    p = PanelConfig(n_h=4, n_v=2)
    assert array_gain(LcsAngles(90.0, 0.0), 0.0, 0.0, p) == pytest.approx(10 * math.log10(8), abs=1e-12)
    assert array_gain(LcsAngles(90.0, 0.0), 0.0, 0.0, p) == pytest.approx(9.031, abs=1e-3)


@settings(max_examples=100, deadline=None)
@given(te=st.floats(0, 180), pe=st.floats(-180, 180), tb=st.floats(-90, 90), pb=st.floats(-180, 180))
def test_single_element_is_flat(te, pe, tb, pb):
    p = PanelConfig(n_h=1, n_v=1)
    assert array_gain(LcsAngles(te, pe), tb, pb, p) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(te=st.floats(0.5, 179.5), pe=st.floats(-180, 180), nh=st.integers(1, 8), nv=st.integers(1, 4))
def test_aligned_phasors_reach_bound(te, pe, nh, nv):
    p = PanelConfig(n_h=nh, n_v=nv)
    tb, pb = aligned_beam(te, pe)
    assert array_gain(LcsAngles(te, pe), tb, pb, p) == pytest.approx(10 * math.log10(nh * nv), abs=1e-9)


def test_vectorised_matches_scalar(cfg):
    p = mr_panel(cfg)
    lcs = LcsAngles(80.0, 40.0)
    tb = np.array([-10.0, 0.0, 25.0])
    pb = np.array([[0.0], [33.0]])
    grid = array_gain(lcs, tb, pb, p)
    assert grid.shape == (2, 3)
    for i in range(2):
        for j in range(3):
            assert grid[i, j] == array_gain(lcs, float(tb[j]), float(pb[i, 0]), p)


def test_null_reports_floor():
    # two horizontal elements half a wavelength apart cancel exactly at endfire
    p = PanelConfig(n_h=2, n_v=1)
    assert array_gain(LcsAngles(90.0, 90.0), 0.0, 0.0, p) == GAIN_FLOOR_DB


@pytest.mark.parametrize("bad", [{"n_h": 0}, {"theta_3db": 0.0}, {"a_max": -1.0}])
def test_panel_validation(bad):
    with pytest.raises(ConfigError):
        PanelConfig(**bad)
