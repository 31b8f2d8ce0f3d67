import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsrbeam.geometry import (ConfigError, GcsAngles, LcsAngles, PanelOrientation, ScenarioConfig, Side,
                              arrival_angles_gcs, bin_count, bin_position, bin_positions, distances,
                              gcs_to_lcs, lcs_to_gcs)


@pytest.mark.parametrize("length,radius,expected", [(2000, 2.5, 401), (5, 2.5, 2), (100, 0.5, 101)])
def test_bin_count(length, radius, expected):
    assert bin_count(ScenarioConfig(rail_length_m=length, bin_radius_m=radius)) == expected


@pytest.mark.parametrize("n,x", [(1, 0.0), (141, 700.0), (401, 2000.0)])
def test_bin_position(cfg, n, x):
    assert bin_position(n, cfg) == x


def test_bin_position_out_of_range(cfg):
    with pytest.raises(IndexError):
        bin_position(0, cfg)
    with pytest.raises(IndexError):
        bin_position(402, cfg)


def test_bin_positions_match_scalar(cfg):
    xs = bin_positions(cfg)
    assert len(xs) == 401
    assert all(xs[n - 1] == bin_position(n, cfg) for n in (1, 2, 141, 400, 401))


def test_non_integer_bins_rejected():
    with pytest.raises(ConfigError, match="integer multiple"):
        ScenarioConfig(rail_length_m=2001, bin_radius_m=2.5)


@pytest.mark.parametrize("bad", [
    {"avg_building_height_m": 4.0},
    {"mr_height_m": 15.0},
    {"mr_height_m": 0.0},
    {"blockage_prob": 1.5},
    {"carrier_hz": 0.0},
    {"beam_step_deg": 0.0},
    {"theta_b_range_deg": (10, -10)},
])
def test_invalid_scenario(bad):
    with pytest.raises(ConfigError):
        ScenarioConfig(**bad)


@pytest.mark.parametrize("x,d2d,d3d", [
    (700.0, 150.0, math.hypot(150.0, 10.0)),
    (0.0, math.hypot(700.0, 150.0), None),
    (2000.0, math.hypot(1300.0, 150.0), None),
])
def test_distances(cfg, x, d2d, d3d):
    got2, got3 = distances(x, cfg)
    assert got2 == pytest.approx(d2d, abs=1e-9)
    assert got3 == pytest.approx(math.hypot(d2d, 10.0) if d3d is None else d3d, abs=1e-9)


def test_distance_examples_numeric(cfg):
    assert distances(700.0, cfg)[1] == pytest.approx(150.333, abs=5e-4)
    assert distances(0.0, cfg)[0] == pytest.approx(715.891, abs=5e-4)
    assert distances(2000.0, cfg)[0] == pytest.approx(1308.625, abs=5e-4)


def test_arrival_abeam_mr(cfg):
    a = arrival_angles_gcs(700.0, Side.MR_RX, cfg)
    # RRH is 10 m higher and 150 m to the side
    assert a.theta_deg == pytest.approx(math.degrees(math.acos(10 / math.hypot(150, 10))), abs=1e-9)
    assert a.theta_deg == pytest.approx(86.19, abs=0.01)
    assert abs(a.phi_deg) == pytest.approx(90.0, abs=1e-9)


def test_arrival_equal_heights_is_horizontal():
    c = ScenarioConfig(rrh_height_m=5.0 + 1e-12, mr_height_m=5.0)
    assert arrival_angles_gcs(300.0, Side.MR_RX, c).theta_deg == pytest.approx(90.0, abs=1e-6)


def test_arrival_far_along_rail_tends_to_horizontal():
    c = ScenarioConfig(rail_length_m=1e6, bin_radius_m=2.5)
    assert arrival_angles_gcs(1e6, Side.MR_RX, c).theta_deg == pytest.approx(90.0, abs=1e-3)


def test_arrival_sides_are_antipodal(cfg):
    mr = arrival_angles_gcs(123.0, Side.MR_RX, cfg)
    rrh = arrival_angles_gcs(123.0, Side.RRH_TX, cfg)
    assert mr.theta_deg + rrh.theta_deg == pytest.approx(180.0)
    assert abs((mr.phi_deg - rrh.phi_deg) % 360.0 - 180.0) < 1e-9


def test_identity_rotation():
    a = GcsAngles(47.0, -112.0)
    out = gcs_to_lcs(a, PanelOrientation())
    assert out.theta_deg == pytest.approx(47.0, abs=1e-12)
    assert out.phi_deg == pytest.approx(-112.0, abs=1e-12)


def test_boresight_maps_to_zero_azimuth():
    out = gcs_to_lcs(GcsAngles(90.0, 30.0), PanelOrientation(bearing_deg=30.0))
    assert out.phi_deg == pytest.approx(0.0, abs=1e-12)
    assert out.theta_deg == pytest.approx(90.0, abs=1e-12)


def test_positive_downtilt_points_below_horizon():
    o = PanelOrientation(downtilt_deg=10.0)
    # the boresight direction in GCS sits 10 degrees below horizontal
    assert lcs_to_gcs(LcsAngles(90.0, 0.0), o).theta_deg == pytest.approx(100.0)


@pytest.mark.parametrize("bad", [{"bearing_deg": -180.0}, {"bearing_deg": 181.0}, {"downtilt_deg": 91.0}])
def test_orientation_validation(bad):
    with pytest.raises(ConfigError):
        PanelOrientation(**bad)


def _angle_close(a, b):
    return abs((a - b + 180.0) % 360.0 - 180.0)


@settings(max_examples=300, deadline=None)
@given(theta=st.floats(1.0, 179.0), phi=st.floats(-179.9, 180.0),
       bearing=st.floats(-179.9, 180.0), tilt=st.floats(-90.0, 90.0))
def test_rotation_round_trip(theta, phi, bearing, tilt):
    o = PanelOrientation(bearing, tilt)
    back = gcs_to_lcs(lcs_to_gcs(LcsAngles(theta, phi), o), o)
    assert back.theta_deg == pytest.approx(theta, abs=1e-9)
    assert _angle_close(back.phi_deg, phi) < 1e-9


@settings(max_examples=200, deadline=None)
@given(theta=st.floats(0.0, 180.0), phi=st.floats(-179.9, 180.0),
       bearing=st.floats(-179.9, 180.0), tilt=st.floats(-90.0, 90.0))
def test_lcs_ranges(theta, phi, bearing, tilt):
    out = gcs_to_lcs(GcsAngles(theta, phi), PanelOrientation(bearing, tilt))
    assert 0.0 <= out.theta_deg <= 180.0
    assert -180.0 < out.phi_deg <= 180.0


def test_vectorised_distances(cfg):
    d2, d3 = distances(np.array([0.0, 700.0]), cfg)
    assert d2.shape == (2,) and d3[1] == pytest.approx(math.hypot(150, 10))
