import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsrbeam.env import CODEBOOK16, RELATIVE_ACTIONS, BeamEnv, EpisodeFinished, discounted_return, write_trace_csv


@pytest.fixture
def env(model):
    return BeamEnv(model)


def test_reset(env):
    s = env.reset()
    assert (s.bin, s.theta_b, s.phi_b) == (1, 0.0, 0.0)
    assert env.reset() == s


def test_reset_mid_episode(env):
    first = env.reset()
    for a in (4, 4, 2):
        env.step(a)
    assert env.reset() == first
    assert env.step(1).state.theta_b == 0.0


def test_hold_action(env):
    env.reset()
    env.step(4)
    o = env.step(1)
    assert (o.state.theta_b, o.state.phi_b) == (3.0, 3.0)


def test_benchmark_beam_earns_zero(env):
    env.reset()
    for _ in range(5):
        assert env.step(1).reward == 0.0


def test_a4_from_origin(env):
    env.reset()
    o = env.step(4)
    assert (o.state.theta_b, o.state.phi_b) == (3.0, 3.0)


def test_action_table_is_complete():
    assert len(set(RELATIVE_ACTIONS)) == 9
    assert {d for a in RELATIVE_ACTIONS for d in a} == {-1, 0, 1}


def test_reward_is_gap_to_fixed_beam(env, model):
    env.reset()
    o = env.step(2)
    assert o.reward == model.rsp(0, 0.0, 3.0) - model.rsp(0, 0.0, 0.0)
    assert o.rsp_dbm == model.rsp(0, 0.0, 3.0)


def test_clamp(model):
    env = BeamEnv(model)
    assert env.apply_action(90.0, 180.0, 4) == (90.0, 180.0)
    assert env.apply_action(-90.0, -180.0, 7) == (-90.0, -180.0)


def test_bad_action(env):
    env.reset()
    with pytest.raises(ValueError):
        env.step(0)
    with pytest.raises(ValueError):
        env.step(10)


def test_episode_end(env):
    env.reset()
    outs = [env.step(1) for _ in range(env.n_bins)]
    assert outs[-1].done and not any(o.done for o in outs[:-1])
    with pytest.raises(EpisodeFinished):
        env.step(1)


def test_codebook_is_absolute(model):
    env = BeamEnv(model, codebook=CODEBOOK16)
    assert env.n_actions == 16
    env.reset()
    env.step(3)
    o = env.step(5)
    assert (o.state.theta_b, o.state.phi_b) == CODEBOOK16[4]


def test_codebook_layout():
    th = sorted({c[0] for c in CODEBOOK16})
    ph = sorted({c[1] for c in CODEBOOK16})
    assert len(CODEBOOK16) == 16 and len(th) == len(ph) == 4
    assert th[0] == -1.0 and th[-1] == 0.0 and ph[0] == -11.0 and ph[-1] == 0.0


@settings(max_examples=50, deadline=None)
@given(actions=st.lists(st.integers(1, 9), min_size=1, max_size=40))
def test_beam_stays_on_lattice_and_in_box(model, actions):
    env = BeamEnv(model)
    env.reset()
    for a in actions:
        s = env.step(a).state
        assert -90 <= s.theta_b <= 90 and -180 <= s.phi_b <= 180
        assert s.theta_b % 3 == 0 and s.phi_b % 3 == 0


def test_features(env):
    assert env.features(1) == 0.0 and env.features(env.n_bins) == 1.0


@pytest.mark.parametrize("rewards,alpha,expected", [([1, 1, 1], 1.0, 3.0), ([2], 0.3, 2.0), ([1, 1], 0.5, 1.5)])
def test_discounted_return(rewards, alpha, expected):
    assert discounted_return(rewards, alpha) == pytest.approx(expected)


def test_discount_range():
    with pytest.raises(ValueError):
        discounted_return([1.0], 0.0)


def test_trace_csv(tmp_path, env):
    env.reset()
    outs = [env.step(a) for a in (4, 1, 2)]
    p = tmp_path / "t.csv"
    write_trace_csv(p, outs, ["seed=3"])
    lines = p.read_text().splitlines()
    assert lines[0] == "# seed=3"
    assert lines[1] == "step,bin,action,theta_b,phi_b,reward,rsp"
    assert lines[2].startswith("1,1,4,3.0,3.0,")
    assert np.isclose(float(lines[4].split(",")[5]), outs[2].reward)
