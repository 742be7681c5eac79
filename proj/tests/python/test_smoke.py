import math

import pytest

import gtdispatch as gd


def test_surrogate_iso_point():
    iso = gd.Ambient(15.0, 101.325, 60.0)
    assert gd.max_power(iso) == pytest.approx(30.3)
    assert gd.fuel_rate(1.0, iso) == pytest.approx(272.7)
    assert gd.max_power(gd.Ambient(40.0, 101.325, 60.0)) < 30.3


def test_om_step_cycle_then_extended():
    state = gd.GtState()
    costs, state = gd.om_step(state, True)
    assert costs["om_cycle"] == pytest.approx(33e6 / 26000)
    for _ in range(7):
        costs, state = gd.om_step(state, True)
        assert costs["om_hourly"] == 0.0
    assert state.mode == gd.GtMode.EXTENDED
    costs, state = gd.om_step(state, True)
    assert costs["om_hourly"] == pytest.approx(165.0)
    _, state = gd.om_step(state, False)
    assert state == gd.GtState()


def test_env_energy_balance_and_reward():
    sc = gd.synthetic_scenario(0).slice(0, 48)
    env = gd.DispatchEnv(gd.EnvConfig(episode_hours=48))
    obs = env.reset(sc)
    assert len(obs) == 6
    demands = sc.demands()
    total = 0.0
    for t in range(48):
        obs, reward, done, info = env.step(1.0 if t % 12 < 6 else 0.0)
        assert info["p_gt_mwh"] + info["p_grid_mwh"] - info["p_waste_mwh"] == pytest.approx(demands[t], abs=1e-9)
        assert info["p_grid_mwh"] * info["p_waste_mwh"] == 0.0
        assert reward == -info["cost"]["total"]
        total += reward
    assert done
    assert env.episode_reward == pytest.approx(total)
    with pytest.raises(gd.UsageError):
        env.step(0.0)


def test_oracle_beats_flat_schedules():
    sc = gd.synthetic_scenario(0).slice(24 * 100, 72)
    cfg = gd.EnvConfig(episode_hours=72)
    dp = gd.dp_optimal(sc, cfg)
    for level in (0.0, 1.0):
        env = gd.DispatchEnv(cfg)
        env.reset(sc)
        while not env.done:
            env.step(level)
        assert dp["cost"] <= -env.episode_reward + 1e-6
    assert len(dp["load_fractions"]) == 72


def test_epsilon_schedule():
    assert gd.epsilon_for_episode(0, 50) == 0.8
    assert all(gd.epsilon_for_episode(e, 50) == 0.001 for e in range(40, 50))


def test_bad_config_raises():
    with pytest.raises(gd.ConfigError):
        gd.ExperimentConfig.from_yaml("env:\n  no_such_key: 1\n")


def test_train_and_report(tmp_path):
    cfg = gd.ExperimentConfig.from_yaml(
        """
scenario:
  seed: 2
  first_hour: 1000
  hours: 48
experiment:
  seeds: [0, 1]
  episodes: 3
  workers: 1
agents:
  - algorithm: dqn
    hidden: [8]
    learning_starts: 10
  - algorithm: rule
"""
    )
    cfg.output_dir = str(tmp_path)
    cells = gd.train(cfg)
    assert {c["algorithm"] for c in cells} == {"dqn", "rule"}
    for c in cells:
        assert c["seeds_ok"] == 2
        assert math.isfinite(c["accumulated_reward_cad"])
        assert len(c["curve_mean"]) == 3
    again = gd.report(str(tmp_path))
    assert [c["accumulated_reward_cad"] for c in again] == [c["accumulated_reward_cad"] for c in cells]
    episodes = gd.read_episodes(str(tmp_path / "dqn" / "dynamic" / "seed_0" / "episodes.csv"))
    assert [e["episode"] for e in episodes] == [0, 1, 2]
