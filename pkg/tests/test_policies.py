import numpy as np
import pytest

from v2vrl import Action, ContractError, SimConfig, rng_stream
from v2vrl.cli import micro_instance_config
from v2vrl.policies import (ORACLE_SIZE_BOUND, greedy_return,
                            oracle_best_return, random_action, rollout_return)
from v2vrl.qnet import init_qnetwork


# -- random_action ---------------------------------------------------------

def test_single_band_is_always_chosen():
    rng = rng_stream(0, "p")
    for _ in range(30):
        assert random_action(1, [23.0], rng) == Action(0, 0)


def test_power_is_pinned_to_the_largest_level():
    rng = rng_stream(1, "p")
    # max power sits at index 1 here, not index 0
    for _ in range(30):
        a = random_action(4, [5.0, 23.0, 10.0], rng)
        assert a.power_level == 1


def test_band_frequencies_are_uniform():
    # note the signature takes no observation at all, so the choice cannot
    # depend on the agent's state
    rng = rng_stream(2, "p")
    n, m = 100_000, 4
    counts = np.zeros(m)
    for _ in range(n):
        counts[random_action(m, [23.0], rng).subband] += 1
    p = 1.0 / m
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sigma)


# -- oracle preconditions ----------------------------------------------------

def test_oracle_requires_a_fully_frozen_instance():
    base = micro_instance_config()
    with pytest.raises(ContractError):
        oracle_best_return(base.with_overrides(freeze_fading=False), 0, 0.95)
    with pytest.raises(ContractError):
        oracle_best_return(base.with_overrides(shadow_sigma_v2v_db=3.0), 0, 0.95)
    with pytest.raises(ContractError):
        oracle_best_return(base.with_overrides(shadow_sigma_v2i_db=8.0), 0, 0.95)
    with pytest.raises(ContractError):
        oracle_best_return(base.with_overrides(freeze_geometry_seed=-1), 0, 0.95)


def test_oracle_refuses_oversized_searches():
    big = micro_instance_config().with_overrides(budget_slots=20)
    # (2 bands ^ 2 agents) ^ 20 slots is far past the bound
    with pytest.raises(ContractError) as err:
        oracle_best_return(big, 0, 0.95)
    assert str(ORACLE_SIZE_BOUND) in str(err.value)


# -- oracle search -----------------------------------------------------------

def test_singleton_action_space_returns_the_only_sequence():
    cfg = micro_instance_config().with_overrides(subbands=1, budget_slots=2)
    ret, seq = oracle_best_return(cfg, 0, cfg.gamma)
    assert seq == (((0, 0), (0, 0)))
    only = rollout_return(cfg, 0, cfg.gamma, lambda env, obs, t: (0, 0))
    assert ret == only


def test_optimal_play_splits_the_two_bands():
    cfg = micro_instance_config()
    ret, seq = oracle_best_return(cfg, 0, cfg.gamma)
    first = seq[0]
    assert first[0] != first[1]  # sharing a band starves both links


def test_oracle_is_deterministic():
    cfg = micro_instance_config()
    a = oracle_best_return(cfg, 0, cfg.gamma)
    b = oracle_best_return(cfg, 0, cfg.gamma)
    assert a == b


def test_oracle_dominates_random_rollouts():
    cfg = micro_instance_config()
    best, _ = oracle_best_return(cfg, 0, cfg.gamma)
    rng = rng_stream(3, "p")
    n_actions = cfg.subbands * len(cfg.power_levels_dbm)
    for _ in range(25):
        ret = rollout_return(
            cfg, 0, cfg.gamma,
            lambda env, obs, t: rng.integers(n_actions, size=cfg.n_vehicles))
        assert ret <= best + 1e-12


def test_oracle_dominates_an_untrained_greedy_network():
    cfg = micro_instance_config()
    best, _ = oracle_best_return(cfg, 0, cfg.gamma)
    obs_dim = 4 * cfg.subbands + 2
    n_actions = cfg.subbands * len(cfg.power_levels_dbm)
    net = init_qnetwork([obs_dim, 8, n_actions], rng_stream(4, "p"))
    assert greedy_return(net, cfg, 0, cfg.gamma) <= best + 1e-12


def test_rollouts_on_the_frozen_instance_ignore_the_seed():
    cfg = micro_instance_config()
    pick = lambda env, obs, t: (0, 1)
    a = rollout_return(cfg, 0, cfg.gamma, pick)
    b = rollout_return(cfg, 99, cfg.gamma, pick)
    assert a == b
