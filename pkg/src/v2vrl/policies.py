"""Non-learning policies: the random baseline and an exhaustive-search oracle
for frozen micro-instances."""

from __future__ import annotations

from itertools import product

import numpy as np

from .environment import Action, V2VEnv
from .errors import ContractError
from .qnet import forward_batch

POLICY_KINDS = ("random", "dqn", "oracle")

ORACLE_SIZE_BOUND = 10_000_000


def random_action(n_subbands: int, power_levels_dbm, rng: np.random.Generator) -> Action:
    """Uniform sub-band; power pinned to the largest configured level."""
    return Action(int(rng.integers(n_subbands)), int(np.argmax(power_levels_dbm)))


def _require_frozen(cfg):
    if not cfg.freeze_fading:
        raise ContractError("oracle requires freeze_fading = true")
    if cfg.shadow_sigma_v2v_db != 0.0 or cfg.shadow_sigma_v2i_db != 0.0:
        raise ContractError("oracle requires zero shadowing")
    if cfg.freeze_geometry_seed < 0:
        raise ContractError("oracle requires a frozen geometry seed")


def oracle_best_return(cfg, seed: int, gamma: float):
    """Exhaustive search over all joint action sequences on a frozen instance.

    Returns (best discounted return summed over agents, best sequence), the
    sequence being a tuple per slot of per-agent flat action indices; among
    ties the lexicographically smallest sequence wins.
    """
    _require_frozen(cfg)
    n_agents = cfg.n_vehicles
    n_actions = cfg.subbands * len(cfg.power_levels_dbm)
    horizon = cfg.budget_slots
    n_sequences = (n_actions ** n_agents) ** horizon
    if n_sequences > ORACLE_SIZE_BOUND:
        raise ContractError(
            f"{n_sequences} joint action sequences exceed the oracle bound {ORACLE_SIZE_BOUND}")

    n_powers = len(cfg.power_levels_dbm)
    joint_actions = list(product(range(n_actions), repeat=n_agents))
    best_return = -np.inf
    best_seq = None
    for seq in product(joint_actions, repeat=horizon):
        total = rollout_return(cfg, seed, gamma, lambda env, obs, t: seq[t])
        if total > best_return:  # strict: first (lexicographically smallest) max kept
            best_return = total
            best_seq = seq
    return float(best_return), best_seq


def rollout_return(cfg, seed: int, gamma: float, pick) -> float:
    """Discounted return, summed over agents, of one episode on a fresh
    environment; pick(env, obs_matrix, t) gives per-agent flat actions."""
    env = V2VEnv(cfg, seed, stream_prefix="eval")
    env.reset()
    n_powers = len(cfg.power_levels_dbm)
    total = 0.0
    t = 0
    while not env.episode_over:
        flats = pick(env, env.obs_matrix, t)
        out = env.step([Action.from_flat(int(a), n_powers) for a in flats])
        total += gamma ** t * float(out.rewards.sum())
        t += 1
    return total


def greedy_return(net, cfg, seed: int, gamma: float) -> float:
    """Discounted return of the greedy network policy on a frozen instance."""
    def pick(env, obs_matrix, t):
        return np.argmax(forward_batch(net, obs_matrix), axis=1)
    return rollout_return(cfg, seed, gamma, pick)
