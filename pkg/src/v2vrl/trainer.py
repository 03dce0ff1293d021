"""Deep Q-learning with experience replay.

One network and one replay memory are shared by every agent: each slot, all
still-active agents pick epsilon-greedy actions from the shared network, their
transitions are pushed to the shared memory, and a single mini-batch update is
applied. TD targets come from a periodically synchronized target network.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .environment import Action, V2VEnv
from .errors import ConfigError, ContractError, TrainingError
from .policies import random_action
from .qnet import (QNetwork, backward_batch, copy_params, forward,
                   forward_batch, init_qnetwork, sgd_update)
from .replay import ReplayMemory, Transition
from .rng import rng_stream

DIVERGENCE_Q_LIMIT = 1e6  # mean |Q| above this aborts training


@dataclass
class TrainerConfig:
    episodes: int = 3000
    gamma: float = 0.95
    eps_start: float = 1.0
    eps_end: float = 0.02
    eps_anneal_frac: float = 0.8
    target_sync_steps: int = 500
    lr: float = 1e-3
    batch: int = 64
    replay_capacity: int = 100000
    hidden_dims: list[int] = None

    @classmethod
    def from_sim(cls, cfg) -> "TrainerConfig":
        return cls(**{f.name: getattr(cfg, f.name) for f in fields(cls)})

    def __post_init__(self):
        if self.hidden_dims is None:
            self.hidden_dims = [64, 32]


def epsilon(tc: TrainerConfig, episode: int) -> float:
    """Linear anneal from eps_start to eps_end over the first
    eps_anneal_frac of episodes, then constant."""
    anneal = max(1, round(tc.eps_anneal_frac * tc.episodes))
    if episode >= anneal:
        return tc.eps_end
    return tc.eps_start + (tc.eps_end - tc.eps_start) * episode / anneal


def select_action(net: QNetwork, obs_vec: np.ndarray, eps: float,
                  rng: np.random.Generator, n_actions: int) -> int:
    """Flat action index: explore uniformly with probability eps, otherwise
    greedy with ties to the lowest index."""
    if rng.random() < eps:
        return int(rng.integers(n_actions))
    return int(np.argmax(forward(net, obs_vec)))


def td_target(r: float, s_next: np.ndarray, terminal: bool,
              target_net: QNetwork, gamma: float) -> float:
    if terminal:
        return float(r)
    return float(r) + gamma * float(np.max(forward(target_net, s_next)))


@dataclass
class TrainLogRow:
    episode: int
    epsilon: float
    mean_reward: float   # mean per-agent reward over the episode's slots
    success_rate: float  # fraction of agents that delivered their payload


@dataclass
class TrainResult:
    net: QNetwork
    log: list[TrainLogRow]


def train(cfg, seed: int) -> TrainResult:
    """Train the shared network on cfg for cfg.episodes episodes."""
    tc = TrainerConfig.from_sim(cfg)
    env = V2VEnv(cfg, seed, stream_prefix="train")
    net = init_qnetwork([env.obs_dim, *tc.hidden_dims, env.n_actions],
                        rng_stream(seed, "qnet-init"))
    target = copy_params(net)
    memory = ReplayMemory(tc.replay_capacity)
    explore = rng_stream(seed, "explore")
    sampler = rng_stream(seed, "replay")

    log = []
    updates = 0
    for ep in range(tc.episodes):
        eps = epsilon(tc, ep)
        obs = env.reset()
        obs_mat = env.obs_matrix
        reward_sum = 0.0
        reward_n = 0
        while not env.episode_over:
            was_active = env.active.copy()
            q_all = forward_batch(net, obs_mat)
            flats = np.argmax(q_all, axis=1)
            for k in np.flatnonzero(was_active):
                if explore.random() < eps:
                    flats[k] = explore.integers(env.n_actions)
            out = env.step([Action.from_flat(int(f), env.n_powers) for f in flats])

            for k in np.flatnonzero(was_active):
                memory.push(Transition(obs_mat[k], int(flats[k]), float(out.rewards[k]),
                                       out.obs_matrix[k], bool(out.done[k])))
            reward_sum += float(out.rewards[was_active].sum())
            reward_n += int(was_active.sum())

            batch = memory.sample(tc.batch, sampler)
            if batch is not None:
                updates += 1
                _apply_update(net, target, batch, tc)
                if updates % tc.target_sync_steps == 0:
                    target = copy_params(net)
            obs_mat = out.obs_matrix

        log.append(TrainLogRow(ep, eps, reward_sum / max(reward_n, 1),
                               float(env.succeeded.mean())))
    return TrainResult(net, log)


def _apply_update(net, target, batch, tc: TrainerConfig):
    s = np.stack([t.s for t in batch])
    s_next = np.stack([t.s_next for t in batch])
    acts = np.array([t.a for t in batch])
    rs = np.array([t.r for t in batch])
    terminal = np.array([t.terminal for t in batch])

    q_next = forward_batch(target, s_next).max(axis=1)
    targets = rs + tc.gamma * np.where(terminal, 0.0, q_next)
    q_pred = forward_batch(net, s)
    if np.mean(np.abs(q_pred)) > DIVERGENCE_Q_LIMIT:
        raise TrainingError("training diverged: mean |Q| exceeded 1e6")
    td_errors = q_pred[np.arange(len(batch)), acts] - targets
    sgd_update(net, backward_batch(net, s, acts, td_errors), tc.lr)


@dataclass
class EvalResult:
    success_probability: float
    mean_v2i_capacity_bps: float
    episodes: int
    checksums: list[str]  # per-episode channel digests (pairing assertions)


def evaluate(net, cfg, episodes: int, seed: int, policy: str = "dqn") -> EvalResult:
    """Greedy (or random-baseline) rollout metrics over fresh episodes.

    Success probability counts agent-episodes that delivered the payload
    within budget; V2I capacity is averaged over every executed slot and
    sub-band. The channel streams depend only on (cfg, seed), so different
    policies evaluated with the same arguments see identical channels.
    """
    if episodes < 1:
        raise ContractError("evaluate needs episodes >= 1")
    if policy not in ("random", "dqn"):
        raise ConfigError(f"unknown evaluation policy {policy!r}")
    if policy == "dqn" and net is None:
        raise ContractError("dqn evaluation needs a trained network")
    env = V2VEnv(cfg, seed, stream_prefix="eval")
    successes = 0
    agent_episodes = 0
    v2i_sum = 0.0
    v2i_n = 0
    checksums = []
    for ep in range(episodes):
        env.reset()
        checksums.append(env.episode_checksum)
        policy_rng = rng_stream(seed, f"eval-policy:{ep}")
        while not env.episode_over:
            if policy == "random":
                acts = [random_action(cfg.subbands, cfg.power_levels_dbm, policy_rng)
                        for _ in range(env.n_agents)]
            else:
                flats = np.argmax(forward_batch(net, env.obs_matrix), axis=1)
                acts = [Action.from_flat(int(f), env.n_powers) for f in flats]
            out = env.step(acts)
            v2i_sum += float(out.v2i_capacities.sum())
            v2i_n += env.n_subbands
        successes += int(env.succeeded.sum())
        agent_episodes += env.n_agents
    return EvalResult(successes / agent_episodes, v2i_sum / v2i_n, episodes, checksums)
