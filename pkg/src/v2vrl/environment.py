"""The multi-agent spectrum-sharing MDP.

Each V2V link (one per vehicle) picks a sub-band and a transmit power each
slot. M uplink transmitters own one sub-band each and interfere with V2V
receivers; active V2V transmitters interfere with the uplinks and with each
other. An agent is done once its payload is delivered (success) or its slot
budget runs out (failure); done agents stop transmitting.

Timing: actions at slot t are taken against the gain tables the agents just
observed (g holds current-slot fading); the interference and neighbor-band
features they see are measurements from slot t-1. Fast fading for the next
slot is drawn at the end of step().
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (ChannelState, build_channel_state, build_large_scale,
                      channel_checksum, db_to_linear)
from .errors import ContractError
from .geometry import (drop_vehicles, form_links, layout_from_config,
                       region_center, spawn_vehicles)
from .rng import rng_stream


@dataclass(frozen=True)
class Action:
    subband: int      # in [0, M)
    power_level: int  # index into the configured power list

    def flat(self, n_powers: int) -> int:
        return self.subband * n_powers + self.power_level

    @staticmethod
    def from_flat(index: int, n_powers: int) -> "Action":
        return Action(index // n_powers, index % n_powers)


@dataclass
class Observation:
    """One agent's view of the network; raw physical units."""
    g_db: np.ndarray        # [M] own link gain per sub-band, current slot
    i_prev_dbm: np.ndarray  # [M] interference power measured last slot
    h_db: np.ndarray        # [M] own transmitter -> base station gain
    b_prev: np.ndarray      # [M] neighbors that used each band last slot
    load_frac: float        # remaining / initial payload, in [0, 1]
    time_frac: float        # remaining / initial slot budget, in [0, 1]

    def to_vector(self, neighbors: int) -> np.ndarray:
        """Normalized network input, length 4M + 2. Fixed affine maps keep
        checkpoints portable across runs."""
        return np.concatenate([
            (self.g_db + 120.0) / 60.0,
            (self.i_prev_dbm + 114.0) / 60.0,
            (self.h_db + 120.0) / 60.0,
            self.b_prev / neighbors,
            [self.load_frac, self.time_frac],
        ])


@dataclass
class StepOutcome:
    rewards: np.ndarray          # [K]; 0 for agents already done before the step
    next_obs: list[Observation]  # [K]
    v2i_capacities: np.ndarray   # [M] bits/s
    v2v_capacities: np.ndarray   # [K] bits/s; 0 for idle agents
    done: np.ndarray             # [K] bool
    obs_matrix: np.ndarray       # [K, 4M+2] normalized next_obs vectors


def capacity(sinr, bandwidth_hz):
    """Shannon capacity in bits/s for a linear SINR."""
    if np.any(np.asarray(sinr) < 0):
        raise ContractError("sinr must be >= 0")
    return bandwidth_hz * np.log2(1.0 + np.asarray(sinr, dtype=float))


def sinr_v2i(m: int, bands: np.ndarray, powers_mw: np.ndarray, active: np.ndarray,
             ch: ChannelState, v2i_power_mw: float, noise_mw: float) -> float:
    """Uplink SINR on sub-band m given every agent's band choice and linear
    transmit power (powers_mw[k] for agent k; ignored where inactive)."""
    interference = 0.0
    for k in range(len(bands)):
        if active[k] and bands[k] == m:
            interference += powers_mw[k] * ch.g_vb[k, m]
    return v2i_power_mw * ch.g_ib[m] / (noise_mw + interference)


def sinr_v2v(k: int, bands: np.ndarray, powers_mw: np.ndarray, active: np.ndarray,
             ch: ChannelState, v2i_power_mw: float, noise_mw: float) -> float:
    """SINR of V2V link k at its receiver; interference from the sub-band's
    uplink transmitter plus every other active co-band V2V transmitter."""
    if not active[k]:
        raise ContractError(f"agent {k} is not active")
    b = int(bands[k])
    interference = noise_mw + v2i_power_mw * ch.g_iv[b, k]
    for j in range(len(bands)):
        if j != k and active[j] and bands[j] == b:
            interference += powers_mw[j] * ch.g_cross[j, k, b]
    return powers_mw[k] * ch.g_vv[k, b] / interference


def reward(v2i_capacities: np.ndarray, v2v_capacity: float, time_frac: float,
           succeeded: bool, failed: bool, n_subbands: int, c_ref_bps: float,
           w_i: float, w_v: float, w_t: float, r_success: float, r_fail: float) -> float:
    """Per-agent reward for one slot; time_frac is the post-step budget share."""
    r = (w_i * float(np.sum(v2i_capacities)) / (n_subbands * c_ref_bps)
         + w_v * v2v_capacity / c_ref_bps
         - w_t * (1.0 - time_frac))
    if succeeded:
        r += r_success
    if failed:
        r -= r_fail
    return r


class V2VEnv:
    """One mutable simulation instance. Geometry and large-scale fading are
    redrawn each episode from per-episode random streams, so channel
    realizations are identical across policies evaluated on the same seed."""

    def __init__(self, cfg, seed: int, stream_prefix: str = "env"):
        cfg.validate()
        self.cfg = cfg
        self.seed = seed
        self.stream_prefix = stream_prefix
        self.layout = layout_from_config(cfg)
        self.bs_position = region_center(self.layout)
        self.n_agents = cfg.n_vehicles
        self.n_subbands = cfg.subbands
        self.n_powers = len(cfg.power_levels_dbm)
        self.n_actions = self.n_subbands * self.n_powers
        self.obs_dim = 4 * self.n_subbands + 2
        self.powers_mw = db_to_linear(np.array(cfg.power_levels_dbm))
        self.v2i_power_mw = float(db_to_linear(cfg.v2i_power_dbm))
        self.noise_mw = float(db_to_linear(cfg.noise_dbm))
        self.slot_s = cfg.slot_ms / 1000.0
        self._episode = 0
        self._started = False

    # -- episode lifecycle ------------------------------------------------

    def reset(self) -> list[Observation]:
        cfg = self.cfg
        ep = self._episode
        self._episode += 1
        if cfg.freeze_geometry_seed >= 0:
            # no stream prefix: a frozen drop must be the same instance for
            # training, evaluation, and the search oracle alike
            geo = rng_stream(cfg.freeze_geometry_seed, "geometry:frozen")
        else:
            geo = rng_stream(self.seed, f"{self.stream_prefix}:geometry:{ep}")
        self._ch_rng = rng_stream(self.seed, f"{self.stream_prefix}:channel:{ep}")

        self.vehicles = spawn_vehicles(cfg.n_vehicles, self.layout, geo)
        v2i_txs = drop_vehicles(self.n_subbands, self.layout, geo, start_id=cfg.n_vehicles)
        self.links = form_links(self.vehicles)
        pos = np.stack([v.position for v in self.vehicles])
        self.tx_pos = pos  # link k's transmitter is vehicle k
        self.rx_pos = pos[[lk.rx for lk in self.links]]
        self.v2i_pos = np.stack([v.position for v in v2i_txs])

        self.large_scale = build_large_scale(
            self.tx_pos, self.rx_pos, self.v2i_pos, self.bs_position,
            cfg.shadow_sigma_v2v_db, cfg.shadow_sigma_v2i_db, self._ch_rng)
        self._draw_slot_tables()

        # neighbor sets: nearest other V2V transmitters to each receiver
        K = self.n_agents
        d2 = ((self.rx_pos[:, None, :] - self.tx_pos[None, :, :]) ** 2).sum(axis=-1)
        d2[np.arange(K), np.arange(K)] = np.inf  # an agent is not its own neighbor
        order = np.argsort(d2, axis=1, kind="stable")
        self.neighbor_sets = order[:, :min(cfg.neighbors, K - 1)]

        self.load_bits = np.full(K, float(cfg.payload_bits))
        self.budget = np.full(K, cfg.budget_slots, dtype=int)
        self.done = np.zeros(K, dtype=bool)
        self._i_prev_dbm = np.full((K, self.n_subbands), cfg.noise_dbm)
        self._b_prev = np.zeros((K, self.n_subbands))
        self._started = True

        self.episode_checksum = channel_checksum(
            pos, self.v2i_pos, self.large_scale.vv_db, self.large_scale.cross_db,
            self.large_scale.vb_db, self.large_scale.ib_db, self.large_scale.iv_db,
            self.channel.g_vv, self.channel.g_vb)
        return self._build_observations()

    def _draw_slot_tables(self):
        self.channel = build_channel_state(
            self.large_scale, self.n_subbands, self._ch_rng, self.cfg.freeze_fading)
        self._cross_nodiag = self.channel.g_cross.copy()
        k = np.arange(self.n_agents)
        self._cross_nodiag[k, k, :] = 0.0

    @property
    def active(self) -> np.ndarray:
        """Agents that still transmit this slot."""
        return ~self.done

    @property
    def succeeded(self) -> np.ndarray:
        return self.done & (self.load_bits <= 0.0)

    @property
    def episode_over(self) -> bool:
        return bool(self.done.all())

    def _build_observations(self) -> list[Observation]:
        g_db = 10.0 * np.log10(self.channel.g_vv)
        h_db = 10.0 * np.log10(self.channel.g_vb)
        load_frac = self.load_bits / self.cfg.payload_bits
        time_frac = self.budget / self.cfg.budget_slots
        obs = [Observation(g_db[k], self._i_prev_dbm[k], h_db[k], self._b_prev[k],
                           float(load_frac[k]), float(time_frac[k]))
               for k in range(self.n_agents)]
        self.obs_matrix = np.stack([o.to_vector(self.cfg.neighbors) for o in obs])
        return obs

    # -- slot dynamics ----------------------------------------------------

    def step(self, actions) -> StepOutcome:
        if not self._started:
            raise ContractError("step() before reset()")
        if self.episode_over:
            raise ContractError("episode already finished for every agent")
        K, M = self.n_agents, self.n_subbands
        if len(actions) != K:
            raise ContractError(f"expected {K} actions, got {len(actions)}")
        bands = np.empty(K, dtype=int)
        pw_idx = np.empty(K, dtype=int)
        for k, a in enumerate(actions):
            if not (0 <= a.subband < M and 0 <= a.power_level < self.n_powers):
                raise ContractError(f"action out of range for agent {k}: {a}")
            bands[k] = a.subband
            pw_idx[k] = a.power_level

        active = self.active
        p_act = np.where(active, self.powers_mw[pw_idx], 0.0)  # mW; done agents silent
        onehot = np.zeros((K, M))
        onehot[np.arange(K), bands] = active.astype(float)
        weighted = p_act[:, None] * onehot  # [K, M] transmit power per band

        # uplink capacities
        i_vb = (weighted * self.channel.g_vb).sum(axis=0)  # [M]
        v2i_sinr = self.v2i_power_mw * self.channel.g_ib / (self.noise_mw + i_vb)
        v2i_caps = capacity(v2i_sinr, self.cfg.bandwidth_hz_per_subband)

        # received interference at every V2V receiver on every band
        i_rx = (self.noise_mw
                + self.v2i_power_mw * self.channel.g_iv.T
                + np.einsum("jm,jkm->km", weighted, self._cross_nodiag))  # [K, M]

        idx = np.arange(K)
        own = p_act * self.channel.g_vv[idx, bands]
        v2v_sinr = np.where(active, own / i_rx[idx, bands], 0.0)
        v2v_caps = np.where(active, capacity(v2v_sinr, self.cfg.bandwidth_hz_per_subband), 0.0)

        delivered = np.where(active, np.minimum(self.load_bits, v2v_caps * self.slot_s), 0.0)
        self.load_bits = self.load_bits - delivered
        self.budget = self.budget - active.astype(int)

        succeeded_now = active & (self.load_bits <= 0.0)
        failed_now = active & (self.budget == 0) & (self.load_bits > 0.0)
        self.done = self.done | succeeded_now | failed_now
        time_frac = self.budget / self.cfg.budget_slots

        rewards = np.where(
            active,
            (self.cfg.w_i * v2i_caps.sum() / (M * self.cfg.c_ref_bps)
             + self.cfg.w_v * v2v_caps / self.cfg.c_ref_bps
             - self.cfg.w_t * (1.0 - time_frac)
             + self.cfg.r_success * succeeded_now
             - self.cfg.r_fail * failed_now),
            0.0)

        # next-slot features measured from this slot
        self._i_prev_dbm = 10.0 * np.log10(i_rx)
        nbr_active_band = (onehot[self.neighbor_sets]
                           if self.neighbor_sets.size else
                           np.zeros((K, 0, M)))
        self._b_prev = nbr_active_band.sum(axis=1)

        self._draw_slot_tables()  # fading for the slot the agents will see next
        next_obs = self._build_observations()
        return StepOutcome(rewards, next_obs, v2i_caps, v2v_caps,
                           self.done.copy(), self.obs_matrix)
