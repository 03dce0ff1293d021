"""Path loss, log-normal shadowing, Rayleigh fading, and per-slot gain tables.

Sign convention: a link's large-scale gain in dB is -path_loss + shadowing.
Linear gains multiply in a unit-mean exponential fast-fading factor, redrawn
independently per (link, sub-band) per slot; large-scale terms are sampled
once per episode and held fixed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def path_loss_v2v(d_m):
    """Vehicle-to-vehicle path loss, dB; distance clamped below 3 m."""
    return 44.0 + 20.0 * np.log10(np.maximum(d_m, 3.0))


def path_loss_v2i(d_m):
    """Vehicle-to-base-station path loss, dB; distance clamped below 10 m."""
    return 128.1 + 37.6 * np.log10(np.maximum(d_m, 10.0) / 1000.0)


def sample_shadowing(sigma_db: float, rng: np.random.Generator, size=None):
    if sigma_db < 0:
        raise ContractError("shadowing sigma must be >= 0")
    return rng.normal(0.0, sigma_db, size)


def sample_fast_fading(rng: np.random.Generator, size=None):
    """Rayleigh amplitude squared: unit-mean exponential power factor."""
    return rng.exponential(1.0, size)


@dataclass
class LargeScale:
    """Per-episode dB gains (-PL + shadow). Shapes: K links, M sub-bands."""
    vv_db: np.ndarray     # [K] desired link tx_k -> rx_k
    cross_db: np.ndarray  # [K, K] tx_j -> rx_k; diagonal equals vv_db
    vb_db: np.ndarray     # [K] V2V tx_k -> base station
    ib_db: np.ndarray     # [M] V2I tx_m -> base station
    iv_db: np.ndarray     # [M, K] V2I tx_m -> rx_k


@dataclass
class ChannelState:
    """Per-slot linear power gains (large-scale x fast fading)."""
    g_vv: np.ndarray     # [K, M]
    g_cross: np.ndarray  # [K, K, M]; diagonal [k, k, :] equals g_vv[k, :]
    g_vb: np.ndarray     # [K, M]
    g_ib: np.ndarray     # [M] V2I transmitter on its own sub-band
    g_iv: np.ndarray     # [M, K]


def build_large_scale(tx_pos: np.ndarray, rx_pos: np.ndarray, v2i_pos: np.ndarray,
                      bs_pos: np.ndarray, sigma_v2v_db: float, sigma_v2i_db: float,
                      rng: np.random.Generator) -> LargeScale:
    """Sample the episode's large-scale gains from link geometry.

    tx_pos/rx_pos: [K, 2] V2V link endpoints; v2i_pos: [M, 2] uplink
    transmitters; bs_pos: (2,). Shadowing is independent per directed link.
    """
    d_vv = np.linalg.norm(tx_pos - rx_pos, axis=1)
    d_cross = np.linalg.norm(tx_pos[:, None, :] - rx_pos[None, :, :], axis=2)
    d_vb = np.linalg.norm(tx_pos - bs_pos, axis=1)
    d_ib = np.linalg.norm(v2i_pos - bs_pos, axis=1)
    d_iv = np.linalg.norm(v2i_pos[:, None, :] - rx_pos[None, :, :], axis=2)

    vv_db = -path_loss_v2v(d_vv) + sample_shadowing(sigma_v2v_db, rng, d_vv.shape)
    cross_db = -path_loss_v2v(d_cross) + sample_shadowing(sigma_v2v_db, rng, d_cross.shape)
    vb_db = -path_loss_v2i(d_vb) + sample_shadowing(sigma_v2i_db, rng, d_vb.shape)
    ib_db = -path_loss_v2i(d_ib) + sample_shadowing(sigma_v2i_db, rng, d_ib.shape)
    iv_db = -path_loss_v2v(d_iv) + sample_shadowing(sigma_v2v_db, rng, d_iv.shape)

    # tx_k -> rx_k through the cross table is the same physical link
    k = np.arange(len(vv_db))
    cross_db[k, k] = vv_db
    return LargeScale(vv_db, cross_db, vb_db, ib_db, iv_db)


def build_channel_state(ls: LargeScale, n_subbands: int, rng: np.random.Generator,
                        freeze_fading: bool = False) -> ChannelState:
    """One slot's gain tables. Fast fading is drawn fresh per call (a fixed
    number of draws, so realizations do not depend on agent behavior)."""
    n_links = ls.vv_db.shape[0]
    if ls.ib_db.shape[0] != n_subbands:
        raise ContractError("large-scale tables do not match the sub-band count")

    def fade(shape):
        if freeze_fading:
            return np.ones(shape)
        # floor keeps every linear gain strictly positive (dB features take logs)
        return np.maximum(sample_fast_fading(rng, shape), 1e-30)

    f_vv = fade((n_links, n_subbands))
    f_cross = fade((n_links, n_links, n_subbands))
    f_vb = fade((n_links, n_subbands))
    f_ib = fade((n_subbands,))
    f_iv = fade((n_subbands, n_links))

    g_vv = db_to_linear(ls.vv_db)[:, None] * f_vv
    g_cross = db_to_linear(ls.cross_db)[:, :, None] * f_cross
    k = np.arange(n_links)
    g_cross[k, k, :] = g_vv  # same physical link, same realization
    g_vb = db_to_linear(ls.vb_db)[:, None] * f_vb
    g_ib = db_to_linear(ls.ib_db) * f_ib
    g_iv = db_to_linear(ls.iv_db) * f_iv
    return ChannelState(g_vv, g_cross, g_vb, g_ib, g_iv)


def channel_checksum(*arrays: np.ndarray) -> str:
    """Order-sensitive digest of float tables; used to assert that paired
    evaluations saw identical channel realizations."""
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]
