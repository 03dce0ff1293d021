"""Experiment sweeps over (vehicle count, seed) cells and CSV persistence.

Cells are independent: each trains its own network (when the dqn policy is
requested) and evaluates every policy on the same evaluation seed, so all
policies in a cell see identical channel realizations. Rows are sorted and
floats written via repr, making reruns byte-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, V2VRLError
from .trainer import TrainLogRow, evaluate, train

CSV_HEADER = "n_vehicles,policy,seed,success_probability,mean_v2i_capacity_bps"


@dataclass(frozen=True)
class SweepRow:
    n_vehicles: int
    policy: str
    seed: int
    success_probability: float
    mean_v2i_capacity_bps: float


def run_cell(cfg, n_vehicles: int, seed: int, policies) -> list[SweepRow]:
    """Train (if needed) and evaluate every policy for one (count, seed)."""
    cell_cfg = cfg.with_overrides(n_vehicles=n_vehicles)
    net = train(cell_cfg, seed).net if "dqn" in policies else None
    rows = []
    checksums = None
    for policy in policies:
        res = evaluate(net, cell_cfg, cell_cfg.eval_episodes, seed, policy=policy)
        if checksums is None:
            checksums = res.checksums
        elif res.checksums != checksums:
            raise V2VRLError(
                f"paired evaluation broke: policies saw different channels "
                f"(n_vehicles={n_vehicles}, seed={seed})")
        rows.append(SweepRow(n_vehicles, policy, seed,
                             res.success_probability, res.mean_v2i_capacity_bps))
    return rows


def _cell_worker(args):
    cfg, count, seed, policies = args
    try:
        return run_cell(cfg, count, seed, policies)
    except V2VRLError as exc:
        raise V2VRLError(f"sweep cell (n_vehicles={count}, seed={seed}) failed: {exc}") from exc


def max_workers() -> int:
    env_cap = os.environ.get("V2VRL_THREADS")
    if env_cap is not None:
        return max(1, int(env_cap))
    return os.cpu_count() or 1


def run_sweep(cfg, vehicle_counts, policies, seeds, out_path=None) -> list[SweepRow]:
    if not vehicle_counts or not policies or not seeds:
        raise ConfigError("sweep needs non-empty vehicle counts, policies, and seeds")
    for p in policies:
        if p not in ("random", "dqn"):
            raise ConfigError(f"unknown sweep policy {p!r}")
    cells = [(cfg, count, seed, tuple(policies))
             for count in vehicle_counts for seed in seeds]
    workers = min(max_workers(), len(cells))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(_cell_worker, cells))
    else:
        per_cell = [_cell_worker(c) for c in cells]
    rows = sorted((r for rows in per_cell for r in rows),
                  key=lambda r: (r.n_vehicles, r.policy, r.seed))
    if out_path is not None:
        write_sweep_csv(rows, out_path)
    return rows


def write_sweep_csv(rows, path) -> None:
    lines = [CSV_HEADER]
    lines += [f"{r.n_vehicles},{r.policy},{r.seed},"
              f"{float(r.success_probability)!r},{float(r.mean_v2i_capacity_bps)!r}"
              for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_training_log(log: list[TrainLogRow], path) -> None:
    lines = ["episode,epsilon,mean_reward,success_rate"]
    lines += [f"{r.episode},{float(r.epsilon)!r},{float(r.mean_reward)!r},"
              f"{float(r.success_rate)!r}" for r in log]
    Path(path).write_text("\n".join(lines) + "\n")
