"""Road layouts, vehicle drops, mobility stepping, and V2V link formation.

Lanes are axis-aligned centerlines. A vehicle's state is tracked as
(lane index, arc-length along the lane, direction sign), which keeps turn
handling exact; position and heading are derived from that triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError

SPEED_RANGE_MPS = (10.0, 15.0)  # constant per vehicle, drawn at spawn


@dataclass(frozen=True)
class Lane:
    axis: int      # 0: runs along +x at fixed y; 1: runs along +y at fixed x
    offset: float  # the fixed cross coordinate, meters
    length: float  # meters


@dataclass(frozen=True)
class RoadLayout:
    kind: str                # "manhattan" | "highway"
    lanes: tuple[Lane, ...]
    width: float             # region extent along x
    height: float            # region extent along y
    wraps: bool              # highway wraps around; grid vehicles turn at ends


def manhattan_layout(blocks_x: int, blocks_y: int, block_w_m: float,
                     block_h_m: float) -> RoadLayout:
    width = blocks_x * block_w_m
    height = blocks_y * block_h_m
    lanes = [Lane(0, j * block_h_m, width) for j in range(blocks_y + 1)]
    lanes += [Lane(1, i * block_w_m, height) for i in range(blocks_x + 1)]
    return RoadLayout("manhattan", tuple(lanes), width, height, wraps=False)


def highway_layout(length_m: float) -> RoadLayout:
    return RoadLayout("highway", (Lane(0, 0.0, length_m),), length_m, 0.0, wraps=True)


def layout_from_config(cfg) -> RoadLayout:
    if cfg.layout == "manhattan":
        return manhattan_layout(cfg.blocks_x, cfg.blocks_y, cfg.block_w_m, cfg.block_h_m)
    return highway_layout(cfg.highway_len_m)


def region_center(layout: RoadLayout) -> np.ndarray:
    """Base-station anchor: the geometric center of the region."""
    return np.array([layout.width / 2.0, layout.height / 2.0])


@dataclass
class Vehicle:
    id: int
    position: np.ndarray  # (2,) meters, on a lane centerline
    speed: float          # m/s
    heading: np.ndarray   # (2,) unit vector along the lane
    lane: int             # index into layout.lanes
    s: float              # arc-length along the lane, meters
    sign: int             # +1 along the lane axis, -1 against it


def _pose(layout: RoadLayout, lane_idx: int, s: float, sign: int):
    lane = layout.lanes[lane_idx]
    if lane.axis == 0:
        return np.array([s, lane.offset]), np.array([float(sign), 0.0])
    return np.array([lane.offset, s]), np.array([0.0, float(sign)])


def drop_vehicles(n: int, layout: RoadLayout, rng: np.random.Generator,
                  start_id: int = 0) -> list[Vehicle]:
    """Drop n vehicles uniformly over the lane centerlines (no pair check;
    also used for auxiliary uplink transmitters)."""
    lo, hi = SPEED_RANGE_MPS
    out = []
    for i in range(n):
        lane_idx = int(rng.integers(len(layout.lanes)))
        s = float(rng.uniform(0.0, layout.lanes[lane_idx].length))
        sign = 1 if rng.random() < 0.5 else -1
        speed = float(rng.uniform(lo, hi))
        pos, heading = _pose(layout, lane_idx, s, sign)
        out.append(Vehicle(start_id + i, pos, speed, heading, lane_idx, s, sign))
    return out


def spawn_vehicles(n: int, layout: RoadLayout, rng: np.random.Generator) -> list[Vehicle]:
    if n < 2:
        raise ConfigError("need at least one V2V pair (n_vehicles >= 2)")
    if not layout.lanes:
        raise ConfigError("layout has no lanes")
    return drop_vehicles(n, layout, rng)


def _turn(layout: RoadLayout, lane_idx: int, s: float, sign: int):
    """Deterministic turn at a lane end: right if a lane continues that way,
    else left, else reverse. Intermediate intersections are driven straight
    through, so this only ever fires on the region boundary."""
    pos, h = _pose(layout, lane_idx, s, sign)
    right = np.array([h[1], -h[0]])
    left = np.array([-h[1], h[0]])
    for d in (right, left):
        axis = 0 if d[0] != 0.0 else 1
        cross = pos[1 - axis]
        along = pos[axis]
        step_sign = 1 if d[axis] > 0 else -1
        for j, lane in enumerate(layout.lanes):
            if lane.axis != axis or not math.isclose(lane.offset, cross, abs_tol=1e-6):
                continue
            if (step_sign > 0 and along < lane.length - 1e-9) or (step_sign < 0 and along > 1e-9):
                return j, float(along), step_sign
    return lane_idx, s, -sign  # dead end: reverse


def step_positions(layout: RoadLayout, vehicles: list[Vehicle], dt_s: float) -> list[Vehicle]:
    """Advance every vehicle by speed*dt along its lane; turn or wrap at ends."""
    if dt_s <= 0:
        raise ContractError("dt_s must be > 0")
    out = []
    for v in vehicles:
        lane_idx, s, sign = v.lane, v.s, v.sign
        if layout.wraps:
            s = (s + sign * v.speed * dt_s) % layout.lanes[lane_idx].length
        else:
            remaining = v.speed * dt_s
            while remaining > 0:
                lane = layout.lanes[lane_idx]
                to_end = (lane.length - s) if sign > 0 else s
                if remaining < to_end:
                    s += sign * remaining
                    remaining = 0.0
                else:
                    s = lane.length if sign > 0 else 0.0
                    remaining -= to_end
                    lane_idx, s, sign = _turn(layout, lane_idx, s, sign)
        pos, heading = _pose(layout, lane_idx, s, sign)
        out.append(Vehicle(v.id, pos, v.speed, heading, lane_idx, s, sign))
    return out


@dataclass(frozen=True)
class V2VLink:
    link_id: int
    tx: int  # transmitter vehicle id
    rx: int  # receiver vehicle id


def form_links(vehicles: list[Vehicle]) -> list[V2VLink]:
    """Each vehicle transmits to its nearest other vehicle; ties go to the
    lowest vehicle id. Returned in ascending tx id order."""
    if len(vehicles) < 2:
        raise ConfigError("need at least 2 vehicles to form V2V links")
    vs = sorted(vehicles, key=lambda v: v.id)
    pos = np.stack([v.position for v in vs])
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1)
    np.fill_diagonal(d2, np.inf)
    nearest = d2.argmin(axis=1)  # argmin takes the first (lowest-id) minimum
    return [V2VLink(i, vs[i].id, vs[int(nearest[i])].id) for i in range(len(vs))]
