"""Experience replay: a bounded FIFO of transitions with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError


@dataclass(slots=True)
class Transition:
    s: np.ndarray       # normalized observation vector
    a: int              # flat action index
    r: float
    s_next: np.ndarray
    terminal: bool


class ReplayMemory:
    """Ring buffer; once full, each push evicts the oldest transition."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        self.capacity = capacity
        self._buf: list[Transition] = []
        self._head = 0  # next slot to overwrite once full

    def __len__(self) -> int:
        return len(self._buf)

    def push(self, t: Transition) -> None:
        if (t.s.ndim != 1 or t.s_next.shape != t.s.shape
                or t.a < 0 or not np.isfinite(t.r)):
            raise ContractError(f"malformed transition {t!r}")
        if len(self._buf) < self.capacity:
            self._buf.append(t)
        else:
            self._buf[self._head] = t
            self._head = (self._head + 1) % self.capacity

    def sample(self, batch: int, rng: np.random.Generator):
        """batch distinct transitions, uniform; None when there are not yet
        enough stored (the trainer skips its update)."""
        if len(self._buf) < batch:
            return None
        idx = rng.choice(len(self._buf), size=batch, replace=False)
        return [self._buf[i] for i in idx]
