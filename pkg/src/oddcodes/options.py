from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SearchOptions:
    """Budget and schedule shared by the randomized searches.

    ``smoothing_start``/``smoothing`` bound the annealed sharpness of the
    smoothed objectives (soft-min, sigmoid indicators); ``penalty_start`` and
    ``penalty`` do the same for the diameter penalty of the zero-capture
    search.  Restart ``i`` draws from ``default_rng((seed, i))``.
    """

    restarts: int = 8
    max_iterations: int = 2000
    smoothing: float = 1e3
    smoothing_start: float = 10.0
    step: float = 0.05
    step_decay: float = 0.999
    penalty: float = 1e6
    penalty_start: float = 10.0
    seed: int = 0
    polish: bool = True

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise ValueError("restarts must be >= 1")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.smoothing > 0 and self.smoothing_start > 0):
            raise ValueError("smoothing must be positive")
        if not (self.step > 0 and 0 < self.step_decay <= 1):
            raise ValueError("step must be positive and step_decay in (0, 1]")
        if not (self.penalty > 0 and self.penalty_start > 0):
            raise ValueError("penalty must be positive")

    def rng(self, restart: int) -> np.random.Generator:
        return np.random.default_rng((int(self.seed), int(restart)))

    def schedule(self, count: int, start: float | None = None,
                 end: float | None = None) -> np.ndarray:
        """Geometric annealing ladder from ``start`` to ``end``."""
        start = self.smoothing_start if start is None else start
        end = self.smoothing if end is None else end
        if count <= 1:
            return np.array([end], dtype=float)
        return np.geomspace(start, end, count)

    def with_(self, **changes) -> SearchOptions:
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)
