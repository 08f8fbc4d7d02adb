"""Cusp excursions: enter {ỹ ≥ r + √r} after having been below r, leave at {ỹ < r}"""

from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum
import math

import numpy as np
from numpy.typing import NDArray

from ..exception import ConfigException
from ..report import ExcursionRecord


class ExcursionState(IntEnum):
    DISARMED = 0
    """尚未低于 r"""
    ARMED = 1
    """低于 r 之后等待进入"""
    INSIDE = 2


def entry_level(r: float) -> float:
    return r + math.sqrt(r)


class ExcursionTracker:
    """Online two-level crossing detector for a batch of paths and several exit levels r

    Heights are cusp-chart heights ỹ; dx are x̃-increments of the same steps.
    """

    def __init__(self, levels: Sequence[float], initial_heights: NDArray[np.float64]):
        if any(r < 2.0 for r in levels):
            raise ConfigException(f"excursion levels must be ≥ 2, got {list(levels)}")
        self.levels = tuple(float(r) for r in levels)
        h0 = np.asarray(initial_heights, dtype=float)
        n = h0.size
        self.state = np.array(
            [np.where(h0 < r, ExcursionState.ARMED, ExcursionState.DISARMED) for r in self.levels], dtype=np.int8
        ).reshape(len(self.levels), n)
        self.tau = np.zeros((len(self.levels), n))
        self.phi = np.zeros((len(self.levels), n))
        self.cusp = np.zeros((len(self.levels), n), dtype=np.int64)
        self.records: list[list[ExcursionRecord]] = [[] for _ in range(n)]

    def update(
        self,
        idx: NDArray[np.int64],
        t: NDArray[np.float64],
        height: NDArray[np.float64],
        dx: NDArray[np.float64],
        cusp: NDArray[np.int64],
    ) -> None:
        """Feed the end of one step for the paths idx"""
        for li, r in enumerate(self.levels):
            st = self.state[li, idx]
            inside = st == ExcursionState.INSIDE
            if inside.any():
                ii = idx[inside]
                self.phi[li, ii] += dx[inside]
                leave = height[inside] < r
                for k in np.flatnonzero(leave):
                    p = ii[k]
                    self.records[p].append(
                        ExcursionRecord(
                            cusp=int(self.cusp[li, p]),
                            level=r,
                            tau=float(self.tau[li, p]),
                            sigma=float(t[inside][k]),
                            phi=float(self.phi[li, p]),
                        )
                    )
                self.state[li, ii[leave]] = ExcursionState.ARMED
            enter = (st == ExcursionState.ARMED) & (height >= entry_level(r))
            if enter.any():
                ie = idx[enter]
                self.state[li, ie] = ExcursionState.INSIDE
                self.tau[li, ie] = t[enter]
                self.phi[li, ie] = 0.0
                self.cusp[li, ie] = cusp[enter]
            arm = (st == ExcursionState.DISARMED) & (height < r)
            if arm.any():
                self.state[li, idx[arm]] = ExcursionState.ARMED

    def counts(self) -> list[int]:
        return [len(r) for r in self.records]

    def all_records(self) -> list[ExcursionRecord]:
        return [rec for recs in self.records for rec in recs]


@dataclass(frozen=True, slots=True)
class Trajectory:
    """记录下来的轨道: 时间, 尖点高度 ỹ, 连续的 x̃ 与所在尖点"""

    t: NDArray[np.float64]
    height: NDArray[np.float64]
    x: NDArray[np.float64]
    cusp: NDArray[np.int64] | None = None


def extract_excursions(trajectory: Trajectory, r: float, cusp: int | None = None) -> list[ExcursionRecord]:
    """Offline excursion records of one trajectory at exit level r, optionally restricted to one cusp"""
    n = trajectory.t.size
    cusps = trajectory.cusp if trajectory.cusp is not None else np.zeros(n, dtype=np.int64)
    tracker = ExcursionTracker([r], trajectory.height[:1])
    idx = np.zeros(1, dtype=np.int64)
    dx = np.diff(trajectory.x)
    for i in range(1, n):
        tracker.update(
            idx,
            trajectory.t[i : i + 1],
            trajectory.height[i : i + 1],
            dx[i - 1 : i],
            cusps[i : i + 1],
        )
    records = tracker.records[0]
    if cusp is not None:
        records = [rec for rec in records if rec.cusp == cusp]
    return records
