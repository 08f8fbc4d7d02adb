"""Lockstep simulation of a chunk of Brownian paths on Γ\\G with winding accumulators"""

from collections.abc import Sequence
from dataclasses import dataclass, field

from loguru import logger
import numpy as np
from numpy.typing import NDArray

from ..constants import TWO_PI
from ..exception import ConfigException, NonFiniteException
from ..forms import HarmonicFormSpec
from ..hyperbolic_core import IwasawaPoint
from ..modular_group import ModularGroupSpec, reduce_gamma1_array
from ..report import ExcursionRecord, WindingSample
from ..utils import chunk_bounds, make_rng, run_chunks
from .excursions import ExcursionTracker
from .scheme import StepConfig, advance, form_increments

NOISE_BLOCK = 4096
"""每条路径每个噪声通道一次生成的正态数"""


@dataclass(slots=True)
class ChunkResult:
    samples: list[WindingSample]
    excursions: list[ExcursionRecord] = field(default_factory=list)
    occupation: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 0)))
    """occupation[i, ℓ]: 在 {ỹ_ℓ > levels[i]} 中停留的总时间"""
    total_time: float = 0.0
    steps: int = 0


def checkpoint_times(horizon: float, fractions: Sequence[float]) -> list[float]:
    """Sorted distinct checkpoint times c·T for c ∈ (0, 1]"""
    if horizon < 0.0:
        raise ConfigException(f"horizon must be non-negative, got {horizon}")
    if any(not 0.0 < c <= 1.0 for c in fractions):
        raise ConfigException(f"checkpoint fractions must lie in (0, 1], got {list(fractions)}")
    return sorted({c * horizon for c in fractions} | {horizon})


class _Noise:
    """Per-path Philox streams, one per channel, read in blocks"""

    def __init__(self, seed: int, path_ids: Sequence[int]):
        self.gens = [[make_rng(seed, pid, ch) for ch in range(3)] for pid in path_ids]
        self.buf = np.empty((3, len(path_ids), NOISE_BLOCK))
        self.cursor = NOISE_BLOCK

    def draw(self, idx: NDArray[np.int64]) -> NDArray[np.float64]:
        if self.cursor == NOISE_BLOCK:
            for p in idx:
                for ch in range(3):
                    self.buf[ch, p] = self.gens[p][ch].standard_normal(NOISE_BLOCK)
            self.cursor = 0
        out = self.buf[:, idx, self.cursor]
        self.cursor += 1
        return out


def simulate_chunk(
    cfg: StepConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    fractions: Sequence[float],
    path_ids: Sequence[int],
    start: IwasawaPoint | None = None,
    start_coset: int = 0,
    levels: Sequence[float] = (),
) -> ChunkResult:
    """Simulate paths `path_ids` in lockstep

    Every path owns its step size and clock; a path stops exactly at each checkpoint and retires after the last.
    Windings are accumulated on the unreduced increments before any reduction.

    Args:
        cfg: 步进配置
        group: 模群
        forms: 需要累积的形式
        horizon: 终止时间 T
        fractions: 检查点 c·T 的 c
        path_ids: 路径编号, 决定噪声流
        start: 起点, 默认 (1, 0, 0)
        start_coset: 起点陪集
        levels: 尖点游程的出口高度 r

    Returns:
        ChunkResult: 每条路径的样本, 游程与占用时间
    """
    start = start or IwasawaPoint(1.0, 0.0, 0.0)
    times = checkpoint_times(horizon, fractions)
    p = len(path_ids)
    nf = len(forms)
    y = np.full(p, start.y)
    x = np.full(p, start.x)
    th = np.full(p, start.theta)
    coset = np.full(p, start_coset, dtype=np.int64)
    t = np.zeros(p)
    theta_acc = np.zeros(p)
    acc_ito = np.zeros((p, nf))
    acc_prim = np.zeros((p, nf))
    out_raw = np.zeros((p, len(times), nf))
    out_prim = np.zeros_like(out_raw)
    out_theta = np.zeros((p, len(times)))
    next_cp = np.zeros(p, dtype=np.int64)
    targets = np.array(times)
    cusp_of, _ = group.sheet_table
    tracker = ExcursionTracker(levels, y.copy()) if levels else None
    occupation = np.zeros((len(levels), group.nu_inf))
    noise = _Noise(cfg.seed, path_ids)
    active = np.full(p, horizon > 0.0)
    steps = 0
    while active.any():
        idx = np.flatnonzero(active)
        du, dv, dw = noise.draw(idx)
        yi, xi = y[idx], x[idx]
        target = targets[next_cp[idx]]
        dt = cfg.effective_dt(yi)
        clamp = t[idx] + dt >= target
        dt = np.where(clamp, target - t[idx], dt)
        sq = np.sqrt(dt)
        y1, ybar, dx, dth = advance(yi, xi, du * sq, dv * sq, dw * sq, dt, cfg.a)
        if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(dx))):
            raise NonFiniteException("Brownian state")
        ci = coset[idx]
        if nf:
            z0 = xi + 1j * yi
            z1 = (xi + dx) + 1j * y1
            zm = (xi + 0.5 * dx) + 1j * ybar
            ito, prim = form_increments(forms, z0, z1, zm, ci, dth)
            acc_ito[idx] += ito
            acc_prim[idx] += prim
        t_new = np.where(clamp, target, t[idx] + dt)
        if tracker is not None:
            tracker.update(idx, t_new, y1, dx, cusp_of[ci])
            for li, r in enumerate(levels):
                above = y1 > r
                np.add.at(occupation[li], cusp_of[ci[above]], dt[above])
        y[idx] = y1
        x[idx] = xi + dx
        th[idx] = np.mod(th[idx] + dth, TWO_PI)
        theta_acc[idx] += dth
        t[idx] = t_new

        if clamp.any():
            hit = idx[clamp]
            slot = next_cp[hit]
            out_raw[hit, slot] = acc_ito[hit]
            out_prim[hit, slot] = acc_prim[hit]
            out_theta[hit, slot] = theta_acc[hit]
            next_cp[hit] += 1
            active[hit[next_cp[hit] == len(times)]] = False

        steps += 1
        due = (steps % cfg.reduction_period == 0) | (y1 < cfg.reduce_below) | (np.abs(x[idx]) > cfg.reduce_beyond)
        red = idx[due]
        if red.size:
            z = x[red] + 1j * y[red]
            zr, mats, cos = reduce_gamma1_array(z, coset[red], group)
            assert cos is not None
            j = mats[:, 1, 0] * z + mats[:, 1, 1]
            th[red] = np.mod(th[red] - 2.0 * np.angle(j), TWO_PI)
            x[red], y[red] = zr.real, zr.imag
            coset[red] = cos

    logger.debug(f"chunk {path_ids[0] if p else '-'}..: {p} paths, {steps} lockstep iterations")
    kinds = [f.kind for f in forms]
    names = [f.name for f in forms]
    counts = tracker.counts() if tracker is not None else [0] * p
    samples = [
        WindingSample(
            seed=cfg.seed,
            path_id=int(pid),
            forms=names,
            kinds=kinds,
            checkpoint_times=list(times),
            raw=out_raw[i].tolist(),
            primitive=out_prim[i].tolist(),
            theta=out_theta[i].tolist(),
            excursion_count=counts[i],
        )
        for i, pid in enumerate(path_ids)
    ]
    return ChunkResult(
        samples=samples,
        excursions=tracker.all_records() if tracker is not None else [],
        occupation=occupation,
        total_time=horizon * p,
        steps=steps,
    )


def simulate_winding(
    cfg: StepConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    fractions: Sequence[float] = (1.0,),
    path_id: int = 0,
    start: IwasawaPoint | None = None,
    start_coset: int = 0,
) -> WindingSample:
    """One trajectory, stream `path_id` of the master seed"""
    return simulate_chunk(cfg, group, forms, horizon, fractions, [path_id], start, start_coset).samples[0]


def batch_simulate(
    cfg: StepConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    n_paths: int,
    fractions: Sequence[float] = (1.0,),
    threads: int = 1,
    chunk_size: int = 256,
    levels: Sequence[float] = (),
    start: IwasawaPoint | None = None,
    start_coset: int = 0,
) -> ChunkResult:
    """N independent paths in fixed chunks; output depends only on (seed, path index)

    Raises:
        ConfigException: N < 1
    """
    if n_paths < 1:
        raise ConfigException(f"need at least one path, got {n_paths}")
    tasks = [
        (cfg, group, tuple(forms), horizon, tuple(fractions), list(range(lo, hi)), start, start_coset, tuple(levels))
        for lo, hi in chunk_bounds(n_paths, chunk_size)
    ]
    logger.info(f"brownian: {n_paths} paths on {group.name}, T={horizon}, {len(tasks)} chunks, {threads} workers")
    parts = run_chunks(simulate_chunk, tasks, threads, "brownian")
    merged = ChunkResult(samples=[], occupation=np.zeros((len(levels), group.nu_inf)))
    for part in parts:
        merged.samples += part.samples
        merged.excursions += part.excursions
        merged.occupation = merged.occupation + part.occupation
        merged.total_time += part.total_time
        merged.steps += part.steps
    return merged
