"""击中时间检验

X_s = w_s + s/2 first reaches level t at h_t ≈ 2t, and the normalized stochastic integral
e^{−t}·∫₀^{h_t} e^{X_s} dW_s (W independent of w) converges in law to the variable with characteristic function
c / sinh c, whose series is the reciprocal of Σ Γ(3/2)·c^{2k} / (4^k·k!·Γ(k+3/2)).
"""

from dataclasses import dataclass
import math
from typing import Final

from loguru import logger
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from ..exception import ConfigException
from ..report import CheckReport
from ..utils import chunk_bounds, make_rng, run_chunks
from .ecf import default_q_grid
from .laws import CfTarget, law_test, relative_check

HITTING_CHANNEL: Final[int] = 13
MIN_LEVEL: Final[float] = 10.0
SERIES_TERMS: Final[int] = 30
MAX_TIME_FACTOR: Final[float] = 8.0
"""Paths still below the level after this many multiples of 2t are reported as failures"""


def bessel_series(c: ArrayLike, terms: int = SERIES_TERMS) -> NDArray[np.float64]:
    """Σ_{k<terms} Γ(3/2)·c^{2k} / (4^k·k!·Γ(k+3/2)), equal to sinh(c)/c"""
    c = np.asarray(c, dtype=float)
    ks = np.arange(terms)
    log_coef = gammaln(1.5) - ks * math.log(4.0) - gammaln(ks + 1.0) - gammaln(ks + 1.5)
    powers = np.power.outer(c * c, ks)
    return (powers * np.exp(log_coef)).sum(axis=-1)


def hitting_target_cf(c: ArrayLike, terms: int = SERIES_TERMS) -> NDArray[np.complex128]:
    return (1.0 / bessel_series(c, terms)).astype(np.complex128)


def _closed_form(c: NDArray[np.float64]) -> NDArray[np.float64]:
    safe = np.where(c == 0.0, 1.0, c)
    return np.where(c == 0.0, 1.0, safe / np.sinh(safe))


def _simulate_hits(
    seed: int, start: int, stop: int, t: float, dt: float
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """(h_t, e^{−t}∫e^{X}dW, unfinished count) for paths start..stop, one stream per chunk"""
    n = stop - start
    rng = make_rng(seed, HITTING_CHANNEL, start)
    x = np.zeros(n)
    s = np.zeros(n)
    integral = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    sq = math.sqrt(dt)
    max_steps = int(math.ceil(MAX_TIME_FACTOR * 2.0 * t / dt))
    for _ in range(max_steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        dw, dv = rng.standard_normal((2, idx.size)) * sq
        integral[idx] += np.exp(x[idx] - t) * dv
        x[idx] += dw + 0.5 * dt
        s[idx] += dt
        alive[idx[x[idx] >= t]] = False
    return s, integral, int(alive.sum())


@dataclass(slots=True)
class HittingSummary:
    t: float
    dt: float
    hitting_times: NDArray[np.float64]
    integrals: NDArray[np.float64]
    unfinished: int
    reports: list[CheckReport]

    @property
    def mean_ratio(self) -> float:
        return float(self.hitting_times.mean() / (2.0 * self.t))

    @property
    def passed(self) -> bool:
        return self.unfinished == 0 and all(r.passed for r in self.reports)


def hitting_time_check(
    n_paths: int,
    t: float,
    dt: float = 0.01,
    seed: int = 0,
    ratio_tolerance: float = 0.03,
    ecf_threshold: float = 0.05,
    q_grid: ArrayLike | None = None,
    threads: int = 1,
    chunk_size: int = 250,
) -> HittingSummary:
    """Simulate first passages of w_s + s/2 to level t and check h_t/(2t) and the law of the normalized integral

    Args:
        t: 目标水平, 至少为 10
        dt: Euler 步长
        ratio_tolerance: mean(h_t)/(2t) 与 1 的允许偏差
        q_grid: 默认 [−4, 4] 上 17 点
    """
    if t < MIN_LEVEL:
        raise ConfigException(f"hitting level must be at least {MIN_LEVEL}, got {t}")
    if dt <= 0.0 or n_paths < 1:
        raise ConfigException(f"need dt > 0 and at least one path, got dt={dt}, n={n_paths}")
    tasks = [(seed, lo, hi, t, dt) for lo, hi in chunk_bounds(n_paths, chunk_size)]
    parts = run_chunks(_simulate_hits, tasks, threads, "hitting")
    h = np.concatenate([p[0] for p in parts])
    integral = np.concatenate([p[1] for p in parts])
    unfinished = sum(p[2] for p in parts)
    if unfinished:
        logger.warning(f"{unfinished} of {n_paths} paths never reached level {t}")
    params = {"t": t, "dt": dt, "seed": seed}
    ratio = float(h.mean() / (2.0 * t))
    ratio_report = relative_check("hitting_time_ratio", n_paths, ratio, 1.0, ratio_tolerance, params)
    if unfinished:
        ratio_report.passed = False
    grid = default_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    law = law_test(integral, CfTarget(lambda q: hitting_target_cf(q[:, 0]), "c/sinh c"), grid, ecf_threshold)
    reports = [ratio_report, law.to_report("hitting_integral_ecf", parameters=params)]
    return HittingSummary(t, dt, h, integral, unfinished, reports)


def series_error(c: ArrayLike, terms: int = SERIES_TERMS) -> float:
    """Largest gap between the truncated series and sinh(c)/c on the given points"""
    c = np.asarray(c, dtype=float)
    return float(np.max(np.abs(1.0 / bessel_series(c, terms) - _closed_form(c))))

