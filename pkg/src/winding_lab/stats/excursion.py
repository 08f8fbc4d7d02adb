"""尖点游程的统计预测

At exit level r in a cusp of width h on a surface of area V:
- elementary windings φ_n are Cauchy with scale √r
- the mean duration of an excursion is 2·log(1 + r^{−1/2})
- the number of excursions per unit time ρ_r satisfies √r·ρ_r → h/(2V)
- the time fraction spent in {ỹ > r} is (h/r)/V
"""

from collections.abc import Sequence
from dataclasses import dataclass
import math
from typing import Final

import numpy as np
from numpy.typing import ArrayLike

from ..exception import ConfigException, TooFewSamplesException
from ..modular_group import ModularGroupSpec
from ..report import CheckReport, ExcursionRecord
from .laws import CauchyTarget, law_test, relative_check

MIN_EXCURSIONS: Final[int] = 300


@dataclass(frozen=True, slots=True)
class ExcursionTolerances:
    phi_ecf: float = 0.06
    """φ_n 的 ECF sup 距离"""
    duration: float = 0.05
    """平均持续时间的相对误差"""
    rate: float = 0.15
    """√r·速率 的相对误差"""
    occupation: float = 0.10


def mean_duration(r: float) -> float:
    return 2.0 * math.log1p(1.0 / math.sqrt(r))


def rate_limit(group: ModularGroupSpec, ell: int) -> float:
    """h_ℓ/(2V), the limit of √r·ρ_r"""
    return group.widths[ell] / (2.0 * group.covolume)


def occupation_target(group: ModularGroupSpec, ell: int, r: float) -> float:
    return group.widths[ell] / r / group.covolume


def excursion_report(
    records: Sequence[ExcursionRecord],
    r: float,
    group: ModularGroupSpec,
    ell: int,
    total_time: float,
    tolerances: ExcursionTolerances | None = None,
    q_grid: ArrayLike | None = None,
) -> list[CheckReport]:
    """φ-law, mean duration and rate checks for the excursions of cusp ℓ at level r

    Args:
        records: 游程记录, 其他尖点与层级会被过滤
        total_time: 所有路径的总模拟时间
        q_grid: 默认 [−4, 4] 上 17 点按 1/√r 缩放

    Raises:
        TooFewSamplesException: 少于 300 条记录
    """
    tol = tolerances or ExcursionTolerances()
    mine = [rec for rec in records if rec.cusp == ell and rec.level == r]
    if len(mine) < MIN_EXCURSIONS:
        raise TooFewSamplesException(len(mine), MIN_EXCURSIONS)
    if total_time <= 0.0:
        raise ConfigException(f"total time must be positive, got {total_time}")
    params = {"r": r, "cusp": group.cusps[ell].label, "group": group.name, "entry_level": r + math.sqrt(r)}
    phi = np.array([rec.phi for rec in mine])
    grid = np.linspace(-4.0, 4.0, 17) / math.sqrt(r) if q_grid is None else np.asarray(q_grid, dtype=float)
    law = law_test(phi, CauchyTarget(math.sqrt(r)), grid, tol.phi_ecf)
    duration = float(np.mean([rec.duration for rec in mine]))
    rate = len(mine) / total_time
    return [
        law.to_report(f"excursion_phi_r{r:g}", target=math.sqrt(r), parameters=params),
        relative_check(f"excursion_duration_r{r:g}", len(mine), duration, mean_duration(r), tol.duration, params),
        relative_check(
            f"excursion_rate_r{r:g}", len(mine), math.sqrt(r) * rate, rate_limit(group, ell), tol.rate, params
        ),
    ]


def occupation_report(
    occupation: float, total_time: float, r: float, group: ModularGroupSpec, ell: int, tolerance: float = 0.10
) -> CheckReport:
    """Fraction of time spent in {ỹ_ℓ > r} against (h/r)/V"""
    if total_time <= 0.0:
        raise ConfigException(f"total time must be positive, got {total_time}")
    params = {"r": r, "cusp": group.cusps[ell].label, "group": group.name}
    return relative_check(
        f"occupation_r{r:g}",
        0,
        occupation / total_time,
        occupation_target(group, ell, r),
        tolerance,
        params,
    )
