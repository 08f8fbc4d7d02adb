"""经验特征函数"""

from dataclasses import dataclass
import math
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exception import ConfigException, TooFewSamplesException

MIN_ECF_SAMPLES: Final[int] = 100


def default_q_grid(points: int = 17, half_width: float = 4.0) -> NDArray[np.float64]:
    """points equally spaced on [−w, w]"""
    return np.linspace(-half_width, half_width, points)


def as_matrix(values: ArrayLike) -> NDArray[np.float64]:
    """Samples or grid points as an (n, d) array"""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None]
    return arr


@dataclass(frozen=True, slots=True)
class EcfReport:
    q_grid: NDArray[np.float64]
    """(m, d)"""
    ecf_re: NDArray[np.float64]
    ecf_im: NDArray[np.float64]
    stderr: NDArray[np.float64]
    """逐点刀切标准误差 (复数模)"""
    n: int

    @property
    def values(self) -> NDArray[np.complex128]:
        return self.ecf_re + 1j * self.ecf_im

    def table(self, target: NDArray[np.complex128] | None = None) -> list[dict[str, float]]:
        rows = []
        for i, q in enumerate(self.q_grid):
            row = {f"q{j}": float(v) for j, v in enumerate(q)} if q.size > 1 else {"q": float(q[0])}
            row |= {"ecf_re": float(self.ecf_re[i]), "ecf_im": float(self.ecf_im[i]), "stderr": float(self.stderr[i])}
            if target is not None:
                row |= {"target_re": float(target[i].real), "target_im": float(target[i].imag)}
            rows.append(row)
        return rows


def ecf(samples: ArrayLike, q_grid: ArrayLike, minimum: int = MIN_ECF_SAMPLES) -> EcfReport:
    """Averages of exp(i⟨q, X⟩) with jackknife standard errors

    For a sample mean the leave-one-out jackknife variance is (n−1)/n·Σ(m₍ᵢ₎ − m̄)² = s²/n, which is used directly.

    Raises:
        TooFewSamplesException: n < minimum
        ConfigException: 维数不一致或网格为空
    """
    x = as_matrix(samples)
    q = as_matrix(q_grid)
    n = x.shape[0]
    if n < max(minimum, 2):
        raise TooFewSamplesException(n, max(minimum, 2))
    if q.shape[0] == 0:
        raise ConfigException("empty q grid")
    if q.shape[1] != x.shape[1]:
        raise ConfigException(f"q grid has dimension {q.shape[1]}, samples have {x.shape[1]}")
    phase = x @ q.T
    re = np.cos(phase)
    im = np.sin(phase)
    var = re.var(axis=0, ddof=1) + im.var(axis=0, ddof=1)
    return EcfReport(q, re.mean(axis=0), im.mean(axis=0), np.sqrt(var / n), n)


def jackknife_stderr(values: ArrayLike, statistic=np.mean) -> float:
    """Leave-one-out jackknife standard error of an arbitrary scalar statistic"""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        raise TooFewSamplesException(n, 2)
    loo = np.array([statistic(np.delete(v, i)) for i in range(n)])
    return math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
