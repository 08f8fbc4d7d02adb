"""Liouville 测度 μ^Γ 与叶测度的采样"""

from dataclasses import dataclass
import math

import numpy as np
from numpy.typing import NDArray

from ..constants import TWO_PI
from ..hyperbolic_core import IwasawaPoint, MetricParam
from ..modular_group import ModularGroupSpec, sample_fundamental_domain
from ..utils import make_rng
from .leaf import LeafElement, lift_to_leaf

LIOUVILLE_CHANNEL = 7
"""Stream channel of the initial condition, distinct from the noise channels"""


@dataclass(frozen=True, slots=True)
class LiouvilleSample:
    point: IwasawaPoint
    coset: int
    direction: float
    """单位切向量在 z 处的欧氏方向角 θ + π/2"""


def sample_liouville_arrays(
    group: ModularGroupSpec, rng: np.random.Generator, size: int
) -> tuple[NDArray[np.complex128], NDArray[np.float64], NDArray[np.int64]]:
    """(z, θ, coset) drawn from dx·dy·dθ/y² on the Γ(1) domain times the coset set"""
    z = sample_fundamental_domain(rng, size)
    theta = rng.uniform(0.0, TWO_PI, size)
    coset = rng.integers(0, group.index, size)
    return z, theta, coset


def sample_liouville(group: ModularGroupSpec, seed: int, path_id: int = 0) -> LiouvilleSample:
    """One draw of μ^Γ from the stream (seed, path_id)"""
    rng = make_rng(seed, path_id, LIOUVILLE_CHANNEL)
    z, theta, coset = sample_liouville_arrays(group, rng, 1)
    th = float(theta[0])
    return LiouvilleSample(IwasawaPoint.from_z(complex(z[0]), th), int(coset[0]), th + 0.5 * math.pi)


def sample_leaf(
    group: ModularGroupSpec,
    k: float,
    eps: int,
    a: MetricParam,
    rng: np.random.Generator,
    n: int,
) -> list[tuple[LeafElement, int]]:
    """n draws of μ^k_ε: Liouville points lifted to L(k, ε) with θ₀ = 0, paired with their cosets"""
    z, theta, coset = sample_liouville_arrays(group, rng, n)
    return [
        (lift_to_leaf(complex(zi), float(ti) + 0.5 * math.pi, k, eps, 0.0, a), int(ci))
        for zi, ti, ci in zip(z, theta, coset)
    ]
