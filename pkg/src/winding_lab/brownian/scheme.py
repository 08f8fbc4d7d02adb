"""左 Brownian 运动的单步格式

dy = y dU, dx = y dV, dθ = a dW − dV: y is advanced by its exact lognormal solution, x with the midpoint
height ȳ = √(y·y′), θ exactly.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
import math

import numpy as np
from numpy.typing import NDArray

from ..exception import ConfigException, NonFiniteException
from ..forms import HarmonicFormSpec
from ..hyperbolic_core import IwasawaPoint, check_metric

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class StepConfig:
    dt_base: float
    """基础步长"""
    a: float
    """度量参数, 允许 0"""
    seed: int = 0
    """主种子"""
    reduction_period: int = 64
    """约化间隔步数"""
    cusp_scale: float = 5.0
    """dt = dt_base·min(1, (cusp_scale/y)²)"""
    reduce_below: float = 0.75
    """低于该高度立即约化"""
    reduce_beyond: float = 2.0
    """|x| 超过该值立即约化"""

    def __post_init__(self):
        if not (self.dt_base > 0.0 and math.isfinite(self.dt_base)):
            raise ConfigException(f"dt_base must be positive, got {self.dt_base}")
        check_metric(self.a, allow_zero=True)
        if self.reduction_period < 1:
            raise ConfigException("reduction_period must be at least 1")

    def effective_dt(self, y: FloatArray) -> FloatArray:
        return self.dt_base * np.minimum(1.0, (self.cusp_scale / y) ** 2)


@dataclass(slots=True)
class BrownianState:
    point: IwasawaPoint
    coset: int = 0
    t: float = 0.0
    theta_accum: float = 0.0
    """未约化的 θ 累计"""
    windings: list[tuple[float, float]] = field(default_factory=list)
    """每个形式的 (Itô 路线, 原函数路线)"""


def advance(
    y: FloatArray, x: FloatArray, du: FloatArray, dv: FloatArray, dw: FloatArray, dt: FloatArray, a: float
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """One step of the scheme; returns (y′, ȳ, Δx, Δθ)"""
    y1 = y * np.exp(du - 0.5 * dt)
    ybar = np.sqrt(y * y1)
    return y1, ybar, ybar * dv, a * dw - dv


def form_increments(
    forms: Sequence[HarmonicFormSpec],
    z0: NDArray[np.complex128],
    z1: NDArray[np.complex128],
    zmid: NDArray[np.complex128],
    coset: NDArray[np.int64],
    dtheta: FloatArray,
) -> tuple[FloatArray, FloatArray]:
    """Per-form increments by the midpoint integrand and by the primitive, shapes (n, len(forms))"""
    ito = np.empty((z0.size, len(forms)))
    prim = np.empty_like(ito)
    dz = z1 - z0
    for j, form in enumerate(forms):
        c_y, c_x = form.covector_arrays(zmid, coset)
        ito[:, j] = c_y * dz.imag + c_x * dz.real + form.c_theta * dtheta
        prim[:, j] = form.primitive(z0, z1, coset) + form.c_theta * dtheta
    return ito, prim


def step(
    state: BrownianState,
    cfg: StepConfig,
    noise: tuple[float, float, float],
    forms: Sequence[HarmonicFormSpec] = (),
    dt: float | None = None,
) -> BrownianState:
    """Advance one step with Gaussian increments (ΔU, ΔV, ΔW) of variance dt

    Raises:
        NonFiniteException: 噪声非有限
    """
    if not all(math.isfinite(v) for v in noise):
        raise NonFiniteException("noise")
    dt = cfg.dt_base if dt is None else dt
    p = state.point
    du, dv, dw = (np.array([v]) for v in noise)
    y1, ybar, dx, dth = advance(np.array([p.y]), np.array([p.x]), du, dv, dw, np.array([dt]), cfg.a)
    windings = list(state.windings) or [(0.0, 0.0)] * len(forms)
    if forms:
        z0 = np.array([p.z])
        z1 = np.array([complex(p.x + dx[0], y1[0])])
        zm = np.array([complex(p.x + 0.5 * dx[0], ybar[0])])
        ito, prim = form_increments(forms, z0, z1, zm, np.array([state.coset]), dth)
        windings = [(w0 + float(i), w1 + float(q)) for (w0, w1), i, q in zip(windings, ito[0], prim[0])]
    return replace(
        state,
        point=IwasawaPoint(float(y1[0]), p.x + float(dx[0]), p.theta + float(dth[0])),
        t=state.t + dt,
        theta_accum=state.theta_accum + float(dth[0]),
        windings=windings,
    )
