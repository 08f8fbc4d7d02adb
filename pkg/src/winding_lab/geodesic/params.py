"""测地线守恒量与闭式解

Along a unit-speed geodesic of (G, gᵃ) with Iwasawa coordinates (y, x, θ):

    c  = y⁻¹ẋ + θ̇
    c′ = (1 + a⁻²)y⁻²ẋ + a⁻²y⁻¹θ̇
    c″ = ẏ/y + c′x
    C² = (c′x − c″)² + (c′y − c·a⁻²)²,    k = c·a⁻²/C

For c′ ≠ 0 the projection is the circle c′x = c″ + C·sin φ, c′y = c·a⁻² + C·cos φ with φ̇ = c′y = C(k + cos φ),
so that θ_s = θ₀ + c(1 + a⁻²)s − (φ_s − φ₀).
"""

from dataclasses import dataclass
import math
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..constants import HOROCYCLE_TOL, Branch
from ..exception import GeodesicException
from ..hyperbolic_core import IwasawaPoint, MetricParam, TangentVector, check_metric, wrap_angle

VERTICAL_TOL: Final[float] = 1e-13
"""|c′·y| below this is treated as c′ = 0"""


def body_components(theta: float, tv: TangentVector) -> tuple[float, float, float]:
    """Components (p, q, r) of a tangent vector on the left-invariant frame (L_λ, L_α, L_κ)"""
    s, c = math.sin(theta), math.cos(theta)
    return tv.u * s + tv.v * c, tv.u * c - tv.v * s, tv.v + tv.w


def tangent_from_body(theta: float, p: float, q: float, r: float, unit: bool = False) -> TangentVector:
    s, c = math.sin(theta), math.cos(theta)
    u = p * s + q * c
    v = p * c - q * s
    return TangentVector(u, v, r - v, unit=unit)


@dataclass(frozen=True, slots=True)
class GeodesicParams:
    """(c, c′, c″, C, k, ε, s₀) of one geodesic, together with the data its closed form needs"""

    a: float
    c: float
    c_prime: float
    c_second: float
    C: float
    """投影速度"""
    k: float
    """叶参数, C = 0 时为 ±∞"""
    eps: int
    """sign c′, c′ = 0 时取 +1"""
    s0: float
    branch: Branch
    phi0: float = 0.0
    """φ 闭式在 s = 0 处的值"""

    @property
    def theta_rate(self) -> float:
        """c(1 + a⁻²): the asymptotic slope of θ_s"""
        return self.c * (1.0 + self.a**-2)

    @property
    def energy_split(self) -> float:
        """C² + a²k²C², equal to 1 for unit-speed geodesics"""
        if math.isinf(self.k):
            return (self.c / self.a) ** 2
        return self.C**2 * (1.0 + (self.a * self.k) ** 2)

    def phase(self, s: ArrayLike) -> NDArray[np.float64]:
        """The continuous angle φ_s of the projected circle"""
        s = np.asarray(s, dtype=float)
        k, C = self.k, self.C
        match self.branch:
            case Branch.VERTICAL:
                return np.zeros_like(s)
            case Branch.TAN if C == 0.0:
                # 纯旋转: φ̇ = c·a⁻²
                return self.phi0 + self.c * self.a**-2 * s
            case Branch.TAN:
                b = math.sqrt((k + 1.0) / (k - 1.0))
                tau = 0.5 * C * (k + 1.0) / b * (s - self.s0)
                return 2.0 * (np.arctan(b * np.tan(tau)) + np.pi * np.floor(tau / np.pi + 0.5))
            case Branch.TANH:
                rate = 0.5 * C * math.sqrt(1.0 - k * k)
                th = np.tanh(rate * (s - self.s0))
                if self.eps > 0:
                    return 2.0 * np.arctan(math.sqrt((1.0 + k) / (1.0 - k)) * th)
                return np.pi - 2.0 * np.arctan(math.sqrt((1.0 - k) / (1.0 + k)) * th)
            case Branch.HOROCYCLE:
                arc = np.arctan(C * (s - self.s0))
                return 2.0 * arc if k > 0.0 else np.pi - 2.0 * arc

    def phase_limits(self) -> tuple[float, float]:
        """lim φ_s as s → −∞ and s → +∞ on the TANH branch"""
        if self.branch is not Branch.TANH:
            raise GeodesicException(f"phase limits need the tanh branch, not {self.branch}")
        k = self.k
        if self.eps > 0:
            lim = 2.0 * math.atan(math.sqrt((1.0 + k) / (1.0 - k)))
            return -lim, lim
        lim = 2.0 * math.atan(math.sqrt((1.0 - k) / (1.0 + k)))
        return math.pi + lim, math.pi - lim


def _phase_origin(branch: Branch, k: float, C: float, eps: int, phi: float) -> float:
    """s₀ such that the branch formula passes through φ at s = 0"""
    if branch is Branch.VERTICAL or C == 0.0:
        return 0.0
    # φ mod 2π, for the branches living around π
    phi_m = math.fmod(phi + 2.0 * math.pi, 2.0 * math.pi)
    match branch:
        case Branch.TAN:
            b = math.sqrt((k + 1.0) / (k - 1.0))
            tau0 = math.atan2(math.sin(0.5 * phi), b * math.cos(0.5 * phi))
            return -tau0 / (0.5 * C * (k + 1.0) / b)
        case Branch.TANH:
            rate = 0.5 * C * math.sqrt(1.0 - k * k)
            if eps > 0:
                arg = math.tan(0.5 * phi) / math.sqrt((1.0 + k) / (1.0 - k))
            else:
                arg = math.tan(0.5 * (math.pi - phi_m)) / math.sqrt((1.0 - k) / (1.0 + k))
            return -math.atanh(max(-1.0 + 1e-16, min(1.0 - 1e-16, arg))) / rate
        case _:
            t = math.tan(0.5 * phi) if k > 0.0 else math.tan(0.5 * (math.pi - phi_m))
            return -t / C


def constants_from_initial(p: IwasawaPoint, tv: TangentVector, a: MetricParam) -> GeodesicParams:
    """守恒量与分支

    Raises:
        MetricParamException: a = 0
        GeodesicException: 切向量不是单位向量
    """
    a = check_metric(a)
    tv.check_unit(a)
    u, v, w = tv.u, tv.v, tv.w
    c = v + w
    c_prime_y = v + c * a**-2
    c_prime = c_prime_y / p.y
    c_second = u + c_prime * p.x
    C = math.hypot(u, v)
    if C > 0.0:
        k = c * a**-2 / C
    else:
        k = math.copysign(math.inf, c)
    if abs(c_prime_y) <= VERTICAL_TOL:
        branch, c_prime, eps = Branch.VERTICAL, 0.0, 1
        c_second = u
    else:
        eps = 1 if c_prime > 0.0 else -1
        if abs(abs(k) - 1.0) <= HOROCYCLE_TOL:
            branch = Branch.HOROCYCLE
        elif abs(k) < 1.0:
            branch = Branch.TANH
        else:
            branch = Branch.TAN
    phi = math.atan2(-u, v) if C > 0.0 else 0.0
    s0 = _phase_origin(branch, k, C, eps, phi)
    params = GeodesicParams(a, c, c_prime, c_second, C, k, eps, s0, branch)
    if branch is Branch.VERTICAL:
        return params
    return GeodesicParams(a, c, c_prime, c_second, C, k, eps, s0, branch, float(params.phase(0.0)))


def flow_arrays(
    params: GeodesicParams, p0: IwasawaPoint, s: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """(y_s, x_s, θ_s) with θ unwrapped, for an array of times"""
    s = np.asarray(s, dtype=float)
    ia2 = params.a**-2
    if params.branch is Branch.VERTICAL:
        cs = params.c_second
        if cs != 0.0:
            y = p0.y * np.exp(cs * s)
            x = p0.x - params.c * ia2 * p0.y * np.expm1(cs * s) / cs
        else:
            y = np.full_like(s, p0.y)
            x = p0.x - params.c * ia2 * p0.y * s
        return y, x, p0.theta + params.theta_rate * s
    phi = params.phase(s)
    d = 0.5 * (phi - params.phi0)
    m = 0.5 * (phi + params.phi0)
    # sin φ − sin φ₀ and cos φ − cos φ₀ without cancellation
    ratio = 2.0 * params.C / params.c_prime * np.sin(d)
    x = p0.x + ratio * np.cos(m)
    y = p0.y - ratio * np.sin(m)
    theta = p0.theta + params.theta_rate * s - (phi - params.phi0)
    return y, x, theta


def flow(params: GeodesicParams, p0: IwasawaPoint, s: float) -> IwasawaPoint:
    """Closed-form geodesic flow from p0 for time s

    Raises:
        GeodesicException: 闭式给出非正高度 (参数与起点不一致)
    """
    y, x, theta = flow_arrays(params, p0, s)
    if not y > 0.0:
        raise GeodesicException(f"closed form left the half-plane at s={s}")
    return IwasawaPoint(float(y), float(x), wrap_angle(float(theta)))


def unwrapped_theta(params: GeodesicParams, p0: IwasawaPoint, s: ArrayLike) -> NDArray[np.float64]:
    """θ_s − θ₀ = c(1 + a⁻²)s − (φ_s − φ₀), the integral of dθ along the geodesic"""
    return flow_arrays(params, p0, s)[2] - p0.theta


def velocity(params: GeodesicParams, p0: IwasawaPoint, s: float) -> TangentVector:
    """(u, v, w) at flow(s) from ẏ/y = c″ − c′x, ẋ/y = c′y − c·a⁻², θ̇ = c(1 + a⁻²) − c′y"""
    p = flow(params, p0, s)
    cpy = params.c_prime * p.y
    if params.branch is Branch.VERTICAL:
        u = params.c_second
    else:
        # c″ − c′x = −C·sin φ
        u = -params.C * math.sin(float(params.phase(s)))
    return TangentVector(u, cpy - params.c * params.a**-2, params.theta_rate - cpy, unit=True)
