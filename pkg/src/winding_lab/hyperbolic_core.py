"""G = PSL₂(ℝ) 的群、坐标与度量

Elements are sign-normalized unit-determinant matrices. Points of G are written in Iwasawa coordinates
g = ±n(x)·a(y)·k(θ), so that g(i) = x + iy and g'(i) = y·e^{iθ}.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
import math
from typing import Final, TypeAlias

import numpy as np
from numpy.typing import NDArray

from .constants import DET_TOL, TWO_PI, BoundaryPoint, IsometryKind
from .exception import GeodesicException, MetricParamException, NonFiniteException

Boundary: TypeAlias = float | BoundaryPoint
"""A point of ∂H²: a real number or ∞"""

MetricParam: TypeAlias = float


def check_metric(a: MetricParam, *, allow_zero: bool = False) -> float:
    """校验度量参数 a

    Raises:
        NonFiniteException: a 非有限
        MetricParamException: a = 0 且调用方不允许
    """
    a = float(a)
    if not math.isfinite(a):
        raise NonFiniteException("metric parameter")
    if a == 0.0 and not allow_zero:
        raise MetricParamException
    return a


def _canonical(a: float, b: float, c: float, d: float) -> tuple[float, float, float, float]:
    det = a * d - b * c
    if not math.isfinite(det):
        raise NonFiniteException("matrix entries")
    if det <= 0.0:
        raise GeodesicException(f"determinant {det} is not positive")
    s = 1.0 / math.sqrt(det)
    a, b, c, d = a * s, b * s, c * s, d * s
    lead = a if a != 0.0 else (b if b != 0.0 else c)
    if lead < 0.0:
        a, b, c, d = -a, -b, -c, -d
    return a, b, c, d


@dataclass(frozen=True, slots=True)
class MoebiusElement:
    """PSL₂(ℝ) 元素, 规范化: det = 1, (a, b, c) 中首个非零元为正"""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = _canonical(float(self.a), float(self.b), float(self.c), float(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_array(cls, m: NDArray[np.float64]) -> "MoebiusElement":
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def to_array(self) -> NDArray[np.float64]:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return compose(self, other)

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a)

    def apply(self, z: complex) -> complex:
        return moebius_apply(self, z)

    def derivative(self, z: complex) -> complex:
        """g'(z) = 1/(cz + d)²"""
        return 1.0 / (self.c * z + self.d) ** 2

    def isclose(self, other: "MoebiusElement", tol: float = 1e-10) -> bool:
        return bool(np.allclose(self.to_array(), other.to_array(), rtol=0.0, atol=tol))


def identity() -> MoebiusElement:
    return MoebiusElement(1.0, 0.0, 0.0, 1.0)


def n(x: float) -> MoebiusElement:
    """n(x): z ↦ z + x"""
    return MoebiusElement(1.0, x, 0.0, 1.0)


def a(y: float) -> MoebiusElement:
    """a(y) = diag(√y, 1/√y): z ↦ y·z"""
    if y <= 0.0:
        raise GeodesicException(f"a(y) needs y > 0, got {y}")
    r = math.sqrt(y)
    return MoebiusElement(r, 0.0, 0.0, 1.0 / r)


def k(theta: float) -> MoebiusElement:
    """k(θ): rotation about i by angle θ"""
    h = 0.5 * theta
    return MoebiusElement(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))


S: Final[MoebiusElement] = MoebiusElement(0.0, -1.0, 1.0, 0.0)
"""u: z ↦ −1/z"""

T: Final[MoebiusElement] = MoebiusElement(1.0, 1.0, 0.0, 1.0)
"""t: z ↦ z + 1"""

NU: Final[NDArray[np.float64]] = np.array([[0.0, 1.0], [0.0, 0.0]])
ALPHA: Final[NDArray[np.float64]] = np.array([[0.5, 0.0], [0.0, -0.5]])
KAPPA: Final[NDArray[np.float64]] = np.array([[0.0, 0.5], [-0.5, 0.0]])
LAMBDA: Final[NDArray[np.float64]] = np.array([[0.0, 0.5], [0.5, 0.0]])


def compose(g: MoebiusElement, h: MoebiusElement) -> MoebiusElement:
    return MoebiusElement(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def inverse(g: MoebiusElement) -> MoebiusElement:
    return g.inverse()


def moebius_apply(g: MoebiusElement, z: complex) -> complex:
    """z ↦ (az + b)/(cz + d)

    Raises:
        NonFiniteException: z 非有限或不在上半平面
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteException("point")
    if z.imag <= 0.0:
        raise NonFiniteException("point outside the upper half-plane")
    return (g.a * z + g.b) / (g.c * z + g.d)


@dataclass(frozen=True, slots=True)
class IwasawaPoint:
    """Iwasawa 坐标 (y, x, θ)"""

    y: float
    """高度 > 0"""
    x: float
    """横坐标"""
    theta: float = 0.0
    """角度, 存储时约化到 [0, 2π)"""

    def __post_init__(self):
        if not (math.isfinite(self.y) and math.isfinite(self.x) and math.isfinite(self.theta)):
            raise NonFiniteException("Iwasawa coordinates")
        if self.y <= 0.0:
            raise GeodesicException(f"height must be positive, got {self.y}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_z(cls, z: complex, theta: float = 0.0) -> "IwasawaPoint":
        return cls(z.imag, z.real, theta)


@dataclass(frozen=True, slots=True)
class TangentVector:
    """切向量在标架 (y∂_y, y∂_x, ∂_θ) 下的分量"""

    u: float
    v: float
    w: float
    unit: bool = field(default=False, compare=False)
    """是否已按单位速度标记"""

    def speed2(self, a: MetricParam) -> float:
        return unit_speed_norm(a, self)

    def check_unit(self, a: MetricParam, tol: float = 1e-10) -> None:
        s = self.speed2(a)
        if abs(s - 1.0) > tol:
            raise GeodesicException(f"tangent is not unit: u²+v²+a⁻²(v+w)² = {s}")


def wrap_angle(theta: float) -> float:
    """θ mod 2π in [0, 2π)"""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return 0.0 if r >= TWO_PI else r


def wrap_pi(delta: float | NDArray[np.float64]) -> NDArray[np.float64]:
    """Representative of an angle difference in (−π, π]"""
    return np.pi - np.mod(np.pi - np.asarray(delta, dtype=float), TWO_PI)


def iwasawa_decompose(g: MoebiusElement) -> IwasawaPoint:
    w = complex(g.d, g.c)  # c·i + d
    z = (g.a * 1j + g.b) / w
    return IwasawaPoint(1.0 / abs(w) ** 2, z.real, -2.0 * math.atan2(w.imag, w.real))


def iwasawa_compose(p: IwasawaPoint) -> MoebiusElement:
    return compose(compose(n(p.x), a(p.y)), k(p.theta))


def iwasawa_arrays(m: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Vectorized decomposition of a stack of matrices of shape (..., 2, 2) into (y, x, θ)"""
    mc = m[..., 1, 0]
    md = m[..., 1, 1]
    den = mc * mc + md * md
    y = 1.0 / den
    # Re((ai + b)(d − ci)) / |ci + d|²
    x = (m[..., 0, 1] * md + m[..., 0, 0] * mc) * y
    theta = np.mod(-2.0 * np.arctan2(mc, md), TWO_PI)
    return y, x, theta


def iwasawa_matrices(y: NDArray[np.float64], x: NDArray[np.float64], theta: NDArray[np.float64]) -> NDArray[np.float64]:
    """n(x)·a(y)·k(θ) for arrays, shape (..., 2, 2)"""
    r = np.sqrt(y)
    ch = np.cos(0.5 * theta)
    sh = np.sin(0.5 * theta)
    m = np.empty((*np.shape(y), 2, 2))
    m[..., 0, 0] = r * ch - x * sh / r
    m[..., 0, 1] = r * sh + x * ch / r
    m[..., 1, 0] = -sh / r
    m[..., 1, 1] = ch / r
    return m


def renormalize_arrays(m: NDArray[np.float64]) -> NDArray[np.float64]:
    """Rescale a stack of matrices to det = 1"""
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return m / np.sqrt(det)[..., None, None]


def metric_matrix(a: MetricParam, y: float) -> NDArray[np.float64]:
    """左不变度量 gᵃ 在 (y, x, θ) 坐标下的矩阵

    Raises:
        MetricParamException: a = 0
    """
    a = check_metric(a)
    if y <= 0.0:
        raise GeodesicException(f"height must be positive, got {y}")
    ia2 = a**-2
    return np.array(
        [
            [y**-2, 0.0, 0.0],
            [0.0, (1.0 + ia2) * y**-2, ia2 / y],
            [0.0, ia2 / y, ia2],
        ]
    )


def left_invariant_frame(y: float, theta: float) -> NDArray[np.float64]:
    """Columns are the (y, x, θ) components of L_λ, L_α, L_κ"""
    s, c = math.sin(theta), math.cos(theta)
    return np.array(
        [
            [y * s, y * c, 0.0],
            [y * c, -y * s, 0.0],
            [-c, s, 1.0],
        ]
    )


def frame_gram(a: MetricParam, y: float, theta: float) -> NDArray[np.float64]:
    """Eᵀ·gᵃ·E for the frame (L_λ, L_α, a·L_κ); the identity for every θ"""
    e = left_invariant_frame(y, theta) @ np.diag([1.0, 1.0, a])
    return e.T @ metric_matrix(a, y) @ e


def laplacian_fd(
    f: Callable[[float, float, float], float],
    a: MetricParam,
    p: IwasawaPoint,
    h: float = 1e-4,
) -> float:
    """Δᵃ f = y²(∂²_y + ∂²_x) − 2y ∂²_{θx} + (1 + a²) ∂²_θ, by central differences"""
    y, x, t = p.y, p.x, p.theta
    f0 = f(y, x, t)
    hy = h * y
    fyy = (f(y + hy, x, t) - 2.0 * f0 + f(y - hy, x, t)) / hy**2
    fxx = (f(y, x + h, t) - 2.0 * f0 + f(y, x - h, t)) / h**2
    ftt = (f(y, x, t + h) - 2.0 * f0 + f(y, x, t - h)) / h**2
    ftx = (f(y, x + h, t + h) - f(y, x - h, t + h) - f(y, x + h, t - h) + f(y, x - h, t - h)) / (4.0 * h * h)
    return y * y * (fyy + fxx) - 2.0 * y * ftx + (1.0 + a * a) * ftt


def unit_speed_norm(a: MetricParam, tv: TangentVector) -> float:
    """u² + v² + a⁻²(v + w)²"""
    a = check_metric(a)
    return tv.u**2 + tv.v**2 + (tv.v + tv.w) ** 2 / a**2


def tangent_from_velocity(p: IwasawaPoint, ydot: float, xdot: float, thetadot: float) -> TangentVector:
    return TangentVector(ydot / p.y, xdot / p.y, thetadot)


def lagrangian_speed(a: MetricParam, y: float, ydot: float, xdot: float, thetadot: float) -> float:
    """2L = y⁻²ẏ² + (1+a⁻²)y⁻²ẋ² + 2a⁻²y⁻¹ẋθ̇ + a⁻²θ̇²"""
    ia2 = check_metric(a) ** -2
    return (ydot / y) ** 2 + (1.0 + ia2) * (xdot / y) ** 2 + 2.0 * ia2 * xdot * thetadot / y + ia2 * thetadot**2


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    """2·arsinh(|z₁ − z₂| / (2√(y₁y₂)))"""
    if z1.imag <= 0.0 or z2.imag <= 0.0:
        raise NonFiniteException("point outside the upper half-plane")
    return 2.0 * math.asinh(abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag)))


def poisson_kernel(z: complex, u: Boundary) -> float:
    """p(z, u) = y/|z − u|², p(z, ∞) = y"""
    if u is BoundaryPoint.INFINITY:
        return z.imag
    u = float(u)
    if not math.isfinite(u):
        raise NonFiniteException("boundary point")
    return z.imag / abs(z - u) ** 2


def busemann(u: Boundary, z1: complex, z2: complex) -> float:
    """B_u(z₁, z₂) = p(z₂, u)/p(z₁, u)"""
    return poisson_kernel(z2, u) / poisson_kernel(z1, u)


@dataclass(frozen=True, slots=True)
class IsometryClass:
    kind: IsometryKind
    sigma: NDArray[np.float64] | None = None
    """traceless σ with exp(σ) = ±g; None for elliptic elements"""


def classify_and_log(g: MoebiusElement, tol: float = DET_TOL) -> IsometryClass:
    """Classify by |trace| and return the logarithm of parabolic and loxodromic elements"""
    m = g.to_array()
    if m[0, 0] + m[1, 1] < 0.0:
        m = -m
    t = m[0, 0] + m[1, 1]
    eye = np.eye(2)
    if np.allclose(m, eye, rtol=0.0, atol=tol) or t < 2.0 - tol:
        return IsometryClass(IsometryKind.ELLIPTIC)
    if t <= 2.0 + tol:
        return IsometryClass(IsometryKind.PARABOLIC, m - eye)
    rho = math.acosh(0.5 * t)
    return IsometryClass(IsometryKind.LOXODROMIC, (rho / math.sinh(rho)) * (m - math.cosh(rho) * eye))


def lie_exp(sigma: NDArray[np.float64]) -> NDArray[np.float64]:
    """exp of traceless matrices, shape (..., 2, 2); uses σ² = δ·I"""
    sigma = np.asarray(sigma, dtype=float)
    delta = sigma[..., 0, 0] ** 2 + sigma[..., 0, 1] * sigma[..., 1, 0]
    r = np.sqrt(np.abs(delta))
    small = r < 1e-6
    rs = np.where(small, 1.0, r)
    ch = np.where(delta >= 0.0, np.cosh(r), np.cos(r))
    shc = np.where(delta >= 0.0, np.sinh(rs) / rs, np.sin(rs) / rs)
    ch = np.where(small, 1.0 + 0.5 * delta + delta * delta / 24.0, ch)
    shc = np.where(small, 1.0 + delta / 6.0 + delta * delta / 120.0, shc)
    return ch[..., None, None] * np.eye(2) + shc[..., None, None] * sigma


def geodesic_endpoints(z: complex, direction: float) -> tuple[Boundary, Boundary]:
    """Oriented endpoints (start, end) of the geodesic through z with Euclidean direction angle `direction`"""
    cb, sb = math.cos(direction), math.sin(direction)
    if abs(cb) < 1e-14:
        return (z.real, BoundaryPoint.INFINITY) if sb > 0.0 else (BoundaryPoint.INFINITY, z.real)
    centre = z.real + z.imag * sb / cb
    radius = z.imag / abs(cb)
    sgn = math.copysign(1.0, cb)
    return centre - sgn * radius, centre + sgn * radius


def standard_frame(start: Boundary, end: Boundary) -> MoebiusElement:
    """Isometry sending start ↦ 0 and end ↦ ∞, so the geodesic becomes the upward imaginary axis"""
    if start is BoundaryPoint.INFINITY and end is BoundaryPoint.INFINITY:
        raise GeodesicException("degenerate geodesic")
    if end is BoundaryPoint.INFINITY:
        return n(-float(start))
    if start is BoundaryPoint.INFINITY:
        return MoebiusElement(0.0, -1.0, 1.0, -float(end))
    s, e = float(start), float(end)
    if s == e:
        raise GeodesicException("degenerate geodesic")
    sigma = -1.0 if e > s else 1.0
    return MoebiusElement(sigma, -sigma * s, 1.0, -e)


def distance_to_geodesic(z: complex, start: Boundary, end: Boundary) -> float:
    w = standard_frame(start, end).apply(z)
    return math.asinh(abs(w.real) / w.imag)


def side_of_geodesic(z: complex, start: Boundary, end: Boundary) -> int:
    """+1 if z lies on the left of the direction of travel, −1 on the right, 0 on the geodesic"""
    w = standard_frame(start, end).apply(z)
    if w.real == 0.0:
        return 0
    return 1 if w.real < 0.0 else -1
