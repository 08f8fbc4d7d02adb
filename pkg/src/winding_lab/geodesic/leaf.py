"""叶 L(k, ε) 与拟测地线

A leaf geodesic projects to a quasi-geodesic of H²: a circle arc (or a Euclidean ray) at constant distance
argch((1 − k²)^{−1/2}) from the half-plane geodesic with the same endpoints, run at speed ((1 − k²)/(1 + a²k²))^{1/2}
relative to it. The side is sign k (left of the direction of travel for k > 0) and ε = sign c′ is the orientation
type of the travelled geodesic (left to right on the real line for ε = +1).
"""

from dataclasses import dataclass
import math

from ..constants import BoundaryPoint, Branch
from ..exception import GeodesicException
from ..hyperbolic_core import (
    Boundary,
    IwasawaPoint,
    MetricParam,
    TangentVector,
    check_metric,
    distance_to_geodesic,
    geodesic_endpoints,
    standard_frame,
)
from .params import GeodesicParams, body_components, constants_from_initial, tangent_from_body


@dataclass(frozen=True, slots=True)
class LeafElement:
    point: IwasawaPoint
    tangent: TangentVector
    k: float
    eps: int

    def check(self, a: MetricParam, tol: float = 1e-10) -> None:
        """叶方程 u² + v² = 1/(1+a²k²), v + w = k·a²/√(1+a²k²), sign((1+a²)v + w) = ε

        Raises:
            GeodesicException: 不满足叶方程
        """
        a = check_metric(a)
        u, v, w = self.tangent.u, self.tangent.v, self.tangent.w
        scale = 1.0 / math.sqrt(1.0 + (a * self.k) ** 2)
        if abs(u * u + v * v - scale**2) > tol:
            raise GeodesicException(f"u²+v² = {u * u + v * v}, expected {scale**2}")
        if abs(v + w - self.k * a * a * scale) > tol:
            raise GeodesicException(f"v+w = {v + w}, expected {self.k * a * a * scale}")
        side = (1.0 + a * a) * v + w
        if abs(side) > tol and (1 if side > 0.0 else -1) != self.eps:
            raise GeodesicException(f"sign((1+a²)v+w) disagrees with ε = {self.eps}")

    def params(self, a: MetricParam) -> GeodesicParams:
        return constants_from_initial(self.point, self.tangent, a)


def leaf_distance(k: float) -> float:
    """argch((1 − k²)^{−1/2}): distance between a quasi-geodesic and its asymptotic geodesic"""
    if not abs(k) < 1.0:
        raise GeodesicException(f"|k| must be < 1, got {k}")
    return math.acosh(1.0 / math.sqrt(1.0 - k * k))


def leaf_parameter_from_distance(d: float) -> float:
    """|k| = tanh d"""
    if d < 0.0:
        raise GeodesicException(f"distance must be non-negative, got {d}")
    return math.tanh(d)


def projection_speed(k: float, a: MetricParam) -> float:
    """Speed at which the asymptotic geodesic is swept: ((1 − k²)/(1 + a²k²))^{1/2}"""
    return math.sqrt((1.0 - k * k) / (1.0 + (check_metric(a) * k) ** 2))


def orientation_type(start: Boundary, end: Boundary) -> int | None:
    """+1 for a geodesic travelled left to right, −1 right to left, None when an endpoint is ∞"""
    if start is BoundaryPoint.INFINITY or end is BoundaryPoint.INFINITY:
        return None
    return 1 if float(start) < float(end) else -1


def lift_to_leaf(z0: complex, direction: float, k: float, eps: int, theta0: float, a: MetricParam) -> LeafElement:
    """ψ⁻¹: the leaf element over the geodesic through z0 with Euclidean direction angle `direction`

    The returned element sits on the quasi-geodesic asymptotic to that geodesic, at the point whose orthogonal
    projection onto the geodesic is z0, with θ = θ₀. If the orientation type of the geodesic is not ε it is
    travelled backwards.

    Raises:
        GeodesicException: |k| ≥ 1, ε ∉ {±1} 或提升点不在拟测地线上
    """
    a = check_metric(a)
    if not abs(k) < 1.0:
        raise GeodesicException(f"lift needs |k| < 1, got {k}")
    if eps not in (1, -1):
        raise GeodesicException(f"ε must be ±1, got {eps}")
    start, end = geodesic_endpoints(z0, direction)
    orient = orientation_type(start, end)
    if orient is not None and orient != eps:
        start, end = end, start
    frame = standard_frame(start, end)
    t0 = abs(frame.apply(z0))
    cos_b = math.sqrt(1.0 - k * k)
    C = 1.0 / math.sqrt(1.0 + (a * k) ** 2)
    # 标准位置: 几何测地线为向上的虚轴, 拟测地线是从 0 出发的射线
    w1 = complex(-t0 * k, t0 * cos_b)
    back = frame.inverse()
    theta_w = theta0 - math.atan2(back.derivative(w1).imag, back.derivative(w1).real)
    u, v, r = C * cos_b, -C * k, k * a * a * C
    p, q, r = body_components(theta_w, TangentVector(u, v, r - v))
    tangent = tangent_from_body(theta0, p, q, r, unit=True)
    point = IwasawaPoint.from_z(back.apply(w1), theta0)
    gap = distance_to_geodesic(point.z, start, end) - leaf_distance(k)
    if abs(gap) > 1e-7:
        raise GeodesicException(f"lifted point is off the quasi-geodesic by {gap:.3e}")
    side = (1.0 + a * a) * tangent.v + tangent.w
    leaf_eps = eps if orient is None or abs(side) <= 1e-12 else (1 if side > 0.0 else -1)
    return LeafElement(point, tangent, k, leaf_eps)


def asymptotic_endpoints(params: GeodesicParams, p0: IwasawaPoint) -> tuple[Boundary, Boundary]:
    """Oriented endpoints (start, end) of the geodesic the projected quasi-geodesic is asymptotic to

    Raises:
        GeodesicException: |k| ≥ 1, 投影不趋于边界
    """
    if params.branch is Branch.VERTICAL:
        if params.c_second == 0.0:
            raise GeodesicException("horizontal projection has no asymptotic geodesic")
        foot = p0.x + params.c * params.a**-2 * p0.y / params.c_second
        if params.c_second > 0.0:
            return foot, BoundaryPoint.INFINITY
        return BoundaryPoint.INFINITY, foot
    if params.branch is not Branch.TANH:
        raise GeodesicException(f"no asymptotic geodesic on the {params.branch} branch")
    half = params.C * math.sqrt(1.0 - params.k**2)
    u = -params.C * math.sin(params.phi0)
    # c″/c′ = x₀ + u/c′
    centre = p0.x + u / params.c_prime
    return centre - half / params.c_prime, centre + half / params.c_prime


def projected_circle(params: GeodesicParams, p0: IwasawaPoint) -> tuple[complex, float]:
    """Euclidean centre and radius of the projection: (c″/c′ + i·kC/c′, C/|c′|)

    Raises:
        GeodesicException: c′ = 0, 投影为直线
    """
    if params.branch is Branch.VERTICAL:
        raise GeodesicException("projection is a straight line")
    u = -params.C * math.sin(params.phi0)
    centre = complex(p0.x + u / params.c_prime, params.k * params.C / params.c_prime)
    return centre, params.C / abs(params.c_prime)
