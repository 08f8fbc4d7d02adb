import math

from loguru import logger
import numpy as np
import pytest


def test_group_axioms():
    logger.info("开始检查 PSL₂(ℝ) 群运算")
    from winding_lab.hyperbolic_core import S, T, MoebiusElement, compose, identity

    g = MoebiusElement(2.0, 1.0, 3.0, 2.0)
    h = MoebiusElement(1.0, -0.5, 0.25, 0.875)
    k = MoebiusElement(0.5, 0.0, 4.0, 2.0)
    assert compose(compose(g, h), k).isclose(compose(g, compose(h, k))), "结合律不成立"
    assert (g @ g.inverse()).isclose(identity()), "逆元错误"
    assert abs(g.det - 1.0) < 1e-14, "未规范化到 det = 1"
    # u² = (u·t)³ = 1 in PSL₂
    assert (S @ S).isclose(identity())
    st = S @ T
    assert (st @ st @ st).isclose(identity())
    logger.success("群运算检查通过")


def test_moebius_apply():
    from winding_lab.exception import NonFiniteException
    from winding_lab.hyperbolic_core import S, T, moebius_apply

    z = 0.3 + 1.7j
    assert abs(moebius_apply(T, z) - (z + 1.0)) < 1e-15
    assert abs(moebius_apply(S, z) + 1.0 / z) < 1e-15
    with pytest.raises(NonFiniteException):
        moebius_apply(T, 0.5 - 0.1j)
    with pytest.raises(NonFiniteException):
        moebius_apply(T, complex(math.nan, 1.0))


def test_sign_normalization():
    from winding_lab.hyperbolic_core import MoebiusElement

    g = MoebiusElement(-1.0, -2.0, 0.0, -1.0)
    assert (g.a, g.b, g.c, g.d) == (1.0, 2.0, 0.0, 1.0)
    assert MoebiusElement(0.0, -1.0, 1.0, -1.0).b == 1.0


def test_invalid_elements():
    from winding_lab.exception import GeodesicException, NonFiniteException
    from winding_lab.hyperbolic_core import MoebiusElement, a

    with pytest.raises(GeodesicException):
        MoebiusElement(1.0, 0.0, 0.0, -1.0)
    with pytest.raises(NonFiniteException):
        MoebiusElement(math.inf, 0.0, 0.0, 1.0)
    with pytest.raises(GeodesicException):
        a(0.0)


def test_iwasawa_round_trip():
    logger.info("开始检查 Iwasawa 坐标")
    from winding_lab.hyperbolic_core import IwasawaPoint, iwasawa_compose, iwasawa_decompose

    for y, x, theta in [(2.0, 0.3, 1.2), (0.01, -4.0, 6.0), (37.5, 0.0, 0.0), (1.0, 1e-3, 3.1)]:
        p = IwasawaPoint(y, x, theta)
        g = iwasawa_compose(p)
        assert abs(g.apply(1j) - p.z) < 1e-12 * max(1.0, abs(p.z)), "g(i) 不等于 x + iy"
        assert abs(g.derivative(1j) - y * complex(math.cos(theta), math.sin(theta))) < 1e-12 * max(1.0, y)
        q = iwasawa_decompose(g)
        assert math.isclose(q.y, y, rel_tol=1e-12)
        assert math.isclose(q.x, x, rel_tol=1e-12, abs_tol=1e-12)
        assert abs(math.remainder(q.theta - theta, 2.0 * math.pi)) < 1e-12
    logger.success("Iwasawa 坐标检查通过")


def test_iwasawa_arrays():
    from winding_lab.hyperbolic_core import iwasawa_arrays, iwasawa_matrices

    rng = np.random.default_rng(5)
    y = np.exp(rng.uniform(-3.0, 3.0, 200))
    x = rng.uniform(-5.0, 5.0, 200)
    theta = rng.uniform(0.0, 2.0 * np.pi, 200)
    m = iwasawa_matrices(y, x, theta)
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    np.testing.assert_allclose(det, 1.0, atol=1e-12)
    y2, x2, t2 = iwasawa_arrays(m)
    np.testing.assert_allclose(y2, y, rtol=1e-12)
    np.testing.assert_allclose(x2, x, rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(np.remainder(t2 - theta + np.pi, 2.0 * np.pi) - np.pi, 0.0, atol=1e-11)


def test_metric_frame_is_orthonormal():
    from winding_lab.hyperbolic_core import frame_gram

    for a in (0.3, 1.0, 2.5):
        for theta in np.linspace(0.0, 2.0 * np.pi, 7):
            np.testing.assert_allclose(frame_gram(a, 1.7, theta), np.eye(3), atol=1e-12)


def test_metric_rejects_zero():
    from winding_lab.exception import MetricParamException, NonFiniteException
    from winding_lab.hyperbolic_core import check_metric, metric_matrix

    with pytest.raises(MetricParamException):
        metric_matrix(0.0, 1.0)
    with pytest.raises(NonFiniteException):
        check_metric(math.nan)
    assert check_metric(0.0, allow_zero=True) == 0.0


def test_laplacian_fd():
    logger.info("开始检查 Laplacian 差分")
    from winding_lab.hyperbolic_core import IwasawaPoint, laplacian_fd

    p = IwasawaPoint(1.3, 0.4, 0.7)
    a = 2.0
    # Δ log y = −1
    assert abs(laplacian_fd(lambda y, x, t: math.log(y), a, p) + 1.0) < 1e-5
    # Δ cos θ = −(1 + a²) cos θ
    assert abs(laplacian_fd(lambda y, x, t: math.cos(t), a, p) + (1 + a * a) * math.cos(p.theta)) < 1e-5
    # Δ (x sin θ) = −2y cos θ − (1 + a²) x sin θ
    want = -2.0 * p.y * math.cos(p.theta) - (1 + a * a) * p.x * math.sin(p.theta)
    assert abs(laplacian_fd(lambda y, x, t: x * math.sin(t), a, p) - want) < 1e-5
    logger.success("Laplacian 差分检查通过")


def test_speed_identities():
    from winding_lab.exception import GeodesicException
    from winding_lab.hyperbolic_core import (
        IwasawaPoint,
        TangentVector,
        lagrangian_speed,
        tangent_from_velocity,
        unit_speed_norm,
    )

    a = 1.7
    p = IwasawaPoint(0.8, 0.1, 2.0)
    tv = tangent_from_velocity(p, 0.24, -0.32, 0.5)
    two_l = lagrangian_speed(a, p.y, 0.24, -0.32, 0.5)
    assert math.isclose(tv.speed2(a), two_l, rel_tol=1e-14)
    # (u, v, w) = (0.3, −0.4, 0.5): 0.09 + 0.16 + 0.01/a²
    assert math.isclose(unit_speed_norm(a, tv), 0.25 + 0.01 / a**2, rel_tol=1e-14)
    with pytest.raises(GeodesicException):
        TangentVector(1.0, 1.0, 0.0).check_unit(a)


def test_distance_and_kernels():
    from winding_lab.constants import BoundaryPoint
    from winding_lab.hyperbolic_core import busemann, hyperbolic_distance, poisson_kernel

    assert math.isclose(hyperbolic_distance(1j, 2j), math.log(2.0), rel_tol=1e-14)
    assert math.isclose(hyperbolic_distance(1j, 1 + 1j), 2.0 * math.asinh(0.5), rel_tol=1e-14)
    assert poisson_kernel(0.5 + 2j, BoundaryPoint.INFINITY) == 2.0
    assert math.isclose(poisson_kernel(1 + 1j, 0.0), 0.5)
    assert math.isclose(busemann(BoundaryPoint.INFINITY, 1j, 2j), 2.0)


def test_busemann_gives_cusp_heights():
    """Im(b·z) = B_u(b⁻¹(i), z) with u = b⁻¹(∞)"""
    from winding_lab.hyperbolic_core import MoebiusElement, busemann

    for a_, b_, c, d in ((1, 0, 1, 1), (2, 1, 3, 2), (0, -1, 1, -3), (1, 1, 2, 3)):
        g = MoebiusElement(float(a_), float(b_), float(c), float(d))
        for z in (0.1 + 3j, -0.4 + 0.9j, 2.5 + 0.05j):
            value = busemann(-g.d / g.c, g.inverse().apply(1j), z)
            assert math.isclose(value, g.apply(z).imag, rel_tol=1e-12)


def test_classify_and_exponential():
    logger.info("开始检查等距分类与指数映射")
    from winding_lab.constants import IsometryKind
    from winding_lab.hyperbolic_core import S, T, MoebiusElement, classify_and_log, lie_exp

    assert classify_and_log(S).kind is IsometryKind.ELLIPTIC
    para = classify_and_log(T)
    assert para.kind is IsometryKind.PARABOLIC
    assert para.sigma is not None
    np.testing.assert_allclose(lie_exp(para.sigma), T.to_array(), atol=1e-14)

    g = MoebiusElement(2.0, 1.0, 1.0, 1.0)
    lox = classify_and_log(g)
    assert lox.kind is IsometryKind.LOXODROMIC
    assert lox.sigma is not None
    assert abs(np.trace(lox.sigma)) < 1e-14
    np.testing.assert_allclose(lie_exp(lox.sigma), g.to_array(), atol=1e-12)

    # 椭圆与小参数分支
    rot = np.array([[0.0, 0.3], [-0.3, 0.0]])
    np.testing.assert_allclose(lie_exp(rot), [[math.cos(0.3), math.sin(0.3)], [-math.sin(0.3), math.cos(0.3)]])
    tiny = np.array([[1e-8, 0.0], [0.0, -1e-8]])
    np.testing.assert_allclose(lie_exp(tiny), np.diag([math.exp(1e-8), math.exp(-1e-8)]), rtol=1e-15)
    logger.success("等距分类与指数映射检查通过")


def test_geodesic_endpoints_and_sides():
    from winding_lab.constants import BoundaryPoint
    from winding_lab.hyperbolic_core import distance_to_geodesic, geodesic_endpoints, side_of_geodesic

    assert geodesic_endpoints(1j, 0.5 * math.pi) == (0.0, BoundaryPoint.INFINITY)
    start, end = geodesic_endpoints(1j, 0.0)
    assert math.isclose(float(start), -1.0) and math.isclose(float(end), 1.0)
    assert distance_to_geodesic(3j, 0.0, BoundaryPoint.INFINITY) == 0.0
    assert math.isclose(distance_to_geodesic(1 + 1j, 0.0, BoundaryPoint.INFINITY), math.asinh(1.0))
    assert side_of_geodesic(-1 + 1j, 0.0, BoundaryPoint.INFINITY) == 1
    assert side_of_geodesic(1 + 1j, 0.0, BoundaryPoint.INFINITY) == -1
    # 反向行进时左右互换
    assert side_of_geodesic(-1 + 1j, BoundaryPoint.INFINITY, 0.0) == -1


def test_wrapping():
    from winding_lab.hyperbolic_core import wrap_angle, wrap_pi

    assert math.isclose(float(wrap_pi(1.5 * math.pi)), -0.5 * math.pi)
    assert math.isclose(float(wrap_pi(math.pi)), math.pi)
    assert math.isclose(wrap_angle(-0.5), 2.0 * math.pi - 0.5)
    assert wrap_angle(4.0 * math.pi) == 0.0
