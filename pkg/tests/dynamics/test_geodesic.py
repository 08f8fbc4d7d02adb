import math

from loguru import logger
import numpy as np
import pytest

Z0 = 0.3 + 1.2j
DIRECTION = 0.7


def _leaf(k: float, eps: int = 1, a: float = 1.3):
    from winding_lab.geodesic import lift_to_leaf

    return lift_to_leaf(Z0, DIRECTION, k, eps, 0.4, a)


@pytest.mark.parametrize("k", [-0.6, 0.0, 0.5])
@pytest.mark.parametrize("eps", [1, -1])
def test_lift_to_leaf(k, eps):
    from winding_lab.geodesic import asymptotic_endpoints
    from winding_lab.hyperbolic_core import geodesic_endpoints

    a = 1.3
    leaf = _leaf(k, eps, a)
    leaf.check(a)
    leaf.tangent.check_unit(a)
    assert leaf.eps == eps
    assert math.isclose(leaf.point.theta, 0.4)
    params = leaf.params(a)
    assert abs(params.k - k) < 1e-10
    assert params.eps == eps
    # 渐近测地线就是过 z0 的那条
    start, end = asymptotic_endpoints(params, leaf.point)
    expected = sorted(float(v) for v in geodesic_endpoints(Z0, DIRECTION))
    np.testing.assert_allclose(sorted([float(start), float(end)]), expected, atol=1e-9)
    assert (float(start) < float(end)) == (eps == 1)


def test_lift_rejects_bad_parameters():
    from winding_lab.exception import GeodesicException
    from winding_lab.geodesic import lift_to_leaf

    with pytest.raises(GeodesicException):
        lift_to_leaf(Z0, DIRECTION, 1.0, 1, 0.0, 1.0)
    with pytest.raises(GeodesicException):
        lift_to_leaf(Z0, DIRECTION, 0.2, 0, 0.0, 1.0)


def test_constants_are_conserved():
    logger.info("开始检查守恒量")
    from winding_lab.geodesic import constants_from_initial, flow, velocity

    a = 1.3
    leaf = _leaf(0.5, 1, a)
    params = leaf.params(a)
    for s in (0.5, 1.7, 4.0):
        p = flow(params, leaf.point, s)
        tv = velocity(params, leaf.point, s)
        assert abs(tv.speed2(a) - 1.0) < 1e-10, "速度不是单位速度"
        again = constants_from_initial(p, tv, a)
        assert abs(again.c - params.c) < 1e-9
        assert abs(again.c_prime - params.c_prime) < 1e-9 * max(1.0, abs(params.c_prime))
        assert abs(again.c_second - params.c_second) < 1e-9 * max(1.0, abs(params.c_second))
        assert abs(again.C - params.C) < 1e-9
        assert abs(again.k - params.k) < 1e-9
    logger.success("守恒量检查通过")


def test_velocity_matches_the_flow():
    from winding_lab.geodesic import flow_arrays, velocity

    a = 0.8
    leaf = _leaf(-0.3, -1, a)
    params = leaf.params(a)
    s, h = 1.3, 1e-5
    y, x, theta = flow_arrays(params, leaf.point, np.array([s - h, s, s + h]))
    tv = velocity(params, leaf.point, s)
    assert abs((y[2] - y[0]) / (2 * h) / y[1] - tv.u) < 1e-6
    assert abs((x[2] - x[0]) / (2 * h) / y[1] - tv.v) < 1e-6
    assert abs((theta[2] - theta[0]) / (2 * h) - tv.w) < 1e-6


@pytest.mark.parametrize("k", [0.5, -0.4])
def test_distance_to_asymptotic_geodesic(k):
    from winding_lab.geodesic import asymptotic_endpoints, flow, leaf_distance
    from winding_lab.hyperbolic_core import distance_to_geodesic, side_of_geodesic

    a = 1.0
    leaf = _leaf(k, 1, a)
    params = leaf.params(a)
    start, end = asymptotic_endpoints(params, leaf.point)
    for s in (0.0, 1.0, 3.0):
        z = flow(params, leaf.point, s).z
        assert abs(distance_to_geodesic(z, start, end) - leaf_distance(k)) < 1e-8
        assert side_of_geodesic(z, start, end) == (1 if k > 0 else -1)


def test_leaf_distance():
    from winding_lab.exception import GeodesicException
    from winding_lab.geodesic import leaf_distance, leaf_parameter_from_distance, projection_speed

    assert math.isclose(leaf_distance(0.6), math.acosh(1.25))
    assert math.isclose(leaf_parameter_from_distance(leaf_distance(0.6)), 0.6)
    assert leaf_distance(0.0) == 0.0
    assert projection_speed(0.0, 2.0) == 1.0
    assert math.isclose(projection_speed(0.6, 1.0), math.sqrt(0.64 / 1.36))
    with pytest.raises(GeodesicException):
        leaf_distance(1.0)
    with pytest.raises(GeodesicException):
        leaf_parameter_from_distance(-0.1)


def test_orientation_type():
    from winding_lab.constants import BoundaryPoint
    from winding_lab.geodesic import orientation_type

    assert orientation_type(0.0, 1.0) == 1
    assert orientation_type(1.0, -2.0) == -1
    assert orientation_type(BoundaryPoint.INFINITY, 0.0) is None


def test_projected_circle():
    from winding_lab.geodesic import flow, projected_circle

    a = 1.3
    leaf = _leaf(0.5, 1, a)
    params = leaf.params(a)
    centre, radius = projected_circle(params, leaf.point)
    for s in (0.0, 0.8, 2.5):
        assert abs(abs(flow(params, leaf.point, s).z - centre) - radius) < 1e-9 * max(1.0, radius)


def test_phase_limits():
    from winding_lab.constants import Branch

    for eps in (1, -1):
        params = _leaf(0.5, eps, 1.3).params(1.3)
        assert params.branch is Branch.TANH
        lo, hi = params.phase_limits()
        far = params.phase(np.array([-80.0, 80.0]))
        assert abs(far[0] - lo) < 1e-9
        assert abs(far[1] - hi) < 1e-9


def test_theta_rate():
    from winding_lab.geodesic import unwrapped_theta

    params = _leaf(0.5, 1, 1.0).params(1.0)
    assert abs(params.theta_rate - 2.0 * 0.5 / math.sqrt(1.25)) < 1e-12
    assert abs(params.energy_split - 1.0) < 1e-12
    s = 400.0
    theta = float(unwrapped_theta(params, _leaf(0.5, 1, 1.0).point, s))
    assert abs(theta / s - params.theta_rate) < 2.0 * math.pi / s


def test_stepper_matches_closed_form():
    logger.info("开始比较群指数步进与闭式解")
    from winding_lab.geodesic import GeodesicStepper, flow_arrays

    a = 1.3
    for k, eps in ((0.5, 1), (-0.2, -1)):
        leaf = _leaf(k, eps, a)
        params = leaf.params(a)
        stepper = GeodesicStepper.from_leaf([leaf], a)
        dtheta = 0.0
        for _ in range(40):
            dtheta += float(stepper.advance(np.array([0.05]))[0])
        y, x, _ = stepper.coordinates()
        yc, xc, thc = flow_arrays(params, leaf.point, 2.0)
        assert abs(y[0] - yc) < 1e-8 * yc
        assert abs(x[0] - xc) < 1e-8 * max(1.0, abs(xc))
        assert abs(dtheta - (thc - leaf.point.theta)) < 1e-8
    logger.success("步进与闭式解一致")


def test_geodesic_winding_routes_agree():
    logger.info("开始检查测地线缠绕的两条路线")
    from winding_lab.forms import Omega0Form
    from winding_lab.geodesic import GeodesicConfig, geodesic_winding
    from winding_lab.modular_group import get_group

    cfg = GeodesicConfig(a=1.0, k=0.5)
    leaf = _leaf(0.5, 1, 1.0)
    sample = geodesic_winding(leaf, [Omega0Form()], 5.0, cfg, get_group("GAMMA1"), fractions=(0.5, 1.0))
    assert sample.k == 0.5
    assert sample.eps == 1
    assert sample.checkpoint_times == [2.5, 5.0]
    for raw, prim in zip(sample.raw, sample.primitive):
        assert abs(raw[0] - prim[0]) < 1e-3
    logger.success("两条路线一致")


@pytest.mark.parametrize("k", [0.0, 0.5])
def test_long_geodesic_routes_share_the_reduced_chart(k):
    """Many reductions happen before T = 100; both routes must stay on the same chart"""
    logger.info(f"开始检查长测地线的两条路线, k={k}")
    from winding_lab.forms import Omega0Form
    from winding_lab.geodesic import GeodesicConfig, batch_geodesic_winding
    from winding_lab.modular_group import get_group

    cfg = GeodesicConfig(a=1.0, k=k, seed=3)
    samples = batch_geodesic_winding(cfg, get_group("GAMMA1"), [Omega0Form()], 100.0, 8, fractions=(0.5, 1.0))
    for s in samples:
        for raw, prim in zip(s.raw, s.primitive):
            assert abs(raw[0] - prim[0]) < 0.1, f"路径 {s.path_id}: raw={raw[0]}, primitive={prim[0]}"
    logger.success("长测地线两条路线一致")


def test_geodesic_config_validation():
    from winding_lab.exception import ConfigException, MetricParamException
    from winding_lab.geodesic import GeodesicConfig

    with pytest.raises(ConfigException):
        GeodesicConfig(a=1.0, k=1.0)
    with pytest.raises(ConfigException):
        GeodesicConfig(a=1.0, k=0.0, eps=0)
    with pytest.raises(ConfigException):
        GeodesicConfig(a=1.0, k=0.0, ds_base=-0.1)
    with pytest.raises(MetricParamException):
        GeodesicConfig(a=0.0, k=0.0)


def test_batch_geodesic_winding():
    from winding_lab.exception import ConfigException
    from winding_lab.forms import Omega0Form
    from winding_lab.geodesic import GeodesicConfig, batch_geodesic_winding
    from winding_lab.modular_group import get_group

    cfg = GeodesicConfig(a=1.0, k=0.0, seed=5)
    gamma1 = get_group("GAMMA1")
    small = batch_geodesic_winding(cfg, gamma1, [Omega0Form()], 1.0, 4, chunk_size=2)
    large = batch_geodesic_winding(cfg, gamma1, [Omega0Form()], 1.0, 4, chunk_size=4)
    assert [s.path_id for s in small] == [0, 1, 2, 3]
    for a, b in zip(small, large):
        np.testing.assert_allclose(a.raw, b.raw, rtol=1e-12, atol=1e-14)
    with pytest.raises(ConfigException):
        batch_geodesic_winding(cfg, gamma1, [], 1.0, 0)


def test_sample_liouville():
    from winding_lab.geodesic import sample_liouville
    from winding_lab.modular_group import get_group

    gamma2 = get_group("GAMMA2")
    draw = sample_liouville(gamma2, 5, 1)
    assert draw == sample_liouville(gamma2, 5, 1)
    assert abs(draw.point.x) <= 0.5 and abs(draw.point.z) >= 1.0
    assert 0 <= draw.coset < 6
    assert math.isclose(draw.direction, draw.point.theta + 0.5 * math.pi)


def test_sample_leaf():
    from winding_lab.geodesic import sample_leaf
    from winding_lab.modular_group import get_group
    from winding_lab.utils import make_rng

    commutator = get_group("COMMUTATOR")
    draws = sample_leaf(commutator, 0.4, -1, 1.3, make_rng(9, 0), 25)
    again = sample_leaf(commutator, 0.4, -1, 1.3, make_rng(9, 0), 25)
    assert len(draws) == 25
    assert [e.point for e, _ in draws] == [e.point for e, _ in again]
    for element, coset in draws:
        assert element.k == 0.4
        assert 0 <= coset < 6
        assert abs(element.point.theta) < 1e-12, "θ₀ 应为 0"
        element.check(1.3)


def test_closed_form_theta_matches_the_shift():
    """t⁻¹∫dθ → (1 + a²)k/√(1 + a²k²) on its own; |φ_t − φ₀| < 2π bounds the gap at t = 10⁴"""
    from winding_lab.geodesic import sample_leaf, unwrapped_theta
    from winding_lab.modular_group import get_group
    from winding_lab.stats import geodesic_factors
    from winding_lab.utils import make_rng

    a, k, horizon = 1.0, 0.5, 1e4
    shift = (1.0 + a * a) * k / math.sqrt(1.0 + (a * k) ** 2)
    assert abs(shift - 0.8944) < 1e-4
    assert abs(geodesic_factors(k, a)[0] - shift) < 1e-12
    for leaf, _ in sample_leaf(get_group("GAMMA1"), k, 1, a, make_rng(31, 0), 50):
        params = leaf.params(a)
        assert abs(params.theta_rate - shift) < 1e-9
        rate = float(unwrapped_theta(params, leaf.point, horizon)) / horizon
        assert abs(rate - shift) < 1e-3


@pytest.mark.slow
def test_geodesic_variance_doubles_the_brownian_one():
    """Re(η⁴ dz) on the k = 0 leaf: var(geodesic)/var(Brownian) = 2 ± 15%"""
    logger.info("开始比较测地线与 Brownian 的尖形式方差")
    from winding_lab.brownian import StepConfig, batch_simulate
    from winding_lab.cli.experiments import marginal_target
    from winding_lab.constants import Mode
    from winding_lab.forms import builtin_form, petersson_norm_quadrature
    from winding_lab.geodesic import GeodesicConfig, batch_geodesic_winding
    from winding_lab.modular_group import get_group

    commutator = get_group("COMMUTATOR")
    eta4 = builtin_form("ETA4_CUSPFORM")
    norms = {eta4.name: petersson_norm_quadrature(eta4)}
    target_bm = marginal_target(commutator, eta4, Mode.BROWNIAN, norms=norms)
    target_geo = marginal_target(commutator, eta4, Mode.GEODESIC, k=0.0, a=1.0, norms=norms)
    assert abs(target_geo.variance / target_bm.variance - 2.0) < 1e-9

    horizon, n = 200.0, 2000
    brownian = batch_simulate(StepConfig(dt_base=0.002, a=1.0, seed=21), commutator, [eta4], horizon, n, threads=4)
    geodesic = batch_geodesic_winding(GeodesicConfig(a=1.0, k=0.0, seed=22), commutator, [eta4], horizon, n, threads=4)
    var_bm = np.var([s.normalized(0)[0] for s in brownian.samples])
    var_geo = np.var([s.normalized(0)[0] for s in geodesic])
    logger.info(f"var Brownian = {var_bm:.4f} (target {target_bm.variance:.4f}), var geodesic = {var_geo:.4f}")
    assert abs(var_geo / var_bm - 2.0) < 0.3
    logger.success("方差比检查通过")
