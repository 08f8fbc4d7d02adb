import math

from loguru import logger
import numpy as np
import pytest

THETA4_RESIDUES = {
    "kind": "singular",
    "group": "GAMMA2",
    "residue.inf": "1",
    "residue.zero": "0",
    "residue.one": "-1",
}


def test_cauchy_self_test():
    logger.info("开始 Cauchy 律自检")
    from winding_lab.stats import CauchyTarget, default_q_grid, law_test
    from winding_lab.utils import make_rng

    samples = 2.0 * make_rng(1, 0).standard_cauchy(20_000)
    result = law_test(samples, CauchyTarget(2.0), default_q_grid(), 0.06)
    assert result.passed, f"statistic {result.statistic}"
    assert result.scale is not None and abs(result.scale - 2.0) < 0.15
    assert len(result.table) == 17
    logger.success("Cauchy 律自检通过")


def test_gaussian_is_not_cauchy():
    from winding_lab.stats import CauchyTarget, default_q_grid, law_test
    from winding_lab.utils import make_rng

    samples = make_rng(2, 0).standard_normal(5000)
    result = law_test(samples, CauchyTarget(1.0), default_q_grid(), 0.06)
    assert not result.passed
    report = result.to_report("gauss_vs_cauchy")
    assert report.passed is False
    assert report.n == 5000


def test_fit_gaussian_variance():
    from winding_lab.stats import GaussianTarget, default_q_grid, fit_scale, law_test
    from winding_lab.utils import make_rng

    samples = 2.0 * make_rng(3, 0).standard_normal(20_000)
    assert abs(fit_scale(samples, default_q_grid(), "gaussian") - 4.0) < 0.4
    assert law_test(samples, GaussianTarget(4.0), default_q_grid(), 0.06).passed


def test_law_test_errors():
    from winding_lab.exception import ConfigException, TooFewSamplesException
    from winding_lab.stats import CauchyTarget, default_q_grid, fit_scale, law_test

    with pytest.raises(TooFewSamplesException):
        law_test(np.zeros(499), CauchyTarget(1.0), default_q_grid(), 0.1)
    with pytest.raises(ConfigException):
        law_test(np.zeros(600), CauchyTarget(1.0), np.zeros((0, 1)), 0.1)
    with pytest.raises(ConfigException):
        fit_scale(np.zeros(600), [0.0, 0.05])
    with pytest.raises(ConfigException):
        fit_scale(np.zeros(600), [1.0], "laplace")


def test_relative_check():
    from winding_lab.stats import relative_check

    ok = relative_check("ratio", 10, 1.02, 1.0, 0.03, {"t": 10})
    assert ok.passed and math.isclose(ok.statistic, 0.02)
    assert ok.parameters == {"t": 10}
    assert not relative_check("ratio", 10, 1.05, 1.0, 0.03).passed


def test_independence():
    logger.info("开始检查独立性检验")
    from winding_lab.stats import independence_test
    from winding_lab.utils import make_rng

    rng = make_rng(4, 0)
    x = rng.standard_normal(20_000)
    y = rng.standard_normal(20_000)
    grid = np.linspace(-2.0, 2.0, 9)
    assert independence_test(x, y, grid, grid, 0.06).passed
    dependent = independence_test(x, x, grid, grid, 0.06)
    assert not dependent.passed
    assert dependent.table[0]["gap"] == dependent.statistic
    logger.success("独立性检验检查通过")


def test_independence_errors():
    from winding_lab.exception import ConfigException, TooFewSamplesException
    from winding_lab.stats import independence_test

    with pytest.raises(ConfigException):
        independence_test(np.zeros(600), np.zeros(601), [1.0], [1.0], 0.1)
    with pytest.raises(TooFewSamplesException):
        independence_test(np.zeros(100), np.zeros(100), [1.0], [1.0], 0.1)


def test_increment_independence():
    from winding_lab.constants import FormKind
    from winding_lab.exception import ConfigException
    from winding_lab.report import WindingSample
    from winding_lab.stats import increment_independence
    from winding_lab.utils import make_rng

    rng = make_rng(5, 0)
    first = rng.standard_cauchy(10_000)
    second = rng.standard_cauchy(10_000)
    samples = [
        WindingSample(
            seed=5,
            path_id=i,
            forms=["W"],
            kinds=[FormKind.SINGULAR],
            checkpoint_times=[1.0, 2.0],
            raw=[[a], [a + b]],
            primitive=[[a], [a + b]],
        )
        for i, (a, b) in enumerate(zip(first, second))
    ]
    grid = np.linspace(-1.0, 1.0, 5)
    assert increment_independence(samples, 0, grid, 0.08).passed
    zero_start = [WindingSample(5, 0, ["W"], [FormKind.SINGULAR], [0.0, 1.0], [[0.0], [1.0]], [[0.0], [1.0]])] * 600
    with pytest.raises(ConfigException):
        increment_independence(zero_start, 0, grid, 0.08)


def test_geodesic_factors():
    from winding_lab.stats import geodesic_factors

    assert geodesic_factors(0.0, 1.0) == (0.0, 2.0, 2.0)
    shift, cauchy, gauss = geodesic_factors(0.5, 1.0)
    assert math.isclose(shift, 1.0 / math.sqrt(1.25))
    assert math.isclose(cauchy, 2.0 * math.sqrt(0.6))
    assert math.isclose(gauss, math.sqrt(2.4))


def test_target_cf_values():
    logger.info("开始检查极限特征函数")
    from winding_lab.constants import Mode
    from winding_lab.forms import builtin_form, form_from_config
    from winding_lab.modular_group import get_group
    from winding_lab.stats import target_cf

    gamma1 = get_group("GAMMA1")
    omega = [builtin_form("OMEGA0")]
    for lam in (-2.0, 0.5, 3.0):
        assert abs(target_cf(gamma1, omega, Mode.BROWNIAN, [lam]) - math.exp(-abs(lam) / 2.0)) < 1e-14
        assert abs(target_cf(gamma1, omega, Mode.GEODESIC, [lam], k=0.0, a=1.0) - math.exp(-abs(lam))) < 1e-14
        shift, scale = 1.0 / math.sqrt(1.25), 2.0 * math.sqrt(0.6)
        want = np.exp(1j * shift * lam - scale * abs(lam) / 2.0)
        assert abs(target_cf(gamma1, omega, Mode.GEODESIC, [lam], k=0.5, a=1.0) - want) < 1e-14

    gamma2 = get_group("GAMMA2")
    theta4 = form_from_config("THETA4", THETA4_RESIDUES, gamma2)
    assert abs(target_cf(gamma2, [theta4], Mode.BROWNIAN, [1.5]) - math.exp(-1.5 / math.pi)) < 1e-14

    commutator = get_group("COMMUTATOR")
    eta4 = builtin_form("ETA4_CUSPFORM")
    value = target_cf(commutator, [eta4], Mode.BROWNIAN, [], [2.0], norms={"ETA4_CUSPFORM": 0.3})
    assert abs(value - math.exp(-0.6)) < 1e-14
    logger.success("极限特征函数检查通过")


def test_target_cf_weight_mismatch():
    from winding_lab.constants import Mode
    from winding_lab.exception import ConfigException
    from winding_lab.forms import builtin_form
    from winding_lab.modular_group import get_group
    from winding_lab.stats import target_cf

    with pytest.raises(ConfigException):
        target_cf(get_group("GAMMA1"), [builtin_form("OMEGA0")], Mode.BROWNIAN, [1.0, 2.0])


def test_target_law_on_a_grid():
    from winding_lab.constants import Mode
    from winding_lab.forms import Omega0Form, builtin_form
    from winding_lab.modular_group import get_group
    from winding_lab.stats import target_law

    commutator = get_group("COMMUTATOR")
    forms = [Omega0Form(commutator), builtin_form("ETA4_CUSPFORM")]
    law = target_law(commutator, forms, Mode.BROWNIAN, norms={"ETA4_CUSPFORM": 0.3})
    values = law.cf(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    # 一个宽 6 的尖点, V = 2π: 柯西尺度 (π/3)·6/(4π) = 1/2
    np.testing.assert_allclose(values, [math.exp(-0.5), math.exp(-0.15), math.exp(-0.65)], rtol=1e-12)
