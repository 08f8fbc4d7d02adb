import math

from loguru import logger
import numpy as np
import pytest


def test_builtin_forms():
    from winding_lab.constants import FormKind
    from winding_lab.exception import UnknownFormException
    from winding_lab.forms import builtin_form
    from winding_lab.modular_group import get_group

    omega = builtin_form("omega0")
    assert omega.kind is FormKind.OMEGA0
    assert omega.c_theta == 1.0
    assert omega.residues == (math.pi / 3.0,)
    on_gamma2 = builtin_form("OMEGA0", get_group("GAMMA2"))
    assert on_gamma2.residues == (math.pi / 3.0,) * 3

    eta4 = builtin_form("ETA4_CUSPFORM")
    assert eta4.kind is FormKind.CUSP
    assert eta4.group.name == "COMMUTATOR"
    assert eta4.residues == (0.0,)
    with pytest.raises(UnknownFormException):
        builtin_form("DELTA")


def test_e2_special_value():
    from winding_lab.forms import eisenstein_e2, eta_log_derivative

    assert abs(eisenstein_e2(1j) - 3.0 / math.pi) < 1e-13
    # η′/η(i) = (iπ/12)·(3/π)
    assert abs(eta_log_derivative(1j) - 0.25j) < 1e-13


def test_e2_quasi_modularity():
    """E₂(−1/z) = z²E₂(z) − (6i/π)·z"""
    logger.info("开始检查 E₂ 的拟模性")
    from winding_lab.forms import eisenstein_e2

    for z in (0.1 + 1.2j, -0.4 + 0.95j, 0.2 + 0.35j, 3.7 + 0.05j):
        lhs = complex(eisenstein_e2(-1.0 / z))
        rhs = z * z * complex(eisenstein_e2(z)) - (6j / math.pi) * z
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs)), f"z={z}"
    assert abs(complex(eisenstein_e2(0.3 + 1j)) - complex(eisenstein_e2(1.3 + 1j))) < 1e-14
    logger.success("E₂ 拟模性检查通过")


def test_e2_array_shape():
    from winding_lab.exception import FormException
    from winding_lab.forms import eisenstein_e2

    z = np.array([[0.1 + 1j, 0.2 + 0.3j], [0.0 + 2j, -0.5 + 0.9j]])
    assert np.shape(eisenstein_e2(z)) == (2, 2)
    with pytest.raises(FormException):
        eisenstein_e2(0.1 - 1j)


def test_omega0_horocycle_integral():
    """A closed horocycle at height y ≥ 1 winds π/3 around the cusp"""
    logger.info("开始检查 ω₀ 沿闭合极限圆的积分")
    from winding_lab.forms import Omega0Form, line_integral, primitive_increment_omega0
    from winding_lab.hyperbolic_core import IwasawaPoint

    omega = Omega0Form()
    path = [(IwasawaPoint(2.0, x, 0.0), 0) for x in np.linspace(-0.5, 0.5, 21)]
    assert abs(line_integral(omega, path) - math.pi / 3.0) < 1e-10
    direct = primitive_increment_omega0(IwasawaPoint(2.0, -0.5), IwasawaPoint(2.0, 0.5), 0.0)
    assert abs(direct - math.pi / 3.0) < 1e-10
    logger.success("ω₀ 极限圆积分检查通过")


def test_omega0_primitive_matches_line_integral():
    from winding_lab.forms import Omega0Form, line_integral
    from winding_lab.hyperbolic_core import IwasawaPoint

    omega = Omega0Form()
    p1, p2 = IwasawaPoint(0.4, -0.2, 0.0), IwasawaPoint(0.9, 0.35, 0.3)
    route = omega.primitive_increment(p1, p2, 0.3, 0)
    z = np.linspace(p1.z, p2.z, 400)
    theta = np.linspace(0.0, 0.3, 400)
    path = [(IwasawaPoint(v.imag, v.real, t), 0) for v, t in zip(z, theta)]
    assert abs(route - line_integral(omega, path)) < 1e-9


def test_omega0_theta_part():
    from winding_lab.forms import Omega0Form, eisenstein_e2, evaluate_form
    from winding_lab.hyperbolic_core import IwasawaPoint

    omega = Omega0Form()
    p = IwasawaPoint(1.5, 0.1, 2.0)
    assert omega.primitive_increment(p, p, 0.75, 0) == 0.75
    cov = evaluate_form(omega, p, 0)
    assert cov.c_theta == 1.0
    # Φ = (π/3)·E₂
    phi = (math.pi / 3.0) * complex(eisenstein_e2(p.z))
    assert abs(cov.c_x - phi.real) < 1e-14
    assert abs(cov.c_y + phi.imag) < 1e-14


@pytest.mark.parametrize("group", ["GAMMA1", "GAMMA2"])
def test_omega0_is_deck_invariant(group, deck_words):
    """E₂ 的拟模性与 dθ 的跳跃相互抵消, 左不变标架下的分量不变"""
    logger.info(f"开始检查 ω₀ 在 {group} 上的甲板不变性")
    from winding_lab.forms import Omega0Form, evaluate_form
    from winding_lab.hyperbolic_core import IwasawaPoint, iwasawa_compose, iwasawa_decompose
    from winding_lab.modular_group import get_group

    spec = get_group(group)
    omega = Omega0Form(spec)
    for p in (IwasawaPoint(1.3, 0.2, 0.7), IwasawaPoint(0.9, -0.45, 4.0)):
        coset = spec.index - 1
        base = evaluate_form(omega, p, coset).invariant_components(p)
        for g in deck_words:
            q = iwasawa_decompose(g @ iwasawa_compose(p))
            moved = evaluate_form(omega, q, spec.classify(g, coset)).invariant_components(q)
            np.testing.assert_allclose(moved, base, rtol=1e-8, atol=1e-8, err_msg=f"word {g}")
    logger.success(f"ω₀ 在 {group} 上甲板不变")


def test_omega0_cusp_decay():
    """|Φ − π/3| ≤ A·ỹ·e^{−πỹ} on ỹ ∈ [3, 12], A fitted at ỹ = 3"""
    from winding_lab.forms import Omega0Form

    omega = Omega0Form()
    heights = np.linspace(3.0, 12.0, 19)
    for x in (-0.5, 0.0, 0.37):
        gap = np.abs(omega.values(x + 1j * heights, 0) - math.pi / 3.0)
        envelope = heights * np.exp(-math.pi * heights)
        amplitude = gap[0] / envelope[0]
        assert np.all(gap <= amplitude * envelope + 1e-15), f"x={x}"
