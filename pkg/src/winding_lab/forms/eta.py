"""E₂ and the logarithmic derivative of η

η′/η = (iπ/12)·E₂ with E₂(z) = 1 − 24 Σ σ₁(n) qⁿ. Points below `DIRECT_HEIGHT` are Γ(1)-reduced first and the
value is carried back through the quasi-modular cocycle
E₂(Az) = (cz + d)² E₂(z) − (6i/π)·c·(cz + d).
"""

import math
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..constants import Q_TRUNCATION, TWO_PI, FormKind, FormName, GroupName
from ..exception import FormException
from ..hyperbolic_core import IwasawaPoint
from ..modular_group import ModularGroupSpec, builtin_group, reduce_gamma1_array
from ..utils import gauss_legendre
from .base import HarmonicFormSpec

DIRECT_HEIGHT: Final[float] = 0.5


def _sigma1(n: int) -> NDArray[np.float64]:
    """σ₁(1..n)"""
    s = np.zeros(n + 1)
    for d in range(1, n + 1):
        s[d::d] += d
    return s[1:]


SIGMA1: Final[NDArray[np.float64]] = _sigma1(Q_TRUNCATION)


def e2_tail_bound(y: float, terms: int) -> float:
    """24·Σ_{n>terms} n² |q|ⁿ at height y, using σ₁(n) ≤ n²"""
    q = math.exp(-TWO_PI * y)
    n = np.arange(terms + 1, terms + 400, dtype=float)
    return 24.0 * float(np.sum(n * n * q**n))


def e2_terms(y_min: float, tol: float = 1e-16) -> int:
    """Smallest truncation whose tail bound at y_min is below tol

    Raises:
        FormException: Q_TRUNCATION 项仍不够
    """
    for terms in range(1, Q_TRUNCATION + 1):
        if e2_tail_bound(y_min, terms) <= tol:
            return terms
    raise FormException(f"E₂ series needs more than {Q_TRUNCATION} terms at height {y_min}")


_TERMS: Final[int] = e2_terms(DIRECT_HEIGHT)


def _e2_series(z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    q = np.exp(2j * np.pi * z)
    acc = np.zeros_like(q)
    for s in SIGMA1[_TERMS - 1 :: -1]:
        acc = acc * q + s
    return 1.0 - 24.0 * q * acc


def eisenstein_e2(z: ArrayLike) -> NDArray[np.complex128] | complex:
    """Quasi-modular E₂ on the upper half-plane

    Args:
        z: 点或点数组

    Returns:
        与输入同形状的 E₂ 值

    Raises:
        FormException: 点不在上半平面
    """
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(zz)) or np.any(zz.imag <= 0.0):
        raise FormException("E₂ evaluated outside the upper half-plane")
    out = np.empty_like(zz)
    low = zz.imag < DIRECT_HEIGHT
    high = ~low
    if high.any():
        out[high] = _e2_series(zz[high])
    if low.any():
        zl = zz[low]
        zr, mats, _ = reduce_gamma1_array(zl)
        c = mats[:, 1, 0]
        j = c * zl + mats[:, 1, 1]
        out[low] = (_e2_series(zr) + (6j / np.pi) * c * j) / (j * j)
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def eta_log_derivative(z: ArrayLike) -> NDArray[np.complex128] | complex:
    """η′/η = (iπ/12)·E₂"""
    e2 = eisenstein_e2(z)
    return (1j * np.pi / 12.0) * e2


def _gl_segment(z1: complex, z2: complex, nodes: int) -> complex:
    x, w = gauss_legendre(nodes)
    half = 0.5 * (z2 - z1)
    vals = eta_log_derivative(0.5 * (z1 + z2) + half * x)
    return complex(np.dot(w, vals) * half)


def _adaptive_log_eta(z1: complex, z2: complex, depth: int = 0) -> complex:
    """∫ η′/η dz along [z1, z2], split until GL8 and GL16 agree"""
    mid = 0.5 * (z1 + z2)
    if depth < 40 and abs(complex(eta_log_derivative(mid))) * abs(z2 - z1) > 0.1:
        return _adaptive_log_eta(z1, mid, depth + 1) + _adaptive_log_eta(mid, z2, depth + 1)
    coarse = _gl_segment(z1, z2, 8)
    fine = _gl_segment(z1, z2, 16)
    if depth < 40 and abs(fine - coarse) > 1e-13 * max(1.0, abs(fine)):
        return _adaptive_log_eta(z1, mid, depth + 1) + _adaptive_log_eta(mid, z2, depth + 1)
    return fine


def primitive_increment_omega0(p1: IwasawaPoint, p2: IwasawaPoint, dtheta: float) -> float:
    """Δθ + 4·Im ∫ (η′/η) dz along the straight segment p1 → p2

    Args:
        p1 (IwasawaPoint): 起点
        p2 (IwasawaPoint): 终点
        dtheta (float): 未约化的 θ 增量

    Returns:
        float: ω₀ 沿线段的积分
    """
    if p1.z == p2.z:
        return float(dtheta)
    return float(dtheta) + 4.0 * _adaptive_log_eta(p1.z, p2.z).imag


class Omega0Form(HarmonicFormSpec):
    """ω₀ = dθ + 4 Im(η′/η) dx + 4 Re(η′/η) dy, i.e. Φ = (π/3)·E₂

    ω₀ = dθ_w + 4 d arg η(w) in every cusp chart w, so the residue is π/3 at each cusp.
    """

    builtin = FormName.OMEGA0
    direct_height = DIRECT_HEIGHT

    def __init__(self, group: ModularGroupSpec | None = None):
        group = group or builtin_group(GroupName.GAMMA1)
        super().__init__(
            name=FormName.OMEGA0.value,
            kind=FormKind.OMEGA0,
            group=group,
            residues=(math.pi / 3.0,) * group.nu_inf,
            c_theta=1.0,
        )

    def sheet_values(self, z: NDArray[np.complex128], coset: NDArray[np.int64]) -> NDArray[np.complex128]:
        return (np.pi / 3.0) * _e2_series(z)

    def values(self, z: ArrayLike, coset: ArrayLike) -> NDArray[np.complex128]:
        # E₂ is not automorphic; the cocycle route replaces the generic pull-back
        e2 = eisenstein_e2(np.asarray(z, dtype=np.complex128).reshape(-1))
        return (np.pi / 3.0) * np.asarray(e2)

    def primitive(
        self,
        z1: NDArray[np.complex128],
        z2: NDArray[np.complex128],
        coset: NDArray[np.int64],
    ) -> NDArray[np.float64]:
        """Fixed 4-node Gauss–Legendre on each (short) segment"""
        x, w = gauss_legendre(4)
        half = 0.5 * (z2 - z1)
        nodes = 0.5 * (z1 + z2)[:, None] + half[:, None] * x[None, :]
        vals = self.values(nodes.reshape(-1), 0).reshape(nodes.shape)
        return (vals @ w * half).real

    def primitive_increment(self, p1: IwasawaPoint, p2: IwasawaPoint, dtheta: float, coset: int) -> float:
        return primitive_increment_omega0(p1, p2, dtheta)
