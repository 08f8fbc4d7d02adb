"""Line integrals and Petersson norms of harmonic forms"""

from collections.abc import Sequence
from dataclasses import dataclass
import math

from loguru import logger
import numpy as np
from scipy import integrate

from ..constants import FormKind
from ..exception import FormException
from ..hyperbolic_core import IwasawaPoint, wrap_pi
from ..modular_group import sample_fundamental_domain
from ..utils import gauss_legendre, make_rng
from .base import HarmonicFormSpec

_BLOCK = 1 << 20


def line_integral(form: HarmonicFormSpec, path: Sequence[tuple[IwasawaPoint, int]]) -> float:
    """∫ form along a polyline of (point, coset) vertices

    Each segment uses 3-point Gauss–Legendre for the xy part; θ-increments are wrapped to (−π, π].

    Raises:
        FormException: 相邻顶点的陪集不同
    """
    if len(path) < 2:
        return 0.0
    z = np.array([p.z for p, _ in path])
    theta = np.array([p.theta for p, _ in path])
    coset = np.array([c for _, c in path], dtype=np.int64)
    if np.any(coset[1:] != coset[:-1]):
        raise FormException("line_integral: consecutive vertices must share a coset label")
    x, w = gauss_legendre(3)
    half = 0.5 * np.diff(z)
    nodes = 0.5 * (z[1:] + z[:-1])[:, None] + half[:, None] * x[None, :]
    vals = form.values(nodes.reshape(-1), np.repeat(coset[1:], x.size)).reshape(nodes.shape)
    xy = float(np.sum((vals @ w * half).real))
    return xy + form.c_theta * float(np.sum(wrap_pi(np.diff(theta))))


@dataclass(frozen=True, slots=True)
class PeterssonEstimate:
    value: float
    """V⁻¹ ∫ |f|² y² dμ 的估计"""
    stderr: float
    n: int


def _require_cusp(form: HarmonicFormSpec) -> None:
    if form.kind is not FormKind.CUSP:
        raise FormException(f"{form.name}: Petersson norm is only finite for cusp forms")


def petersson_norm(form: HarmonicFormSpec, n_samples: int, seed: int) -> PeterssonEstimate:
    """Monte Carlo V⁻¹ ∫_{Γ\\H²} |f|² y² dμ over uniform points of the fundamental domain and uniform sheets

    Raises:
        FormException: 非尖点形式
    """
    _require_cusp(form)
    if n_samples < 2:
        raise FormException("petersson_norm needs at least 2 samples")
    rng = make_rng(seed, 0)
    total = total2 = 0.0
    done = 0
    while done < n_samples:
        size = min(_BLOCK, n_samples - done)
        z = sample_fundamental_domain(rng, size)
        coset = rng.integers(0, form.group.index, size)
        g = np.abs(form.values(z, coset)) ** 2 * z.imag**2
        total += float(g.sum())
        total2 += float((g * g).sum())
        done += size
    mean = total / n_samples
    var = max(total2 / n_samples - mean * mean, 0.0)
    est = PeterssonEstimate(mean, math.sqrt(var / (n_samples - 1)), n_samples)
    logger.debug(f"petersson_norm({form.name}) = {est.value:.6g} ± {est.stderr:.2g} (n={n_samples})")
    return est


def petersson_norm_quadrature(form: HarmonicFormSpec, y_max: float = 40.0) -> float:
    """Deterministic V⁻¹ ∫ |f|² y² dμ: adaptive quadrature over every sheet of the fundamental domain

    The measure y²·dx·dy/y² reduces to dx·dy on each sheet; the region above y_max is neglected.

    Raises:
        FormException: 非尖点形式
    """
    _require_cusp(form)
    total = 0.0
    for c in range(form.group.index):

        def integrand(y: float, x: float, c: int = c) -> float:
            return float(np.abs(form.values(np.array([complex(x, y)]), np.array([c]))[0]) ** 2)

        value, err = integrate.nquad(
            integrand,
            [lambda x: [math.sqrt(1.0 - x * x), y_max], [-0.5, 0.5]],
            opts={"epsabs": 1e-12, "epsrel": 1e-10, "limit": 200},
        )
        logger.debug(f"petersson quadrature {form.name} sheet {c}: {value:.12g} (±{err:.1g})")
        total += value
    return total / (form.group.index * math.pi / 3.0)
