"""Winding integrals along Γ-reduced leaf geodesics

A geodesic with body velocity ξ₀ = pλ + qα + rκ is g_s = g₀·exp(s·Y)·exp(s·bκ) with b = r(1 + a⁻²) and
Y = ξ₀ − bκ; after a step of length Δs the body field is conjugated to exp(−Δs·bκ)·Y·exp(Δs·bκ). The stepper is
exact up to rounding, so the arc-length control only serves the quadrature of the forms.
"""

from collections.abc import Sequence
from dataclasses import dataclass
import math

from loguru import logger
import numpy as np
from numpy.typing import NDArray

from ..brownian.engine import checkpoint_times
from ..exception import ConfigException, NonFiniteException
from ..forms import HarmonicFormSpec
from ..hyperbolic_core import (
    ALPHA,
    KAPPA,
    LAMBDA,
    IwasawaPoint,
    TangentVector,
    check_metric,
    iwasawa_arrays,
    iwasawa_matrices,
    lie_exp,
    renormalize_arrays,
    wrap_pi,
)
from ..modular_group import ModularGroupSpec, reduce_gamma1_array
from ..report import WindingSample
from ..utils import chunk_bounds, run_chunks
from .leaf import LeafElement, lift_to_leaf
from .liouville import sample_liouville
from .params import GeodesicParams, body_components, unwrapped_theta


def _rotations(phi: NDArray[np.float64]) -> NDArray[np.float64]:
    """k(φ) = exp(φκ) for an array of angles"""
    return iwasawa_matrices(np.ones_like(phi), np.zeros_like(phi), phi)


class GeodesicStepper:
    """Group-exponential integrator for a batch of geodesics"""

    def __init__(self, points: Sequence[IwasawaPoint], tangents: Sequence[TangentVector], a: float):
        a = check_metric(a)
        self.a = a
        self.g = iwasawa_matrices(
            np.array([p.y for p in points]), np.array([p.x for p in points]), np.array([p.theta for p in points])
        )
        body = np.array([body_components(p.theta, tv) for p, tv in zip(points, tangents)]).reshape(-1, 3)
        self.b = body[:, 2] * (1.0 + a**-2)
        self.body_field = (
            body[:, 0, None, None] * LAMBDA
            + body[:, 1, None, None] * ALPHA
            + (body[:, 2] - self.b)[:, None, None] * KAPPA
        )

    @classmethod
    def from_leaf(cls, leaves: Sequence[LeafElement], a: float) -> "GeodesicStepper":
        return cls([e.point for e in leaves], [e.tangent for e in leaves], a)

    def __len__(self) -> int:
        return self.b.size

    def coordinates(self, idx: NDArray[np.int64] | None = None):
        """(y, x, θ) of the current elements"""
        return iwasawa_arrays(self.g if idx is None else self.g[idx])

    def advance(self, ds: NDArray[np.float64], idx: NDArray[np.int64] | None = None) -> NDArray[np.float64]:
        """Move the selected geodesics by arc length ds; returns the unwrapped θ-increments"""
        idx = np.arange(len(self)) if idx is None else idx
        g = self.g[idx]
        y_field = self.body_field[idx]
        b = self.b[idx]
        th0 = iwasawa_arrays(g)[2]
        mid = g @ lie_exp(ds[:, None, None] * y_field)
        th_mid = iwasawa_arrays(mid)[2]
        rot = _rotations(b * ds)
        self.g[idx] = renormalize_arrays(mid @ rot)
        self.body_field[idx] = _rotations(-b * ds) @ y_field @ rot
        # the exp(Δs·Y) part turns θ by less than π for admissible steps; the rotation part is exact
        return wrap_pi(th_mid - th0) + b * ds

    def translate(self, idx: NDArray[np.int64], mats: NDArray[np.float64]) -> None:
        """Left-multiply by deck words; the body field is left-invariant"""
        self.g[idx] = renormalize_arrays(mats @ self.g[idx])


@dataclass(frozen=True, slots=True)
class GeodesicConfig:
    a: float
    """度量参数, 非零"""
    k: float
    """叶参数, |k| < 1"""
    eps: int = 1
    seed: int = 0
    ds_base: float = 0.05
    """基础弧长步长"""
    cusp_step: float = 0.2
    """Δs = min(ds_base, cusp_step/ỹ)"""
    reduction_period: int = 64
    reduce_below: float = 0.75
    reduce_beyond: float = 2.0

    def __post_init__(self):
        check_metric(self.a)
        if not abs(self.k) < 1.0:
            raise ConfigException(f"geodesic winding needs |k| < 1, got {self.k}")
        if self.eps not in (1, -1):
            raise ConfigException(f"eps must be ±1, got {self.eps}")
        if not (self.ds_base > 0.0 and math.isfinite(self.ds_base)):
            raise ConfigException(f"ds_base must be positive, got {self.ds_base}")
        if self.reduction_period < 1:
            raise ConfigException("reduction_period must be at least 1")

    def step_size(self, y: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.minimum(self.ds_base, self.cusp_step / y)


def initial_leaf(cfg: GeodesicConfig, group: ModularGroupSpec, path_id: int) -> tuple[LeafElement, int]:
    """The μ^k_ε draw of stream path_id: a Liouville sample lifted with θ₀ = 0"""
    draw = sample_liouville(group, cfg.seed, path_id)
    return lift_to_leaf(draw.point.z, draw.direction, cfg.k, cfg.eps, 0.0, cfg.a), draw.coset


def integrate_chunk(
    cfg: GeodesicConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    fractions: Sequence[float],
    leaves: Sequence[tuple[LeafElement, int]],
    path_ids: Sequence[int],
) -> list[WindingSample]:
    """Form integrals along the given leaf geodesics in lockstep

    Both routes work on the Γ-reduced trajectory: `raw` sums Re(Φ(z_mid)·Δz) at segment midpoints, `primitive`
    sums the primitive of each segment, and both add the θ-increments of the reduced chart. The closed-form dθ
    integral of the unreduced geodesic goes to `theta`; it differs from the reduced-chart θ by the reduction jumps,
    which the xy-part of a quasi-modular form absorbs.
    """
    times = checkpoint_times(horizon, fractions)
    p = len(leaves)
    nf = len(forms)
    stepper = GeodesicStepper.from_leaf([e for e, _ in leaves], cfg.a)
    params: list[GeodesicParams] = [e.params(cfg.a) for e, _ in leaves]
    coset = np.array([c for _, c in leaves], dtype=np.int64)
    t = np.zeros(p)
    acc_xy = np.zeros((p, nf))
    acc_mid = np.zeros((p, nf))
    theta_step = np.zeros(p)
    out_xy = np.zeros((p, len(times), nf))
    out_mid = np.zeros_like(out_xy)
    out_step = np.zeros((p, len(times)))
    next_cp = np.zeros(p, dtype=np.int64)
    targets = np.array(times)
    active = np.full(p, horizon > 0.0)

    _reduce(stepper, coset, group, np.arange(p))
    steps = 0
    while active.any():
        idx = np.flatnonzero(active)
        y0, x0, _ = stepper.coordinates(idx)
        target = targets[next_cp[idx]]
        ds = cfg.step_size(y0)
        clamp = t[idx] + ds >= target
        ds = np.where(clamp, target - t[idx], ds)
        dth = stepper.advance(ds, idx)
        y1, x1, _ = stepper.coordinates(idx)
        if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(x1))):
            raise NonFiniteException("geodesic state")
        if nf:
            z0 = x0 + 1j * y0
            z1 = x1 + 1j * y1
            zm = 0.5 * (z0 + z1)
            for j, form in enumerate(forms):
                acc_xy[idx, j] += form.primitive(z0, z1, coset[idx])
                acc_mid[idx, j] += (form.values(zm, coset[idx]) * (z1 - z0)).real
        theta_step[idx] += dth
        t[idx] = np.where(clamp, target, t[idx] + ds)

        if clamp.any():
            hit = idx[clamp]
            slot = next_cp[hit]
            out_xy[hit, slot] = acc_xy[hit]
            out_mid[hit, slot] = acc_mid[hit]
            out_step[hit, slot] = theta_step[hit]
            next_cp[hit] += 1
            active[hit[next_cp[hit] == len(times)]] = False

        steps += 1
        due = (steps % cfg.reduction_period == 0) | (y1 < cfg.reduce_below) | (np.abs(x1) > cfg.reduce_beyond)
        if due.any():
            _reduce(stepper, coset, group, idx[due])

    logger.debug(f"geodesic chunk {path_ids[0] if p else '-'}..: {p} paths, {steps} lockstep iterations")
    kinds = [f.kind for f in forms]
    c_theta = np.array([f.c_theta for f in forms])
    samples = []
    for i, pid in enumerate(path_ids):
        leaf = leaves[i][0]
        closed = unwrapped_theta(params[i], leaf.point, np.array(times))
        samples.append(
            WindingSample(
                seed=cfg.seed,
                path_id=int(pid),
                forms=[f.name for f in forms],
                kinds=kinds,
                checkpoint_times=list(times),
                raw=(out_mid[i] + out_step[i][:, None] * c_theta).tolist(),
                primitive=(out_xy[i] + out_step[i][:, None] * c_theta).tolist(),
                theta=closed.tolist(),
                k=leaf.k,
                eps=leaf.eps,
            )
        )
    return samples


def _reduce(stepper: GeodesicStepper, coset: NDArray[np.int64], group: ModularGroupSpec, idx: NDArray[np.int64]):
    y, x, _ = stepper.coordinates(idx)
    _, mats, cos = reduce_gamma1_array(x + 1j * y, coset[idx], group)
    assert cos is not None
    stepper.translate(idx, mats)
    coset[idx] = cos


def geodesic_winding(
    leaf: LeafElement,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    cfg: GeodesicConfig,
    group: ModularGroupSpec,
    coset: int = 0,
    fractions: Sequence[float] = (1.0,),
    path_id: int = 0,
) -> WindingSample:
    """Winding integrals of one leaf geodesic up to arc length `horizon`"""
    return integrate_chunk(cfg, group, forms, horizon, fractions, [(leaf, coset)], [path_id])[0]


def simulate_geodesic_chunk(
    cfg: GeodesicConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    fractions: Sequence[float],
    path_ids: Sequence[int],
) -> list[WindingSample]:
    leaves = [initial_leaf(cfg, group, pid) for pid in path_ids]
    return integrate_chunk(cfg, group, forms, horizon, fractions, leaves, path_ids)


def batch_geodesic_winding(
    cfg: GeodesicConfig,
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    horizon: float,
    n_paths: int,
    fractions: Sequence[float] = (1.0,),
    threads: int = 1,
    chunk_size: int = 256,
) -> list[WindingSample]:
    """N geodesics drawn from μ^k_ε; output depends only on (seed, path index)

    Raises:
        ConfigException: N < 1
    """
    if n_paths < 1:
        raise ConfigException(f"need at least one path, got {n_paths}")
    tasks = [
        (cfg, group, tuple(forms), horizon, tuple(fractions), list(range(lo, hi)))
        for lo, hi in chunk_bounds(n_paths, chunk_size)
    ]
    logger.info(f"geodesic: {n_paths} paths on {group.name}, k={cfg.k}, ε={cfg.eps}, T={horizon}, {len(tasks)} chunks")
    parts = run_chunks(simulate_geodesic_chunk, tasks, threads, "geodesic")
    return [s for part in parts for s in part]

