"""测地球面的等分布

Cells are rectangles in (x, log y) over the Γ(1) fundamental domain truncated at ỹ ≤ y_max, plus one overflow cell,
times θ-bins, times cosets. Their μ^Γ masses are exact: on [x₁, x₂] × [y₁, y₂] ∩ {|z| ≥ 1} the area is
∫ (1/max(y₁, √(1−x²)) − 1/y₂)₊ dx, a combination of arcsin and linear terms.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
import math

from loguru import logger
import numpy as np
from numpy.typing import NDArray

from ..constants import SQRT3_2, TWO_PI
from ..exception import ConfigException
from ..geodesic import lift_to_leaf, sample_leaf
from ..hyperbolic_core import IwasawaPoint, iwasawa_arrays, iwasawa_compose, iwasawa_matrices
from ..modular_group import ModularGroupSpec, reduce_gamma1_array
from ..utils import make_rng
from .laws import LawTestResult

SPHERE_CHANNEL = 11
LEAF_REFERENCE_CHANNEL = 12


@dataclass(frozen=True, slots=True)
class CellPartition:
    bands: tuple[float, ...] = field(default_factory=lambda: tuple(np.geomspace(SQRT3_2, 6.0, 5).tolist()))
    """y 方向的分带边界, 首个为 √3/2, 最后一个为截断高度"""
    x_bins: tuple[int, ...] = (2, 3, 3, 3)
    """每个分带的 x 等分数"""
    n_theta: int = 4

    def __post_init__(self):
        if len(self.x_bins) != len(self.bands) - 1:
            raise ConfigException(f"{len(self.x_bins)} x-bin counts for {len(self.bands) - 1} bands")
        if any(b <= a for a, b in zip(self.bands, self.bands[1:])) or self.bands[0] > SQRT3_2 + 1e-15:
            raise ConfigException(f"band edges must increase from √3/2, got {self.bands}")
        if self.n_theta < 1 or any(m < 1 for m in self.x_bins):
            raise ConfigException("bin counts must be positive")

    @property
    def y_max(self) -> float:
        return self.bands[-1]

    @property
    def regions(self) -> list[tuple[float, float, float, float]]:
        """(x₁, x₂, y₁, y₂) of the rectangles, band by band"""
        out = []
        for (y1, y2), m in zip(zip(self.bands, self.bands[1:]), self.x_bins):
            edges = np.linspace(-0.5, 0.5, m + 1)
            out += [(float(lo), float(hi), y1, y2) for lo, hi in zip(edges, edges[1:])]
        return out

    @property
    def n_regions(self) -> int:
        """矩形数加溢出格"""
        return sum(self.x_bins) + 1

    def n_cells(self, group: ModularGroupSpec) -> int:
        return self.n_regions * self.n_theta * group.index

    def locate(
        self, z: NDArray[np.complex128], theta: NDArray[np.float64], coset: NDArray[np.int64]
    ) -> NDArray[np.int64]:
        """Cell index of reduced points"""
        y = np.maximum(z.imag, self.bands[0])
        band = np.searchsorted(np.asarray(self.bands), y, side="right") - 1
        overflow = band >= len(self.x_bins)
        band_c = np.minimum(band, len(self.x_bins) - 1)
        counts = np.asarray(self.x_bins)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        xb = np.clip(np.floor((z.real + 0.5) * counts[band_c]).astype(np.int64), 0, counts[band_c] - 1)
        region = np.where(overflow, self.n_regions - 1, offsets[band_c] + xb)
        tb = np.minimum(np.floor(np.mod(theta, TWO_PI) / (TWO_PI / self.n_theta)).astype(np.int64), self.n_theta - 1)
        return (coset * self.n_regions + region) * self.n_theta + tb


def cell_partition(
    bands: Sequence[float] | None = None, x_bins: Sequence[int] | None = None, n_theta: int = 4
) -> CellPartition:
    if bands is None and x_bins is None:
        return CellPartition(n_theta=n_theta)
    if bands is None or x_bins is None:
        raise ConfigException("bands and x_bins go together")
    return CellPartition(tuple(float(b) for b in bands), tuple(int(m) for m in x_bins), n_theta)


def rectangle_area(x1: float, x2: float, y1: float, y2: float) -> float:
    """Hyperbolic area of [x₁, x₂] × [y₁, y₂] ∩ {|z| ≥ 1}"""
    cuts = [x1, x2]
    for h in (y1, y2):
        if h < 1.0:
            w = math.sqrt(1.0 - h * h)
            cuts += [v for v in (-w, w) if x1 < v < x2]
    cuts = sorted(cuts)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        mid = 0.5 * (lo + hi)
        floor = math.sqrt(max(0.0, 1.0 - mid * mid))
        if floor >= y2:
            continue
        if floor > y1:
            total += math.asin(hi) - math.asin(lo) - (hi - lo) / y2
        else:
            total += (hi - lo) * (1.0 / y1 - 1.0 / y2)
    return total


def cell_masses(partition: CellPartition, group: ModularGroupSpec) -> NDArray[np.float64]:
    """Exact μ^Γ mass of every cell; sums to 1"""
    areas = [rectangle_area(*reg) for reg in partition.regions] + [1.0 / partition.y_max]
    per_region = np.asarray(areas) / (math.pi / 3.0)
    block = np.repeat(per_region, partition.n_theta) / partition.n_theta
    return np.tile(block, group.index) / group.index


def reduce_frames(
    m: NDArray[np.float64], coset: NDArray[np.int64], group: ModularGroupSpec
) -> tuple[NDArray[np.complex128], NDArray[np.float64], NDArray[np.int64]]:
    """Γ(1)-reduce a stack of group elements, carrying θ and the coset"""
    y, x, theta = iwasawa_arrays(m)
    z = x + 1j * y
    zr, mats, cos = reduce_gamma1_array(z, coset, group)
    assert cos is not None
    j = mats[:, 1, 0] * z + mats[:, 1, 1]
    return zr, np.mod(theta - 2.0 * np.angle(j), TWO_PI), cos


def sphere_points(center: IwasawaPoint, radius: float, rho: NDArray[np.float64]) -> NDArray[np.float64]:
    """g·k(ρ)·a(e^R): the unit tangent sphere of radius R about g"""
    if radius < 0.0:
        raise ConfigException(f"sphere radius must be non-negative, got {radius}")
    g = iwasawa_compose(center).to_array()
    rot = iwasawa_matrices(np.ones_like(rho), np.zeros_like(rho), rho)
    push = np.diag([math.exp(0.5 * radius), math.exp(-0.5 * radius)])
    return g @ rot @ push


def _histogram(cells: NDArray[np.int64], n_cells: int) -> NDArray[np.float64]:
    return np.bincount(cells, minlength=n_cells) / max(cells.size, 1)


@dataclass(slots=True)
class SphereResult:
    result: LawTestResult
    empirical: NDArray[np.float64]
    reference: NDArray[np.float64]


def sphere_equidistribution(
    group: ModularGroupSpec,
    center: IwasawaPoint,
    radius: float,
    n: int,
    partition: CellPartition | None = None,
    seed: int = 0,
    threshold: float = 0.05,
    coset: int = 0,
) -> SphereResult:
    """Total-variation distance between the reduced sphere Γg·PSO(2)·Θ_R and μ^Γ over the cells"""
    partition = partition or CellPartition()
    rho = make_rng(seed, SPHERE_CHANNEL).uniform(0.0, TWO_PI, n)
    zr, theta, cos = reduce_frames(sphere_points(center, radius, rho), np.full(n, coset, dtype=np.int64), group)
    emp = _histogram(partition.locate(zr, theta, cos), partition.n_cells(group))
    exact = cell_masses(partition, group)
    stat = 0.5 * float(np.abs(emp - exact).sum())
    logger.info(f"sphere R={radius}: discrepancy {stat:.4f} over {exact.size} cells, n={n}")
    return SphereResult(LawTestResult(stat, threshold, n, table=_cell_table(emp, exact)), emp, exact)


def quasi_sphere_equidistribution(
    group: ModularGroupSpec,
    k: float,
    eps: int,
    a: float,
    center: IwasawaPoint,
    radius: float,
    n: int,
    n_reference: int,
    partition: CellPartition | None = None,
    seed: int = 0,
    threshold: float = 0.08,
) -> SphereResult:
    """The sphere lifted to L(k, ε) against lifted Liouville draws, compared cell by cell"""
    partition = partition or CellPartition()
    rho = make_rng(seed, SPHERE_CHANNEL).uniform(0.0, TWO_PI, n)
    y, x, theta = iwasawa_arrays(sphere_points(center, radius, rho))
    lifted = [
        lift_to_leaf(complex(xi, yi), float(ti) + 0.5 * math.pi, k, eps, 0.0, a) for xi, yi, ti in zip(x, y, theta)
    ]
    emp = _leaf_histogram([(e, 0) for e in lifted], partition, group)
    ref_draws = sample_leaf(group, k, eps, a, make_rng(seed, LEAF_REFERENCE_CHANNEL), n_reference)
    ref = _leaf_histogram(ref_draws, partition, group)
    stat = 0.5 * float(np.abs(emp - ref).sum())
    logger.info(f"quasi-sphere k={k} R={radius}: discrepancy {stat:.4f}, n={n}, reference n={n_reference}")
    return SphereResult(LawTestResult(stat, threshold, n, table=_cell_table(emp, ref)), emp, ref)


def _leaf_histogram(draws, partition: CellPartition, group: ModularGroupSpec) -> NDArray[np.float64]:
    pts = [e.point for e, _ in draws]
    m = iwasawa_matrices(np.array([p.y for p in pts]), np.array([p.x for p in pts]), np.array([p.theta for p in pts]))
    zr, theta, cos = reduce_frames(m, np.array([c for _, c in draws], dtype=np.int64), group)
    return _histogram(partition.locate(zr, theta, cos), partition.n_cells(group))


def _cell_table(emp: NDArray[np.float64], ref: NDArray[np.float64]) -> list[dict[str, float]]:
    return [{"cell": float(i), "empirical": float(e), "reference": float(r)} for i, (e, r) in enumerate(zip(emp, ref))]
