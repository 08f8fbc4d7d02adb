"""极限律: 目标特征函数, ECF 检验与独立性检验"""

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
import math
from typing import Any, Final

from loguru import logger
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import curve_fit

from ..constants import FormKind, Mode
from ..exception import ConfigException, TooFewSamplesException
from ..forms import HarmonicFormSpec, petersson_norm_quadrature
from ..modular_group import ModularGroupSpec
from ..report import CheckReport, WindingSample
from .ecf import as_matrix, ecf

MIN_LAW_SAMPLES: Final[int] = 500

FIT_EXCLUSION: Final[float] = 0.1
"""Grid points with |q| below this are ignored by scale fits"""


@dataclass(frozen=True, slots=True)
class CauchyTarget:
    beta: float
    loc: float = 0.0

    def cf(self, q: ArrayLike) -> NDArray[np.complex128]:
        q = as_matrix(q)[:, 0]
        return np.exp(1j * self.loc * q - self.beta * np.abs(q))


@dataclass(frozen=True, slots=True)
class GaussianTarget:
    variance: float
    mean: float = 0.0

    def cf(self, q: ArrayLike) -> NDArray[np.complex128]:
        q = as_matrix(q)[:, 0]
        return np.exp(1j * self.mean * q - 0.5 * self.variance * q * q)


@dataclass(frozen=True, slots=True)
class CfTarget:
    """Any characteristic function of the grid points, shape (m, d) → (m,)"""

    fn: Callable[[NDArray[np.float64]], NDArray[np.complex128]]
    label: str = "cf"

    def cf(self, q: ArrayLike) -> NDArray[np.complex128]:
        return np.asarray(self.fn(as_matrix(q)), dtype=np.complex128)


LawTarget = CauchyTarget | GaussianTarget | CfTarget


@dataclass(slots=True)
class LawTestResult:
    statistic: float
    """网格上的 sup 距离"""
    threshold: float
    n: int
    scale: float | None = None
    """拟合的尺度或方差"""
    table: list[dict[str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold

    def to_report(
        self, test_name: str, target: float | None = None, parameters: Mapping[str, Any] | None = None
    ) -> CheckReport:
        report = CheckReport(
            test_name=test_name,
            n=self.n,
            statistic=self.statistic,
            threshold=self.threshold,
            passed=self.passed,
            measured=self.scale,
            target=target,
            parameters=dict(parameters or {}),
            table=self.table,
        )
        log = logger.success if report.passed else logger.warning
        log(f"{test_name}: statistic {self.statistic:.4g} vs threshold {self.threshold:.4g} (n={self.n})")
        return report


def relative_check(
    name: str, n: int, measured: float, target: float, tol: float, params: Mapping[str, Any] | None = None
) -> CheckReport:
    """|measured − target| / |target| ≤ tol"""
    stat = abs(measured - target) / abs(target)
    report = CheckReport(
        test_name=name,
        n=n,
        statistic=stat,
        threshold=tol,
        passed=stat <= tol,
        measured=measured,
        target=target,
        parameters=dict(params or {}),
    )
    log = logger.success if report.passed else logger.warning
    log(f"{name}: measured {measured:.5g}, target {target:.5g}, relative gap {stat:.3g} (tol {tol})")
    return report


def law_test(samples: ArrayLike, target: LawTarget, q_grid: ArrayLike, threshold: float) -> LawTestResult:
    """sup_q |ecf(q) − target(q)|

    Raises:
        TooFewSamplesException: n < 500
        ConfigException: 网格为空
    """
    q = as_matrix(q_grid)
    if q.shape[0] == 0:
        raise ConfigException("empty q grid")
    rep = ecf(samples, q, minimum=MIN_LAW_SAMPLES)
    want = target.cf(q)
    stat = float(np.max(np.abs(rep.values - want)))
    scale = None
    if q.shape[1] == 1 and isinstance(target, (CauchyTarget, GaussianTarget)):
        scale = fit_scale(samples, q[:, 0], "cauchy" if isinstance(target, CauchyTarget) else "gaussian")
    return LawTestResult(stat, threshold, rep.n, scale, rep.table(want))


def fit_scale(samples: ArrayLike, q_grid: ArrayLike, kind: str = "cauchy") -> float:
    """Least-squares fit of |ecf| to e^{−β|q|} (Cauchy scale β) or e^{−σ²q²/2} (variance σ²)"""
    q = np.asarray(q_grid, dtype=float).reshape(-1)
    q = q[np.abs(q) >= FIT_EXCLUSION]
    if q.size == 0:
        raise ConfigException("no grid points left for the scale fit")
    modulus = np.abs(ecf(samples, q, minimum=2).values)
    if kind == "cauchy":

        def model(qq, beta):
            return np.exp(-beta * np.abs(qq))

    elif kind == "gaussian":

        def model(qq, var):
            return np.exp(-0.5 * var * qq * qq)

    else:
        raise ConfigException(f"unknown law kind {kind}")
    popt, _ = curve_fit(model, q, modulus, p0=[1.0], bounds=(0.0, np.inf))
    return float(popt[0])


def independence_test(
    x: ArrayLike, y: ArrayLike, q_grid: ArrayLike, lam_grid: ArrayLike, threshold: float
) -> LawTestResult:
    """sup over q × λ of |ecf_{(X,Y)}(q, λ) − ecf_X(q)·ecf_Y(λ)|

    Raises:
        TooFewSamplesException: n < 500
        ConfigException: X 与 Y 的样本数不同
    """
    xm, ym = as_matrix(x), as_matrix(y)
    if xm.shape[0] != ym.shape[0]:
        raise ConfigException(f"paired samples differ in size: {xm.shape[0]} vs {ym.shape[0]}")
    n = xm.shape[0]
    if n < MIN_LAW_SAMPLES:
        raise TooFewSamplesException(n, MIN_LAW_SAMPLES)
    q, lam = as_matrix(q_grid), as_matrix(lam_grid)
    if q.shape[0] == 0 or lam.shape[0] == 0:
        raise ConfigException("empty q grid")
    ex = np.exp(1j * (xm @ q.T))  # (n, mq)
    ey = np.exp(1j * (ym @ lam.T))  # (n, ml)
    joint = ex.T @ ey / n
    product = np.outer(ex.mean(axis=0), ey.mean(axis=0))
    gap = np.abs(joint - product)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    table = [{"q": float(q[i, 0]), "lambda": float(lam[j, 0]), "gap": float(gap[i, j])}]
    return LawTestResult(float(gap.max()), threshold, n, table=table)


def increment_independence(
    samples: Sequence[WindingSample],
    form_index: int,
    q_grid: ArrayLike,
    threshold: float,
    first: int = 0,
    second: int = -1,
) -> LawTestResult:
    """Two-time marginal check: the normalized windings up to checkpoint `first` and the increment after it"""
    t = samples[0].checkpoint_times
    t1, t2 = t[first], t[second]
    if not 0.0 < t1 < t2:
        raise ConfigException(f"need two increasing positive checkpoints, got {t1} and {t2}")
    kind = samples[0].kinds[form_index]
    power = 0.5 if kind is FormKind.CUSP else 1.0
    a = np.array([s.raw[first][form_index] for s in samples]) / t1**power
    b = np.array([s.increments(first, second)[form_index] for s in samples]) / (t2 - t1) ** power
    return independence_test(a, b, q_grid, q_grid, threshold)


def _split_forms(forms: Sequence[HarmonicFormSpec]) -> tuple[list[HarmonicFormSpec], list[HarmonicFormSpec]]:
    fast = [f for f in forms if f.kind is not FormKind.CUSP]
    slow = [f for f in forms if f.kind is FormKind.CUSP]
    return fast, slow


def geodesic_factors(k: float, a: float) -> tuple[float, float, float]:
    """(shift of the dθ-bearing form, Cauchy scale factor, Gaussian variance factor) on the leaf of parameter k"""
    ratio = (1.0 - k * k) / (1.0 + (a * k) ** 2)
    shift = (1.0 + a * a) * k / math.sqrt(1.0 + (a * k) ** 2)
    return shift, 2.0 * math.sqrt(ratio), math.sqrt(4.0 * ratio)


def target_cf(
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    mode: Mode,
    lam_prime: ArrayLike,
    lam: ArrayLike = (),
    k: float = 0.0,
    a: float = 1.0,
    norms: Mapping[str, float] | None = None,
) -> complex:
    """Limit characteristic function of (M/t for non-cusp forms, M̃/√t for cusp forms)

    exp(−Σ_l λ_l²⟨ω̃_l, ω̃_l⟩/2 − Σ_ℓ |Σ_j λ′_j r_j^ℓ|·h_ℓ/(2V)); the geodesic mode adds the shift of the
    dθ-bearing form and scales both parts.

    Args:
        lam_prime: 非尖点形式的权, 按 forms 中的顺序
        lam: 尖点形式的权
        norms: 尖点形式的 Petersson 范数, 缺省时用求积计算
    """
    fast, slow = _split_forms(forms)
    lp = np.asarray(lam_prime, dtype=float).reshape(-1)
    lv = np.asarray(lam, dtype=float).reshape(-1)
    if lp.size != len(fast) or lv.size != len(slow):
        raise ConfigException(f"{lp.size}+{lv.size} weights for {len(fast)} fast and {len(slow)} slow forms")
    cauchy = sum(
        abs(sum(w * f.residues[ell] for w, f in zip(lp, fast))) * h / (2.0 * group.covolume)
        for ell, h in enumerate(group.widths)
    )
    variance = 0.0
    for w, f in zip(lv, slow):
        norm = (norms or {}).get(f.name)
        if norm is None:
            norm = petersson_norm_quadrature(f)
        variance += w * w * norm
    shift = 0.0
    if mode is Mode.GEODESIC:
        drift, cauchy_factor, gauss_factor = geodesic_factors(k, a)
        shift = drift * sum(w * f.c_theta for w, f in zip(lp, fast))
        cauchy *= cauchy_factor
        variance *= gauss_factor
    return complex(np.exp(1j * shift - cauchy - 0.5 * variance))


def target_law(
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    mode: Mode,
    k: float = 0.0,
    a: float = 1.0,
    norms: Mapping[str, float] | None = None,
) -> CfTarget:
    """target_cf as a function of grid points (λ′, λ), ordered like the fast then slow forms"""
    fast, _ = _split_forms(forms)
    nf = len(fast)
    if norms is None:
        norms = {f.name: petersson_norm_quadrature(f) for f in forms if f.kind is FormKind.CUSP}

    def fn(q: NDArray[np.float64]) -> NDArray[np.complex128]:
        return np.array([target_cf(group, forms, mode, row[:nf], row[nf:], k, a, norms) for row in q])

    return CfTarget(fn, label=f"{mode}-limit")
