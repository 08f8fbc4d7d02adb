"""HarmonicFormSpec 基类定义"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import math
from typing import ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..constants import FormKind, FormName
from ..exception import FormException, NonFiniteException
from ..hyperbolic_core import IwasawaPoint, left_invariant_frame
from ..modular_group import ModularGroupSpec, reduce_gamma1_array


@dataclass(frozen=True, slots=True)
class Covector:
    """c_y·dy + c_x·dx + c_θ·dθ"""

    c_y: float
    c_x: float
    c_theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.c_y, self.c_x, self.c_theta)):
            raise NonFiniteException("covector component")

    def invariant_components(self, p: IwasawaPoint) -> tuple[float, float, float]:
        """Values on the left-invariant frame (L_λ, L_α, L_κ) at p"""
        frame = left_invariant_frame(p.y, p.theta)
        lam, alpha, kappa = frame.T @ np.array([self.c_y, self.c_x, self.c_theta])
        return float(lam), float(alpha), float(kappa)


class HarmonicFormSpec(ABC):
    """Γ\\G 上的调和 1-形式

    The xy-part of every form is Re(Φ(z) dz) for a holomorphic Φ, evaluated on a representative z of the
    point together with its coset label c. Subclasses provide:
    - `sheet_values`: Φ at representatives high enough for the direct expansion
    - `primitive`: Re ∫ Φ dz along straight segments
    """

    _registry: ClassVar[list[type["HarmonicFormSpec"]]] = []

    builtin: ClassVar[FormName | None] = None
    """内置名称, 配置提供的形式为 None"""

    direct_height: ClassVar[float] = 0.6
    """Below this height points are Γ(1)-reduced before evaluation"""

    def __init__(
        self,
        name: str,
        kind: FormKind,
        group: ModularGroupSpec,
        residues: tuple[float, ...],
        c_theta: float = 0.0,
    ):
        if len(residues) != group.nu_inf:
            raise FormException(f"{name}: {len(residues)} residues for {group.nu_inf} cusps of {group.name}")
        self.name = name
        self.kind = kind
        self.group = group
        self.residues = tuple(float(r) for r in residues)
        self.c_theta = float(c_theta)

    def __init_subclass__(cls, **kwargs):
        """自动注册子类到 _registry"""
        super().__init_subclass__(**kwargs)
        if ABC not in cls.__bases__:
            HarmonicFormSpec._registry.append(cls)

    @classmethod
    def get_all_subclass(cls) -> list[type["HarmonicFormSpec"]]:
        return cls._registry

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, {self.kind}, group={self.group.name})"

    @abstractmethod
    def sheet_values(self, z: NDArray[np.complex128], coset: NDArray[np.int64]) -> NDArray[np.complex128]:
        """Φ at representatives with Im z ≥ direct_height"""
        raise NotImplementedError

    @abstractmethod
    def primitive(
        self,
        z1: NDArray[np.complex128],
        z2: NDArray[np.complex128],
        coset: NDArray[np.int64],
    ) -> NDArray[np.float64]:
        """Re ∫_{z1}^{z2} Φ dz along straight segments"""
        raise NotImplementedError

    def values(self, z: ArrayLike, coset: ArrayLike) -> NDArray[np.complex128]:
        """Φ at arbitrary representatives

        Low points are reduced: Φ_c(z) = Φ_{A·c}(A·z)·A′(z).
        """
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        coset = np.broadcast_to(np.asarray(coset, dtype=np.int64), z.shape).reshape(-1)
        if not np.all(np.isfinite(z)) or np.any(z.imag <= 0.0):
            raise FormException(f"{self.name}: points must be finite and in the upper half-plane")
        out = np.empty(z.shape, dtype=np.complex128)
        low = z.imag < self.direct_height
        high = ~low
        if high.any():
            out[high] = self.sheet_values(z[high], coset[high])
        if low.any():
            zr, mats, cos = reduce_gamma1_array(z[low], coset[low], self.group)
            assert cos is not None
            j = mats[:, 1, 0] * z[low] + mats[:, 1, 1]
            out[low] = self.sheet_values(zr, cos) / (j * j)
        return out

    def covector_arrays(
        self, z: ArrayLike, coset: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(c_y, c_x) = (−Im Φ, Re Φ)"""
        phi = self.values(z, coset)
        return -phi.imag, phi.real

    def evaluate(self, p: IwasawaPoint, coset: int) -> Covector:
        c_y, c_x = self.covector_arrays(np.array([p.z]), np.array([coset]))
        return Covector(float(c_y[0]), float(c_x[0]), self.c_theta)

    def primitive_increment(self, p1: IwasawaPoint, p2: IwasawaPoint, dtheta: float, coset: int) -> float:
        """Integral of the form along the segment p1 → p2 with unreduced θ-increment dtheta"""
        xy = self.primitive(np.array([p1.z]), np.array([p2.z]), np.array([coset]))
        return float(xy[0]) + self.c_theta * dtheta

    def validate(self) -> None:
        """Kind-specific residue checks

        Raises:
            FormException: 留数表与类型不符
        """
        total = sum(self.residues)
        if self.kind is FormKind.SINGULAR and abs(total) > 1e-12:
            raise FormException(f"{self.name}: singular form residues sum to {total}, not 0")
        if self.kind is FormKind.CUSP and any(r != 0.0 for r in self.residues):
            raise FormException(f"{self.name}: cusp form with nonzero residues {self.residues}")


def evaluate_form(form: HarmonicFormSpec, p: IwasawaPoint, coset: int) -> Covector:
    return form.evaluate(p, coset)

