"""q-expansion forms: config-supplied singular/cusp forms and the built-in η⁴"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import reduce
import math

import numpy as np
from numpy.typing import NDArray

from ..constants import Q_TRUNCATION, TWO_PI, FormKind, FormName, GroupName
from ..exception import ConfigException, FormException
from ..modular_group import ModularGroupSpec, builtin_group, reduce_gamma1_array
from .base import HarmonicFormSpec


def eta4_coefficients(terms: int) -> list[int]:
    """Coefficients p_0..p_terms of ∏_{n≥1} (1 − qⁿ)⁴"""
    p = [0] * (terms + 1)
    p[0] = 1
    for n in range(1, terms + 1):
        for _ in range(4):
            for j in range(terms, n - 1, -1):
                p[j] -= p[j - n]
    return p


def eta4_q_series(terms: int) -> list[int]:
    """Coefficients b_0..b_terms of q·∏(1 − qⁿ)⁴ = q − 4q² + 2q³ + 8q⁴ − 5q⁵ + ..."""
    return [0, *eta4_coefficients(terms - 1)] if terms > 0 else [0]


@dataclass(frozen=True, slots=True)
class CuspExpansion:
    """One cusp's chart expansion F_ℓ(ζ) = residue + Σ_{n≥1} a_n·e^{2πinζ/h_ℓ}"""

    residue: float
    """dx̃_ℓ 的系数 r^ℓ"""
    coefficients: tuple[complex, ...]
    """a_1, ..., a_K"""


class _Packed:
    """Nonzero coefficients laid out as a_n = b_k at n = offset + stride·k, for Horner in Q^stride"""

    __slots__ = ("b", "offset", "stride")

    def __init__(self, coefficients: Sequence[complex]):
        idx = [n + 1 for n, c in enumerate(coefficients) if c != 0]
        if not idx:
            self.offset, self.stride = 1, 1
            self.b = np.zeros(1, dtype=np.complex128)
            return
        self.offset = idx[0]
        self.stride = reduce(math.gcd, (i - idx[0] for i in idx[1:]), 0) or 1
        count = (idx[-1] - self.offset) // self.stride + 1
        self.b = np.array(
            [coefficients[self.offset + self.stride * k - 1] for k in range(count)], dtype=np.complex128
        )

    def __call__(self, q: NDArray[np.complex128]) -> NDArray[np.complex128]:
        qs = q**self.stride
        acc = np.zeros_like(q)
        for bk in self.b[::-1]:
            acc = acc * qs + bk
        return acc * q**self.offset


class QExpansionForm(HarmonicFormSpec):
    """Re(f dz) for f given by its expansions in the cusp charts

    On the sheet with coset c, with chart (ℓ, m) = group.chart_for_coset(c), Φ_c(z) = F_ℓ(z + m).
    """

    def __init__(
        self,
        name: str,
        kind: FormKind,
        group: ModularGroupSpec,
        expansions: Sequence[CuspExpansion],
    ):
        if kind is FormKind.OMEGA0:
            raise FormException(f"{name}: q-expansion forms are singular or cusp forms")
        if len(expansions) != group.nu_inf:
            raise FormException(f"{name}: {len(expansions)} expansions for {group.nu_inf} cusps of {group.name}")
        if any(len(e.coefficients) > Q_TRUNCATION for e in expansions):
            raise FormException(f"{name}: at most {Q_TRUNCATION} coefficients per cusp")
        super().__init__(name, kind, group, tuple(e.residue for e in expansions))
        self.expansions = tuple(expansions)
        self._values = [_Packed(e.coefficients) for e in expansions]
        self._primitives = [
            _Packed(
                [
                    c * group.cusps[ell].width / (TWO_PI * 1j * (n + 1)) if c != 0 else 0
                    for n, c in enumerate(e.coefficients)
                ]
            )
            for ell, e in enumerate(expansions)
        ]
        self.validate()

    @property
    def truncation(self) -> int:
        return max((len(e.coefficients) for e in self.expansions), default=0)

    def scaled(self, factor: float) -> "QExpansionForm":
        """λ·form"""
        return QExpansionForm(
            f"{factor}*{self.name}",
            self.kind,
            self.group,
            [
                CuspExpansion(factor * e.residue, tuple(factor * c for c in e.coefficients))
                for e in self.expansions
            ],
        )

    def _chart(self, z: NDArray[np.complex128], coset: NDArray[np.int64]):
        cusp, shift = self.group.sheet_table
        return cusp[coset], z + shift[coset]

    def sheet_values(self, z: NDArray[np.complex128], coset: NDArray[np.int64]) -> NDArray[np.complex128]:
        ell, zeta = self._chart(z, coset)
        out = np.asarray(self.residues, dtype=np.complex128)[ell]
        for i, chart in enumerate(self.group.cusps):
            mask = ell == i
            if mask.any():
                q = np.exp((TWO_PI * 1j / chart.width) * zeta[mask])
                out[mask] += self._values[i](q)
        return out

    def _antiderivative(self, zeta: NDArray[np.complex128], ell: NDArray[np.int64]) -> NDArray[np.complex128]:
        out = np.asarray(self.residues, dtype=np.complex128)[ell] * zeta
        for i, chart in enumerate(self.group.cusps):
            mask = ell == i
            if mask.any():
                q = np.exp((TWO_PI * 1j / chart.width) * zeta[mask])
                out[mask] += self._primitives[i](q)
        return out

    def primitive(
        self,
        z1: NDArray[np.complex128],
        z2: NDArray[np.complex128],
        coset: NDArray[np.int64],
    ) -> NDArray[np.float64]:
        """Closed-form primitive G_ℓ(ζ) = r^ℓ ζ + Σ a_n·h/(2πin)·e^{2πinζ/h}

        Both ends are moved by the same Γ(1) element when the start is low, so one chart covers the segment.
        """
        z1 = np.asarray(z1, dtype=np.complex128).reshape(-1)
        z2 = np.asarray(z2, dtype=np.complex128).reshape(-1)
        coset = np.broadcast_to(np.asarray(coset, dtype=np.int64), z1.shape).copy()
        low = z1.imag < self.direct_height
        if low.any():
            zr, mats, cos = reduce_gamma1_array(z1[low], coset[low], self.group)
            assert cos is not None
            a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
            z2 = z2.copy()
            z1 = z1.copy()
            z2[low] = (a * z2[low] + b) / (c * z2[low] + d)
            z1[low] = zr
            coset[low] = cos
        ell, zeta1 = self._chart(z1, coset)
        _, zeta2 = self._chart(z2, coset)
        return (self._antiderivative(zeta2, ell) - self._antiderivative(zeta1, ell)).real


class Eta4CuspForm(QExpansionForm):
    """Re(η⁴ dz) on the commutator subgroup

    With Q = e^{2πiz/6}, η(z)⁴ = Q·∏(1 − Q^{6n})⁴, so only a_{6k+1} are nonzero.
    """

    builtin = FormName.ETA4_CUSPFORM

    def __init__(self, group: ModularGroupSpec | None = None):
        group = group or builtin_group(GroupName.COMMUTATOR)
        if group.name != GroupName.COMMUTATOR.value:
            raise FormException(f"{FormName.ETA4_CUSPFORM} lives on {GroupName.COMMUTATOR}, not {group.name}")
        p = eta4_coefficients((Q_TRUNCATION - 1) // 6)
        coefficients = [0] * Q_TRUNCATION
        for k, pk in enumerate(p):
            coefficients[6 * k] = pk
        super().__init__(
            FormName.ETA4_CUSPFORM.value,
            FormKind.CUSP,
            group,
            [CuspExpansion(0.0, tuple(complex(c) for c in coefficients))],
        )


def _parse_coefficients(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(part.strip().replace(" ", "")) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise ConfigException(f"bad coefficient list {text!r}") from e


def form_from_config(name: str, block: Mapping[str, str], group: ModularGroupSpec) -> QExpansionForm:
    """Build a form from a `[form.NAME]` block

    Keys: `kind` (singular | cusp), `group`, and per cusp label `residue.LABEL`, `coefficients.LABEL`.

    Raises:
        ConfigException: 缺少键或键值无效
        FormException: 留数表不满足约束
    """
    try:
        kind = FormKind(block.get("kind", "").strip().lower())
    except ValueError as e:
        raise ConfigException(f"form {name}: kind must be singular or cusp") from e
    known = {"kind", "group"}
    expansions = []
    for chart in group.cusps:
        rkey, ckey = f"residue.{chart.label}", f"coefficients.{chart.label}"
        known |= {rkey, ckey}
        try:
            residue = float(block.get(rkey, "0"))
        except ValueError as e:
            raise ConfigException(f"form {name}: bad {rkey}") from e
        expansions.append(CuspExpansion(residue, _parse_coefficients(block.get(ckey, ""))))
    unknown = sorted(set(block) - known)
    if unknown:
        raise ConfigException(f"form {name}: unknown keys {', '.join(unknown)}")
    return QExpansionForm(name, kind, group, expansions)


def form_to_config(form: QExpansionForm) -> dict[str, str]:
    block = {"kind": form.kind.value, "group": form.group.name}
    for chart, e in zip(form.group.cusps, form.expansions):
        block[f"residue.{chart.label}"] = repr(e.residue)
        block[f"coefficients.{chart.label}"] = ", ".join(
            repr(c.real) if c.imag == 0 else repr(c) for c in e.coefficients
        )
    return block
