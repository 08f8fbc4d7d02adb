"""模群数据、Γ(1) 基本域约化与陪集追踪

A point of Γ\\G is stored as a Γ(1)-reduced point together with a coset label. The label is the class WΓ of the deck
word W that carried the true point to the reduced one (z_reduced = W·z_true); label 0 is the class of the identity.
A reduction step by A ∈ Γ(1) acts on labels on the left, c ↦ A·c.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import math
import re

import numpy as np
from numpy.typing import NDArray

from .constants import MAX_REDUCTION_STEPS, SQRT3_2, GroupName
from .exception import ConfigException, ReductionException, UnknownGroupException
from .hyperbolic_core import S, MoebiusElement, busemann, identity


@dataclass(frozen=True, slots=True)
class CuspChart:
    """尖点坐标卡"""

    label: str
    """尖点名称"""
    width: int
    """宽度 h_ℓ"""
    chart: MoebiusElement
    """g_ℓ ∈ Γ(1), 把尖点送到 ∞"""

    def chart_ints(self) -> tuple[int, int, int, int]:
        g = self.chart
        return round(g.a), round(g.b), round(g.c), round(g.d)


def _perm_power(perm: Sequence[int], m: int) -> list[int]:
    size = len(perm)
    out = list(range(size))
    base = list(perm)
    if m < 0:
        inv = [0] * size
        for i, j in enumerate(base):
            inv[j] = i
        base, m = inv, -m
    while m:
        if m & 1:
            out = [base[i] for i in out]
        base = [base[i] for i in base]
        m >>= 1
    return out


def _orbits(perm: Sequence[int]) -> list[list[int]]:
    seen: set[int] = set()
    orbits = []
    for start in range(len(perm)):
        if start in seen:
            continue
        orbit = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            orbit.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        orbits.append(orbit)
    return orbits


@dataclass(frozen=True)
class ModularGroupSpec:
    """有限指数子群 Γ < Γ(1) 的数据"""

    name: str
    index: int
    """[Γ(1) : Γ]"""
    nu2: int
    nu3: int
    cusps: tuple[CuspChart, ...]
    t_perm: tuple[int, ...]
    """陪集上 t: z ↦ z + 1 的左作用"""
    u_perm: tuple[int, ...]
    """陪集上 u: z ↦ −1/z 的左作用"""
    _chart_labels: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        idx = self.index
        for name, perm in (("t", self.t_perm), ("u", self.u_perm)):
            if sorted(perm) != list(range(idx)):
                raise ConfigException(f"group {self.name}: {name} is not a permutation of {idx} cosets")
        if _perm_power(self.u_perm, 2) != list(range(idx)):
            raise ConfigException(f"group {self.name}: u² is not the identity")
        ut = [self.u_perm[self.t_perm[c]] for c in range(idx)]
        if _perm_power(ut, 3) != list(range(idx)):
            raise ConfigException(f"group {self.name}: (u·t)³ is not the identity")
        if sum(c.width for c in self.cusps) != idx:
            raise ConfigException(f"group {self.name}: cusp widths do not sum to the index {idx}")
        g = self.genus_exact
        if g.denominator != 1 or g < 0:
            raise ConfigException(f"group {self.name}: genus formula gives {g}")
        labels = tuple(self.classify(c.chart) for c in self.cusps)
        object.__setattr__(self, "_chart_labels", labels)
        orbit_of = self.t_orbit_index
        if len({orbit_of[lab] for lab in labels}) != len(labels):
            raise ConfigException(f"group {self.name}: two cusp charts lie in the same t-orbit")
        sizes = {orbit_of[o[0]]: len(o) for o in self.t_orbits}
        for chart, lab in zip(self.cusps, labels):
            if sizes[orbit_of[lab]] != chart.width:
                raise ConfigException(f"group {self.name}: width of cusp {chart.label} disagrees with its t-orbit")
        if len(self.t_orbits) != len(self.cusps):
            raise ConfigException(f"group {self.name}: {len(self.t_orbits)} t-orbits but {len(self.cusps)} cusps")

    @property
    def nu_inf(self) -> int:
        return len(self.cusps)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(c.width for c in self.cusps)

    @property
    def genus_exact(self) -> Fraction:
        return 1 + Fraction(self.index, 12) - Fraction(self.nu2, 4) - Fraction(self.nu3, 3) - Fraction(self.nu_inf, 2)

    @property
    def genus(self) -> int:
        return int(self.genus_exact)

    @property
    def covolume(self) -> float:
        return covolume(self)

    @property
    def first_betti_number(self) -> int:
        """dim H¹(Γ\\G) = 2g + ν∞"""
        return 2 * self.genus + self.nu_inf

    @cached_property
    def t_orbits(self) -> list[list[int]]:
        return _orbits(self.t_perm)

    @cached_property
    def t_orbit_index(self) -> dict[int, int]:
        return {c: i for i, orbit in enumerate(self.t_orbits) for c in orbit}

    @cached_property
    def t_order(self) -> int:
        return math.lcm(*(len(o) for o in self.t_orbits))

    @cached_property
    def tpow(self) -> NDArray[np.int64]:
        """tpow[m, c] = t^m·c, for 0 ≤ m < t_order"""
        return np.array([_perm_power(self.t_perm, m) for m in range(self.t_order)], dtype=np.int64)

    @cached_property
    def u_array(self) -> NDArray[np.int64]:
        return np.array(self.u_perm, dtype=np.int64)

    @cached_property
    def sheet_table(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """For each coset c, the cusp ℓ and shift m with c = t^{−m}·(g_ℓ·0), 0 ≤ m < h_ℓ"""
        cusp = np.full(self.index, -1, dtype=np.int64)
        shift = np.zeros(self.index, dtype=np.int64)
        for ell, (chart, lab) in enumerate(zip(self.cusps, self._chart_labels)):
            for m in range(chart.width):
                c = _perm_power(self.t_perm, -m)[lab]
                cusp[c] = ell
                shift[c] = m
        return cusp, shift

    def cusp_index(self, label: str) -> int:
        for i, c in enumerate(self.cusps):
            if c.label == label:
                return i
        raise ConfigException(f"group {self.name} has no cusp {label}")

    def cusp_orbit(self, ell: int) -> list[int]:
        return self.t_orbits[self.t_orbit_index[self._chart_labels[ell]]]

    def chart_for_coset(self, coset: int) -> tuple[int, int]:
        cusp, shift = self.sheet_table
        return int(cusp[coset]), int(shift[coset])

    def apply_t(self, coset: int, m: int = 1) -> int:
        return int(self.tpow[m % self.t_order, coset])

    def apply_u(self, coset: int) -> int:
        return self.u_perm[coset]

    def classify(self, g: MoebiusElement, coset: int = 0) -> int:
        """Label of g·coset for an integer matrix g ∈ Γ(1)"""
        a, b, c, d = (round(v) for v in (g.a, g.b, g.c, g.d))
        if a * d - b * c != 1:
            raise ConfigException(f"{g} is not an integer unimodular matrix")
        ops: list[int | None] = []  # int: T^{-q} applied on the left, None: S applied on the left
        while c != 0:
            q = a // c
            a, b = a - q * c, b - q * d
            ops.append(q)
            a, b, c, d = -c, -d, a, b
            ops.append(None)
        lab = self.apply_t(coset, b * d)  # ±T^{b/d} with d = ±1
        for op in reversed(ops):
            lab = self.apply_u(lab) if op is None else self.apply_t(lab, op)
        return lab


def classify_word(spec: ModularGroupSpec, g: MoebiusElement) -> int:
    """Coset label of an integer matrix g ∈ Γ(1), by its S/T decomposition

    Raises:
        ConfigException: g 不是整数幺模矩阵
    """
    return spec.classify(g)


def covolume(spec: ModularGroupSpec) -> float:
    """V(Γ\\H²) = 2π[2g − 2 + ν∞ + ν₂/2 + 2ν₃/3]"""
    return 2.0 * math.pi * (2 * spec.genus - 2 + spec.nu_inf + spec.nu2 / 2 + 2 * spec.nu3 / 3)


def _gamma1() -> ModularGroupSpec:
    return ModularGroupSpec(
        name=GroupName.GAMMA1.value,
        index=1,
        nu2=1,
        nu3=1,
        cusps=(CuspChart("inf", 1, identity()),),
        t_perm=(0,),
        u_perm=(0,),
    )


def _commutator() -> ModularGroupSpec:
    # abelianization Γ(1) → ℤ/6: t ↦ 1, u ↦ 3
    return ModularGroupSpec(
        name=GroupName.COMMUTATOR.value,
        index=6,
        nu2=0,
        nu3=0,
        cusps=(CuspChart("inf", 6, identity()),),
        t_perm=tuple((c + 1) % 6 for c in range(6)),
        u_perm=tuple((c + 3) % 6 for c in range(6)),
    )


def _gamma2() -> ModularGroupSpec:
    # cosets of Γ(2) are the elements of SL₂(F₂)
    def mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
        return (
            (p[0] * q[0] + p[1] * q[2]) % 2,
            (p[0] * q[1] + p[1] * q[3]) % 2,
            (p[2] * q[0] + p[3] * q[2]) % 2,
            (p[2] * q[1] + p[3] * q[3]) % 2,
        )

    one, t, u = (1, 0, 0, 1), (1, 1, 0, 1), (0, 1, 1, 0)
    elements = [one, t, u, mul(t, u), mul(u, t), mul(t, mul(u, t))]
    pos = {e: i for i, e in enumerate(elements)}
    return ModularGroupSpec(
        name=GroupName.GAMMA2.value,
        index=6,
        nu2=0,
        nu3=0,
        cusps=(
            CuspChart("inf", 2, identity()),
            CuspChart("zero", 2, S),
            CuspChart("one", 2, MoebiusElement(0.0, -1.0, 1.0, -1.0)),
        ),
        t_perm=tuple(pos[mul(t, e)] for e in elements),
        u_perm=tuple(pos[mul(u, e)] for e in elements),
    )


_BUILTINS = {
    GroupName.GAMMA1.value: _gamma1,
    GroupName.COMMUTATOR.value: _commutator,
    GroupName.GAMMA2.value: _gamma2,
}

_REGISTRY: dict[str, ModularGroupSpec] = {}


def builtin_group(name: str | GroupName) -> ModularGroupSpec:
    """内置模群 GAMMA1 / COMMUTATOR / GAMMA2

    Raises:
        UnknownGroupException: 未知名称
    """
    key = str(name).upper()
    if key in _REGISTRY:
        return _REGISTRY[key]
    if key not in _BUILTINS:
        raise UnknownGroupException(str(name))
    spec = _BUILTINS[key]()
    _REGISTRY[key] = spec
    return spec


def get_group(name: str) -> ModularGroupSpec:
    """Built-in or previously registered group"""
    return builtin_group(name)


def register_group(spec: ModularGroupSpec) -> None:
    _REGISTRY[spec.name.upper()] = spec


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, size: int) -> tuple[int, ...]:
    """'(0 1 2)(3 4)' → permutation tuple"""
    perm = list(range(size))
    if _CYCLE.sub("", text).strip():
        raise ConfigException(f"malformed cycle list: {text!r}")
    for body in _CYCLE.findall(text):
        items = [int(s) for s in body.replace(",", " ").split()]
        for i, c in enumerate(items):
            if not 0 <= c < size:
                raise ConfigException(f"coset {c} out of range in {text!r}")
            perm[c] = items[(i + 1) % len(items)]
    return tuple(perm)


def format_cycles(perm: Sequence[int]) -> str:
    cycles = [o for o in _orbits(perm) if len(o) > 1]
    return "".join("(" + " ".join(map(str, o)) + ")" for o in cycles) or "()"


def group_from_config(name: str, block: Mapping[str, str]) -> ModularGroupSpec:
    """Build a group from a `[group.NAME]` key-value block

    Keys: index, nu2, nu3, t, u (cycle lists), cusps (comma separated labels),
    cusp.LABEL.width and cusp.LABEL.chart (four integers a b c d).
    """
    try:
        index = int(block["index"])
        cusps = []
        for label in (s.strip() for s in block["cusps"].split(",")):
            entries = [float(v) for v in block[f"cusp.{label}.chart"].split()]
            if len(entries) != 4:
                raise ConfigException(f"cusp {label}: chart needs four integers")
            cusps.append(CuspChart(label, int(block[f"cusp.{label}.width"]), MoebiusElement(*entries)))
        return ModularGroupSpec(
            name=name.upper(),
            index=index,
            nu2=int(block.get("nu2", "0")),
            nu3=int(block.get("nu3", "0")),
            cusps=tuple(cusps),
            t_perm=parse_cycles(block["t"], index),
            u_perm=parse_cycles(block["u"], index),
        )
    except KeyError as e:
        raise ConfigException(f"group {name}: missing key {e.args[0]}") from e
    except ValueError as e:
        raise ConfigException(f"group {name}: {e}") from e


def group_to_config(spec: ModularGroupSpec) -> dict[str, str]:
    block = {
        "index": str(spec.index),
        "nu2": str(spec.nu2),
        "nu3": str(spec.nu3),
        "t": format_cycles(spec.t_perm),
        "u": format_cycles(spec.u_perm),
        "cusps": ", ".join(c.label for c in spec.cusps),
    }
    for c in spec.cusps:
        block[f"cusp.{c.label}.width"] = str(c.width)
        block[f"cusp.{c.label}.chart"] = " ".join(str(v) for v in c.chart_ints())
    return block


def reduce_gamma1_array(
    z: NDArray[np.complex128],
    coset: NDArray[np.int64] | None = None,
    spec: ModularGroupSpec | None = None,
) -> tuple[NDArray[np.complex128], NDArray[np.float64], NDArray[np.int64] | None]:
    """Vectorized reduction into |Re z| ≤ 1/2, |z| ≥ 1

    Returns the reduced points, the reducing matrices A (shape (n, 2, 2), A·z = z_reduced) and, when a spec and
    cosets are given, the updated cosets A·c.

    Raises:
        ReductionException: 超过最大步数
    """
    z = np.array(z, dtype=np.complex128, copy=True).reshape(-1)
    mats = np.zeros((z.size, 2, 2))
    mats[:, 0, 0] = mats[:, 1, 1] = 1.0
    cos = None if coset is None else np.array(coset, dtype=np.int64, copy=True).reshape(-1)
    for _ in range(MAX_REDUCTION_STEPS):
        shift = np.floor(z.real + 0.5)
        moved = shift != 0.0
        if moved.any():
            z = z - shift
            mats[:, 0, :] -= shift[:, None] * mats[:, 1, :]
            if cos is not None and spec is not None:
                m = np.mod(-shift[moved].astype(np.int64), spec.t_order)
                cos[moved] = spec.tpow[m, cos[moved]]
        r2 = z.real * z.real + z.imag * z.imag
        flip = (r2 < 1.0) | ((r2 == 1.0) & (z.real > 0.0))
        if not flip.any():
            return z, mats, cos
        z[flip] = -1.0 / z[flip]
        top = mats[flip, 0, :].copy()
        mats[flip, 0, :] = -mats[flip, 1, :]
        mats[flip, 1, :] = top
        if cos is not None and spec is not None:
            cos[flip] = spec.u_array[cos[flip]]
    bad = z[0] if z.size else complex("nan")
    raise ReductionException(complex(bad))


def reduce_gamma1(z: complex) -> tuple[complex, MoebiusElement]:
    """Γ(1) 约化: 返回 (z_reduced, word), word·z = z_reduced"""
    if not (math.isfinite(z.real) and math.isfinite(z.imag)) or z.imag <= 0.0:
        raise ReductionException(z)
    zr, mats, _ = reduce_gamma1_array(np.array([z]))
    return complex(zr[0]), MoebiusElement.from_array(mats[0])


def coset_reduce(spec: ModularGroupSpec, z: complex, coset: int) -> tuple[complex, MoebiusElement, int]:
    """Γ(1)-reduction that carries the coset label along"""
    if not 0 <= coset < spec.index:
        raise ConfigException(f"coset {coset} out of range for {spec.name}")
    zr, mats, cos = reduce_gamma1_array(np.array([z]), np.array([coset]), spec)
    assert cos is not None
    return complex(zr[0]), MoebiusElement.from_array(mats[0]), int(cos[0])


def _neighbour_words() -> list[MoebiusElement]:
    words = []
    for c in range(1, 4):
        for d in range(-3, 4):
            if math.gcd(c, d) != 1:
                continue
            # a·d − b·c = 1
            a_, b_ = _bezout(c, d)
            words.append(MoebiusElement(float(a_), float(b_), float(c), float(d)))
    return words


def _bezout(c: int, d: int) -> tuple[int, int]:
    """a, b with a·d − b·c = 1"""
    for a_ in range(-abs(c) - 1, abs(c) + 2):
        if (a_ * d - 1) % c == 0:
            return a_, (a_ * d - 1) // c
    raise ValueError((c, d))


_NEIGHBOURS = _neighbour_words()


def cusp_height(spec: ModularGroupSpec, ell: int | str, z: complex, coset: int = 0) -> float:
    """ỹ_ℓ: 尖点 ℓ 坐标卡中的高度, 在 Γ 作用下不变"""
    if isinstance(ell, str):
        ell = spec.cusp_index(ell)
    zr, _, c = coset_reduce(spec, z, coset)
    orbit = spec.cusp_orbit(ell)
    if c in orbit:
        return zr.imag
    best = 0.0
    for b in _NEIGHBOURS:
        if spec.classify(b, c) in orbit:
            # Im(b·z): Busemann ratio at the cusp b⁻¹(∞) against b⁻¹(i), which has height 1
            best = max(best, busemann(-b.d / b.c, b.inverse().apply(1j), zr))
    return best


def sample_fundamental_domain(rng: np.random.Generator, size: int) -> NDArray[np.complex128]:
    """Draws from dx·dy/y² on {|x| ≤ 1/2, |z| ≥ 1}"""
    out = np.empty(size, dtype=np.complex128)
    upper = rng.random(size) < 3.0 / math.pi
    nu = int(upper.sum())
    out[upper] = rng.uniform(-0.5, 0.5, nu) + 1j / (1.0 - rng.random(nu))
    todo = np.flatnonzero(~upper)
    span = 1.0 / SQRT3_2 - 1.0
    while todo.size:
        x = rng.uniform(-0.5, 0.5, todo.size)
        y = 1.0 / (1.0 + rng.random(todo.size) * span)
        ok = x * x + y * y >= 1.0
        out[todo[ok]] = x[ok] + 1j * y[ok]
        todo = todo[~ok]
    return out
