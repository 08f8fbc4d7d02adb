"""样本与报告的序列化"""

from collections.abc import Iterable, Sequence
import csv
import math
from pathlib import Path
from typing import Any

import msgspec
from msgspec import Struct, field

from . import __version__
from .constants import CSV_FLOAT, FormKind


def fmt(value: float) -> str:
    return format(value, CSV_FLOAT)


def normalize_winding(kind: FormKind, value: float, t: float) -> float:
    """M/t for forms with residues (and ω₀), M/√t for cusp forms"""
    if t <= 0.0:
        return 0.0
    return value / math.sqrt(t) if kind is FormKind.CUSP else value / t


class ExcursionRecord(Struct, frozen=True):
    cusp: int
    """尖点编号 ℓ"""
    level: float
    """出口高度 r"""
    tau: float
    """进入 {ỹ ≥ r + √r} 的时刻"""
    sigma: float
    """离开 {ỹ ≥ r} 的时刻"""
    phi: float
    """x̃ 在 [τ, σ] 上的增量"""

    @property
    def duration(self) -> float:
        return self.sigma - self.tau


class WindingSample(Struct):
    """一条轨道在各检查点的缠绕积分"""

    seed: int
    path_id: int
    forms: list[str]
    kinds: list[FormKind]
    checkpoint_times: list[float]
    raw: list[list[float]]
    """raw[i][j]: 第 j 个形式到第 i 个检查点的积分 (中点路线, Brownian 时即 Itô 和)"""
    primitive: list[list[float]]
    """原函数路线"""
    theta: list[float] = field(default_factory=list)
    """各检查点的 ∫dθ; 测地线为未约化提升的闭式值"""
    excursion_count: int = 0
    k: float | None = None
    eps: int | None = None

    def normalized(self, i: int) -> list[float]:
        t = self.checkpoint_times[i]
        return [normalize_winding(kind, v, t) for kind, v in zip(self.kinds, self.raw[i])]

    def increments(self, i: int, j: int) -> list[float]:
        """Raw winding increments between checkpoints i < j"""
        return [b - a for a, b in zip(self.raw[i], self.raw[j])]

    @staticmethod
    def csv_header(forms: Sequence[str], geodesic: bool = False) -> list[str]:
        header = ["seed", "path_id", "checkpoint_time"]
        for name in forms:
            header += [name, f"{name}_raw", f"{name}_primitive"]
        header += ["theta_winding", "excursion_count"]
        if geodesic:
            header += ["k", "eps"]
        return header

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for i, t in enumerate(self.checkpoint_times):
            row = [str(self.seed), str(self.path_id), fmt(t)]
            for norm, raw, prim in zip(self.normalized(i), self.raw[i], self.primitive[i]):
                row += [fmt(norm), fmt(raw), fmt(prim)]
            row += [fmt(self.theta[i] if self.theta else 0.0), str(self.excursion_count)]
            if self.k is not None:
                row += [fmt(self.k), str(self.eps)]
            rows.append(row)
        return rows


class CheckReport(Struct):
    """单项验收检查"""

    test_name: str
    n: int
    statistic: float
    threshold: float
    passed: bool = field(name="pass")
    measured: float | None = None
    """拟合或测得的常数"""
    target: float | None = None
    """理论预测"""
    parameters: dict[str, Any] = field(default_factory=dict)
    table: list[dict[str, float]] = field(default_factory=list)
    """逐点表"""


class ExperimentReport(Struct):
    mode: str
    config: dict[str, Any]
    tests: list[CheckReport]
    version: str = __version__

    @property
    def all_passed(self) -> bool:
        return all(t.passed for t in self.tests)


def write_samples_csv(path: Path, samples: Iterable[WindingSample], forms: Sequence[str], geodesic: bool = False):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(WindingSample.csv_header(forms, geodesic))
        for s in samples:
            writer.writerows(s.csv_rows())


def write_table_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float | int | str]]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else str(v) for v in row])


def write_report_json(path: Path, report: ExperimentReport):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(msgspec.json.format(msgspec.json.encode(report), indent=2))


def read_report_json(path: Path) -> ExperimentReport:
    return msgspec.json.decode(path.read_bytes(), type=ExperimentReport)
