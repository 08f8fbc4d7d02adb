from collections.abc import Mapping
from configparser import ConfigParser, Error as IniError
import os
from pathlib import Path
from typing import Any, get_origin

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from .constants import SEED_ENV, Mode
from .exception import ConfigException, FormException, LabException
from .forms import HarmonicFormSpec, builtin_form, form_from_config
from .modular_group import ModularGroupSpec, get_group, group_from_config, register_group


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("*", mode="before")
    @classmethod
    def _split_lists(cls, value: Any, info: ValidationInfo) -> Any:
        field = cls.model_fields[info.field_name or ""]
        if isinstance(value, str) and get_origin(field.annotation) is list:
            return [item.strip() for item in value.split(",") if item.strip()]
        return value


class ExperimentSection(_Section):
    group: str = "GAMMA1"
    """模群名称, 内置或 [group.NAME] 定义"""
    a: float = 1.0
    """度量参数"""
    forms: list[str] = ["OMEGA0"]
    """调和形式列表"""
    mode: Mode = Mode.BROWNIAN
    seed: int = Field(default=0, ge=0)
    """主种子"""
    threads: int = Field(default=1, ge=1)
    """工作进程数"""
    chunk_size: int = Field(default=256, ge=1)
    """每块路径数"""
    checkpoints: list[float] = [1.0]
    """检查点, 以 horizon 的比例给出"""
    out: Path = Path("results")
    """输出目录"""
    log_level: str = "INFO"


class BrownianSection(_Section):
    horizon: float = Field(default=400.0, gt=0.0)
    dt: float = Field(default=1e-3, gt=0.0)
    """基础步长"""
    n_paths: int = Field(default=4000, ge=1)
    reduction_period: int = Field(default=64, ge=1)
    cusp_scale: float = Field(default=5.0, gt=0.0)
    """尖点附近按 (cusp_scale/y)² 缩小步长"""


class GeodesicSection(_Section):
    k: float = Field(default=0.0, gt=-1.0, lt=1.0)
    """叶参数"""
    eps: int = 1
    horizon: float = Field(default=300.0, gt=0.0)
    n_paths: int = Field(default=3000, ge=1)
    ds: float = Field(default=0.05, gt=0.0)
    """基础弧长步长"""
    cusp_step: float = Field(default=0.2, gt=0.0)

    @field_validator("eps")
    @classmethod
    def _check_eps(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("eps must be 1 or -1")
        return value


class ExcursionsSection(_Section):
    levels: list[float] = [4.0, 9.0]
    """游程层级 r"""
    cusp: str | None = None
    """尖点标签, 默认第一个尖点"""


class SpheresSection(_Section):
    radii: list[float] = [8.0, 12.0]
    thresholds: list[float] = [0.12, 0.05]
    """与 radii 一一对应的差异阈值"""
    n: int = Field(default=20000, ge=1)
    """每个球面的方向数"""
    n_theta: int = Field(default=4, ge=1)
    center_x: float = 0.0
    center_y: float = Field(default=1.0, gt=0.0)
    center_theta: float = 0.0
    leaf_k: float | None = None
    """设置时额外比较叶 L(k, ε) 上的拟球面"""
    leaf_eps: int = 1
    n_reference: int = Field(default=20000, ge=1)


class HittingSection(_Section):
    level: float = Field(default=50.0, ge=10.0)
    dt: float = Field(default=0.01, gt=0.0)
    n_paths: int = Field(default=2000, ge=1)


class TolerancesSection(_Section):
    cauchy: float = 0.08
    """快缠绕的 ECF sup 距离"""
    gaussian: float = 0.06
    """慢缠绕的 ECF sup 距离"""
    variance: float = 0.10
    """慢缠绕方差与 Petersson 范数的相对误差"""
    independence: float = 0.08
    geodesic: float = 0.10
    shift: float = 0.05
    """测地线中位数漂移的绝对误差"""
    excursion_phi: float = 0.06
    duration: float = 0.05
    rate: float = 0.15
    occupation: float = 0.10
    hitting_ratio: float = 0.03
    hitting_ecf: float = 0.05


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentSection = ExperimentSection()
    brownian: BrownianSection = BrownianSection()
    geodesic: GeodesicSection = GeodesicSection()
    excursions: ExcursionsSection = ExcursionsSection()
    spheres: SpheresSection = SpheresSection()
    hitting: HittingSection = HittingSection()
    tolerances: TolerancesSection = TolerancesSection()
    groups: dict[str, dict[str, str]] = {}
    """[group.NAME] 块"""
    form_blocks: dict[str, dict[str, str]] = {}
    """[form.NAME] 块"""
    source: Path | None = None

    @property
    def mode(self) -> Mode:
        return self.experiment.mode

    @property
    def seed(self) -> int:
        return self.experiment.seed

    @property
    def out_dir(self) -> Path:
        return self.experiment.out

    def with_overrides(
        self,
        seed: int | None = None,
        out: Path | None = None,
        threads: int | None = None,
        mode: Mode | None = None,
    ) -> "ExperimentConfig":
        """Apply command-line overrides; the WINDING_LAB_SEED environment variable wins over the seed flag"""
        updates: dict[str, Any] = {} if mode is None else {"mode": mode}
        if seed is not None:
            updates["seed"] = seed
        if env := os.environ.get(SEED_ENV):
            try:
                updates["seed"] = int(env)
            except ValueError as e:
                raise ConfigException(f"{SEED_ENV} must be an integer, got {env!r}") from e
        if out is not None:
            updates["out"] = out
        if threads is not None:
            updates["threads"] = threads
        if not updates:
            return self
        return self.model_copy(update={"experiment": self.experiment.model_copy(update=updates)})

    def resolve_group(self) -> ModularGroupSpec:
        """The experiment group; [group.NAME] blocks are registered first"""
        for name, block in self.groups.items():
            register_group(group_from_config(name, block))
        return get_group(self.experiment.group)

    def resolve_forms(self, group: ModularGroupSpec) -> list[HarmonicFormSpec]:
        forms = []
        for name in self.experiment.forms:
            block = self.form_blocks.get(name)
            if block is not None:
                owner = block.get("group", group.name).strip().upper()
                if owner != group.name:
                    raise FormException(f"form {name} is defined on {owner}, experiment group is {group.name}")
                form = form_from_config(name, block, group)
            else:
                form = builtin_form(name, group)
            form.validate()
            forms.append(form)
        return forms

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude={"source"})


DEFAULT_CONFIG = ExperimentConfig()

_SECTIONS = ("experiment", "brownian", "geodesic", "excursions", "spheres", "hitting", "tolerances")


def _read_ini(path: Path) -> ConfigParser:
    if not path.is_file():
        raise ConfigException(f"config file not found: {path}")
    parser = ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment]
    try:
        parser.read(path, encoding="utf-8")
    except IniError as e:
        raise ConfigException(f"{path}: {e}") from e
    return parser


def _split(parser: ConfigParser) -> tuple[dict[str, Any], list[str]]:
    raw: dict[str, Any] = {"groups": {}, "form_blocks": {}}
    unknown = []
    for section in parser.sections():
        block = dict(parser.items(section))
        if section in _SECTIONS:
            raw[section] = block
        elif section.startswith("group."):
            raw["groups"][section.removeprefix("group.")] = block
        elif section.startswith("form."):
            raw["form_blocks"][section.removeprefix("form.")] = block
        else:
            unknown.append(section)
    return raw, unknown


def _format_errors(path: Path, err: ValidationError) -> list[str]:
    return [f"{path}: {'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in err.errors()]


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate an INI experiment file

    Raises:
        ConfigException: 文件缺失, 解析失败或字段无效, 消息中包含路径
    """
    path = Path(path)
    raw, unknown = _split(_read_ini(path))
    if unknown:
        raise ConfigException(f"{path}: unknown section [{unknown[0]}]")
    try:
        cfg = ExperimentConfig.model_validate(raw | {"source": path})
    except ValidationError as e:
        raise ConfigException("; ".join(_format_errors(path, e))) from e
    problems = semantic_problems(cfg)
    if problems:
        raise ConfigException(f"{path}: {problems[0]}")
    logger.debug(f"loaded {path}: mode={cfg.mode}, group={cfg.experiment.group}, forms={cfg.experiment.forms}")
    return cfg


def semantic_problems(cfg: ExperimentConfig) -> list[str]:
    """Checks that need the groups and forms built"""
    problems = []
    needs_metric = cfg.mode is Mode.GEODESIC or (cfg.mode is Mode.SPHERES and cfg.spheres.leaf_k is not None)
    if cfg.experiment.a == 0.0 and needs_metric:
        problems.append(f"a = 0 is only allowed for brownian runs, mode is {cfg.mode}")
    if len(cfg.spheres.radii) != len(cfg.spheres.thresholds):
        problems.append("spheres.radii and spheres.thresholds differ in length")
    if any(not 0.0 < f <= 1.0 for f in cfg.experiment.checkpoints):
        problems.append("checkpoints must lie in (0, 1]")
    try:
        group = cfg.resolve_group()
        cfg.resolve_forms(group)
    except LabException as e:
        problems.append(e.message)
        return problems
    if cfg.excursions.cusp is not None and cfg.excursions.cusp not in [c.label for c in group.cusps]:
        problems.append(f"{group.name} has no cusp {cfg.excursions.cusp}")
    return problems


def _defaulted(raw: Mapping[str, Any]) -> list[str]:
    out = []
    for name in _SECTIONS:
        model = ExperimentConfig.model_fields[name].annotation
        given = raw.get(name, {})
        for key in model.model_fields:  # type: ignore[union-attr]
            if key not in given:
                out.append(f"{name}.{key}")
    return out


def validate_config(path: str | Path) -> tuple[list[str], list[str]]:
    """Schema and consistency check without running anything

    Returns:
        (errors, defaulted): 诊断信息与使用默认值的字段
    """
    path = Path(path)
    try:
        parser = _read_ini(path)
    except ConfigException as e:
        return [e.message], []
    raw, unknown = _split(parser)
    errors = [f"{path}: unknown section [{name}]" for name in unknown]
    defaulted = _defaulted(raw)
    for key in defaulted:
        logger.warning(f"{path}: {key} not set, using the default")
    try:
        cfg = ExperimentConfig.model_validate(raw | {"source": path})
    except ValidationError as e:
        return errors + _format_errors(path, e), defaulted
    errors += [f"{path}: {p}" for p in semantic_problems(cfg)]
    return errors, defaulted

