"""子命令基类"""

from abc import ABC, abstractmethod
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import ClassVar

from ..config import ExperimentConfig, load_config, semantic_problems
from ..constants import Mode
from ..exception import ConfigException
from ..utils import configure_logging


class BaseCommand(ABC):
    """所有子命令的抽象基类

    子类必须实现：
    - name: 子命令名称
    - help: 帮助信息
    - execute: 执行子命令, 返回退出码
    """

    _registry: ClassVar[list[type["BaseCommand"]]] = []

    name: ClassVar[str]
    help: ClassVar[str]

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if ABC not in cls.__bases__:
            BaseCommand._registry.append(cls)

    @classmethod
    def get_all_subclass(cls) -> list[type["BaseCommand"]]:
        return cls._registry

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        """Subcommand-specific flags"""

    @abstractmethod
    def execute(self, args: Namespace) -> int:
        raise NotImplementedError


class ConfigCommand(BaseCommand, ABC):
    """Subcommands driven by a config file"""

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--config", type=Path, required=True, help="INI experiment file")
        parser.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
        parser.add_argument("--out", type=Path, default=None, help="output directory")
        parser.add_argument("--threads", type=int, default=None, help="worker processes")

    @staticmethod
    def load(args: Namespace, mode: Mode | None = None) -> ExperimentConfig:
        """Config with the command-line and environment overrides applied, the subcommand fixing the mode

        Raises:
            ConfigException: 配置文件无效
        """
        cfg = load_config(args.config).with_overrides(args.seed, args.out, args.threads, mode)
        if getattr(args, "log_level", None) is None:
            configure_logging(cfg.experiment.log_level)
        if problems := semantic_problems(cfg):
            raise ConfigException(f"{args.config}: {problems[0]}")
        return cfg
