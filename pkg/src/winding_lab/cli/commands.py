from abc import ABC
from argparse import ArgumentParser, Namespace
import math
from pathlib import Path
import sys
from typing import ClassVar

from loguru import logger

from ..config import load_config, validate_config
from ..constants import Mode
from ..modular_group import get_group
from .base import BaseCommand, ConfigCommand
from .experiments import run


class ExperimentCommand(ConfigCommand, ABC):
    mode: ClassVar[Mode]

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.name = cls.mode.value
        cls.help = f"run the {cls.mode.value} experiment"

    def execute(self, args: Namespace) -> int:
        return run(self.load(args, self.mode))


class BrownianCommand(ExperimentCommand):
    mode = Mode.BROWNIAN


class GeodesicCommand(ExperimentCommand):
    mode = Mode.GEODESIC


class ExcursionsCommand(ExperimentCommand):
    mode = Mode.EXCURSIONS


class SpheresCommand(ExperimentCommand):
    mode = Mode.SPHERES


class HittingTimeCommand(ExperimentCommand):
    mode = Mode.HITTING_TIME


def print_group_info(name: str) -> str:
    """Index, elliptic points, cusps, genus, covolume and first Betti number as a text table

    Raises:
        UnknownGroupException: 未知模群
    """
    spec = get_group(name)
    widths = ", ".join(f"{c.label}:{w}" for c, w in zip(spec.cusps, spec.widths))
    rows = [
        ("group", spec.name),
        ("index", str(spec.index)),
        ("nu2", str(spec.nu2)),
        ("nu3", str(spec.nu3)),
        ("nu_inf", str(spec.nu_inf)),
        ("widths", widths),
        ("genus", str(spec.genus)),
        ("covolume", f"{spec.covolume:.17e}"),
        ("covolume/pi", f"{spec.covolume / math.pi:.6g}"),
        ("betti_1", str(spec.first_betti_number)),
    ]
    pad = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(pad)}  {v}" for k, v in rows)


class GroupInfoCommand(BaseCommand):
    name = "group-info"
    help = "print the invariants of a modular group"

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("group", help="GAMMA1, COMMUTATOR, GAMMA2 or a [group.NAME] from --config")
        parser.add_argument("--config", type=Path, default=None, help="INI file with extra group blocks")

    def execute(self, args: Namespace) -> int:
        if args.config is not None:
            load_config(args.config).resolve_group()
        sys.stdout.write(print_group_info(args.group) + "\n")
        return 0


class ValidateCommand(BaseCommand):
    name = "validate"
    help = "check a config file without running it"

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--config", type=Path, required=True, help="INI experiment file")

    def execute(self, args: Namespace) -> int:
        errors, defaulted = validate_config(args.config)
        for line in errors:
            sys.stdout.write(f"error: {line}\n")
        for key in defaulted:
            sys.stdout.write(f"default: {key}\n")
        if errors:
            return 2
        logger.success(f"{args.config}: valid, {len(defaulted)} fields defaulted")
        return 0
