"""实验编排: 模拟, 检验, 写出 CSV 与 JSON 报告"""

from collections.abc import Sequence
from dataclasses import dataclass, field
import math

from loguru import logger
import numpy as np

from ..brownian import StepConfig, batch_simulate
from ..config import ExperimentConfig
from ..constants import TWO_PI, FormKind, Mode
from ..forms import HarmonicFormSpec, petersson_norm_quadrature
from ..geodesic import GeodesicConfig, batch_geodesic_winding
from ..hyperbolic_core import IwasawaPoint
from ..modular_group import ModularGroupSpec
from ..report import CheckReport, ExperimentReport, WindingSample, write_report_json, write_samples_csv, write_table_csv
from ..stats import (
    CauchyTarget,
    ExcursionTolerances,
    GaussianTarget,
    cell_partition,
    default_q_grid,
    excursion_report,
    geodesic_factors,
    hitting_time_check,
    increment_independence,
    independence_test,
    law_test,
    occupation_report,
    quasi_sphere_equidistribution,
    relative_check,
    sphere_equidistribution,
    target_cf,
)


@dataclass(slots=True)
class RunResult:
    mode: Mode
    tests: list[CheckReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tests)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def marginal_target(
    group: ModularGroupSpec,
    form: HarmonicFormSpec,
    mode: Mode,
    k: float = 0.0,
    a: float = 1.0,
    norms: dict[str, float] | None = None,
) -> CauchyTarget | GaussianTarget:
    """One-form limit law: Cauchy for forms with residues or a dθ part, Gaussian for cusp forms"""
    if form.kind is FormKind.CUSP:
        cf = target_cf(group, [form], mode, [], [1.0], k, a, norms)
        return GaussianTarget(-2.0 * math.log(abs(cf)))
    cf = target_cf(group, [form], mode, [1.0], [], k, a)
    loc = geodesic_factors(k, a)[0] * form.c_theta if mode is Mode.GEODESIC else 0.0
    return CauchyTarget(-math.log(abs(cf)), loc)


def winding_checks(
    samples: Sequence[WindingSample],
    group: ModularGroupSpec,
    forms: Sequence[HarmonicFormSpec],
    cfg: ExperimentConfig,
) -> list[CheckReport]:
    """Marginal laws, slow-winding variances, fast/slow independence and two-time increments"""
    mode, tol = cfg.mode, cfg.tolerances
    k, a = (cfg.geodesic.k, cfg.experiment.a) if mode is Mode.GEODESIC else (0.0, cfg.experiment.a)
    norms = {f.name: petersson_norm_quadrature(f) for f in forms if f.kind is FormKind.CUSP}
    grid = default_q_grid()
    horizon = samples[0].checkpoint_times[-1]
    values = np.array([s.normalized(len(s.checkpoint_times) - 1) for s in samples])
    params = {"group": group.name, "a": a, "T": horizon, "mode": str(mode)}
    if mode is Mode.GEODESIC:
        params |= {"k": k, "eps": cfg.geodesic.eps}
    tests = []
    for j, form in enumerate(forms):
        x = values[:, j]
        target = marginal_target(group, form, mode, k, a, norms)
        if isinstance(target, GaussianTarget):
            law = law_test(x, target, grid, tol.gaussian)
            tests.append(law.to_report(f"{form.name}_gaussian", target=target.variance, parameters=params))
            var = float(np.var(x))
            tests.append(relative_check(f"{form.name}_variance", len(x), var, target.variance, tol.variance, params))
            continue
        threshold = tol.geodesic if mode is Mode.GEODESIC else tol.cauchy
        law = law_test(x, target, grid, threshold)
        tests.append(law.to_report(f"{form.name}_cauchy", target=target.beta, parameters=params))
        if target.loc != 0.0:
            median = float(np.median(x))
            gap = abs(median - target.loc)
            tests.append(
                CheckReport(
                    test_name=f"{form.name}_median_shift",
                    n=len(x),
                    statistic=gap,
                    threshold=tol.shift,
                    passed=gap <= tol.shift,
                    measured=median,
                    target=target.loc,
                    parameters=params,
                )
            )
    fast = [j for j, f in enumerate(forms) if f.kind is not FormKind.CUSP]
    slow = [j for j, f in enumerate(forms) if f.kind is FormKind.CUSP]
    if fast and slow:
        joint = independence_test(values[:, fast[0]], values[:, slow[0]], grid, grid, tol.independence)
        tests.append(joint.to_report(f"{forms[fast[0]].name}_{forms[slow[0]].name}_independence", parameters=params))
    if len(samples[0].checkpoint_times) >= 2 and fast:
        inc = increment_independence(samples, fast[0], grid, tol.independence)
        tests.append(inc.to_report(f"{forms[fast[0]].name}_increment_independence", parameters=params))
    return tests


def _finish(cfg: ExperimentConfig, result: RunResult) -> RunResult:
    report = ExperimentReport(mode=str(cfg.mode), config=cfg.to_dict(), tests=result.tests)
    path = cfg.out_dir / f"{cfg.mode}_report.json"
    write_report_json(path, report)
    failed = [t.test_name for t in result.tests if not t.passed]
    if failed:
        logger.warning(f"{len(failed)} of {len(result.tests)} checks failed: {', '.join(failed)}")
    else:
        logger.success(f"all {len(result.tests)} checks passed, report written to {path}")
    return result


def _step_config(cfg: ExperimentConfig) -> StepConfig:
    bm = cfg.brownian
    return StepConfig(
        dt_base=bm.dt,
        a=cfg.experiment.a,
        seed=cfg.experiment.seed,
        reduction_period=bm.reduction_period,
        cusp_scale=bm.cusp_scale,
    )


def run_brownian(cfg: ExperimentConfig) -> RunResult:
    group = cfg.resolve_group()
    forms = cfg.resolve_forms(group)
    exp, bm = cfg.experiment, cfg.brownian
    step = _step_config(cfg)
    merged = batch_simulate(step, group, forms, bm.horizon, bm.n_paths, exp.checkpoints, exp.threads, exp.chunk_size)
    write_samples_csv(cfg.out_dir / f"{cfg.mode}_samples.csv", merged.samples, [f.name for f in forms])
    return _finish(cfg, RunResult(cfg.mode, winding_checks(merged.samples, group, forms, cfg)))


def run_geodesic(cfg: ExperimentConfig) -> RunResult:
    group = cfg.resolve_group()
    forms = cfg.resolve_forms(group)
    exp, geo = cfg.experiment, cfg.geodesic
    gcfg = GeodesicConfig(a=exp.a, k=geo.k, eps=geo.eps, seed=exp.seed, ds_base=geo.ds, cusp_step=geo.cusp_step)
    samples = batch_geodesic_winding(
        gcfg, group, forms, geo.horizon, geo.n_paths, exp.checkpoints, threads=exp.threads, chunk_size=exp.chunk_size
    )
    write_samples_csv(cfg.out_dir / f"{cfg.mode}_samples.csv", samples, [f.name for f in forms], geodesic=True)
    return _finish(cfg, RunResult(cfg.mode, winding_checks(samples, group, forms, cfg)))


def run_excursions(cfg: ExperimentConfig) -> RunResult:
    group = cfg.resolve_group()
    forms = cfg.resolve_forms(group)
    exp, bm, exc, tol = cfg.experiment, cfg.brownian, cfg.excursions, cfg.tolerances
    ell = 0 if exc.cusp is None else group.cusp_index(exc.cusp)
    step = _step_config(cfg)
    merged = batch_simulate(
        step, group, forms, bm.horizon, bm.n_paths, exp.checkpoints, exp.threads, exp.chunk_size, levels=exc.levels
    )
    write_samples_csv(cfg.out_dir / f"{cfg.mode}_samples.csv", merged.samples, [f.name for f in forms])
    write_table_csv(
        cfg.out_dir / f"{cfg.mode}_records.csv",
        ["cusp", "level", "tau", "sigma", "phi"],
        ([r.cusp, r.level, r.tau, r.sigma, r.phi] for r in merged.excursions),
    )
    tolerances = ExcursionTolerances(tol.excursion_phi, tol.duration, tol.rate, tol.occupation)
    tests: list[CheckReport] = []
    for i, r in enumerate(exc.levels):
        tests += excursion_report(merged.excursions, r, group, ell, merged.total_time, tolerances)
        occupied = float(merged.occupation[i, ell])
        tests.append(occupation_report(occupied, merged.total_time, r, group, ell, tol.occupation))
    return _finish(cfg, RunResult(cfg.mode, tests))


def run_spheres(cfg: ExperimentConfig) -> RunResult:
    group = cfg.resolve_group()
    sph, exp = cfg.spheres, cfg.experiment
    partition = cell_partition(n_theta=sph.n_theta)
    center = IwasawaPoint(sph.center_y, sph.center_x, sph.center_theta % TWO_PI)
    tests: list[CheckReport] = []
    rows = []
    stats = []
    for radius, threshold in zip(sph.radii, sph.thresholds):
        res = sphere_equidistribution(group, center, radius, sph.n, partition, exp.seed, threshold)
        stats.append(res.result.statistic)
        params = {"group": group.name, "R": radius, "cells": res.empirical.size}
        tests.append(res.result.to_report(f"sphere_R{radius:g}", parameters=params))
        rows += [[radius, i, e, m] for i, (e, m) in enumerate(zip(res.empirical, res.reference))]
        if sph.leaf_k is not None:
            quasi = quasi_sphere_equidistribution(
                group,
                sph.leaf_k,
                sph.leaf_eps,
                exp.a,
                center,
                radius,
                sph.n,
                sph.n_reference,
                partition=partition,
                seed=exp.seed,
                threshold=threshold,
            )
            tests.append(quasi.result.to_report(f"quasi_sphere_R{radius:g}", parameters=params | {"k": sph.leaf_k}))
    if len(stats) >= 2:
        worst = max(0.0, *(b - a for a, b in zip(stats, stats[1:])))
        tests.append(
            CheckReport(
                test_name="sphere_monotone",
                n=sph.n,
                statistic=worst,
                threshold=0.0,
                passed=worst <= 0.0,
                parameters={"radii": list(sph.radii), "discrepancies": stats},
            )
        )
    write_table_csv(cfg.out_dir / "spheres_histogram.csv", ["radius", "cell", "empirical", "exact"], rows)
    return _finish(cfg, RunResult(cfg.mode, tests))


def run_hitting(cfg: ExperimentConfig) -> RunResult:
    hit, exp, tol = cfg.hitting, cfg.experiment, cfg.tolerances
    summary = hitting_time_check(
        hit.n_paths,
        hit.level,
        hit.dt,
        seed=exp.seed,
        ratio_tolerance=tol.hitting_ratio,
        ecf_threshold=tol.hitting_ecf,
        threads=exp.threads,
        chunk_size=exp.chunk_size,
    )
    write_table_csv(
        cfg.out_dir / f"{cfg.mode}_samples.csv",
        ["path_id", "hitting_time", "integral"],
        ([i, float(h), float(v)] for i, (h, v) in enumerate(zip(summary.hitting_times, summary.integrals))),
    )
    return _finish(cfg, RunResult(cfg.mode, summary.reports))


RUNNERS = {
    Mode.BROWNIAN: run_brownian,
    Mode.GEODESIC: run_geodesic,
    Mode.EXCURSIONS: run_excursions,
    Mode.SPHERES: run_spheres,
    Mode.HITTING_TIME: run_hitting,
}


def run(cfg: ExperimentConfig) -> int:
    """Run the configured experiment; 0 when every check passes, 1 otherwise"""
    logger.info(f"{cfg.mode} run, seed {cfg.seed}, output in {cfg.out_dir}")
    return RUNNERS[cfg.mode](cfg).exit_code
