import csv
import json
from pathlib import Path

from loguru import logger
import pytest

SMALL_BROWNIAN = """
[experiment]
group = GAMMA1
forms = OMEGA0
mode = brownian
seed = 4
checkpoints = 0.5, 1
chunk_size = 200

[brownian]
horizon = 2
dt = 0.01
n_paths = 500
"""


def _read_report(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def test_version(capsys: pytest.CaptureFixture[str]):
    from winding_lab import __version__
    from winding_lab.cli import main

    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_subcommand_is_usage_error():
    from winding_lab.cli import main

    with pytest.raises(SystemExit) as exc_info:
        main(["teleport"])
    assert exc_info.value.code == 2


def test_missing_config_exits_2(tmp_path: Path):
    from winding_lab.cli import EXIT_CONFIG, main

    assert main(["brownian", "--config", str(tmp_path / "absent.ini")]) == EXIT_CONFIG
    assert main(["validate", "--config", str(tmp_path / "absent.ini")]) == EXIT_CONFIG


def test_group_info(capsys: pytest.CaptureFixture[str]):
    from winding_lab.cli import main

    assert main(["group-info", "GAMMA2"]) == 0
    out = capsys.readouterr().out
    rows = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert rows["index"] == "6"
    assert rows["nu_inf"] == "3"
    assert rows["genus"] == "0"
    assert rows["betti_1"] == "3"
    assert rows["widths"] == "inf:2, zero:2, one:2"
    assert rows["covolume/pi"] == "2"


def test_group_info_unknown_group():
    from winding_lab.cli import EXIT_CONFIG, main

    assert main(["group-info", "GAMMA9"]) == EXIT_CONFIG


def test_validate_shipped_configs(configs_dir: Path, capsys: pytest.CaptureFixture[str]):
    logger.info("开始校验内置配置")
    from winding_lab.cli import main

    for path in sorted(configs_dir.glob("*.ini")):
        assert main(["validate", "--config", str(path)]) == 0, f"{path.name} 校验失败"
    assert "error:" not in capsys.readouterr().out
    logger.success("内置配置校验通过")


@pytest.mark.parametrize(
    "text",
    [
        "[experiment]\nmode = brownian\n[brownian]\nsteps = 10\n",
        "[experiment]\ngroup = GAMMA2\nforms = W\n[form.W]\nkind = singular\n"
        "residue.inf = 1\nresidue.zero = 0\nresidue.one = 0\n",
        "[experiment]\nmode = geodesic\na = 0\n",
    ],
    ids=["unknown-key", "residue-sum", "zero-metric"],
)
def test_validate_rejects(write_ini, capsys: pytest.CaptureFixture[str], text: str):
    from winding_lab.cli import main

    assert main(["validate", "--config", str(write_ini(text))]) == 2
    assert "error:" in capsys.readouterr().out


def test_subcommand_fixes_the_mode(write_ini, tmp_path: Path):
    from winding_lab.cli import EXIT_CONFIG, main

    # brownian 配置在 geodesic 子命令下需要 a ≠ 0
    path = write_ini("[experiment]\nmode = brownian\na = 0\n")
    assert main(["geodesic", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_minimal_brownian_run(write_ini, tmp_path: Path):
    logger.info("开始最小布朗运动实验")
    from winding_lab.cli import main
    from winding_lab.report import read_report_json

    out = tmp_path / "out"
    code = main(["brownian", "--config", str(write_ini(SMALL_BROWNIAN)), "--out", str(out)])
    assert code in (0, 1)

    with (out / "brownian_samples.csv").open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == [
        "seed",
        "path_id",
        "checkpoint_time",
        "OMEGA0",
        "OMEGA0_raw",
        "OMEGA0_primitive",
        "theta_winding",
        "excursion_count",
    ]
    assert len(rows) == 1 + 500 * 2
    assert {r[0] for r in rows[1:]} == {"4"}
    assert {float(r[2]) for r in rows[1:]} == {1.0, 2.0}

    report = _read_report(out / "brownian_report.json")
    assert report["mode"] == "brownian"
    assert report["config"]["experiment"]["seed"] == 4
    names = [t["test_name"] for t in report["tests"]]
    assert "OMEGA0_cauchy" in names
    assert "OMEGA0_increment_independence" in names
    for t in report["tests"]:
        assert {"test_name", "n", "statistic", "threshold", "pass", "parameters"} <= t.keys()
    assert code == (0 if all(t["pass"] for t in report["tests"]) else 1)

    decoded = read_report_json(out / "brownian_report.json")
    assert decoded.all_passed == (code == 0)
    assert [t.test_name for t in decoded.tests] == names
    logger.success("最小布朗运动实验通过")


def test_same_seed_same_bytes(write_ini, tmp_path: Path):
    from winding_lab.cli import main

    path = write_ini(SMALL_BROWNIAN)
    main(["brownian", "--config", str(path), "--out", str(tmp_path / "a")])
    main(["brownian", "--config", str(path), "--out", str(tmp_path / "b"), "--threads", "2"])
    first = (tmp_path / "a" / "brownian_samples.csv").read_bytes()
    second = (tmp_path / "b" / "brownian_samples.csv").read_bytes()
    assert first == second, "同一种子的样本应逐字节一致, 与进程数无关"


def test_seed_env_overrides_flag(write_ini, tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    from winding_lab.cli import main
    from winding_lab.constants import SEED_ENV

    monkeypatch.setenv(SEED_ENV, "123")
    main(["brownian", "--config", str(write_ini(SMALL_BROWNIAN)), "--seed", "9", "--out", str(tmp_path)])
    report = _read_report(tmp_path / "brownian_report.json")
    assert report["config"]["experiment"]["seed"] == 123
    with (tmp_path / "brownian_samples.csv").open(encoding="utf-8") as f:
        next(f)
        assert next(f).startswith("123,")


def test_small_hitting_time_run(write_ini, tmp_path: Path):
    from winding_lab.cli import main

    path = write_ini("[experiment]\nmode = hitting-time\nseed = 2\n[hitting]\nlevel = 10\ndt = 0.05\nn_paths = 500\n")
    assert main(["hitting-time", "--config", str(path), "--out", str(tmp_path)]) in (0, 1)
    with (tmp_path / "hitting-time_samples.csv").open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["path_id", "hitting_time", "integral"]
    assert len(rows) == 501
    report = _read_report(tmp_path / "hitting-time_report.json")
    assert report["mode"] == "hitting-time"
    assert report["tests"]


def test_small_spheres_run(write_ini, tmp_path: Path):
    from winding_lab.cli import main

    path = write_ini(
        "[experiment]\nmode = spheres\nseed = 6\n[spheres]\nradii = 1, 3\nthresholds = 0.9, 0.9\nn = 2000\n"
    )
    assert main(["spheres", "--config", str(path), "--out", str(tmp_path)]) in (0, 1)
    with (tmp_path / "spheres_histogram.csv").open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["radius", "cell", "empirical", "exact"]
    # Γ(1) 上 12 区域 × 4 个角度格, 两个半径
    assert len(rows) == 1 + 2 * 48
    names = [t["test_name"] for t in _read_report(tmp_path / "spheres_report.json")["tests"]]
    assert names == ["sphere_R1", "sphere_R3", "sphere_monotone"]


def test_small_geodesic_run(write_ini, tmp_path: Path):
    logger.info("开始小规模测地线实验")
    from winding_lab.cli import main

    path = write_ini(
        "[experiment]\nmode = geodesic\nseed = 8\n[geodesic]\nk = 0.5\nhorizon = 4\nds = 0.1\nn_paths = 500\n"
    )
    assert main(["geodesic", "--config", str(path), "--out", str(tmp_path)]) in (0, 1)
    with (tmp_path / "geodesic_samples.csv").open(encoding="utf-8") as f:
        header = next(csv.reader(f))
    assert header[-2:] == ["k", "eps"]
    names = [t["test_name"] for t in _read_report(tmp_path / "geodesic_report.json")["tests"]]
    assert names == ["OMEGA0_cauchy", "OMEGA0_median_shift"]
    logger.success("小规模测地线实验通过")


@pytest.mark.slow
def test_excursions_run(configs_dir: Path, tmp_path: Path):
    logger.info("开始尖点游程验收")
    from winding_lab.cli import main

    config = configs_dir / "excursions_gamma1.ini"
    assert main(["excursions", "--config", str(config), "--out", str(tmp_path)]) == 0
    with (tmp_path / "excursions_records.csv").open(encoding="utf-8") as f:
        assert next(csv.reader(f)) == ["cusp", "level", "tau", "sigma", "phi"]
    logger.success("尖点游程验收通过")


def _acceptance_run(configs_dir: Path, out: Path, mode: str, config: str) -> dict:
    from winding_lab.cli import main
    from winding_lab.report import read_report_json

    code = main([mode, "--config", str(configs_dir / config), "--out", str(out)])
    report = read_report_json(out / f"{mode}_report.json")
    checks = {t.test_name: t for t in report.tests}
    failed = {name: (t.statistic, t.threshold) for name, t in checks.items() if not t.passed}
    assert code == 0, f"未通过的检查: {failed}"
    return checks


@pytest.mark.slow
def test_brownian_cauchy_acceptance(configs_dir: Path, tmp_path: Path):
    """M⁰_T/T on Γ(1) is Cauchy with characteristic function e^{−|q|/2}"""
    logger.info("开始 Γ(1) 上 ω₀ 的 Cauchy 律验收")
    checks = _acceptance_run(configs_dir, tmp_path, "brownian", "brownian_gamma1.ini")
    cauchy = checks["OMEGA0_cauchy"]
    assert cauchy.target is not None and abs(cauchy.target - 0.5) < 1e-9
    assert "OMEGA0_increment_independence" in checks
    logger.success("Cauchy 律验收通过")


@pytest.mark.slow
def test_cusp_form_gaussian_acceptance(configs_dir: Path, tmp_path: Path):
    """Gaussian law of Re(η⁴ dz) with the Petersson variance, independent of the ω₀ winding"""
    logger.info("开始尖形式 Gaussian 律与独立性验收")
    from winding_lab.cli.experiments import marginal_target
    from winding_lab.constants import Mode
    from winding_lab.forms import builtin_form, petersson_norm_quadrature
    from winding_lab.modular_group import get_group

    checks = _acceptance_run(configs_dir, tmp_path, "brownian", "commutator_eta4.ini")
    form = builtin_form("ETA4_CUSPFORM")
    norms = {form.name: petersson_norm_quadrature(form)}
    want = marginal_target(get_group("COMMUTATOR"), form, Mode.BROWNIAN, norms=norms).variance
    variance = checks["ETA4_CUSPFORM_variance"]
    assert variance.passed
    assert variance.target is not None and abs(variance.target - want) < 1e-9 * want
    assert checks["ETA4_CUSPFORM_gaussian"].passed
    assert checks["OMEGA0_ETA4_CUSPFORM_independence"].passed
    logger.success("Gaussian 律与独立性验收通过")


@pytest.mark.slow
def test_geodesic_cauchy_acceptance(configs_dir: Path, tmp_path: Path):
    """k = 0 leaf: Cauchy scale doubles from 1/2 to 1"""
    logger.info("开始 k = 0 测地线缠绕验收")
    checks = _acceptance_run(configs_dir, tmp_path, "geodesic", "geodesic_gamma1.ini")
    cauchy = checks["OMEGA0_cauchy"]
    assert cauchy.target is not None and abs(cauchy.target - 1.0) < 1e-9
    assert "OMEGA0_median_shift" not in checks
    logger.success("k = 0 测地线缠绕验收通过")


@pytest.mark.slow
def test_geodesic_median_shift_acceptance(configs_dir: Path, tmp_path: Path):
    """k = 0.5 leaf: the median of t⁻¹∫ω₀ moves to (1 + a²)k/√(1 + a²k²)"""
    logger.info("开始 k = 0.5 测地线中位数平移验收")
    checks = _acceptance_run(configs_dir, tmp_path, "geodesic", "geodesic_k05.ini")
    shift = checks["OMEGA0_median_shift"]
    assert shift.target is not None and abs(shift.target - 0.8944) < 1e-4
    assert shift.passed
    logger.success("中位数平移验收通过")
