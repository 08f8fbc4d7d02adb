from pathlib import Path

import pytest

CONFIGS = Path(__file__).parent.parent / "configs"


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch: pytest.MonkeyPatch):
    """环境变量中的种子会覆盖配置, 测试中一律清除"""
    from winding_lab.constants import SEED_ENV

    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture
def write_ini(tmp_path: Path):
    """把 INI 文本写入临时文件, 返回路径"""

    def _write(text: str, name: str = "experiment.ini") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def deck_words():
    """50 个 S, T, T⁻¹ 组成的随机短字"""
    import numpy as np

    from winding_lab.hyperbolic_core import S, T, identity

    rng = np.random.default_rng(2024)
    letters = [S, T, T.inverse()]
    words = []
    for _ in range(50):
        g = identity()
        for i in rng.integers(0, 3, int(rng.integers(1, 7))):
            g = g @ letters[i]
        words.append(g)
    return words
