from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from functools import cache
import sys
from typing import TypeVar, cast

from loguru import logger
import numpy as np
from numpy.typing import NDArray
from tqdm import tqdm

R = TypeVar("R")


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for (seed, key...)

    Args:
        seed (int): 主种子
        *key (int): 路径编号、噪声通道等

    Returns:
        np.random.Generator: Philox 生成器
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))))


@cache
def gauss_legendre(n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss–Legendre nodes and weights on [−1, 1]"""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def get_progress_bar(desc: str, total: int, enabled: bool = True) -> tqdm:
    """获取进度条 bar

    Args:
        desc (str): 描述
        total (int): 总数
        enabled (bool): 是否显示. Defaults to True.

    Returns:
        tqdm: 进度条
    """
    return tqdm(
        total=total,
        dynamic_ncols=True,
        colour="green",
        desc=desc,
        disable=not enabled or not sys.stderr.isatty(),
    )


def chunk_bounds(n: int, chunk_size: int) -> list[tuple[int, int]]:
    """Split range(n) into consecutive [start, stop) chunks"""
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def run_chunks(
    worker: Callable[..., R],
    tasks: Sequence[tuple],
    threads: int,
    desc: str,
) -> list[R]:
    """Run worker(*task) for every task, inline or on a process pool, results in task order

    Args:
        worker: 可 pickle 的模块级函数
        tasks: 每个块的参数
        threads: 进程数, 1 表示串行
        desc: 进度条描述

    Returns:
        list: 与 tasks 顺序一致的结果
    """
    results: list[R | None] = [None] * len(tasks)
    with get_progress_bar(desc, len(tasks), enabled=len(tasks) > 1) as bar:
        if threads <= 1:
            for i, task in enumerate(tasks):
                results[i] = worker(*task)
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                futures = {ex.submit(worker, *task): i for i, task in enumerate(tasks)}
                for fut in as_completed(futures):
                    i = futures[fut]
                    try:
                        results[i] = fut.result()
                    except Exception:
                        logger.exception(f"{desc}: chunk {i} failed")
                        raise
                    logger.debug(f"{desc}: chunk {i} done")
                    bar.update(1)
    return cast(list[R], results)


def configure_logging(level: str = "INFO") -> None:
    """Single stderr sink at the given level"""
    logger.remove()
    logger.add(sys.stderr, level=level.upper())
