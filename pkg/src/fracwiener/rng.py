"""Reproducible random streams for Monte Carlo path generation.

Paths are produced in fixed blocks of ``BLOCK_PATHS`` paths.  Every block
owns a counter-based Philox generator keyed by ``(seed, stream, block)``,
so the sampled numbers depend only on those integers and never on how the
blocks are scheduled across worker threads.  Results are therefore
bit-identical for any parallelism degree.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = ["BLOCK_PATHS", "block_generator", "path_blocks", "map_path_blocks"]

BLOCK_PATHS = 4096


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """Generator for one path block of one logical stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def path_blocks(n_paths: int, block_size: int = BLOCK_PATHS) -> Iterator[tuple[int, slice]]:
    """Yield ``(block_index, path_slice)`` covering ``range(n_paths)``."""
    if n_paths < 1:
        raise ValueError("need at least one path")
    for b, start in enumerate(range(0, n_paths, block_size)):
        yield b, slice(start, min(start + block_size, n_paths))


def map_path_blocks(
    fn: Callable[[int, slice], np.ndarray],
    n_paths: int,
    threads: int = 1,
    block_size: int = BLOCK_PATHS,
) -> np.ndarray:
    """Run ``fn`` over all path blocks and concatenate results in block order.

    ``fn`` gets ``(block_index, path_slice)`` and must return an array whose
    leading dimension equals the slice length.  Assembly order is fixed by
    the block index, so thread count does not affect the output.
    """
    blocks: Sequence[tuple[int, slice]] = list(path_blocks(n_paths, block_size))
    if threads <= 1 or len(blocks) == 1:
        parts = [fn(b, sl) for b, sl in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bs: fn(*bs), blocks))
    return np.concatenate(parts, axis=0)
