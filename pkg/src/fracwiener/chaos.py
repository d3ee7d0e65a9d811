"""Finite Wiener chaos over a discretized white-noise window.

Hermite polynomials here carry the 1/n! normalization, so the generating
identity is exp(tx - t^2/2) = sum_n H_n(x) t^n and the three-term
recurrence reads (n+1) H_{n+1}(x) = x H_n(x) - H_{n-1}(x).

The driving noise is discretized on a uniform window that extends well to
the left of the observation interval, because the moving-average kernels
fed into it integrate from -infinity.  Single and double integrals against
the noise produce first and second chaos samples; the double integral
skips the diagonal, so its mean is exactly zero path by path in
expectation and its variance is twice the squared kernel norm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .grids import GridFunction, TimeGrid
from .rng import BLOCK_PATHS, block_generator, map_path_blocks

__all__ = [
    "ChaosSample",
    "DiscreteIsonormal",
    "HermiteBasis",
    "double_wiener_integral",
    "hermite_poly",
    "moment_ratio",
]


def hermite_poly(n: int, x) -> Union[float, np.ndarray]:
    """Evaluate the n-th Hermite polynomial (1/n! normalization) at ``x``."""
    if n < 0:
        raise ValueError("polynomial order must be nonnegative")
    arr = np.asarray(x, dtype=float)
    prev = np.ones_like(arr)
    if n == 0:
        return float(prev) if arr.ndim == 0 else prev
    cur = arr.copy()
    for k in range(1, n):
        prev, cur = cur, (arr * cur - prev) / (k + 1)
    return float(cur) if arr.ndim == 0 else cur


@dataclass(frozen=True)
class HermiteBasis:
    """Hermite polynomials of all orders up to ``max_order`` at once."""

    max_order: int

    def __post_init__(self):
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")

    def values(self, x) -> np.ndarray:
        """Stack H_0(x) .. H_max(x) along a new leading axis."""
        arr = np.asarray(x, dtype=float)
        out = np.empty((self.max_order + 1,) + arr.shape)
        out[0] = 1.0
        if self.max_order >= 1:
            out[1] = arr
        for k in range(1, self.max_order):
            out[k + 1] = (arr * out[k] - out[k - 1]) / (k + 1)
        return out


@dataclass(frozen=True, eq=False)
class ChaosSample:
    """Monte Carlo draws from a fixed (finite) chaos level."""

    values: np.ndarray
    order: int
    meta: Mapping[str, object] = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    def mean(self) -> float:
        return float(np.mean(self.values))

    def variance(self) -> float:
        return float(np.var(self.values, ddof=1))

    def abs_moment(self, q: float) -> float:
        if q <= 0:
            raise ValueError("moment exponent must be positive")
        return float(np.mean(np.abs(self.values) ** q))


@dataclass(frozen=True)
class DiscreteIsonormal:
    """White noise on a uniform grid, reproducible per (seed, stream).

    Increments are i.i.d. centered Gaussians with variance dt per cell, so
    sums against cell samples approximate L^2 inner products.  Draws come
    from counter-based substreams keyed by (seed, stream, block of paths),
    which makes every path's numbers independent of threading.
    """

    grid: TimeGrid
    seed: int
    stream: int = 0

    @classmethod
    def for_window(
        cls, t_end: float, n_cells: int, seed: int, lead_factor: float = 10.0, stream: int = 0
    ) -> "DiscreteIsonormal":
        """Window [-lead_factor * t_end, t_end] with ``n_cells`` cells."""
        if t_end <= 0 or lead_factor < 0:
            raise ValueError("need t_end > 0 and a nonnegative lead factor")
        t0 = -lead_factor * t_end
        return cls(TimeGrid(t0, (t_end - t0) / n_cells, n_cells), seed, stream)

    @property
    def n_cells(self) -> int:
        return self.grid.n_steps

    @property
    def sample_points(self) -> np.ndarray:
        """Cell midpoints; kernels are evaluated here."""
        return self.grid.cell_midpoints

    def increment_block(self, block: int, n: int) -> np.ndarray:
        gen = block_generator(self.seed, self.stream, block)
        return gen.standard_normal((n, self.n_cells)) * np.sqrt(self.grid.dt)

    def increments(self, n_paths: int, threads: int = 1) -> np.ndarray:
        """(n_paths, n_cells) array of scaled noise increments."""
        return map_path_blocks(
            lambda b, sl: self.increment_block(b, sl.stop - sl.start), n_paths, threads
        )

    def _cell_weights(self, v) -> np.ndarray:
        if isinstance(v, GridFunction):
            if v.grid != self.grid:
                raise ValueError("grid function lives on a different grid")
            return np.asarray(v.samples, dtype=float)
        if callable(v):
            return np.asarray(v(self.sample_points), dtype=float)
        arr = np.asarray(v, dtype=float)
        if arr.shape != (self.n_cells,):
            raise ValueError("cell sample array has the wrong length")
        return arr

    def first_order(self, v, n_paths: int, threads: int = 1) -> ChaosSample:
        """Single Wiener integral of a grid function, one draw per path."""
        w = self._cell_weights(v)

        def run(block: int, sl: slice) -> np.ndarray:
            return self.increment_block(block, sl.stop - sl.start) @ w

        return ChaosSample(map_path_blocks(run, n_paths, threads), order=1)


def double_wiener_integral(
    kernel: Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    iso: DiscreteIsonormal,
    n_paths: int,
    threads: int = 1,
) -> ChaosSample:
    """Off-diagonal double Wiener integral of a symmetric grid kernel.

    ``kernel`` is either an (n_cells, n_cells) matrix of kernel values at
    cell midpoints or a callable evaluated on the midpoint mesh.  The
    diagonal is excluded; a non-symmetric matrix is symmetrized and the
    result carries ``meta["symmetrized"] = True``.
    """
    y = iso.sample_points
    if callable(kernel):
        mat = np.asarray(kernel(y[:, None], y[None, :]), dtype=float)
    else:
        mat = np.asarray(kernel, dtype=float)
    if mat.shape != (iso.n_cells, iso.n_cells):
        raise ValueError("kernel matrix does not match the noise grid")
    if not np.all(np.isfinite(mat)):
        raise ValueError("kernel values must be finite")
    meta = {}
    if not np.allclose(mat, mat.T, rtol=1e-12, atol=1e-12):
        mat = 0.5 * (mat + mat.T)
        meta["symmetrized"] = True
    diag = np.diag(mat).copy()

    def run(block: int, sl: slice) -> np.ndarray:
        e = iso.increment_block(block, sl.stop - sl.start)
        te = e @ mat  # quadratic form via one GEMM, then a row dot
        return np.einsum("bi,bi->b", te, e) - (e * e) @ diag

    return ChaosSample(map_path_blocks(run, n_paths, threads), order=2, meta=meta)


def moment_ratio(sample, q: float, p: float) -> float:
    """Ratio of empirical absolute-moment norms, (E|X|^q)^{1/q} / (E|X|^p)^{1/p}."""
    if q <= 0 or p <= 0:
        raise ValueError("moment exponents must be positive")
    values = sample.values if isinstance(sample, ChaosSample) else np.asarray(sample, dtype=float)
    if values.size == 0:
        raise ValueError("sample is empty")
    num = np.mean(np.abs(values) ** q) ** (1.0 / q)
    den = np.mean(np.abs(values) ** p) ** (1.0 / p)
    if den == 0.0:
        raise ValueError("degenerate sample")
    return float(num / den)
