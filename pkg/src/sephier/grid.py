"""Periodic 1-D grids and discretized multi-particle wave functions."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    L: float = 2 * np.pi
    n: int = 64

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid needs at least 8 points")
        if self.L <= 0:
            raise ValueError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h


@dataclass(frozen=True, eq=False)
class GridState:
    """A ``p``-particle state with ``m`` internal values per particle.

    ``data`` has shape ``(n,)*p + (m,)*p``: grid axis ``j`` and internal axis
    ``p + j`` both belong to particle slot ``j``.
    """

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if data.ndim % 2 or data.ndim == 0:
            raise ValueError("state array needs p grid axes followed by p internal axes")
        p = data.ndim // 2
        if data.shape[:p] != (self.grid.n,) * p:
            raise ValueError(f"grid axes {data.shape[:p]} do not match n={self.grid.n}")
        if len(set(data.shape[p:])) != 1:
            raise ValueError("all internal axes must have the same length")
        if not np.all(np.isfinite(data)):
            raise ValueError("state has non-finite entries")

    @property
    def p(self) -> int:
        return self.data.ndim // 2

    @property
    def m(self) -> int:
        return self.data.shape[-1]

    def norm(self) -> float:
        """Rectangle-rule L2 norm."""
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.h ** self.p))

    def normalized(self) -> "GridState":
        norm = self.norm()
        if norm == 0:
            raise ValueError("cannot normalize the zero state")
        return self.with_data(self.data / norm)

    def with_data(self, data) -> "GridState":
        return GridState(self.grid, data)

    def __add__(self, other: "GridState") -> "GridState":
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "GridState") -> "GridState":
        return self.with_data(self.data - other.data)

    def __mul__(self, c) -> "GridState":
        return self.with_data(c * self.data)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, grid: Grid, f) -> "GridState":
        """One-particle scalar state sampled from ``f(x)``."""
        return cls(grid, np.asarray(f(grid.x), dtype=complex).reshape(grid.n, 1))

    @classmethod
    def random(cls, grid: Grid, p: int = 1, m: int = 1, seed=0, modes: int | None = None) -> "GridState":
        """Random state; with ``modes`` only Fourier modes ``|k| <= modes`` are populated."""
        rng = np.random.default_rng(seed)
        shape = (grid.n,) * p + (m,) * p
        data = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        if modes is not None:
            k = np.fft.fftfreq(grid.n, 1.0 / grid.n)
            spec = np.fft.fftn(data, axes=range(p))
            mask = np.abs(k) <= modes
            for ax in range(p):
                shp = [1] * data.ndim
                shp[ax] = grid.n
                spec = spec * mask.reshape(shp)
            data = np.fft.ifftn(spec, axes=range(p))
        return cls(grid, data)


def export_csv(state: GridState, path) -> None:
    """Write one row per entry: grid index per particle, internal index per particle (m > 1 only), re, im."""
    p, m = state.p, state.m
    header = [f"i{j}" for j in range(p)]
    if m > 1:
        header += [f"a{j}" for j in range(p)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header + ["re", "im"])
        for idx in itertools.product(*(range(s) for s in state.data.shape)):
            z = state.data[idx]
            row = list(idx[:p]) + (list(idx[p:]) if m > 1 else [])
            writer.writerow(row + [repr(float(z.real)), repr(float(z.imag))])
