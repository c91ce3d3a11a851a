"""Grid time evolution under hierarchy generators and evolution-level separation gaps.

Sign convention: states evolve by ``dPsi/dt = i H(Psi)``, so that ``H`` is
``(1/i) dE/dt`` at coincident times. Jet variables in operator bodies are
realized by centered periodic stencils: ``[-1, 0, 1] / 2h`` for first and
``[1, -2, 1] / h^2`` for second derivatives; higher orders compose these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, GridState, export_csv
from .opdsl.evaluate import DomainError, evaluate
from .opdsl.hierarchy import output_indices
from .tensor import simple_tensor, sym_tensor

#: nonlinear bodies with log or division refuse states below this modulus
AMPLITUDE_FLOOR = 1e-8

__all__ = [
    "AMPLITUDE_FLOOR", "EvolutionMap", "Grid", "GridState", "apply_generator", "evolve", "export_csv",
    "observed_order", "schmidt_gap", "separation_gap",
]


def _d1(f, axis, h):
    return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)


def _d2(f, axis, h):
    return (np.roll(f, -1, axis) - 2 * f + np.roll(f, 1, axis)) / (h * h)


def grid_derivative(f: np.ndarray, axis: int, order: int, h: float) -> np.ndarray:
    for _ in range(order // 2):
        f = _d2(f, axis, h)
    if order % 2:
        f = _d1(f, axis, h)
    return f


class GridEnv:
    """Binds jet variables to stencil derivatives of a state array.

    ``data`` has ``lead`` batch axes, then ``p`` grid axes, then ``p`` internal axes.
    """

    def __init__(self, data: np.ndarray, grid: Grid, p: int, lead: int = 0):
        self.data, self.grid, self.p, self.lead = data, grid, p, lead
        self._cache = {}

    def jet(self, internal, midx):
        key = (tuple(internal), tuple(midx))
        if key not in self._cache:
            f = self.data[(Ellipsis,) + tuple(internal)]
            for j, I in enumerate(midx):
                f = grid_derivative(f, self.lead + j, I[0], self.grid.h)
            self._cache[key] = f
        return self._cache[key]

    def coord(self, p, k):
        shape = [1] * (self.lead + self.p)
        shape[self.lead + p] = self.grid.n
        return self.grid.x.reshape(shape)


def _check_floor(data: np.ndarray, lead: int = 0):
    amp = np.abs(data)
    if np.min(amp) < AMPLITUDE_FLOOR:
        point = tuple(int(i) for i in np.unravel_index(int(np.argmin(amp)), amp.shape)[lead:])
        raise DomainError(f"|Psi| = {np.min(amp):.3g} below floor {AMPLITUDE_FLOOR} at grid point {point}")


def apply_generator(hier, data: np.ndarray, grid: Grid, lead: int = 0) -> np.ndarray:
    """``H_p(Psi)`` on the grid; ``p`` is inferred from the array rank."""
    p = (data.ndim - lead) // 2
    m = data.shape[-1]
    if hier.domain_restricted(p):
        _check_floor(data, lead)
    env = GridEnv(data, grid, p, lead)
    out = np.empty_like(data, dtype=complex)
    for outer, expr in zip(output_indices(m, p), hier.components(p)):
        out[(Ellipsis,) + outer] = evaluate(expr, env)
    return out


@dataclass(eq=False)
class EvolutionMap:
    hier: object
    dt: float
    steps: int
    integrator: str = "rk4"
    _cn_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dt == 0 or not math.isfinite(self.dt):
            raise ValueError("dt must be finite and nonzero")
        if self.steps < 0:
            raise ValueError("step count must be non-negative")
        if self.integrator not in ("rk4", "cn"):
            raise ValueError(f"unknown integrator '{self.integrator}'")
        if self.integrator == "cn" and not self.hier.is_linear():
            raise ValueError("Crank-Nicolson needs a linear hierarchy")

    @classmethod
    def for_time(cls, hier, t: float, dt: float, integrator: str = "rk4") -> "EvolutionMap":
        steps = round(t / dt)
        if not math.isclose(steps * dt, t, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError(f"t={t} is not a multiple of dt={dt}")
        return cls(hier, dt, steps, integrator)


def _rk4_step(hier, psi, grid, dt):
    rhs = lambda y: 1j * apply_generator(hier, y, grid)  # noqa: E731
    k1 = rhs(psi)
    k2 = rhs(psi + 0.5 * dt * k1)
    k3 = rhs(psi + 0.5 * dt * k2)
    k4 = rhs(psi + dt * k3)
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def generator_matrix(hier, grid: Grid, p: int, m: int, batch: int = 256) -> sp.csr_matrix:
    """Sparse matrix of a linear ``H_p`` assembled column by column from unit vectors."""
    shape = (grid.n,) * p + (m,) * p
    size = math.prod(shape)
    rows, cols, vals = [], [], []
    for start in range(0, size, batch):
        stop = min(start + batch, size)
        basis = np.zeros((stop - start, size), dtype=complex)
        basis[np.arange(stop - start), np.arange(start, stop)] = 1.0
        image = apply_generator(hier, basis.reshape((stop - start,) + shape), grid, lead=1)
        image = image.reshape(stop - start, size)
        c, r = np.nonzero(image)
        rows.append(r)
        cols.append(c + start)
        vals.append(image[c, r])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(size, size))


def _cn_solver(emap: EvolutionMap, grid: Grid, p: int, m: int):
    key = (grid, p, m)
    if key not in emap._cn_cache:
        H = generator_matrix(emap.hier, grid, p, m)
        eye = sp.identity(H.shape[0], dtype=complex, format="csc")
        half = 0.5j * emap.dt * H.tocsc()
        emap._cn_cache[key] = (spla.splu((eye - half).tocsc()), (eye + half).tocsr())
    return emap._cn_cache[key]


def evolve(emap: EvolutionMap, state: GridState) -> GridState:
    """Advance ``state`` by ``emap.steps`` steps of ``emap.dt``."""
    hier, grid = emap.hier, state.grid
    hier.components(state.p)
    psi = np.array(state.data)
    if emap.integrator == "cn":
        lu, rhs = _cn_solver(emap, grid, state.p, state.m)
        vec = psi.ravel()
        for _ in range(emap.steps):
            vec = lu.solve(rhs @ vec)
        return state.with_data(vec.reshape(psi.shape))
    for step in range(emap.steps):
        try:
            psi = _rk4_step(hier, psi, grid, emap.dt)
        except DomainError as exc:
            raise DomainError(f"step {step}: {exc}") from exc
        if not np.all(np.isfinite(psi)):
            raise FloatingPointError(f"evolution blew up at step {step}")
    return state.with_data(psi)


def relative_gap(lhs: GridState, rhs: GridState) -> float:
    return float(np.linalg.norm((lhs.data - rhs.data).ravel()) / np.linalg.norm(lhs.data.ravel()))


def separation_gap(hier, phi: GridState, psi: GridState, t: float, dt: float, product: str = "sym",
                   integrator: str = "rk4", return_states: bool = False):
    """``||E_2(t)(phi * psi) - E_1(t)phi * E_1(t)psi|| / ||E_2(t)(phi * psi)||``.

    ``*`` is the plain product (``product="plain"``) or the (anti-)symmetrized
    product with the hierarchy's statistics (``product="sym"``).
    """
    if phi.p != 1 or psi.p != 1:
        raise ValueError("separation_gap takes one-particle factors")
    if product == "plain":
        prod = simple_tensor
    elif product == "sym":
        prod = lambda a, b: sym_tensor(a, b, hier.stats)  # noqa: E731
    else:
        raise ValueError(f"unknown product '{product}'")
    emap = EvolutionMap.for_time(hier, t, dt, integrator)
    lhs = evolve(emap, prod(phi, psi))
    rhs = prod(evolve(emap, phi), evolve(emap, psi))
    gap = relative_gap(lhs, rhs)
    return (gap, lhs, rhs) if return_states else gap


def observed_order(g1: float, g2: float, g3: float) -> float:
    """Three-point convergence order for values at ``dt``, ``dt/2`` and ``dt/4``."""
    return math.log2(abs(g1 - g2) / abs(g2 - g3))


def schmidt_gap(state: GridState) -> float:
    """``1 - s_1^2 / sum s_i^2`` for the singular values of a scalar two-particle state."""
    if state.p != 2 or state.m != 1:
        raise ValueError("schmidt_gap needs a scalar two-particle state")
    s = np.linalg.svd(state.data[:, :, 0, 0], compute_uv=False)
    total = np.sum(s ** 2)
    if total == 0:
        raise ValueError("zero state has no Schmidt decomposition")
    return float(1 - s[0] ** 2 / total)
