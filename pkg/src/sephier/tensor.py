"""Plain, (anti-)symmetrized and conglomerate tensor products.

Grid-level products act on :class:`~sephier.grid.GridState`; particle slots
carry their coordinate and internal index together, so permuting particles
permutes both axis groups at once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .grid import GridState
from .jetcore import ABQuadruple, JetSpec

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Statistics:
    f: int = 0

    def __post_init__(self):
        if self.f not in (0, 1):
            raise ValueError("Fermi number must be 0 (bosons) or 1 (fermions)")

    @property
    def sign(self) -> int:
        return -1 if self.f else 1


BOSONS = Statistics(0)
FERMIONS = Statistics(1)


def _stats(stats) -> Statistics:
    return stats if isinstance(stats, Statistics) else Statistics(int(stats))


def parity(seq) -> int:
    """0 for an even permutation, 1 for odd (inversion count)."""
    seq = list(seq)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return inversions % 2


def permute_slots(data: np.ndarray, perm) -> np.ndarray:
    """Array ``T`` with ``T(xi_1, ..., xi_p) = data(xi_perm[0], ..., xi_perm[p-1])``."""
    p = data.ndim // 2
    inv = np.argsort(perm)
    return np.transpose(data, list(inv) + [p + k for k in inv])


def _check_compatible(phi: GridState, psi: GridState):
    if phi.grid != psi.grid:
        raise ValueError("states live on different grids")
    if phi.m != psi.m:
        raise ValueError(f"internal dimensions differ: {phi.m} vs {psi.m}")


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p, q = a.ndim // 2, b.ndim // 2
    out = np.multiply.outer(a, b)
    # (g_a, i_a, g_b, i_b) -> (g_a, g_b, i_a, i_b)
    axes = (list(range(p)) + list(range(2 * p, 2 * p + q))
            + list(range(p, 2 * p)) + list(range(2 * p + q, 2 * p + 2 * q)))
    return np.transpose(out, axes)


def simple_tensor(phi: GridState, psi: GridState) -> GridState:
    """``(phi x psi)(xi_1..xi_p, xi_p+1..xi_p+q) = phi(xi_1..xi_p) psi(xi_p+1..)``."""
    _check_compatible(phi, psi)
    return GridState(phi.grid, _outer(phi.data, psi.data))


def ascending_splits(total: int, size: int):
    """Yield ``(I, J, parity)`` over ascending ``size``-subsets ``I`` of ``range(total)``."""
    for I in itertools.combinations(range(total), size):
        J = tuple(k for k in range(total) if k not in I)
        yield I, J, parity(I + J)


def symmetrize(state: GridState, stats=BOSONS) -> GridState:
    """Full (anti-)symmetrizer: signed mean over all permutations of the particle slots."""
    stats = _stats(stats)
    p = state.p
    acc = np.zeros_like(state.data)
    for perm in itertools.permutations(range(p)):
        sign = stats.sign ** parity(perm)
        acc = acc + sign * permute_slots(state.data, perm)
    return state.with_data(acc / math.factorial(p))


def check_symmetry(state: GridState, stats=BOSONS, tol: float = SYMMETRY_TOL) -> None:
    """Raise ``ValueError`` unless every transposition multiplies ``state`` by ``(-1)^f``."""
    stats = _stats(stats)
    scale = max(np.max(np.abs(state.data)), 1e-300)
    for a, b in itertools.combinations(range(state.p), 2):
        perm = list(range(state.p))
        perm[a], perm[b] = b, a
        dev = np.max(np.abs(permute_slots(state.data, perm) - stats.sign * state.data)) / scale
        if dev > tol:
            raise ValueError(f"state is not {'anti' if stats.f else ''}symmetric in slots {a},{b} (deviation {dev:.3g})")


def sym_tensor(phi: GridState, psi: GridState, stats=BOSONS, check: bool = False) -> GridState:
    """(Anti-)symmetrized product with prefactor ``n! m! / (n+m)!``."""
    stats = _stats(stats)
    _check_compatible(phi, psi)
    if check:
        check_symmetry(phi, stats)
        check_symmetry(psi, stats)
    n, m = phi.p, psi.p
    plain = _outer(phi.data, psi.data)
    acc = np.zeros_like(plain)
    for I, J, par in ascending_splits(n + m, n):
        acc = acc + stats.sign ** par * permute_slots(plain, I + J)
    return GridState(phi.grid, acc * sym_prefactor(n, m))


def sym_prefactor(n: int, m: int) -> float:
    return math.factorial(n) * math.factorial(m) / math.factorial(n + m)


def conglomerate_prefactor(N: int) -> float:
    return sym_prefactor(N, N)


def conglomerate_sym_tensor(phi: GridState, psi: GridState, stats=BOSONS, check: bool = False) -> GridState:
    """Product of two ``N``-particle states, prefactor ``N!^2/(2N)!``."""
    if phi.p != psi.p:
        raise ValueError(f"conglomerate factors need equal particle counts, got {phi.p} and {psi.p}")
    return sym_tensor(phi, psi, stats, check=check)


@dataclass(frozen=True, eq=False)
class PairJet:
    """Two-particle jet table ``values[A, B, I, J]`` at basepoints ``x`` and ``y``."""

    spec: JetSpec
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = self.spec.n_idx
        vals = np.array(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(-1))
        if vals.shape != (self.spec.m, self.spec.m, n, n):
            raise ValueError(f"pair jet table has shape {vals.shape}")

    @property
    def basepoints(self) -> np.ndarray:
        return np.stack([self.x, self.y])

    def value(self, A, B, I, J) -> complex:
        return complex(self.values[A, B, self.spec.position(I), self.spec.position(J)])


def outer_jets(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Jet table of ``a(x) b(y)`` from jet tables of arities ``p`` and ``q``."""
    return _outer(a, b)


def plain_product_jet(alpha, betaT) -> PairJet:
    return PairJet(alpha.spec, alpha.basepoint, betaT.basepoint, outer_jets(alpha.values, betaT.values))


def sym_product_jet(ab: ABQuadruple, stats=BOSONS) -> PairJet:
    """``a[A,B,I,J] = (alpha[A,I] betaT[B,J] + (-1)^f beta[A,I] alphaT[B,J]) / 2``."""
    stats = _stats(stats)
    values = 0.5 * (outer_jets(ab.alpha.values, ab.betaT.values)
                    + stats.sign * outer_jets(ab.beta.values, ab.alphaT.values))
    return PairJet(ab.spec, ab.alpha.basepoint, ab.alphaT.basepoint, values)
