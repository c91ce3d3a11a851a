"""Multi-indices, truncated jets and their polynomial realizations.

A jet is the table of partial derivatives ``d^I u^A`` of an ``m``-component
function at a basepoint, for every multi-index ``I`` with ``|I| <= K``.
Tables are stored as complex arrays of shape ``(m, n_idx)`` where the second
axis follows :func:`enum_multi_indices` order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

MultiIndex = tuple[int, ...]

#: zeroth-order entries must exceed this fraction of ``scale`` in modulus
GENERICITY_FLOOR = 0.1


@lru_cache(maxsize=None)
def enum_multi_indices(d: int, K: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``d`` and order ``<= K``, graded lex.

    Within one order, indices are listed with the first entry decreasing,
    e.g. ``(2,0), (1,1), (0,2)``.
    """
    if d < 1 or K < 0:
        raise ValueError(f"need d >= 1 and K >= 0, got d={d}, K={K}")

    def compositions(total, length):
        if length == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, length - 1):
                yield (first,) + rest

    out = []
    for order in range(K + 1):
        out.extend(compositions(order, d))
    return tuple(out)


@lru_cache(maxsize=None)
def multi_index_position(d: int, K: int) -> dict[MultiIndex, int]:
    return {I: k for k, I in enumerate(enum_multi_indices(d, K))}


def order(I: Sequence[int]) -> int:
    return sum(I)


def factorial_of(I: Sequence[int]) -> int:
    return math.prod(math.factorial(i) for i in I)


@dataclass(frozen=True)
class JetSpec:
    d: int = 1
    K: int = 2
    m: int = 1

    def __post_init__(self):
        if self.d < 1 or self.K < 0 or self.m < 1:
            raise ValueError(f"invalid JetSpec {self}")

    @property
    def indices(self) -> tuple[MultiIndex, ...]:
        return enum_multi_indices(self.d, self.K)

    @property
    def n_idx(self) -> int:
        return math.comb(self.d + self.K, self.d)

    def position(self, I: Sequence[int]) -> int:
        try:
            return multi_index_position(self.d, self.K)[tuple(I)]
        except KeyError:
            raise KeyError(f"multi-index {tuple(I)} not in jet of order {self.K}") from None


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Jet:
    """One-particle jet: ``values[A, k]`` is ``d^I u^A(basepoint)`` for the k-th ``I``."""

    spec: JetSpec
    basepoint: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.array(self.basepoint, dtype=float).reshape(-1)
        bp.setflags(write=False)
        object.__setattr__(self, "basepoint", bp)
        object.__setattr__(self, "values", _frozen(self.values))
        if bp.shape != (self.spec.d,):
            raise ValueError(f"basepoint must have length {self.spec.d}")
        if self.values.shape != (self.spec.m, self.spec.n_idx):
            raise ValueError(
                f"jet table has shape {self.values.shape}, expected {(self.spec.m, self.spec.n_idx)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("jet values must be finite")

    def value(self, A: int, I: Sequence[int]) -> complex:
        return complex(self.values[A, self.spec.position(I)])

    @property
    def zeroth(self) -> np.ndarray:
        """The values ``u^A`` themselves (order-zero column)."""
        return self.values[:, 0]

    def replace(self, values) -> "Jet":
        return Jet(self.spec, self.basepoint, values)

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.basepoint, other.basepoint)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ABQuadruple:
    """Jets of two one-particle functions at ``x`` (alpha, beta) and at ``y`` (alphaT, betaT)."""

    alpha: Jet
    beta: Jet
    alphaT: Jet
    betaT: Jet

    def __post_init__(self):
        specs = {self.alpha.spec, self.beta.spec, self.alphaT.spec, self.betaT.spec}
        if len(specs) != 1:
            raise ValueError("all four jets must share one JetSpec")
        if not np.array_equal(self.alpha.basepoint, self.beta.basepoint):
            raise ValueError("alpha and beta must share the basepoint x")
        if not np.array_equal(self.alphaT.basepoint, self.betaT.basepoint):
            raise ValueError("alphaT and betaT must share the basepoint y")

    @property
    def spec(self) -> JetSpec:
        return self.alpha.spec

    def astuple(self) -> tuple[Jet, Jet, Jet, Jet]:
        return self.alpha, self.beta, self.alphaT, self.betaT


@dataclass(frozen=True, eq=False)
class MultiJet:
    """Jet table of an ``n``-particle function.

    ``values`` has shape ``(m,)*n + (n_idx,)*n``; entry
    ``values[A_1..A_n, k_1..k_n]`` is the derivative with multi-index
    ``indices[k_j]`` in slot ``j`` of component ``(A_1..A_n)``, taken at
    ``basepoints[j]`` in slot ``j``.
    """

    spec: JetSpec
    basepoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bps = np.array(self.basepoints, dtype=float).reshape(-1, self.spec.d)
        bps.setflags(write=False)
        object.__setattr__(self, "basepoints", bps)
        object.__setattr__(self, "values", _frozen(self.values))
        n = len(bps)
        expected = (self.spec.m,) * n + (self.spec.n_idx,) * n
        if self.values.shape != expected:
            raise ValueError(f"jet table has shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("jet values must be finite")

    @property
    def arity(self) -> int:
        return len(self.basepoints)

    @property
    def zeroth(self) -> np.ndarray:
        """Component values ``u^{A_1..A_n}`` as an array of shape ``(m,)*n``."""
        return self.values[(Ellipsis,) + (0,) * self.arity]

    def value(self, internal, midx) -> complex:
        pos = tuple(self.spec.position(I) for I in midx)
        return complex(self.values[tuple(internal) + pos])


def as_multijet(table) -> MultiJet:
    """View a :class:`Jet`, pair jet or :class:`MultiJet` as a :class:`MultiJet`."""
    if isinstance(table, MultiJet):
        return table
    if isinstance(table, Jet):
        return MultiJet(table.spec, table.basepoint[None, :], table.values)
    if hasattr(table, "basepoints") and hasattr(table, "values"):
        return MultiJet(table.spec, table.basepoints, table.values)
    raise TypeError(f"not a jet table: {type(table).__name__}")


def random_table(rng: np.random.Generator, shape, scale: float, zeroth) -> np.ndarray:
    """Uniform complex table, redrawn until the chosen zeroth-order entries clear the floor."""
    while True:
        table = rng.uniform(-scale, scale, shape) + 1j * rng.uniform(-scale, scale, shape)
        if np.all(np.abs(zeroth(table)) > GENERICITY_FLOOR * scale):
            return table


def random_jet(spec: JetSpec, basepoint=None, seed=0, scale: float = 1.0) -> Jet:
    """Generic random jet; every ``|u^A(basepoint)|`` exceeds ``0.1 * scale``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if basepoint is None:
        basepoint = np.zeros(spec.d)
    rng = np.random.default_rng(seed)
    table = random_table(rng, (spec.m, spec.n_idx), scale, lambda t: t[:, 0])
    return Jet(spec, basepoint, table)


def random_multijet(spec: JetSpec, basepoints, seed=0, scale: float = 1.0) -> MultiJet:
    """Generic random ``n``-particle jet table (``n = len(basepoints)``)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    bps = np.array(basepoints, dtype=float).reshape(-1, spec.d)
    n = len(bps)
    rng = np.random.default_rng(seed)
    shape = (spec.m,) * n + (spec.n_idx,) * n
    table = random_table(rng, shape, scale, lambda t: t[(Ellipsis,) + (0,) * n])
    return MultiJet(spec, bps, table)


@dataclass(frozen=True, eq=False)
class Polynomial:
    """``P^A(x) = sum_E coeffs[A, e] * (x - center)^E`` with exponents ``E = exponents[e]``."""

    center: np.ndarray
    exponents: tuple[MultiIndex, ...]
    coeffs: np.ndarray

    def __post_init__(self):
        center = np.array(self.center, dtype=float).reshape(-1)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "exponents", tuple(tuple(int(e) for e in E) for E in self.exponents))
        object.__setattr__(self, "coeffs", np.atleast_2d(np.array(self.coeffs, dtype=complex)))
        if any(len(E) != self.dim for E in self.exponents):
            raise ValueError("exponent length must match the center dimension")
        if self.coeffs.shape[1] != len(self.exponents):
            raise ValueError("one coefficient column per exponent")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, x) -> np.ndarray:
        dx = np.asarray(x, dtype=float).reshape(-1) - self.center
        monomials = np.array([np.prod(dx ** np.array(E)) for E in self.exponents])
        return self.coeffs @ monomials

    def outer(self, other: "Polynomial") -> "Polynomial":
        """``(P outer Q)^{A*m_Q + B}(x, y) = P^A(x) Q^B(y)`` in the concatenated variables."""
        exps, cols = [], []
        for i, E in enumerate(self.exponents):
            for j, F in enumerate(other.exponents):
                exps.append(E + F)
                cols.append(np.kron(self.coeffs[:, i], other.coeffs[:, j]))
        return Polynomial(np.concatenate([self.center, other.center]), exps, np.array(cols).T)


def borel_realize(jet: Jet) -> Polynomial:
    """Taylor polynomial whose jet at the basepoint reproduces ``jet``."""
    idx = jet.spec.indices
    inv_fact = np.array([1.0 / factorial_of(I) for I in idx])
    return Polynomial(jet.basepoint, idx, jet.values * inv_fact)


def jet_of_poly(P: Polynomial, point, K: int) -> Jet:
    """Exact jet of ``P`` at ``point`` up to order ``K``.

    Uses ``d^I (x-c)^E = E!/(E-I)! (x-c)^(E-I)`` term by term.
    """
    if not isinstance(P, Polynomial):
        raise TypeError(f"jet_of_poly needs a Polynomial coefficient table, got {type(P).__name__}")
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape != (P.dim,):
        raise ValueError("point dimension does not match the polynomial")
    spec = JetSpec(d=P.dim, K=K, m=P.m)
    dx = point - P.center
    values = np.zeros((P.m, spec.n_idx), dtype=complex)
    for k, I in enumerate(spec.indices):
        for e, E in enumerate(P.exponents):
            if any(i > j for i, j in zip(I, E)):
                continue
            factor = 1.0
            for i, j, h in zip(I, E, dx):
                factor *= math.perm(j, i) * h ** (j - i)
            values[:, k] += factor * P.coeffs[:, e]
    return Jet(spec, point, values)
