"""Nonlinear gauge transformations and the deformed tensor product.

The family used here acts on the polar form ``Psi = R exp(iS)`` by
``S -> lam * S + gamma * ln R``; its inverse is ``S -> (S - gamma ln R) / lam``.
It leaves ``|Psi|`` untouched pointwise. Gauged evolutions are computed in
the undeformed frame: ``E' = N E N^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import AMPLITUDE_FLOOR, EvolutionMap, apply_generator, evolve, relative_gap
from .grid import GridState
from .tensor import BOSONS, sym_tensor


class GaugeError(ValueError):
    pass


@dataclass(frozen=True)
class GaugeParams:
    gamma: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be nonzero for the gauge map to be invertible")


def _amplitude(state: GridState) -> np.ndarray:
    if state.m != 1:
        raise GaugeError("gauge transformations act on scalar (m=1) states")
    R = np.abs(state.data)
    if np.min(R) <= AMPLITUDE_FLOOR:
        point = tuple(int(i) for i in np.unravel_index(int(np.argmin(R)), R.shape)[: state.p])
        raise GaugeError(f"|Psi| = {np.min(R):.3g} below floor at grid point {point}")
    return R


def unwrapped_phase(state: GridState) -> np.ndarray:
    """Phase continued along every grid axis; rejects jumps above pi/2 and nonzero winding."""
    S = np.angle(state.data)
    for axis in range(state.p):
        step = np.diff(S, axis=axis, append=np.take(S, [0], axis=axis))
        wrapped = (step + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(wrapped)) > np.pi / 2:
            raise GaugeError("phase unwrapping is ambiguous: adjacent-point jump exceeds pi/2")
        winding = np.sum(wrapped, axis=axis) / (2 * np.pi)
        if np.max(np.abs(winding)) > 0.5:
            raise GaugeError("state winds around zero along the periodic grid")
        S = np.unwrap(S, axis=axis)
    return S


def apply_gauge(params: GaugeParams, state: GridState, direction: str = "forward") -> GridState:
    R = _amplitude(state)
    logR = np.log(R)
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    if params.lam == 1:
        # phase branch is irrelevant for lam = 1
        shift = params.gamma * logR if direction == "forward" else -params.gamma * logR
        return state.with_data(state.data * np.exp(1j * shift))
    S = unwrapped_phase(state)
    if direction == "forward":
        new = params.lam * S + params.gamma * logR
    else:
        new = (S - params.gamma * logR) / params.lam
    return state.with_data(R * np.exp(1j * new))


def gauge_inverse(params, state):
    return apply_gauge(params, state, "inverse")


def deformed_tensor(params: GaugeParams, phi: GridState, psi: GridState, stats=BOSONS) -> GridState:
    """``N(N^-1 phi (x) N^-1 psi)`` with the (anti-)symmetrized product in the middle."""
    inner = sym_tensor(gauge_inverse(params, phi), gauge_inverse(params, psi), stats)
    try:
        return apply_gauge(params, inner)
    except GaugeError as exc:
        raise GaugeError(f"symmetrized product vanishes: {exc}") from exc


def gauged_evolve(params: GaugeParams, emap: EvolutionMap, state: GridState) -> GridState:
    """``E' = N E N^-1`` applied to ``state``."""
    return apply_gauge(params, evolve(emap, gauge_inverse(params, state)))


def deformed_generator(params: GaugeParams, hier, state: GridState, dt: float = 1e-4) -> GridState:
    """``(1/i) d/dt N(E(t) N^-1 Psi)`` at ``t = 0`` by a central difference of step ``dt``."""
    plus = gauged_evolve(params, EvolutionMap(hier, dt, 1), state)
    minus = gauged_evolve(params, EvolutionMap(hier, -dt, 1), state)
    return state.with_data((plus.data - minus.data) / (2j * dt))


def chain_rule_generator(params: GaugeParams, hier, state: GridState) -> GridState:
    """Same generator in closed form.

    With ``Phi = N^-1 Psi`` and ``w = i H(Phi) / Phi``:
    ``d/dt N(Phi) = N(Phi) (Re w + i (lam Im w + gamma Re w))``.
    """
    phi = gauge_inverse(params, state)
    w = 1j * apply_generator(hier, phi.data, phi.grid) / phi.data
    dN = state.data * (w.real + 1j * (params.lam * w.imag + params.gamma * w.real))
    return state.with_data(dN / 1j)


def deformed_separation_gap(params: GaugeParams, hier, phi: GridState, psi: GridState, t: float,
                            dt: float, product: str = "deformed") -> float:
    """Separation gap of the gauged hierarchy against the deformed (default) or plain symmetrized product."""
    stats = hier.stats
    if product == "deformed":
        prod = lambda a, b: deformed_tensor(params, a, b, stats)  # noqa: E731
    elif product == "sym":
        prod = lambda a, b: sym_tensor(a, b, stats)  # noqa: E731
    else:
        raise ValueError(f"unknown product '{product}'")
    emap = EvolutionMap.for_time(hier, t, dt)
    lhs = gauged_evolve(params, emap, prod(phi, psi))
    rhs = prod(gauged_evolve(params, emap, phi), gauged_evolve(params, emap, psi))
    return relative_gap(lhs, rhs)
