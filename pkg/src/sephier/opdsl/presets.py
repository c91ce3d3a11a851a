"""Builtin hierarchies: linear Schrödinger, cubic NLS and Doebner–Goldin."""

from __future__ import annotations

from ..jetcore import JetSpec
from ..tensor import Statistics
from .hierarchy import Hierarchy, HierarchyError, lifted_hierarchy


def _unit(d, k, order):
    return "(" + ",".join(str(order if j == k else 0) for j in range(d)) + ")"


def _u(A, d, k=0, order=0):
    return f"u[{A}]({_unit(d, k, order)})"


def _laplacian(A, d):
    return " + ".join(_u(A, d, k, 2) for k in range(d))


def _potential(coeffs, d):
    terms = []
    for k in range(d):
        for power, c in enumerate(coeffs):
            if c == 0:
                continue
            terms.append(f"({float(c)!r})" + (f"*x[0].{k}^{power}" if power else ""))
    return " + ".join(terms)


def _check_order(spec: JetSpec):
    if spec.K < 2:
        raise HierarchyError("second-order presets need K >= 2")


def linear_schrodinger(spec: JetSpec = JetSpec(), stats: Statistics = Statistics(0),
                       potential=(), max_arity: int = 4) -> Hierarchy:
    """``H_1 u^A = -Laplacian u^A + V(x) u^A`` with ``V = sum_k sum_j c_j x_k^j``."""
    _check_order(spec)
    V = _potential(potential, spec.d)
    bodies = []
    for A in range(spec.m):
        body = f"-({_laplacian(A, spec.d)})"
        if V:
            body += f" + ({V})*{_u(A, spec.d)}"
        bodies.append(body)
    return lifted_hierarchy(bodies, spec, stats, max_arity, "linear_schrodinger",
                            {"potential": [float(c) for c in potential]})


def cubic_nls(spec: JetSpec = JetSpec(), stats: Statistics = Statistics(0),
              g: float = 1.0, max_arity: int = 4) -> Hierarchy:
    """``H_1 u = -Laplacian u + g |u|^2 u``, componentwise."""
    _check_order(spec)
    bodies = [f"-({_laplacian(A, spec.d)}) + ({float(g)!r})*abs2({_u(A, spec.d)})*{_u(A, spec.d)}"
              for A in range(spec.m)]
    return lifted_hierarchy(bodies, spec, stats, max_arity, "cubic_nls", {"g": float(g)})


def doebner_goldin(gamma: float = 0.3, spec: JetSpec = JetSpec(), stats: Statistics = Statistics(0),
                   max_arity: int = 4) -> Hierarchy:
    """``H_1 u = -Laplacian u + i gamma (Laplacian rho / rho) u`` with ``rho = |u|^2`` (scalar only).

    ``Laplacian rho`` is expanded in jet entries by the product rule.
    """
    _check_order(spec)
    if spec.m != 1:
        raise HierarchyError("doebner_goldin preset is defined for scalar wave functions (m=1)")
    d = spec.d
    u0 = _u(0, d)
    lap_rho = " + ".join(
        f"{_u(0, d, k, 2)}*conj({u0}) + 2*abs2({_u(0, d, k, 1)}) + {u0}*conj({_u(0, d, k, 2)})"
        for k in range(d)
    )
    body = f"-({_laplacian(0, d)}) + i*({float(gamma)!r})*(({lap_rho})/abs2({u0}))*{u0}"
    return lifted_hierarchy([body], spec, stats, max_arity, "doebner_goldin", {"gamma": float(gamma)})


PRESETS = {
    "linear_schrodinger": linear_schrodinger,
    "cubic_nls": cubic_nls,
    "doebner_goldin": doebner_goldin,
}


def preset(name: str, spec: JetSpec = JetSpec(), stats: Statistics = Statistics(0), **params) -> Hierarchy:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise HierarchyError(f"unknown preset '{name}'; choose from {sorted(PRESETS)}") from None
    return factory(spec=spec, stats=stats, **params)
