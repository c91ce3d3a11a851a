"""Jet-level tensor-derivation residuals, invariance flows and the linearity certificate.

All residuals assume the phase factor of the separation property is 1.
Every check samples seeded generic jets; per-sample seeds are derived from
``(seed, sample_index)`` so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .jetcore import ABQuadruple, Jet, JetSpec, MultiJet, random_multijet
from .opdsl.evaluate import eval_operator, wirtinger_grad
from .parallel import ordered_map
from .tensor import conglomerate_prefactor, outer_jets, plain_product_jet, sym_product_jet

FLOW_KINDS = ("scale", "shift", "scale_swapped", "shift_swapped")


class Residual(NamedTuple):
    """Residual matrix over output internal indices plus the largest contributing term."""

    matrix: np.ndarray
    scale: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    @property
    def normalized(self) -> float:
        if self.scale == 0:
            return 0.0 if self.max_abs == 0 else math.inf
        return self.max_abs / self.scale


def _residual(lhs, rhs_terms) -> Residual:
    terms = [lhs] + list(rhs_terms)
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return Residual(lhs - sum(rhs_terms), scale)


def _seed(seed, *extra) -> list[int]:
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    return base + [int(e) for e in extra]


# --- plain tensor derivation -------------------------------------------------

def plain_residual(hier, alpha: Jet, betaT: Jet, hier_b=None, joint=None) -> Residual:
    """``H_2(alpha betaT) - [H_1(alpha) betaT_0 + alpha_0 H_1(betaT)]`` over ``(A, B)``.

    ``hier_b`` supplies the second factor's one-particle operator and
    ``joint`` the two-particle operator; both default to ``hier``.
    """
    hier_b = hier if hier_b is None else hier_b
    joint = hier if joint is None else joint
    lhs = eval_operator(joint, 2, plain_product_jet(alpha, betaT))
    t1 = np.multiply.outer(eval_operator(hier, 1, alpha), betaT.zeroth)
    t2 = np.multiply.outer(alpha.zeroth, eval_operator(hier_b, 1, betaT))
    return _residual(lhs, [t1, t2])


# --- (anti-)symmetric tensor derivation --------------------------------------

def _pair_residual(hier, alpha: MultiJet, beta: MultiJet, alphaT: MultiJet, betaT: MultiJet,
                   prefactor: float, sign: int) -> Residual:
    """Separability residual for two (conglomerate) particles of arity ``n`` each.

    The joint jet is ``c (alpha betaT + sign beta alphaT)``; the condition is
    ``H_2n(joint)/c = H_n(alpha) betaT_0 + alpha_0 H_n(betaT)
    + sign H_n(beta) alphaT_0 + sign beta_0 H_n(alphaT)``.
    """
    n = alpha.arity
    values = prefactor * (outer_jets(alpha.values, betaT.values) + sign * outer_jets(beta.values, alphaT.values))
    joint = MultiJet(alpha.spec, np.concatenate([alpha.basepoints, alphaT.basepoints]), values)
    lhs = eval_operator(hier, 2 * n, joint) / prefactor
    H = {name: eval_operator(hier, n, jet) for name, jet in
         (("alpha", alpha), ("beta", beta), ("alphaT", alphaT), ("betaT", betaT))}
    outer = np.multiply.outer
    terms = [
        outer(H["alpha"], betaT.zeroth),
        outer(alpha.zeroth, H["betaT"]),
        sign * outer(H["beta"], alphaT.zeroth),
        sign * outer(beta.zeroth, H["alphaT"]),
    ]
    return _residual(lhs, terms)


def _multi(jet: Jet) -> MultiJet:
    return MultiJet(jet.spec, jet.basepoint[None, :], jet.values)


def sym_residual(hier, ab: ABQuadruple) -> Residual:
    """``2 H_2(x, y, a_hat) - [H_1(alpha) betaT_0 + alpha_0 H_1(betaT)
    + (-1)^f H_1(beta) alphaT_0 + (-1)^f beta_0 H_1(alphaT)]``."""
    return _pair_residual(hier, *map(_multi, ab.astuple()), 0.5, hier.stats.sign)


def separability_rhs(hier, ab: ABQuadruple) -> np.ndarray:
    """Right-hand side of the symmetrized separability condition (one-particle terms only)."""
    sign = hier.stats.sign
    H = lambda jet: eval_operator(hier, 1, jet)  # noqa: E731
    outer = np.multiply.outer
    return (outer(H(ab.alpha), ab.betaT.zeroth) + outer(ab.alpha.zeroth, H(ab.betaT))
            + sign * outer(H(ab.beta), ab.alphaT.zeroth) + sign * outer(ab.beta.zeroth, H(ab.alphaT)))


# --- invariance flows -------------------------------------------------------

def apply_flow(ab: ABQuadruple, kind: str, s: complex, stats) -> ABQuadruple:
    """Flows on the quadruple that leave ``sym_product_jet`` unchanged.

    ``scale``: alpha -> s alpha, betaT -> betaT / s.
    ``shift``: alpha -> alpha + s beta, alphaT -> alphaT - s (-1)^f betaT.
    The ``_swapped`` kinds exchange the roles of alpha and beta.
    """
    sign = stats.sign if hasattr(stats, "sign") else (-1) ** int(stats)
    a, b, aT, bT = ab.astuple()
    swapped = kind.endswith("_swapped")
    if swapped:
        a, b, aT, bT = b, a, bT, aT
    base = kind.removesuffix("_swapped")
    if base == "scale":
        if s == 0:
            raise ValueError("scale flow needs s != 0")
        a, bT = a.replace(s * a.values), bT.replace(bT.values / s)
    elif base == "shift":
        a, aT = a.replace(a.values + s * b.values), aT.replace(aT.values - s * sign * bT.values)
    else:
        raise ValueError(f"unknown flow kind '{kind}'; choose from {FLOW_KINDS}")
    if swapped:
        a, b, aT, bT = b, a, bT, aT
    return ABQuadruple(a, b, aT, bT)


def _directional(hier, at: Jet, direction: Jet) -> np.ndarray:
    """``sum_{C,I} direction[C,I] dH_1/du[C,I](at)``, Wirtinger derivatives."""
    out = np.zeros(hier.spec.m, dtype=complex)
    for C in range(hier.spec.m):
        for k, I in enumerate(hier.spec.indices):
            out = out + direction.values[C, k] * wirtinger_grad(hier, 1, at, (C, I))
    return out


def bracket(hier, at: Jet, direction: Jet) -> np.ndarray:
    """``sum beta_I dH_1/dalpha_I (alpha) - H_1(beta)`` with ``alpha = at`` and ``beta = direction``."""
    return _directional(hier, at, direction) - eval_operator(hier, 1, direction)


def flow_field_residual(hier, ab: ABQuadruple) -> Residual:
    """Shift-flow vector field applied to the separability right-hand side.

    ``b(alpha, beta) betaT_0 - beta_0 b(alphaT, betaT)`` with ``b`` from :func:`bracket`.
    """
    bx = bracket(hier, ab.alpha, ab.beta)
    by = bracket(hier, ab.alphaT, ab.betaT)
    t1 = np.multiply.outer(bx, ab.betaT.zeroth)
    t2 = np.multiply.outer(ab.beta.zeroth, by)
    return Residual(t1 - t2, max(float(np.max(np.abs(t1))), float(np.max(np.abs(t2))), _rhs_scale(hier, ab)))


def _rhs_scale(hier, ab) -> float:
    return float(np.max(np.abs(separability_rhs(hier, ab))))


def normalized_brackets(hier, ab: ABQuadruple) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the constant-``k`` identity: ``b_x / beta_0`` and ``b_y / betaT_0``."""
    return (bracket(hier, ab.alpha, ab.beta) / ab.beta.zeroth,
            bracket(hier, ab.alphaT, ab.betaT) / ab.betaT.zeroth)


def shift_flow_derivative(hier, ab: ABQuadruple, h: float = 1e-5) -> np.ndarray:
    """``d/ds`` of the separability right-hand side along the shift flow at ``s = 0``.

    Central differences along ``s = +-h`` and ``s = +-ih``, combined as a Wirtinger derivative in ``s``.
    """
    R = lambda s: separability_rhs(hier, apply_flow(ab, "shift", s, hier.stats))  # noqa: E731
    d_re = (R(h) - R(-h)) / (2 * h)
    d_im = (R(1j * h) - R(-1j * h)) / (2 * h)
    return 0.5 * (d_re - 1j * d_im)


# --- sampling ---------------------------------------------------------------

def _to_jet(mj: MultiJet) -> Jet:
    return Jet(mj.spec, mj.basepoints[0], mj.values)


def random_conglomerate_family(spec: JetSpec, N: int, seed, scale: float = 1.0):
    """Generic ``(alpha, beta, alphaT, betaT)`` of arity ``N``; alpha, beta at x and the tilded pair at y."""
    rng = np.random.default_rng(_seed(seed, 0))
    x = rng.uniform(-1, 1, (N, spec.d))
    y = rng.uniform(-1, 1, (N, spec.d))
    return (random_multijet(spec, x, _seed(seed, 1), scale),
            random_multijet(spec, x, _seed(seed, 2), scale),
            random_multijet(spec, y, _seed(seed, 3), scale),
            random_multijet(spec, y, _seed(seed, 4), scale))


def random_quadruple(spec: JetSpec, seed, scale: float = 1.0) -> ABQuadruple:
    return ABQuadruple(*map(_to_jet, random_conglomerate_family(spec, 1, seed, scale)))


# --- reports and witnesses --------------------------------------------------

def _encode(arr) -> dict:
    arr = np.asarray(arr)
    return {"shape": list(arr.shape),
            "re": [float(v) for v in arr.real.ravel()],
            "im": [float(v) for v in np.imag(arr).ravel()]}


def _decode(doc) -> np.ndarray:
    return (np.array(doc["re"], dtype=float) + 1j * np.array(doc["im"], dtype=float)).reshape(doc["shape"])


def encode_multijet(mj) -> dict:
    if isinstance(mj, Jet):
        mj = _multi(mj)
    return {"basepoints": _encode(mj.basepoints), "values": _encode(mj.values)}


def decode_multijet(doc, spec: JetSpec) -> MultiJet:
    return MultiJet(spec, _decode(doc["basepoints"]).real, _decode(doc["values"]))


@dataclass
class ResidualReport:
    check: str
    samples: int
    max_residual: float
    witness: dict
    tolerance: float
    passed: bool
    per_sample: list[float] = field(default_factory=list)

    def count_above(self, threshold: float) -> int:
        return sum(v > threshold for v in self.per_sample)

    def to_json(self) -> dict:
        return {"check": self.check, "samples": self.samples, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "passed": self.passed, "witness": self.witness,
                "per_sample": self.per_sample}


def _sweep(check, sample_count, seed, tolerance, evaluate_sample) -> ResidualReport:
    if sample_count < 1:
        raise ValueError("need at least one sample")
    results = ordered_map(lambda i: evaluate_sample(_seed(seed, i)), range(sample_count))
    values = [float(r[0]) for r in results]
    worst = int(np.argmax(values))
    return ResidualReport(check, sample_count, values[worst], results[worst][1], tolerance,
                          values[worst] < tolerance, values)


def _family_witness(check, sample_seed, jets, **params) -> dict:
    names = ("alpha", "beta", "alphaT", "betaT")
    return {"check": check, "seed": sample_seed, "params": params,
            "jets": {name: encode_multijet(j) for name, j in zip(names, jets) if j is not None}}


def plain_sweep(hier, sample_count=100, seed=0, tolerance=1e-8) -> ResidualReport:
    def one(s):
        ab = random_quadruple(hier.spec, s)
        r = plain_residual(hier, ab.alpha, ab.betaT).normalized
        return r, _family_witness("plain-derivation", s, (ab.alpha, None, None, ab.betaT))
    return _sweep("plain-derivation", sample_count, seed, tolerance, one)


def sym_sweep(hier, sample_count=100, seed=0, tolerance=1e-8) -> ResidualReport:
    def one(s):
        ab = random_quadruple(hier.spec, s)
        return sym_residual(hier, ab).normalized, _family_witness("sym-derivation", s, ab.astuple())
    return _sweep("sym-derivation", sample_count, seed, tolerance, one)


def flow_field_sweep(hier, sample_count=100, seed=0, tolerance=1e-8) -> ResidualReport:
    def one(s):
        ab = random_quadruple(hier.spec, s)
        return flow_field_residual(hier, ab).normalized, _family_witness("flow-field", s, ab.astuple())
    return _sweep("flow-field", sample_count, seed, tolerance, one)


def _flow_params(seed):
    rng = np.random.default_rng(_seed(seed, 9))
    kind = FLOW_KINDS[int(rng.integers(len(FLOW_KINDS)))]
    s = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
    return kind, s


def flow_invariance_residual(ab: ABQuadruple, kind: str, s: complex, stats) -> float:
    before = sym_product_jet(ab, stats).values
    after = sym_product_jet(apply_flow(ab, kind, s, stats), stats).values
    return float(np.max(np.abs(after - before)) / np.max(np.abs(before)))


def flow_invariance_sweep(hier, sample_count=100, seed=0, tolerance=1e-12) -> ResidualReport:
    def one(s):
        ab = random_quadruple(hier.spec, s)
        kind, z = _flow_params(s)
        w = _family_witness("flow-invariance", s, ab.astuple(), kind=kind, s=[z.real, z.imag])
        return flow_invariance_residual(ab, kind, z, hier.stats), w
    return _sweep("flow-invariance", sample_count, seed, tolerance, one)


# --- conglomerate particles ------------------------------------------------

def conglomerate_sign(stats, N: int, fermi_sign: bool = False) -> int:
    """Exchange sign for the restricted family: ``(-1)^f`` for single particles, bosonic otherwise."""
    if N == 1 or fermi_sign:
        return stats.sign
    return 1


def conglomerate_residual(hier, family, N: int, fermi_sign: bool = False) -> Residual:
    return _pair_residual(hier, *family, conglomerate_prefactor(N), conglomerate_sign(hier.stats, N, fermi_sign))


def conglomerate_reduce(hier, N: int, sample_count=100, seed=0, tolerance=1e-8,
                        fermi_sign: bool = False) -> ResidualReport:
    """Two-conglomerate separability residual built from ``N``-particle jets.

    Needs operators of arity ``N`` and ``2N``; ``N = 1`` is the ordinary
    symmetrized check.
    """
    for n in (N, 2 * N):
        hier.components(n)

    def one(s):
        family = random_conglomerate_family(hier.spec, N, s)
        r = conglomerate_residual(hier, family, N, fermi_sign).normalized
        return r, _family_witness("conglomerate", s, family, N=N, fermi_sign=fermi_sign)
    return _sweep("conglomerate", sample_count, seed, tolerance, one)


def replay(witness: dict, hier) -> float:
    """Re-evaluate a witness and return its normalized residual."""
    spec = hier.spec
    jets = {k: decode_multijet(v, spec) for k, v in witness["jets"].items()}
    check, params = witness["check"], witness.get("params", {})
    if check == "conglomerate":
        family = tuple(jets[k] for k in ("alpha", "beta", "alphaT", "betaT"))
        return conglomerate_residual(hier, family, params["N"], params.get("fermi_sign", False)).normalized
    if check == "certify-linearity":
        alpha, beta = _to_jet(jets["alpha"]), _to_jet(jets["beta"])
        k_hat = complex(*params["k_hat"])
        return float(np.max(np.abs(bracket(hier, alpha, beta) / beta.zeroth - k_hat)))
    if check == "plain-derivation":
        return plain_residual(hier, _to_jet(jets["alpha"]), _to_jet(jets["betaT"])).normalized
    ab = ABQuadruple(*(_to_jet(jets[k]) for k in ("alpha", "beta", "alphaT", "betaT")))
    if check == "sym-derivation":
        return sym_residual(hier, ab).normalized
    if check == "flow-field":
        return flow_field_residual(hier, ab).normalized
    if check == "flow-invariance":
        re, im = params["s"]
        return flow_invariance_residual(ab, params["kind"], complex(re, im), hier.stats)
    raise ValueError(f"no replay for check '{check}'")


# --- linearity certificate --------------------------------------------------

@dataclass
class LinearityCertificate:
    k_hat: complex
    max_dev: float
    samples: int
    verdict: str
    tolerance: float
    witness: dict = field(default_factory=dict)

    @property
    def linear(self) -> bool:
        return self.verdict == "linear-consistent"


def linearity_certificate(hier, sample_count=100, seed=0, tolerance=1e-6) -> LinearityCertificate:
    """Sampled test of the constant-``k`` identity for the one-particle operator.

    For each generic pair ``(alpha, beta)`` at a common point, ``b^A / beta_0^A``
    must be one constant ``k``; ``k_hat`` is the componentwise median and
    ``max_dev`` the largest deviation from it.
    """
    if sample_count < 2:
        raise ValueError("certificate needs at least two samples")
    spec = hier.spec

    def one(s):
        ab = random_quadruple(spec, s)
        b = bracket(hier, ab.alpha, ab.beta)
        beta0 = ab.beta.zeroth
        if np.any(np.abs(beta0) == 0):
            raise ValueError("degenerate sample: beta_0 vanishes")
        return b / beta0, s, ab

    results = ordered_map(lambda i: one(_seed(seed, i)), range(sample_count))
    normalized = np.concatenate([r[0] for r in results])
    k_hat = complex(np.median(normalized.real), np.median(normalized.imag))
    dev = np.abs(normalized - k_hat)
    worst = int(np.argmax(dev)) // spec.m
    _, wseed, wab = results[worst]
    max_dev = float(np.max(dev))
    verdict = "linear-consistent" if max_dev < tolerance else "nonlinear"
    witness = _family_witness("certify-linearity", wseed, (wab.alpha, wab.beta, None, None),
                              k_hat=[k_hat.real, k_hat.imag])
    return LinearityCertificate(k_hat, max_dev, sample_count, verdict, tolerance, witness)
