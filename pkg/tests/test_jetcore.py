import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sephier.jetcore import (JetSpec, Jet, MultiJet, Polynomial, borel_realize, enum_multi_indices, jet_of_poly,
                             random_jet, random_multijet)


def test_enum_multi_indices_examples():
    assert enum_multi_indices(1, 2) == ((0,), (1,), (2,))
    assert enum_multi_indices(2, 1) == ((0, 0), (1, 0), (0, 1))
    assert len(enum_multi_indices(2, 2)) == 6
    assert enum_multi_indices(2, 2)[3:] == ((2, 0), (1, 1), (0, 2))


@given(st.integers(1, 4), st.integers(0, 4))
def test_enum_multi_indices_count_and_order(d, K):
    idx = enum_multi_indices(d, K)
    assert len(idx) == math.comb(d + K, d)
    assert len(set(idx)) == len(idx)
    assert all(min(I) >= 0 and sum(I) <= K and len(I) == d for I in idx)
    orders = [sum(I) for I in idx]
    assert orders == sorted(orders)


@pytest.mark.parametrize("d,K", [(0, 1), (1, -1)])
def test_enum_rejects_bad_arguments(d, K):
    with pytest.raises(ValueError):
        enum_multi_indices(d, K)


def test_random_jet_contract():
    spec = JetSpec(d=1, K=2, m=2)
    a = random_jet(spec, seed=5)
    b = random_jet(spec, seed=5)
    assert a == b
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.size == 6
    assert random_jet(spec, seed=6) != a


def test_random_jet_genericity_floor():
    spec = JetSpec(d=2, K=1, m=3)
    for seed in range(1000):
        jet = random_jet(spec, seed=seed, scale=2.0)
        assert np.all(np.abs(jet.zeroth) > 0.2)
        assert np.all(np.abs(jet.values.real) <= 2.0) and np.all(np.abs(jet.values.imag) <= 2.0)


def test_random_jet_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        random_jet(JetSpec(), scale=0)


def test_jet_table_is_immutable_and_complete():
    jet = random_jet(JetSpec(d=2, K=2, m=1), seed=0)
    with pytest.raises(ValueError):
        jet.values[0, 0] = 1
    with pytest.raises(ValueError):
        Jet(JetSpec(), [0.0], np.zeros((1, 2)))
    with pytest.raises(ValueError):
        Jet(JetSpec(), [0.0], [[np.nan, 0, 0]])


def test_borel_realize_constant():
    spec = JetSpec(d=2, K=3, m=1)
    values = np.zeros((1, spec.n_idx), complex)
    values[0, 0] = 2 - 1j
    P = borel_realize(Jet(spec, [0.3, -0.2], values))
    for x in ([0, 0], [1.5, -2.0], [10, 3]):
        assert P(x)[0] == pytest.approx(2 - 1j)


def test_borel_realize_taylor_coefficients():
    P = borel_realize(Jet(JetSpec(d=1, K=2, m=1), [0.0], [[1, 2, 6]]))
    for x in (-1.0, 0.5, 2.0):
        assert P([x])[0] == pytest.approx(1 + 2 * x + 3 * x ** 2)


def test_jet_of_poly_examples():
    square = Polynomial([0.0], [(2,)], [[1.0]])
    np.testing.assert_array_equal(jet_of_poly(square, [0.0], 2).values[0], [0, 0, 2])
    np.testing.assert_array_equal(jet_of_poly(square, [1.0], 2).values[0], [1, 2, 2])


def test_jet_of_poly_rejects_non_polynomial():
    with pytest.raises(TypeError):
        jet_of_poly(lambda x: x ** 2, [0.0], 2)


def test_jet_of_poly_matches_sympy():
    # independent oracle: symbolic differentiation of a 2-variable polynomial
    rng = np.random.default_rng(3)
    exps = [(0, 0), (1, 0), (0, 2), (2, 1), (3, 0), (1, 3)]
    coeffs = rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))
    center = np.array([0.4, -0.7])
    P = Polynomial(center, exps, [coeffs])
    x, y = sympy.symbols("x y", real=True)
    expr = sum(complex(c) * (x - center[0]) ** a * (y - center[1]) ** b for c, (a, b) in zip(coeffs, exps))
    point = [1.1, 0.25]
    jet = jet_of_poly(P, point, 3)
    for k, (i, j) in enumerate(jet.spec.indices):
        expected = complex(sympy.diff(expr, x, i, y, j).subs({x: point[0], y: point[1]}).evalf())
        assert jet.values[0, k] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def _round_trip_rel(jet):
    back = jet_of_poly(borel_realize(jet), jet.basepoint, jet.spec.K)
    return np.max(np.abs(back.values - jet.values)) / np.max(np.abs(jet.values))


@pytest.mark.parametrize("seed", range(50))
def test_borel_jet_round_trip(seed):
    rng = np.random.default_rng(seed)
    spec = JetSpec(d=int(rng.integers(1, 4)), K=int(rng.integers(0, 4)), m=int(rng.integers(1, 3)))
    jet = random_jet(spec, rng.uniform(-2, 2, spec.d), seed=seed)
    assert _round_trip_rel(jet) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_poly_jet_round_trip(seed):
    rng = np.random.default_rng(seed)
    exps = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    P = Polynomial(rng.normal(size=2), exps, [rng.normal(size=6) + 1j * rng.normal(size=6)])
    point = rng.normal(size=2)
    Q = borel_realize(jet_of_poly(P, point, 2))
    for x in rng.normal(size=(5, 2)):
        assert Q(x)[0] == pytest.approx(P(x)[0], rel=1e-12, abs=1e-12)


def test_polynomial_outer_evaluates_product():
    P = borel_realize(random_jet(JetSpec(d=1, K=2, m=2), [0.1], seed=1))
    Q = borel_realize(random_jet(JetSpec(d=1, K=2, m=2), [-0.4], seed=2))
    R = P.outer(Q)
    x, y = 0.7, -1.3
    np.testing.assert_allclose(R([x, y]), np.kron(P([x]), Q([y])), rtol=1e-13)


def test_random_multijet_shape_and_floor():
    spec = JetSpec(d=1, K=2, m=2)
    mj = random_multijet(spec, [[0.0], [1.0], [2.0]], seed=4)
    assert isinstance(mj, MultiJet)
    assert mj.values.shape == (2, 2, 2, 3, 3, 3)
    assert np.all(np.abs(mj.zeroth) > 0.1)
