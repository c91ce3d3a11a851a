import csv

import numpy as np
import pytest

from sephier.evolution import (EvolutionMap, Grid, GridState, apply_generator, evolve, export_csv, generator_matrix,
                               grid_derivative, observed_order, schmidt_gap, separation_gap)
from sephier.jetcore import JetSpec
from sephier.opdsl import DomainError, Hierarchy, HierarchyError, cubic_nls, doebner_goldin, linear_schrodinger
from sephier.tensor import BOSONS, FERMIONS, simple_tensor, sym_tensor

SCALAR = JetSpec(d=1, K=2, m=1)


def free(stats=BOSONS):
    return linear_schrodinger(SCALAR, stats, max_arity=2)


def test_grid_invariants():
    with pytest.raises(ValueError):
        Grid(1.0, 4)
    g = Grid(2.0, 8)
    assert g.h == 0.25
    np.testing.assert_allclose(g.x, np.arange(8) * 0.25)


def test_grid_state_validation(grid):
    with pytest.raises(ValueError):
        GridState(grid, np.zeros((64, 1))).normalized()
    with pytest.raises(ValueError):
        GridState(grid, np.full((64, 1), np.nan))
    with pytest.raises(ValueError):
        GridState(grid, np.ones((64, 64, 1)))


def test_stencils_match_discrete_symbols(grid):
    k = 3
    f = np.exp(1j * k * grid.x)
    h = grid.h
    np.testing.assert_allclose(grid_derivative(f, 0, 1, h), 1j * np.sin(k * h) / h * f, atol=1e-12)
    np.testing.assert_allclose(grid_derivative(f, 0, 2, h), -(2 - 2 * np.cos(k * h)) / h ** 2 * f, atol=1e-10)


def test_plane_wave_is_a_discrete_eigenstate(grid):
    k = 3
    omega = (2 - 2 * np.cos(k * grid.h)) / grid.h ** 2
    wave = GridState.from_function(grid, lambda x: np.exp(1j * k * x))
    out = evolve(EvolutionMap(free(), 1e-4, 100), wave)
    # states evolve by dPsi/dt = i H(Psi)
    expected = np.exp(1j * omega * 0.01) * wave.data
    assert np.max(np.abs(out.data - expected)) / np.max(np.abs(expected)) < 1e-8


def test_zero_hamiltonian_is_identity(grid):
    hier = Hierarchy(BOSONS, SCALAR, {1: ["0"], 2: ["0"]})
    state = GridState.random(grid, p=2, seed=1)
    out = evolve(EvolutionMap(hier, 1e-3, 10), state)
    np.testing.assert_array_equal(out.data, state.data)


def test_crank_nicolson_conserves_norm(grid):
    hier = linear_schrodinger(SCALAR, potential=(0.3, 0.0, 0.5), max_arity=2)
    for p in (1, 2):
        state = GridState.random(Grid(2 * np.pi, 16) if p == 2 else grid, p=p, seed=p)
        out = evolve(EvolutionMap(hier, 1e-2, 50, "cn"), state)
        assert abs(out.norm() - state.norm()) < 1e-12


def test_crank_nicolson_agrees_with_rk4(grid):
    hier = free()
    state = GridState.random(grid, seed=3, modes=5)
    a = evolve(EvolutionMap(hier, 1e-4, 100, "cn"), state)
    b = evolve(EvolutionMap(hier, 1e-4, 100, "rk4"), state)
    assert np.max(np.abs(a.data - b.data)) < 1e-6 * np.max(np.abs(state.data))


def test_crank_nicolson_rejects_nonlinear():
    with pytest.raises(ValueError):
        EvolutionMap(doebner_goldin(0.3, SCALAR), 1e-4, 1, "cn")


def test_generator_matrix_matches_operator(grid):
    hier = linear_schrodinger(SCALAR, potential=(0.0, 1.0), max_arity=1)
    state = GridState.random(grid, seed=4)
    H = generator_matrix(hier, grid, 1, 1)
    np.testing.assert_allclose(H @ state.data.ravel(), apply_generator(hier, state.data, grid).ravel(),
                               atol=1e-10)


@pytest.mark.parametrize("make", [free, lambda: cubic_nls(SCALAR, max_arity=2)])
def test_translation_equivariance(grid, make):
    hier = make()
    state = GridState.random(grid, p=2, seed=5, modes=6)
    emap = EvolutionMap(hier, 1e-4, 20)
    shifted_then = evolve(emap, state.with_data(np.roll(state.data, 1, axis=(0, 1))))
    then_shifted = np.roll(evolve(emap, state).data, 1, axis=(0, 1))
    assert np.max(np.abs(shifted_then.data - then_shifted)) < 1e-12


def test_evolve_is_deterministic(grid):
    hier = doebner_goldin(0.3, SCALAR)
    state = GridState.from_function(grid, lambda x: 1 + 0.3 * np.exp(1j * x))
    emap = EvolutionMap(hier, 1e-4, 10)
    assert evolve(emap, state).data.tobytes() == evolve(emap, state).data.tobytes()


def test_floor_violation_reports_step_and_point(grid):
    hier = doebner_goldin(0.3, SCALAR)
    data = np.ones((64, 1), complex)
    data[17] = 0
    with pytest.raises(DomainError, match="step 0") as err:
        evolve(EvolutionMap(hier, 1e-4, 3), GridState(grid, data))
    assert "17" in str(err.value)


def test_missing_arity(grid):
    hier = linear_schrodinger(SCALAR, max_arity=1)
    with pytest.raises(HierarchyError):
        evolve(EvolutionMap(hier, 1e-4, 1), GridState.random(Grid(1.0, 8), p=2))


@pytest.mark.parametrize("product", ["plain", "sym"])
@pytest.mark.parametrize("stats", [BOSONS, FERMIONS])
def test_linear_gap_is_small(probe_pair, product, stats):
    phi, psi = probe_pair
    assert separation_gap(free(stats), phi, psi, 0.01, 1e-4, product) < 1e-6


def test_doebner_goldin_gaps(probe_pair):
    phi, psi = probe_pair
    hier = doebner_goldin(0.3, SCALAR)
    assert separation_gap(hier, phi, psi, 0.01, 1e-4, "sym") > 1e-3
    assert separation_gap(hier, phi, psi, 0.01, 1e-4, "plain") < 1e-4


def test_linear_gap_converges_at_second_order_or_better(grid):
    phi = GridState.random(grid, seed=1).normalized()
    psi = GridState.random(grid, seed=2).normalized()
    hier = free()
    for product in ("plain", "sym"):
        gaps = [separation_gap(hier, phi, psi, 0.01, dt, product) for dt in (4e-4, 2e-4, 1e-4)]
        assert observed_order(*gaps) >= 1.8


def test_observed_order_on_exact_sequence():
    assert observed_order(1 + 0.16, 1 + 0.04, 1 + 0.01) == pytest.approx(2.0)


def test_separation_gap_rejects_bad_arguments(probe_pair):
    phi, psi = probe_pair
    with pytest.raises(ValueError):
        separation_gap(free(), phi, psi, 0.01, 1e-4, "weird")
    with pytest.raises(ValueError):
        separation_gap(free(), simple_tensor(phi, psi), psi, 0.01, 1e-4)
    with pytest.raises(ValueError):
        separation_gap(free(), phi, psi, 0.01, 3e-3)


def test_schmidt_gap_rank_one_and_antisymmetric(grid):
    phi = GridState.from_function(grid, lambda x: np.exp(1j * x))
    psi = GridState.from_function(grid, lambda x: np.exp(2j * x))
    assert schmidt_gap(simple_tensor(phi, psi)) < 1e-12
    assert schmidt_gap(sym_tensor(phi, psi, FERMIONS)) == pytest.approx(0.5, abs=1e-12)


def test_schmidt_gap_errors(grid):
    with pytest.raises(ValueError):
        schmidt_gap(GridState.random(grid))


def test_export_csv(tmp_path, small_grid):
    state = GridState.random(small_grid, p=2, m=2, seed=1)
    path = tmp_path / "state.csv"
    export_csv(state, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["i0", "i1", "a0", "a1", "re", "im"]
    assert len(rows) == 1 + 8 * 8 * 2 * 2
    i0, i1, a0, a1 = map(int, rows[7][:4])
    assert complex(float(rows[7][4]), float(rows[7][5])) == state.data[i0, i1, a0, a1]


def test_export_csv_scalar_columns(tmp_path, small_grid):
    path = tmp_path / "one.csv"
    export_csv(GridState.random(small_grid, seed=2), path)
    assert next(csv.reader(path.open())) == ["i0", "re", "im"]
