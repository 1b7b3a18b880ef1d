import csv

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qpdf.chemistry import PsrParams, drift, stable_roots
from qpdf.errors import DomainError
from qpdf.fokker_planck import (
    DiscretePdf,
    assemble_transport_operator,
    build_grid,
    evolve_classical,
    grid_moment,
    init_beta,
    mean_and_variance,
    upwind_operator,
    write_trajectory_csv,
)

params_st = st.builds(
    PsrParams,
    rate_prefactor=st.floats(0.0, 40.0),
    phi_a=st.floats(0.2, 4.0),
    phi_i=st.floats(0.02, 1.0),
    mixing_rate=st.floats(0.0, 2.0),
)


def test_grid_examples():
    np.testing.assert_array_equal(build_grid(1).centers, [0.25, 0.75])
    np.testing.assert_array_equal(build_grid(2).centers, [0.125, 0.375, 0.625, 0.875])
    g = build_grid(5)
    assert g.n_cells == 32 and g.spacing == 0.03125


@pytest.mark.parametrize("n", [0, 13])
def test_grid_range(n):
    with pytest.raises(DomainError):
        build_grid(n)


@given(st.integers(1, 12))
def test_grid_invariants(n):
    g = build_grid(n)
    c = g.centers
    assert np.all(np.diff(c) > 0)
    assert c[0] == g.spacing / 2 and c[-1] == 1 - g.spacing / 2


def test_zero_drift_gives_zero_operator():
    L = assemble_transport_operator(build_grid(4), PsrParams(rate_prefactor=0.0, mixing_rate=0.0))
    assert L.matrix.nnz == 0


def test_two_cell_stencil():
    g = build_grid(1)
    L = assemble_transport_operator(g).matrix.toarray()
    gf = drift(0.5)
    assert gf > 0
    np.testing.assert_allclose(L, gf / 0.5 * np.array([[-1.0, 0.0], [1.0, 0.0]]), rtol=0, atol=1e-15)


def test_negative_face_velocity_uses_right_donor():
    L = upwind_operator(np.array([-2.0]), 0.5).toarray()
    np.testing.assert_array_equal(L, [[0.0, 4.0], [0.0, -4.0]])


@settings(max_examples=50)
@given(params_st, st.integers(1, 8))
def test_operator_conservative_and_upwind(params, n):
    L = assemble_transport_operator(build_grid(n), params).matrix.toarray()
    assert np.max(np.abs(L.sum(axis=0))) < 1e-12
    off = L - np.diag(np.diag(L))
    assert np.all(off >= 0)


def test_init_beta_examples():
    g = build_grid(5)
    np.testing.assert_allclose(init_beta(g, 1, 1).values, 1.0, rtol=0, atol=1e-15)
    f = init_beta(g, 8, 8)
    np.testing.assert_array_equal(f.values, f.values[::-1])
    assert grid_moment(f, g, lambda p: p) == pytest.approx(0.5, abs=1e-15)
    assert f.total() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        init_beta(g, 0, 2)


@given(st.floats(0.2, 20), st.integers(1, 10))
def test_init_beta_symmetric_shapes(a, n):
    f = init_beta(build_grid(n), a, a)
    np.testing.assert_array_equal(f.values, f.values[::-1])


def test_grid_moment_examples():
    g = build_grid(4)
    uniform = init_beta(g, 1, 1)
    assert grid_moment(uniform, g, lambda p: np.ones_like(p)) == pytest.approx(1.0, abs=1e-15)
    assert grid_moment(uniform, g, lambda p: p) == pytest.approx(0.5, abs=1e-15)
    delta = np.zeros(16)
    delta[5] = 1 / g.spacing
    assert grid_moment(DiscretePdf(delta, g), g, lambda p: p) == pytest.approx(g.centers[5], abs=1e-15)


def test_zero_operator_keeps_f0():
    g = build_grid(3)
    f0 = init_beta(g)
    traj = evolve_classical(f0, sp.csr_matrix((8, 8)), 0.3, 5)
    assert len(traj) == 6
    for f in traj:
        np.testing.assert_array_equal(f.values, f0.values)


def test_dt_must_be_positive():
    g = build_grid(2)
    with pytest.raises(DomainError):
        evolve_classical(init_beta(g), assemble_transport_operator(g), 0.0, 1)


@settings(max_examples=30)
@given(params_st, st.integers(1, 7), st.floats(0.01, 5.0), st.floats(0.5, 12))
def test_conservation_and_positivity(params, n, dt, shape):
    g = build_grid(n)
    traj = evolve_classical(init_beta(g, shape, shape), assemble_transport_operator(g, params), dt, 12)
    for f in traj:
        assert abs(f.total() - 1.0) < 1e-10
        assert f.values.min() >= -1e-12


def test_default_run_peak_near_stable_root(default_run):
    grid, traj = default_run["grid"], default_run["traj"]
    root = max(stable_roots())
    peak = grid.centers[np.argmax(traj[-1].values)]
    assert abs(peak - root) <= grid.spacing
    peaks = [grid.centers[np.argmax(f.values)] for f in traj]
    assert abs(peaks[0] - 0.5) <= grid.spacing
    assert np.all(np.diff(peaks) >= 0)


def test_first_order_refinement():
    means = []
    for n in (5, 6, 7, 8):
        g = build_grid(n)
        traj = evolve_classical(init_beta(g), assemble_transport_operator(g), 0.5, 15)
        means.append(mean_and_variance(traj[-1])[0])
    d = np.abs(np.diff(means))
    orders = np.log2(d[:-1] / d[1:])
    assert np.all((orders >= 0.5) & (orders <= 1.5)), orders


def test_trajectory_csv(tmp_path):
    g = build_grid(2)
    traj = evolve_classical(init_beta(g), assemble_transport_operator(g), 0.5, 2)
    path = tmp_path / "pdf.csv"
    write_trajectory_csv(path, traj, 0.5)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["time", "phi", "f"]
    assert len(rows) == 1 + 3 * 4
    assert float(rows[-1][0]) == 1.0 and float(rows[-1][1]) == 0.875
    assert float(rows[5][2]) == traj[1].values[0]
