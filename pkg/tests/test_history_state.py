import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qpdf.chemistry import PsrParams
from qpdf.errors import DomainError
from qpdf.fokker_planck import assemble_transport_operator, build_grid, evolve_classical, init_beta
from qpdf.history_state import (
    assemble_history_system,
    condition_estimate,
    export_coo,
    extract_time_block,
    read_coo,
    solve_ideal,
)

params_st = st.builds(
    PsrParams,
    rate_prefactor=st.floats(0.0, 40.0),
    phi_a=st.floats(0.2, 4.0),
    phi_i=st.floats(0.02, 1.0),
    mixing_rate=st.floats(0.0, 2.0),
)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_single_step_zero_operator():
    f0 = np.array([1.0, 3.0])
    s = assemble_history_system(sp.csr_matrix((2, 2)), f0, 0.1, 1)
    I = np.eye(2)
    np.testing.assert_array_equal(s.A.toarray(), np.block([[I, 0 * I], [-I, I]]))
    np.testing.assert_array_equal(s.b, [1.0, 3.0, 0.0, 0.0])


def test_default_dimensions(default_run):
    s = default_run["system"]
    assert s.n_total == 512 and s.n_qubits == 9 and s.n_blocks == 16 and s.block_size == 32
    assert s.nnz <= s.n_total * 4
    assert s.max_row_nnz() <= 4
    assert 0.99 < s.sparsity < 1.0


def test_block_structure(default_run):
    s, L = default_run["system"], default_run["L"].matrix.toarray()
    A = s.A.toarray()
    n = s.block_size
    I = np.eye(n)
    blk = lambda i, j: A[i * n:(i + 1) * n, j * n:(j + 1) * n]
    np.testing.assert_array_equal(blk(0, 0), I)
    for k in range(1, s.n_blocks):
        np.testing.assert_allclose(blk(k, k), I - s.dt * L, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(blk(k, k - 1), -I)
    mask = np.ones_like(A, dtype=bool)
    for k in range(s.n_blocks):
        mask[k * n:(k + 1) * n, k * n:(k + 1) * n] = False
        if k:
            mask[k * n:(k + 1) * n, (k - 1) * n:k * n] = False
    assert not np.any(A[mask])
    np.testing.assert_array_equal(s.b[:n], default_run["f0"].values)
    assert not np.any(s.b[n:])


def test_dimension_checks():
    with pytest.raises(DomainError):
        assemble_history_system(sp.identity(3), np.ones(3), 0.1, 1)
    with pytest.raises(DomainError):
        assemble_history_system(sp.identity(4), np.ones(2), 0.1, 1)
    with pytest.raises(DomainError):
        assemble_history_system(sp.identity(32), np.ones(32), 0.1, 10)


def test_zero_operator_every_block_is_f0():
    g = build_grid(3)
    f0 = init_beta(g)
    hv = solve_ideal(assemble_history_system(sp.csr_matrix((8, 8)), f0, 0.5, 3))
    for k in range(8):
        np.testing.assert_allclose(hv.block(k), f0.values, rtol=1e-15)
        np.testing.assert_allclose(extract_time_block(hv, k).values, f0.values, rtol=1e-14)


def test_two_by_two_hand_inversion():
    L = np.array([[-2.0, 1.0], [2.0, -1.0]])
    dt = 0.25
    f0 = np.array([1.5, 0.5])
    # I - dt L = [[1.5, -0.25], [-0.5, 1.25]], det = 1.75
    inv = np.array([[1.25, 0.25], [0.5, 1.5]]) / 1.75
    hv = solve_ideal(assemble_history_system(sp.csr_matrix(L), f0, dt, 1))
    np.testing.assert_array_equal(hv.block(0), f0)
    np.testing.assert_allclose(hv.block(1), inv @ f0, rtol=1e-15)


def test_oracle_equivalence(default_run):
    hv, traj, grid = default_run["hv"], default_run["traj"], default_run["grid"]
    for k, f in enumerate(traj):
        assert _rel(hv.block(k), f.values) < 1e-10
        assert _rel(extract_time_block(hv, k, grid).values, f.values) < 1e-10
    np.testing.assert_allclose(extract_time_block(hv, 0, grid).values, default_run["f0"].values, rtol=1e-14)


def test_block_index_error(default_run):
    with pytest.raises(IndexError):
        default_run["hv"].block(16)
    with pytest.raises(IndexError):
        extract_time_block(default_run["hv"], -1)


@settings(max_examples=25)
@given(params_st, st.integers(1, 5), st.integers(0, 4), st.floats(0.01, 3.0))
def test_blocks_conserve_mass(params, n_phi, n_t, dt):
    g = build_grid(n_phi)
    f0 = init_beta(g, 3, 5)
    L = assemble_transport_operator(g, params)
    s = assemble_history_system(L, f0, dt, n_t)
    hv = solve_ideal(s)
    traj = evolve_classical(f0, L, dt, s.n_blocks - 1)
    for k in range(s.n_blocks):
        assert abs(hv.block(k).sum() - f0.values.sum()) < 1e-10 * f0.values.sum()
        assert _rel(hv.block(k), traj[k].values) < 1e-10
    assert s.max_row_nnz() <= 4


def test_condition_estimate_examples():
    one = assemble_history_system(sp.csr_matrix((4, 4)), np.ones(4), 0.5, 0)
    assert condition_estimate(one) == pytest.approx(1.0, abs=1e-12)
    two = assemble_history_system(sp.csr_matrix((2, 2)), np.ones(2), 0.5, 1)
    sv = np.linalg.svd(two.A.toarray(), compute_uv=False)
    kappa = condition_estimate(two)
    assert sv[0] / sv[-1] / 2 <= kappa <= 2 * sv[0] / sv[-1]
    assert kappa == pytest.approx((1 + np.sqrt(5)) / 2 / ((np.sqrt(5) - 1) / 2), rel=1e-8)


@settings(max_examples=10)
@given(params_st, st.integers(1, 5), st.integers(1, 4), st.floats(0.05, 2.0))
def test_condition_estimate_within_factor_two(params, n_phi, n_t, dt):
    g = build_grid(n_phi)
    s = assemble_history_system(assemble_transport_operator(g, params), init_beta(g), dt, n_t)
    sv = np.linalg.svd(s.A.toarray(), compute_uv=False)
    exact = sv[0] / sv[-1]
    assert exact / 2 <= condition_estimate(s) <= exact * 2


def test_condition_estimate_default(default_run):
    s = default_run["system"]
    sv = np.linalg.svd(s.A.toarray(), compute_uv=False)
    k = condition_estimate(s)
    assert np.isfinite(k)
    assert k == pytest.approx(sv[0] / sv[-1], rel=1e-3)


def test_condition_estimate_warns_when_unconverged(default_run):
    with pytest.warns(RuntimeWarning):
        condition_estimate(default_run["system"], max_iter=3)


def test_coo_round_trip(tmp_path):
    g = build_grid(3)
    s = assemble_history_system(assemble_transport_operator(g), init_beta(g), 0.5, 2)
    pa, pb = tmp_path / "A.txt", tmp_path / "b.txt"
    export_coo(s, pa, pb)
    assert pa.read_text().splitlines()[0] == f"32 {s.nnz}"
    assert (read_coo(pa) != s.A).nnz == 0
    np.testing.assert_array_equal(read_coo(pb, n_cols=1).toarray().ravel(), s.b)
    rows = [line.split() for line in pa.read_text().splitlines()[1:]]
    assert all(len(r) == 3 for r in rows)
