import numpy as np
import pytest
import scipy.linalg

from pairdyn import (
    BlockRow,
    GridSpec,
    KrylovConfig,
    PropagationError,
    Symmetry,
    build_operator,
    compute_rows,
    expv,
    minimal_row_set,
    negate_index,
    rows_of_M,
    skew_transpose,
    uniform_blocks,
)
from conftest import make_params, random_tensor, uniform_operator


def assemble_full_M(op, t, cfg=KrylovConfig(tol=1e-12)):
    """Dense M from pipeline rows, all four blocks, no symmetry shortcuts."""
    n = op.n
    upper = rows_of_M(op, [("upper", m) for m in range(n)], t, cfg)
    lower = rows_of_M(op, [("lower", m) for m in range(n)], t, cfg)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    q = op.params.q
    for r in upper:
        M[r.row_index, :n] = r.m11_row
        M[r.row_index, n:] = q * r.m12_row  # raw north-east block
    for r in lower:
        M[n + r.row_index, :n] = r.m21_row
        M[n + r.row_index, n:] = r.m22_row
    return M


def test_expv_zero_time_is_identity():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    op = uniform_operator(g)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    np.testing.assert_array_equal(expv(op, v, 0.0), v)


def test_expv_zero_vector():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    op = uniform_operator(g)
    out = expv(op, np.zeros(2 * g.n_total, dtype=complex), 1.0)
    assert np.all(out == 0)


def test_expv_pure_kinetic_phases():
    # chi = 0 leaves a diagonal generator: exact elementwise phases
    g = GridSpec(D=1, K=4, dk=1.1e5)
    op = uniform_operator(g, chi=0.0)
    rng = np.random.default_rng(1)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    t = 1.7
    got = expv(op, v, t)
    phases = np.concatenate(
        [np.exp(-1j * op.delta * t), np.exp(1j * op.delta * t)]
    )
    np.testing.assert_allclose(got, phases * v, atol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_expv_against_dense_exponential(t):
    # scaling-and-squaring on the materialized matrix is the oracle
    g = GridSpec(D=1, K=6, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=6, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    dense = op.materialize_dense()
    rng = np.random.default_rng(2)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    for transpose in (False, True):
        ref = scipy.linalg.expm((dense.T if transpose else dense) * t) @ v
        got = expv(op, v, t, KrylovConfig(tol=1e-12), transpose=transpose)
        assert np.abs(got - ref).max() < 1e-9


def test_expv_semigroup_property():
    g = GridSpec(D=1, K=5, dk=1.1e5)
    tensor = random_tensor(g, "real_even_psi", seed=7, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    cfg = KrylovConfig(tol=1e-10)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    for t1, t2 in ((0.3, 0.9), (0.05, 0.4)):
        once = expv(op, v, t1 + t2, cfg)
        twice = expv(op, expv(op, v, t1, cfg), t2, cfg)
        assert np.linalg.norm(once - twice) <= 10 * cfg.tol * np.linalg.norm(v)


def test_expv_linearity():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    tensor = random_tensor(g, "general_complex", seed=8, scale=1e9)
    op = build_operator(tensor, make_params(q=1), g)
    cfg = KrylovConfig(tol=1e-10)
    rng = np.random.default_rng(4)
    u = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    a, b = 0.7 - 0.2j, -1.3 + 0.4j
    lhs = expv(op, a * u + b * v, 0.8, cfg)
    rhs = a * expv(op, u, 0.8, cfg) + b * expv(op, v, 0.8, cfg)
    assert np.linalg.norm(lhs - rhs) <= 10 * cfg.tol * np.linalg.norm(a * u + b * v)


def test_expv_nonconvergence_raises_with_estimate():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    op = uniform_operator(g)
    rng = np.random.default_rng(5)
    v = rng.standard_normal(2 * g.n_total) + 1j * rng.standard_normal(2 * g.n_total)
    cfg = KrylovConfig(subspace_dim=4, tol=1e-14, max_substeps=1, first_step=50.0)
    with pytest.raises(PropagationError) as err:
        expv(op, v, 50.0, cfg)
    assert err.value.last_error is not None


def test_rows_at_zero_time():
    g = GridSpec(D=2, K=2, dk=1.1e5)
    op = uniform_operator(g)
    rows = rows_of_M(op, [("upper", 7)], 0.0)
    assert rows[0].m11_row[7] == 1.0
    assert np.count_nonzero(rows[0].m11_row) == 1
    assert np.all(rows[0].m12_row == 0)


def test_rows_of_uniform_match_analytic_blocks():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    for q in (-1, 1):
        op = uniform_operator(g, q=q)
        gamma0 = float(op.coupling_values[0].real)
        at_time = uniform_blocks(gamma0, q, op.delta, g)
        t = 0.9
        m11_ref, m12_ref = at_time(t)
        rows = rows_of_M(
            op, [("upper", m) for m in range(g.n_total)], t, KrylovConfig(tol=1e-12)
        )
        m11 = np.array([r.m11_row for r in rows])
        m12 = np.array([r.m12_row for r in rows])
        assert np.abs(m11 - m11_ref).max() < 1e-9
        assert np.abs(m12 - m12_ref).max() < 1e-9


def test_row_failure_names_the_row():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=21, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    cfg = KrylovConfig(subspace_dim=4, tol=1e-14, max_substeps=1, first_step=60.0)
    with pytest.raises(PropagationError, match=r"upper, 2"):
        rows_of_M(op, [("upper", 2)], 60.0, cfg)


def test_assembled_M_satisfies_class_identities():
    g = GridSpec(D=2, K=3, dk=1.1e5)
    t = 0.8
    tensor = random_tensor(g, "real_even_psi", seed=9, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    M = assemble_full_M(op, t)
    n = op.n
    m11 = M[:n, :n]
    m12 = M[:n, n:] * op.params.q  # paper-normalized coupling block
    assert np.abs(m11 - m11.T).max() < 1e-10
    assert np.abs(m12 - np.conj(m12).T).max() < 1e-10
    # Corollary-1 structure of the lower half
    np.testing.assert_allclose(M[n:, :n], np.conj(m12), atol=1e-10)
    np.testing.assert_allclose(M[n:, n:], np.conj(m11), atol=1e-10)


def test_fermionic_row_norms_bounded():
    g = GridSpec(D=1, K=6, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=14, scale=1e9)
    op = build_operator(tensor, make_params(q=-1), g)
    for t in (0.4, 1.0, 3.0):
        rows = rows_of_M(op, [("upper", m) for m in range(g.n_total)], t)
        for r in rows:
            assert np.sum(np.abs(r.m12_row) ** 2) <= 1.0 + 1e-10


def test_minimal_row_set_general_complex():
    plan = minimal_row_set(
        [("upper", m) for m in range(10)], Symmetry.GENERAL_COMPLEX, 100
    )
    assert len(plan.computed) == 10
    assert plan.recipe == {}


def test_minimal_row_set_real_lower_from_conj():
    plan = minimal_row_set([("lower", 5)], Symmetry.REAL_PSI, 100)
    assert plan.computed == ((BlockRow.UPPER, 5),)
    src, steps = plan.recipe[(BlockRow.LOWER, 5)]
    assert src == (BlockRow.UPPER, 5)
    assert steps == ("conj",)


def test_minimal_row_set_real_even_negation():
    n_total = 9
    plan = minimal_row_set(
        [("upper", 2), ("upper", 6)], Symmetry.REAL_EVEN_PSI, n_total
    )
    assert plan.computed == ((BlockRow.UPPER, 2),)
    src, steps = plan.recipe[(BlockRow.UPPER, 6)]
    assert src == (BlockRow.UPPER, 2)
    assert steps == ("reverse",)


def test_reconstructed_rows_match_direct_computation():
    # reversal/conjugation recipes agree with directly propagated rows
    g = GridSpec(D=2, K=2, dk=1.1e5)
    tensor = random_tensor(g, "real_even_psi", seed=15, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    t = 0.7
    cfg = KrylovConfig(tol=1e-12)
    m = 3
    m_neg = negate_index(m, g)
    got = compute_rows(op, [("upper", m_neg), ("lower", m_neg)], t, cfg)
    direct = rows_of_M(op, [("upper", m_neg), ("lower", m_neg)], t, cfg)
    rec_up = got[(BlockRow.UPPER, m_neg)]
    rec_lo = got[(BlockRow.LOWER, m_neg)]
    assert np.abs(rec_up.m11_row - direct[0].m11_row).max() < 1e-10
    assert np.abs(rec_up.m12_row - direct[0].m12_row).max() < 1e-10
    assert np.abs(rec_lo.m21_row - direct[1].m21_row).max() < 1e-10
    assert np.abs(rec_lo.m22_row - direct[1].m22_row).max() < 1e-10


def test_rows_threaded_matches_serial():
    g = GridSpec(D=1, K=5, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=16, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    reqs = [("upper", m) for m in range(g.n_total)]
    serial = rows_of_M(op, reqs, 0.6)
    threaded = rows_of_M(op, reqs, 0.6, threads=4)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.m11_row, b.m11_row)
        np.testing.assert_array_equal(a.m12_row, b.m12_row)
