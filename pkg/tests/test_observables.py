import math

import numpy as np
import pytest

from pairdyn import (
    BlockRow,
    GridSpec,
    KrylovConfig,
    UniformSolution,
    ValidationError,
    anomalous_moment,
    build_operator,
    cl_slice,
    compute_rows,
    flatten_index,
    g2_opposite_spin,
    g2_same_spin,
    negate_index,
    normal_moment,
    occupation,
    pair_identity_check,
    rows_of_M,
    total_atom_number,
    uniform_moments,
)
from conftest import make_params, random_tensor, uniform_operator


def upper_rows(op, t, cfg=KrylovConfig(tol=1e-12)):
    n = op.grid.n_total
    rows = compute_rows(op, [("upper", m) for m in range(n)], t, cfg)
    return {m: rows[(BlockRow.UPPER, m)] for m in range(n)}


def test_moments_vanish_in_vacuum():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    op = uniform_operator(g)
    rows = upper_rows(op, 0.0)
    assert normal_moment(rows[1], rows[2]) == 0.0
    assert anomalous_moment(rows[1], rows[5]) == 0.0
    assert occupation(rows[3]) == 0.0


def test_moment_time_mismatch_rejected():
    g = GridSpec(D=1, K=2, dk=1.1e5)
    op = uniform_operator(g)
    r1 = rows_of_M(op, [("upper", 1)], 0.5)[0]
    r2 = rows_of_M(op, [("upper", 1)], 1.0)[0]
    with pytest.raises(ValidationError, match="different times"):
        normal_moment(r1, r2)


def test_diagonal_normal_moment_is_real_occupation():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=17, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    rows = upper_rows(op, 0.8)
    for m in (0, 3, 7):
        n_mm = normal_moment(rows[m], rows[m])
        assert n_mm.imag == pytest.approx(0.0, abs=1e-14)
        assert n_mm.real == pytest.approx(occupation(rows[m]), rel=1e-12)


def test_normal_moment_hermitian_pairs():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    tensor = random_tensor(g, "real_even_psi", seed=18, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    rows = upper_rows(op, 0.6)
    a, b = 2, 6
    assert normal_moment(rows[b], rows[a]) == pytest.approx(
        np.conj(normal_moment(rows[a], rows[b])), rel=1e-12
    )


def test_uniform_resonant_fermions_oscillate():
    # Omega = 0 puts the zero mode exactly on resonance
    g = GridSpec(D=1, K=3, dk=1.1e5)
    op = uniform_operator(g, q=-1, Omega=0.0)
    center = g.n_total // 2
    for t in (0.3, 1.0, 2.2):
        rows = upper_rows(op, t)
        assert occupation(rows[center]) == pytest.approx(
            math.sin(t) ** 2, abs=1e-8
        )


def test_uniform_moments_match_closed_form_all_modes():
    g = GridSpec(D=2, K=2, dk=1.1e5)
    for q in (-1, 1):
        op = uniform_operator(g, q=q)
        gamma0 = float(op.coupling_values[0].real)
        for t in (0.25, 1.0):
            rows = upper_rows(op, t)
            for m in range(g.n_total):
                n_num = occupation(rows[m])
                m_num = anomalous_moment(rows[m], rows[negate_index(m, g)])
                n_ref, m_ref = uniform_moments(
                    UniformSolution(gamma0=gamma0, delta_k=float(op.delta[m]), q=q),
                    t,
                )
                assert n_num == pytest.approx(n_ref, rel=1e-8)
                assert m_num == pytest.approx(m_ref, rel=1e-8)
                assert abs(pair_identity_check(n_num, m_num, q)) < 1e-10


def test_anomalous_moment_needs_lower_rows_when_general():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    tensor = random_tensor(g, "general_complex", seed=19, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    t = 0.5
    rows = upper_rows(op, t)
    with pytest.raises(ValidationError, match="M21"):
        anomalous_moment(rows[1], rows[2])
    lower = rows_of_M(op, [("lower", 2)], t, KrylovConfig(tol=1e-12))[0]
    rows[2].m21_row = lower.m21_row
    value = anomalous_moment(rows[1], rows[2])
    # dense cross-check: m_{k,k'} = (M11 row k) . conj(M21 row k')
    import scipy.linalg

    M = scipy.linalg.expm(op.materialize_dense() * t)
    n = op.n
    ref = M[1, :n] @ np.conj(M[n + 2, :n])
    assert value == pytest.approx(ref, rel=1e-9)


def test_g2_same_spin_endpoints():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    for q in (-1, 1):
        tensor = random_tensor(g, "real_even_psi", seed=20, scale=1e9)
        op = build_operator(tensor, make_params(q=q), g)
        rows = upper_rows(op, 0.7)
        for m in (1, 4, 6):
            assert g2_same_spin(rows[m], rows[m], q) == pytest.approx(1.0 + q, abs=1e-12)


def test_g2_uniform_cross_terms_decorrelate():
    # uniform coupling only links k with -k; any other pair gives exactly 1
    g = GridSpec(D=1, K=4, dk=1.1e5)
    op = uniform_operator(g, q=-1)
    rows = upper_rows(op, 0.9)
    assert g2_same_spin(rows[2], rows[3], -1) == pytest.approx(1.0, abs=1e-12)
    assert g2_same_spin(rows[0], rows[5], -1) == pytest.approx(1.0, abs=1e-12)


def test_g2_opposite_spin_uniform_pairs():
    g = GridSpec(D=1, K=3, dk=1.1e5)
    for q in (-1, 1):
        op = uniform_operator(g, q=q)
        rows = upper_rows(op, 0.8)
        m = 1
        m_neg = negate_index(m, g)
        n_k = occupation(rows[m])
        got = g2_opposite_spin(rows[m], rows[m_neg], q)
        assert got == pytest.approx(1.0 + (1.0 + q * n_k) / n_k, rel=1e-8)
        assert got >= 1.0


def test_g2_undefined_in_vacuum():
    g = GridSpec(D=1, K=2, dk=1.1e5)
    op = uniform_operator(g)
    rows = upper_rows(op, 0.0)
    assert math.isnan(g2_same_spin(rows[0], rows[1], -1))
    assert math.isnan(g2_opposite_spin(rows[0], rows[1], -1))


def test_normal_moment_matrix_positive_semidefinite():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=23, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    rows = upper_rows(op, 1.1)
    sel = [0, 2, 4, 6, 8]
    gram = np.array(
        [[normal_moment(rows[a], rows[b]) for b in sel] for a in sel]
    )
    np.testing.assert_allclose(gram, np.conj(gram).T, atol=1e-12)
    assert np.linalg.eigvalsh(gram).min() >= -1e-10


def test_total_atom_number_zero_at_start_and_bounded():
    g = GridSpec(D=1, K=5, dk=1.1e5)
    tensor = random_tensor(g, "real_even_psi", seed=24, scale=1e9)
    op = build_operator(tensor, make_params(q=-1), g)
    assert total_atom_number(op, 0.0) == 0.0
    n_t = total_atom_number(op, 1.0)
    assert 0.0 < n_t <= g.n_total  # Pauli bound summed over modes


def test_total_atom_number_equals_row_sum():
    g = GridSpec(D=1, K=4, dk=1.1e5)
    tensor = random_tensor(g, "real_psi", seed=25, scale=1e9)
    op = build_operator(tensor, make_params(), g)
    t = 0.7
    rows = upper_rows(op, t, KrylovConfig())
    direct = sum(occupation(rows[m]) for m in range(g.n_total))
    assert total_atom_number(op, t) == pytest.approx(direct, rel=1e-12)


def test_cl_slice_structure():
    g = GridSpec(D=2, K=3, dk=1.1e5)
    tensor = random_tensor(g, "real_even_psi", seed=26, scale=1e9)
    op = build_operator(tensor, make_params(q=-1), g)
    sl = cl_slice(op, 0, (2, 1), 0.6)
    assert len(sl.g2) == g.B
    assert sl.k_values[0] == pytest.approx(-g.K * g.dk)
    # the reference point sits on the line and carries the exact value 1+q
    i_ref = np.argmin(np.abs(sl.k_values - 2 * g.dk))
    assert sl.g2[i_ref] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        cl_slice(op, 5, (0, 0), 0.6)


def test_cl_slice_vacuum_undefined():
    g = GridSpec(D=1, K=2, dk=1.1e5)
    op = uniform_operator(g)
    sl = cl_slice(op, 0, (1,), 0.0)
    assert np.all(np.isnan(sl.g2))
