import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairdyn import (
    GridSpec,
    ValidationError,
    all_momenta,
    flatten_index,
    momentum_of,
    negate_index,
    unflatten_index,
)


def test_grid_derives_consistent_spacing():
    g = GridSpec(D=3, K=15, dk=1.1e5)
    assert g.dk * g.L == pytest.approx(2 * np.pi, rel=0, abs=1e-15)
    assert g.B == 31
    assert g.n_total == 31**3
    g2 = GridSpec(D=1, K=2, L=5e-5)
    assert g2.dk == pytest.approx(2 * np.pi / 5e-5)


def test_grid_requires_exactly_one_of_L_dk():
    with pytest.raises(ValidationError):
        GridSpec(D=1, K=1)
    with pytest.raises(ValidationError):
        GridSpec(D=1, K=1, L=1.0, dk=1.0)


def test_flatten_corner_values():
    # 0-based linear indices (the 1-based convention adds one)
    g = GridSpec(D=2, K=1, L=1.0)
    assert flatten_index((-1, -1), g) == 0
    assert flatten_index((1, 1), g) == g.n_total - 1 == 8
    assert flatten_index((0, -1), g) == 3  # (0+1)*3 + (-1+1)


def test_unflatten_center_and_negation():
    g = GridSpec(D=2, K=1, L=1.0)
    assert tuple(unflatten_index(4, g)) == (0, 0)
    assert tuple(unflatten_index(3, g)) == (0, -1)
    assert tuple(unflatten_index(5, g)) == (0, 1)
    # negation property: f^-1(n_total - 1 - m) = -f^-1(m)
    for m in range(g.n_total):
        np.testing.assert_array_equal(
            unflatten_index(negate_index(m, g), g), -unflatten_index(m, g)
        )


def test_roundtrip_random_large_grid():
    g = GridSpec(D=3, K=30, L=1.0)
    rng = np.random.default_rng(42)
    ms = rng.integers(0, g.n_total, size=1000)
    for m in ms:
        assert flatten_index(unflatten_index(int(m), g), g) == int(m)


@pytest.mark.parametrize("D,K", [(1, 4), (2, 3), (3, 2)])
def test_roundtrip_exhaustive(D, K):
    g = GridSpec(D=D, K=K, L=1.0)
    for m in range(g.n_total):
        assert flatten_index(unflatten_index(m, g), g) == m
    # and the other direction over the full multi-index box
    for n in g.multi_indices():
        np.testing.assert_array_equal(unflatten_index(flatten_index(n, g), g), n)


def test_flatten_lexicographic_order():
    g = GridSpec(D=2, K=2, L=1.0)
    idx = g.multi_indices()
    flat = [flatten_index(n, g) for n in idx]
    assert flat == sorted(flat)
    # multi_indices is lexicographically sorted by construction
    as_tuples = [tuple(n) for n in idx]
    assert as_tuples == sorted(as_tuples)


@given(
    D=st.integers(min_value=1, max_value=3),
    K=st.integers(min_value=0, max_value=5),
    data=st.data(),
)
@settings(max_examples=50, deadline=None)
def test_roundtrip_property(D, K, data):
    g = GridSpec(D=D, K=K, L=1.0)
    n = data.draw(
        st.lists(st.integers(min_value=-K, max_value=K), min_size=D, max_size=D)
    )
    m = flatten_index(n, g)
    assert 0 <= m < g.n_total
    assert tuple(unflatten_index(m, g)) == tuple(n)


def test_out_of_range_errors_name_the_axis():
    g = GridSpec(D=3, K=2, L=1.0)
    with pytest.raises(ValidationError, match="axis 2"):
        flatten_index((0, 3, 0), g)
    with pytest.raises(ValidationError):
        unflatten_index(-1, g)
    with pytest.raises(ValidationError):
        unflatten_index(g.n_total, g)


def test_momentum_values():
    g = GridSpec(D=1, K=30, dk=1.1e5)
    center = g.n_total // 2
    assert momentum_of(center, g) == pytest.approx(0.0)
    m20 = flatten_index((20,), g)
    assert momentum_of(m20, g)[0] == pytest.approx(2.2e6)  # resonance momentum


def test_momentum_negation_symmetry():
    g = GridSpec(D=2, K=3, L=1e-5)
    for m in range(g.n_total):
        k = momentum_of(m, g)
        k_neg = momentum_of(negate_index(m, g), g)
        assert np.linalg.norm(k) == pytest.approx(np.linalg.norm(k_neg))
    table = all_momenta(g)
    np.testing.assert_allclose(table[::-1], -table, atol=0)
