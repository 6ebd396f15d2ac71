import itertools

import numpy as np
import pytest

from ionraman.operators import (
    SystemSpace,
    atomic_op,
    basis_ket,
    boson_annihilate,
    commutator,
    dagger,
    default_fock_dim,
    is_unitary,
    matrix_exp,
    tensor,
)


@pytest.mark.parametrize("levels", [2, 3])
def test_transition_operator_products_exact(levels):
    sp = SystemSpace(4, levels)
    for i, j, k, l in itertools.product(range(levels), repeat=4):
        lhs = atomic_op(sp, i, j) @ atomic_op(sp, k, l)
        rhs = atomic_op(sp, k, j) if i == l else np.zeros((levels, levels))
        assert np.array_equal(lhs, rhs), (i, j, k, l)


def test_transition_operator_convention():
    sp = SystemSpace(3, 3)
    # S_ij maps |i> to |j>
    s = atomic_op(sp, 0, 2)
    assert s[2, 0] == 1 and np.count_nonzero(s) == 1


@pytest.mark.parametrize("n", [2, 5, 12])
def test_truncated_commutator_anomaly(n):
    sp = SystemSpace(n, 2)
    a = boson_annihilate(sp)
    c = commutator(a, dagger(a))
    expected = np.eye(n)
    expected[-1, -1] = -(n - 1)
    # sqrt(k)**2 carries one rounding; differences of such squares are exact to n ulps of 1
    np.testing.assert_allclose(c.real, expected, rtol=0, atol=n * np.finfo(float).eps)
    assert np.array_equal(c.imag, np.zeros((n, n)))


def test_ladder_action():
    a = boson_annihilate(SystemSpace(6, 2))
    ket = np.zeros(6)
    ket[4] = 1
    assert np.allclose(a @ ket, 2 * np.eye(6)[3])


def test_basis_ordering_level_major():
    sp = SystemSpace(5, 3)
    assert sp.index(2, 3) == 13
    ket = basis_ket(sp, 1, 2)
    assert ket[7] == 1 and ket.sum() == 1
    # the embedded number operator counts phonons within each level block
    assert np.allclose(np.diag(sp.number()).real, np.tile(np.arange(5), 3))


def test_embedded_operators_commute_across_factors():
    sp = SystemSpace(4, 3)
    assert np.allclose(commutator(sp.a(), sp.s(0, 2)), 0)


def test_index_errors():
    sp = SystemSpace(3, 2)
    with pytest.raises(IndexError):
        atomic_op(sp, 2, 0)
    with pytest.raises(IndexError):
        sp.index(0, 3)
    with pytest.raises(ValueError):
        SystemSpace(1, 2)
    with pytest.raises(ValueError):
        SystemSpace(3, 4)


def test_tensor_is_kronecker():
    a = np.arange(4.0).reshape(2, 2)
    b = np.eye(3)
    assert tensor(a, b).shape == (6, 6)
    assert np.array_equal(tensor(a, b), np.kron(a, b))


def test_matrix_exp_matches_eigendecomposition():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = m + dagger(m)
    w, v = np.linalg.eigh(h)
    expected = v @ np.diag(np.exp(-1j * 0.3 * w)) @ dagger(v)
    u = matrix_exp(-1j * 0.3 * h)
    assert np.allclose(u, expected, atol=1e-12)
    assert is_unitary(u)


def test_matrix_exp_rejects_nonfinite():
    m = np.eye(3, dtype=complex)
    m[0, 1] = np.nan
    with pytest.raises(ValueError):
        matrix_exp(m)
    with pytest.raises(OverflowError):
        matrix_exp(np.eye(2) * 1e4)


def test_default_fock_dim():
    assert default_fock_dim(0) == 15
    assert default_fock_dim(3) == 17
    assert default_fock_dim(20) >= 20 + 7 * np.sqrt(21)


def test_tensor_example_and_associativity():
    sp = SystemSpace(2, 3)
    op = tensor(atomic_op(sp, 0, 1), boson_annihilate(sp))
    out = op @ basis_ket(sp, 0, 1)
    assert np.count_nonzero(out) == 1 and out[sp.index(1, 0)] == 1
    rng = np.random.default_rng(0)
    a, b, c = (rng.integers(-9, 10, size=(2, 2)).astype(float) for _ in range(3))
    assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


def test_matrix_exp_inverse_and_diagonal():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        m *= 2 / np.linalg.norm(m, 2)
        assert np.abs(matrix_exp(m) @ matrix_exp(-m) - np.eye(5)).max() < 1e-9
    theta = np.array([0.1, -2.0, 3.0])
    assert np.allclose(matrix_exp(np.diag(1j * theta)), np.diag(np.exp(1j * theta)), rtol=1e-12)
    assert np.array_equal(matrix_exp(np.zeros((3, 3))), np.eye(3))


def test_internal_completeness():
    sp = SystemSpace(3, 3)
    assert np.array_equal(sp.s(0, 0) + sp.s(1, 1) + sp.s(2, 2), sp.identity())
    assert np.allclose(commutator(sp.s(0, 1), sp.s(1, 0)), sp.s(1, 1) - sp.s(0, 0))
