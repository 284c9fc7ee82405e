import numpy as np
import pytest

from stinesim import tensor

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_kron_identity():
    assert np.array_equal(tensor.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal():
    out = tensor.kron(np.diag([1.0, 2.0]).astype(complex), np.diag([3.0, 4.0]).astype(complex))
    assert np.array_equal(out, np.diag([3.0, 4.0, 6.0, 8.0]))


def test_kron_flip_on_basis_vector():
    # 4x4 expansion by hand: X (x) X maps |00> to |11>
    xx = tensor.kron(X, X)
    e00 = np.zeros(4)
    e00[0] = 1
    expected = np.zeros(4)
    expected[3] = 1
    assert np.array_equal(xx @ e00, expected)
    hand = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    hand[2 * i + k, 2 * j + l] = X[i, j] * X[k, l]
    assert np.array_equal(xx, hand)


def test_kron_cap():
    with pytest.raises(tensor.InstanceTooLargeError):
        tensor.kron(np.eye(1 << 11), np.eye(1 << 11))


def _partial_trace_oracle(m, keep_first):
    # naive 4-loop index sum for a 2-qubit operator
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                if keep_first:
                    out[i, j] += m[2 * i + k, 2 * j + k]
                else:
                    out[i, j] += m[2 * k + i, 2 * k + j]
    return out


def test_partial_trace_of_entangled_projector():
    gamma = tensor.maximally_entangled(3)
    assert np.allclose(tensor.partial_trace(gamma, (3, 3), {1}), np.eye(3))
    assert np.allclose(tensor.partial_trace(gamma, (3, 3), {0}), np.eye(3))


def test_partial_trace_product():
    rng = np.random.default_rng(0)
    rho = tensor.random_density(2, rng)
    sigma = tensor.random_density(3, rng)
    out = tensor.partial_trace(np.kron(rho, sigma), (2, 3), {1})
    assert np.allclose(out, rho)


def test_partial_trace_against_index_sum_oracle():
    rng = np.random.default_rng(1)
    rho = tensor.random_density(4, rng)
    assert np.allclose(tensor.partial_trace(rho, (2, 2), {1}), _partial_trace_oracle(rho, True))
    assert np.allclose(tensor.partial_trace(rho, (2, 2), {0}), _partial_trace_oracle(rho, False))


def test_partial_trace_is_trace_preserving_and_total():
    rng = np.random.default_rng(2)
    m = tensor.ginibre(8, 8, rng)
    reduced = tensor.partial_trace(m, (2, 2, 2), {0, 2})
    assert np.isclose(np.trace(reduced), np.trace(m))
    total = tensor.partial_trace(m, (2, 2, 2), {0, 1, 2})
    assert np.isclose(total[0, 0], np.trace(m))


def test_partial_trace_shape_mismatch():
    with pytest.raises(tensor.ShapeMismatchError):
        tensor.partial_trace(np.eye(4), (2, 3), {0})


def test_permutation_unitary_identity():
    for d in (2, 3):
        assert np.array_equal(tensor.permutation_unitary((0, 1, 2), d), np.eye(d**3))


def test_permutation_unitary_swap_entries():
    swap = tensor.permutation_unitary((1, 0), 2)
    expected = np.zeros((4, 4))
    for r, c in [(0, 0), (1, 2), (2, 1), (3, 3)]:
        expected[r, c] = 1
    assert np.array_equal(swap.real, expected)


def test_three_cycle_has_order_three():
    u = tensor.permutation_unitary((1, 2, 0), 2)
    assert np.array_equal(u @ u @ u, np.eye(8).astype(complex))


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (4, 3)])
def test_permutation_unitary_homomorphism_exact(n, d):
    perms = tensor.all_permutations(n)
    units = {s: tensor.permutation_unitary(s, d) for s in perms}
    for s in perms:
        for t in perms:
            prod = units[s] @ units[t]
            assert np.max(np.abs(prod - units[tensor.compose(s, t)])) == 0.0


def test_adjacent_decomposition_reconstructs():
    rng = np.random.default_rng(3)
    for n in range(2, 6):
        for _ in range(20):
            sigma = tuple(rng.permutation(n))
            word = tensor.adjacent_decomposition(sigma)
            rebuilt = tuple(range(n))
            for k in reversed(word):
                s = list(range(n))
                s[k], s[k + 1] = s[k + 1], s[k]
                rebuilt = tensor.compose(tuple(s), rebuilt)
            assert rebuilt == sigma


def test_haar_unitary_scalar_and_unitarity():
    rng = np.random.default_rng(4)
    u1 = tensor.haar_unitary(1, rng)
    assert np.isclose(abs(u1[0, 0]), 1.0)
    for d in (2, 4, 8, 16):
        u = tensor.haar_unitary(d, rng)
        assert np.max(np.abs(u.conj().T @ u - np.eye(d))) <= 1e-12


def test_haar_mean_is_zero():
    rng = np.random.default_rng(5)
    mean = tensor.haar_unitaries(2, 10_000, rng).mean(axis=0)
    assert np.max(np.abs(mean)) <= 0.05


def test_haar_left_invariance():
    # second moment E[U |0><0| U^dag] = 1/d, also after a fixed left rotation
    rng = np.random.default_rng(6)
    units = tensor.haar_unitaries(2, 20_000, rng)
    fixed = tensor.haar_unitary(2, rng)
    proj = np.zeros((2, 2), dtype=complex)
    proj[0, 0] = 1
    for ensemble in (units, fixed @ units):
        second = np.einsum("sij,jk,slk->il", ensemble, proj, ensemble.conj()) / len(units)
        assert np.max(np.abs(second - np.eye(2) / 2)) < 0.02


def test_permutation_twirl_unital_and_fixed_points():
    dims = (2, 2)
    blocks = [(0,), (1,)]
    assert np.allclose(tensor.permutation_twirl(np.eye(4), dims, blocks), np.eye(4))
    sym = tensor.kron(X, X)
    assert np.allclose(tensor.permutation_twirl(sym, dims, blocks), sym)


def test_permutation_twirl_two_term_example():
    # |01><01| averages to (|01><01| + |10><10|)/2
    p01 = np.zeros((4, 4), dtype=complex)
    p01[1, 1] = 1
    p10 = np.zeros((4, 4), dtype=complex)
    p10[2, 2] = 1
    out = tensor.permutation_twirl(p01, (2, 2), [(0,), (1,)])
    assert np.allclose(out, (p01 + p10) / 2)


def test_permutation_twirl_idempotent_and_covariant():
    rng = np.random.default_rng(7)
    m = tensor.ginibre(8, 8, rng)
    blocks = [(0,), (1,), (2,)]
    once = tensor.permutation_twirl(m, (2, 2, 2), blocks)
    twice = tensor.permutation_twirl(once, (2, 2, 2), blocks)
    assert np.max(np.abs(once - twice)) < 1e-12
    for sigma in tensor.all_permutations(3):
        u = tensor.permutation_unitary(sigma, 2)
        assert np.max(np.abs(u @ once @ u.conj().T - once)) < 1e-12


def test_permutation_twirl_block_pairs():
    rng = np.random.default_rng(8)
    m = tensor.ginibre(16, 16, rng)
    out = tensor.permutation_twirl(m, (2, 2, 2, 2), [(0, 1), (2, 3)])
    swap_pairs = tensor.reorder_factors(out, (2, 2, 2, 2), (2, 3, 0, 1))
    assert np.max(np.abs(out - swap_pairs)) < 1e-12


def test_permutation_twirl_incongruent_blocks():
    with pytest.raises(tensor.ShapeMismatchError):
        tensor.permutation_twirl(np.eye(6), (2, 3), [(0,), (1,)])


def test_reorder_factors_roundtrip_and_unitary_consistency():
    rng = np.random.default_rng(9)
    m = tensor.ginibre(12, 12, rng)
    dims = (2, 3, 2)
    moved = tensor.reorder_factors(m, dims, (2, 0, 1))
    undone = tensor.reorder_factors(moved, (2, 2, 3), (1, 2, 0))
    assert np.allclose(undone, m)
    m8 = tensor.ginibre(8, 8, rng)
    sigma = (1, 2, 0)
    u = tensor.permutation_unitary(sigma, 2)
    # reorder semantics: new slot k holds old factor sigma^{-1}(k)
    assert np.allclose(
        tensor.reorder_factors(m8, (2, 2, 2), tensor.inverse(sigma)), u @ m8 @ u.conj().T
    )
