import math

import numpy as np
import pytest

from stinesim import schur, symrep, tensor


def test_schur_n1_is_identity():
    for d in (2, 3):
        basis = schur.schur_transform(d, 1)
        assert np.allclose(basis.matrix, np.eye(d))


def test_schur_d2_n2_triplet_singlet():
    basis = schur.schur_transform(2, 2)
    labels = [lab[0] for lab in basis.labels]
    assert labels == [(2,), (2,), (2,), (1, 1)]
    swap = tensor.permutation_unitary((1, 0), 2)
    rotated = basis.matrix.conj().T @ swap @ basis.matrix
    assert np.max(np.abs(rotated - np.diag([1, 1, 1, -1]))) < 1e-12


def test_schur_block_multiplicities_d2_n3():
    basis = schur.schur_transform(2, 3)
    sizes = {}
    for lam, _, _ in basis.labels:
        sizes[lam] = sizes.get(lam, 0) + 1
    assert sizes == {(3,): 4, (2, 1): 4}
    assert sum(sizes.values()) == 8


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_schur_unitarity_and_intertwining(d, n):
    basis = schur.schur_transform(d, n)
    u = basis.matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(d**n))) <= 1e-10
    # adjacent transpositions suffice by the homomorphism property
    for k in range(n - 1):
        sigma = tuple(range(k)) + (k + 1, k) + tuple(range(k + 2, n))
        direct_sum = np.zeros((d**n, d**n))
        offset = 0
        for lam in symrep.partitions(n):
            mult = symrep.dim_irrep_unitary(d, lam)
            if mult == 0:
                continue
            block = np.kron(symrep.young_orthogonal_matrix(lam, sigma), np.eye(mult))
            direct_sum[offset : offset + len(block), offset : offset + len(block)] = block
            offset += len(block)
        rotated = u.conj().T @ tensor.permutation_unitary(sigma, d) @ u
        assert np.max(np.abs(rotated - direct_sum)) <= 1e-9


def test_schur_projector_conjugation():
    # U_Schur^dag Pi_lam U_sigma U_Schur lands in the lam block as R (x) 1
    d, n = 2, 3
    basis = schur.schur_transform(d, n)
    u = basis.matrix
    slices = basis.block_slices()
    for lam in symrep.partitions(n, d):
        proj = symrep.isotypical_projector(lam, d)
        for sigma in tensor.all_permutations(n):
            rotated = u.conj().T @ proj @ tensor.permutation_unitary(sigma, d) @ u
            expected = np.zeros_like(rotated)
            mult = symrep.dim_irrep_unitary(d, lam)
            block = np.kron(symrep.young_orthogonal_matrix(lam, sigma), np.eye(mult))
            expected[slices[lam], slices[lam]] = block
            assert np.max(np.abs(rotated - expected)) < 1e-9


def test_qft_n2_matrix():
    q = schur.sn_qft(2).matrix
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.max(np.abs(q - h)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_qft_unitarity_and_uniform_superposition(n):
    basis = schur.sn_qft(n)
    q = basis.matrix
    assert len(basis.labels) == math.factorial(n)
    assert sum(symrep.dim_irrep_sym(l) ** 2 for l in symrep.partitions(n)) == math.factorial(n)
    assert np.max(np.abs(q.conj().T @ q - np.eye(q.shape[0]))) <= 1e-10
    image = q @ schur.uniform_superposition(n)
    trivial = np.zeros(q.shape[0])
    trivial[0] = 1.0
    assert basis.labels[0][0] == (n,)
    assert np.max(np.abs(image - trivial)) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_qft_block_diagonalises_left_regular_action(n):
    q = schur.sn_qft(n).matrix
    perms = tensor.all_permutations(n)
    index = {p: i for i, p in enumerate(perms)}
    for sigma in perms[: min(len(perms), 8)]:
        left = np.zeros((len(perms), len(perms)))
        for tau in perms:
            left[index[tensor.compose(sigma, tau)], index[tau]] = 1.0
        rotated = q @ left @ q.conj().T
        expected = np.zeros_like(rotated)
        offset = 0
        for lam in symrep.partitions(n):
            dim = symrep.dim_irrep_sym(lam)
            block = np.kron(symrep.young_orthogonal_matrix(lam, sigma), np.eye(dim))
            expected[offset : offset + dim * dim, offset : offset + dim * dim] = block
            offset += dim * dim
        assert np.max(np.abs(rotated - expected)) < 1e-10


def test_controlled_permutation_blocks():
    cpi = schur.controlled_permutation(2, 2)
    # control |identity> acts trivially
    assert np.array_equal(cpi[:4, :4], np.eye(4).astype(complex))
    # control |swap| applies the SWAP block
    assert np.array_equal(cpi[4:, 4:], tensor.permutation_unitary((1, 0), 2))
    inv = schur.controlled_permutation(2, 2, inverse=True)
    assert np.array_equal(cpi @ inv, np.eye(8).astype(complex))


def test_controlled_permutation_matches_enumeration():
    n, d = 3, 2
    cpi = schur.controlled_permutation(d, n)
    for idx, sigma in enumerate(tensor.all_permutations(n)):
        block = cpi[idx * d**n : (idx + 1) * d**n, idx * d**n : (idx + 1) * d**n]
        assert np.array_equal(block, tensor.permutation_unitary(sigma, d))
