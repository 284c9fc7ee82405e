"""Schur transform, quantum Fourier transform over S_n, and controlled
permutations - the circuit primitives.

Label orders (fixed across the package):

* Schur basis of (C^d)^(x)n: triples (lam, i, alpha) with lam running over
  partitions of n in lexicographically decreasing order (rows <= d only),
  i over the S_n-irrep row and alpha over the multiplicity space, i slow.
* Group Fourier basis of C^{n!}: triples (lam, i, j) over all partitions,
  i and j over the irrep rows/columns.
* Group-element basis |sigma>: lexicographic one-line order, shared with
  :func:`stinesim.tensor.all_permutations`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor import DIM_CAP, all_permutations, check_cap, permutation_unitary
from .symrep import (
    Partition,
    _young_rep_table,
    dim_irrep_sym,
    dim_irrep_unitary,
    partitions,
)


@dataclass(frozen=True)
class SchurBasis:
    """Unitary change of basis block-diagonalising all U_sigma on (C^d)^(x)n.

    ``matrix`` holds the labelled basis vectors as columns, in the order of
    ``labels``; for every sigma,
    ``matrix^dagger U_sigma matrix = direct_sum_lam R_lam(sigma) (x) 1``.
    """

    d: int
    n: int
    labels: tuple[tuple[Partition, int, int], ...]
    matrix: np.ndarray

    def block_slices(self) -> dict[Partition, slice]:
        out: dict[Partition, slice] = {}
        start = 0
        for lam in partitions(self.n):
            size = dim_irrep_sym(lam) * dim_irrep_unitary(self.d, lam)
            if size:
                out[lam] = slice(start, start + size)
                start += size
        return out


def _gram_schmidt_columns(m: np.ndarray, expected: int, tol: float = 1e-9) -> np.ndarray:
    """Orthonormalise the columns of m in order, keeping the first
    ``expected`` independent ones."""
    basis: list[np.ndarray] = []
    for col in m.T:
        v = col.copy()
        for b in basis:
            v -= b * (b.conj() @ v)
        for b in basis:  # second pass for numerical stability
            v -= b * (b.conj() @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            basis.append(v / norm)
        if len(basis) == expected:
            break
    if len(basis) != expected:
        raise RuntimeError(f"rank deficiency: found {len(basis)} of {expected} vectors")
    return np.stack(basis, axis=1)


@lru_cache(maxsize=None)
def schur_transform(d: int, n: int, cap: int = DIM_CAP) -> SchurBasis:
    """Numerical Schur transform on (C^d)^(x)n.

    Built from the group-algebra matrix units
    ``E^lam_{ij} = (dim[lam]/n!) sum_sigma R_lam(sigma)_{ij} U_sigma``: an
    orthonormal basis of range(E^lam_{00}) spans the multiplicity space,
    and applying E^lam_{i0} generates the row-i vectors (norm-preserving
    because R_lam is orthogonal). The multiplicity-space gauge is thereby
    fixed arbitrarily but deterministically.
    """
    size = d**n
    check_cap(size, cap)
    perms = all_permutations(n)
    unitaries = np.stack([permutation_unitary(s, d, cap) for s in perms])
    labels: list[tuple[Partition, int, int]] = []
    columns: list[np.ndarray] = []
    for lam in partitions(n):
        if len(lam) > d:
            continue
        dim_s = dim_irrep_sym(lam)
        mult = dim_irrep_unitary(d, lam)
        reps = np.stack(_young_rep_table(lam, n))  # [sigma, i, j]
        scale = dim_s / math.factorial(n)
        e00 = scale * np.tensordot(reps[:, 0, 0], unitaries, axes=(0, 0))
        w = _gram_schmidt_columns(e00, mult)
        for i in range(dim_s):
            if i == 0:
                block = w
            else:
                ei0 = scale * np.tensordot(reps[:, i, 0], unitaries, axes=(0, 0))
                block = ei0 @ w
            for alpha in range(mult):
                labels.append((lam, i, alpha))
                columns.append(block[:, alpha])
    matrix = np.stack(columns, axis=1)
    return SchurBasis(d, n, tuple(labels), matrix)


@dataclass(frozen=True)
class SnFourierBasis:
    n: int
    labels: tuple[tuple[Partition, int, int], ...]
    matrix: np.ndarray


@lru_cache(maxsize=None)
def fourier_labels(n: int) -> tuple[tuple[Partition, int, int], ...]:
    labels = []
    for lam in partitions(n):
        dim_s = dim_irrep_sym(lam)
        for i in range(dim_s):
            for j in range(dim_s):
                labels.append((lam, i, j))
    return tuple(labels)


@lru_cache(maxsize=None)
def sn_qft(n: int, cap: int = DIM_CAP) -> SnFourierBasis:
    """Quantum Fourier transform over S_n as an n! x n! unitary.

    Row (lam, i, j), column sigma: ``sqrt(dim[lam]/n!) R_lam(sigma)_{ij}``.
    Maps the uniform superposition over |sigma> to the trivial-irrep label.
    """
    order = math.factorial(n)
    check_cap(order, cap)
    labels = fourier_labels(n)
    matrix = np.zeros((order, order), dtype=complex)
    row = 0
    for lam in partitions(n):
        dim_s = dim_irrep_sym(lam)
        reps = np.stack(_young_rep_table(lam, n))  # [sigma, i, j]
        weight = math.sqrt(dim_s / order)
        block = weight * reps.transpose(1, 2, 0).reshape(dim_s * dim_s, order)
        matrix[row : row + dim_s * dim_s, :] = block
        row += dim_s * dim_s
    return SnFourierBasis(n, labels, matrix)


def controlled_permutation(
    d: int, n: int, inverse: bool = False, cap: int = DIM_CAP
) -> np.ndarray:
    """Block unitary on C^{n!} (x) (C^d)^(x)n with |sigma><sigma| (x) U_sigma
    blocks (U_sigma^dagger when ``inverse``)."""
    order = math.factorial(n)
    size = d**n
    check_cap(order * size, cap)
    out = np.zeros((order * size, order * size), dtype=complex)
    for idx, sigma in enumerate(all_permutations(n)):
        u = permutation_unitary(sigma, d, cap)
        if inverse:
            u = u.conj().T
        out[idx * size : (idx + 1) * size, idx * size : (idx + 1) * size] = u
    return out


def uniform_superposition(n: int) -> np.ndarray:
    order = math.factorial(n)
    return np.full(order, 1.0 / math.sqrt(order), dtype=complex)
