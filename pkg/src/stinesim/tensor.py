"""Dense complex linear algebra on multipartite systems.

Conventions used throughout the package:

* Tensor factors are ordered slow-to-fast, matching ``numpy.kron``: the
  basis index of ``H_1 (x) H_2`` is ``i_1 * dim_2 + i_2``.
* A permutation ``sigma`` is a tuple of length n whose k-th entry is the
  image ``sigma(k)``; composition is ``(sigma o tau)(x) = sigma(tau(x))``.
* The permutation unitary ``U_sigma`` moves the content of slot k to slot
  ``sigma(k)``, so ``U_sigma U_tau = U_{sigma tau}``.
* Operators are plain ``numpy.ndarray`` of ``complex128``; all functions
  are pure and never mutate their inputs.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

#: Largest Hilbert-space dimension any operation will materialise.
DIM_CAP = 1 << 20


class InstanceTooLargeError(ValueError):
    """Raised when a requested dimension exceeds the configured cap."""


class ShapeMismatchError(ValueError):
    """Raised when a system shape is inconsistent with a matrix."""


def check_cap(dim: int, cap: int = DIM_CAP) -> None:
    if dim > cap:
        raise InstanceTooLargeError(f"instance too large: dimension {dim} exceeds cap {cap}")


def check_shape(matrix: np.ndarray, dims: Sequence[int]) -> None:
    """Verify that ``dims`` factorises the (square) matrix dimension."""
    total = int(np.prod(dims)) if len(dims) else 1
    if matrix.shape != (total, total):
        raise ShapeMismatchError(
            f"shape mismatch: matrix is {matrix.shape}, factors {tuple(dims)} give {total}"
        )


def kron(a: np.ndarray, b: np.ndarray, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product with a dimension guard."""
    check_cap(a.shape[0] * b.shape[0], cap)
    check_cap(a.shape[1] * b.shape[1], cap)
    return np.kron(a, b)


def kron_all(matrices: Iterable[np.ndarray], cap: int = DIM_CAP) -> np.ndarray:
    return reduce(lambda x, y: kron(x, y, cap), matrices)


def tensor_power(a: np.ndarray, n: int, cap: int = DIM_CAP) -> np.ndarray:
    if n < 1:
        raise ValueError("tensor power requires n >= 1")
    return kron_all([a] * n, cap)


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def partial_trace(matrix: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the listed tensor factors of a square operator.

    Parameters
    ----------
    matrix : ndarray
        Square operator on the tensor product of factors with dimensions
        ``dims``.
    dims : sequence of int
        Local dimension of each factor, slow-to-fast.
    traced : iterable of int
        Indices (into ``dims``) of the factors to trace over.

    Returns
    -------
    ndarray
        Operator on the remaining factors, in their original order.
    """
    dims = tuple(dims)
    check_shape(matrix, dims)
    traced = sorted(set(traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise ShapeMismatchError(f"shape mismatch: traced factors {traced} out of range")
    if not traced:
        return matrix.copy()
    k = len(dims)
    tensor = matrix.reshape(dims + dims)
    for count, t in enumerate(traced):
        axis = t - count  # earlier traces removed one row and one column axis
        tensor = np.trace(tensor, axis1=axis, axis2=axis + k - count)
    keep = [d for i, d in enumerate(dims) if i not in traced]
    size = int(np.prod(keep)) if keep else 1
    return tensor.reshape(size, size)


def reorder_factors(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Permute the tensor factors of a square operator.

    ``order[k]`` is the index of the old factor that ends up at new
    position k, i.e. the result equals ``P matrix P^dagger`` for the
    basis permutation ``P`` realising that relabelling.
    """
    dims = tuple(dims)
    check_shape(matrix, dims)
    order = tuple(order)
    if sorted(order) != list(range(len(dims))):
        raise ShapeMismatchError(f"shape mismatch: {order} is not a permutation of the factors")
    k = len(dims)
    axes = order + tuple(o + k for o in order)
    side = matrix.shape[0]
    return matrix.reshape(dims + dims).transpose(axes).reshape(side, side)


def reorder_vector(vector: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    dims = tuple(dims)
    return vector.reshape(dims).transpose(tuple(order)).reshape(-1)


# ---------------------------------------------------------------------------
# Permutations
# ---------------------------------------------------------------------------

def compose(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """Composition ``sigma o tau``, acting as sigma(tau(x))."""
    return tuple(sigma[t] for t in tau)


def inverse(sigma: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def cycle_type(sigma: Sequence[int]) -> tuple[int, ...]:
    """Cycle type as a weakly decreasing partition of n."""
    seen = [False] * len(sigma)
    lengths = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = sigma[j]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def cycle_count(sigma: Sequence[int]) -> int:
    return len(cycle_type(sigma))


@lru_cache(maxsize=None)
def all_permutations(n: int) -> tuple[tuple[int, ...], ...]:
    """All of S_n in lexicographic one-line order (shared enumeration)."""
    return tuple(itertools.permutations(range(n)))


def adjacent_decomposition(sigma: Sequence[int]) -> list[int]:
    """Write sigma as a product of adjacent transpositions s_k = (k, k+1).

    Returns indices ``[k_1, ..., k_m]`` such that
    ``sigma = s_{k_1} o s_{k_2} o ... o s_{k_m}`` (bubble sort of the
    one-line word; length O(n^2) but deterministic).
    """
    word = list(sigma)
    swaps: list[int] = []
    changed = True
    while changed:
        changed = False
        for k in range(len(word) - 1):
            if word[k] > word[k + 1]:
                word[k], word[k + 1] = word[k + 1], word[k]
                swaps.append(k)
                changed = True
    # sorting applied sigma o s_{k_1} o ... o s_{k_m} = id, so reading the
    # swaps backwards reconstructs sigma
    return swaps[::-1]


def permutation_index_map(sigma: Sequence[int], d: int) -> np.ndarray:
    """Basis relabelling of U_sigma on (C^d)^(x)n: old index -> new index."""
    n = len(sigma)
    indices = np.arange(d**n)
    new_index = np.zeros_like(indices)
    for k in range(n):
        digit = (indices // d ** (n - 1 - k)) % d
        new_index += digit * d ** (n - 1 - sigma[k])
    return new_index


def permutation_unitary(sigma: Sequence[int], d: int, cap: int = DIM_CAP) -> np.ndarray:
    """The d^n x d^n 0/1 unitary sending slot k to slot sigma(k)."""
    n = len(sigma)
    size = d**n
    check_cap(size, cap)
    u = np.zeros((size, size), dtype=complex)
    u[permutation_index_map(sigma, d), np.arange(size)] = 1.0
    return u


def permutation_twirl(
    matrix: np.ndarray, dims: Sequence[int], blocks: Sequence[Sequence[int]]
) -> np.ndarray:
    """Average over joint permutations of congruent factor blocks.

    ``blocks`` must partition the factor indices into n blocks whose
    dimension signatures agree; the result is
    ``(1/n!) sum_pi U_pi matrix U_pi^dagger`` with ``U_pi`` permuting the
    blocks jointly.
    """
    dims = tuple(dims)
    check_shape(matrix, dims)
    blocks = [tuple(b) for b in blocks]
    flat = sorted(i for b in blocks for i in b)
    if flat != list(range(len(dims))):
        raise ShapeMismatchError("shape mismatch: blocks must partition the factors")
    signature = tuple(dims[i] for i in blocks[0])
    for b in blocks:
        if tuple(dims[i] for i in b) != signature:
            raise ShapeMismatchError("shape mismatch: blocks are not congruent")
    n = len(blocks)
    position = {factor: (bi, si) for bi, b in enumerate(blocks) for si, factor in enumerate(b)}
    acc = np.zeros_like(matrix, dtype=complex)
    for pi in all_permutations(n):
        pi_inv = inverse(pi)
        # new slot s of block m receives old block pi^{-1}(m), slot s
        order = [0] * len(dims)
        for new_factor in range(len(dims)):
            bi, si = position[new_factor]
            order[new_factor] = blocks[pi_inv[bi]][si]
        acc += reorder_factors(matrix, dims, order)
    return acc / math.factorial(n)


# ---------------------------------------------------------------------------
# Random sampling
# ---------------------------------------------------------------------------

def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix.

    The QR factorisation is made unique (hence Haar-distributed) by
    rescaling so the diagonal of R is real positive.
    """
    q, r = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def haar_unitaries(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` independent Haar unitaries, shape (count, d, d)."""
    a = rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))
    q, r = np.linalg.qr(a)
    phases = np.diagonal(r, axis1=-2, axis2=-1).copy()
    phases /= np.abs(phases)
    return q * phases[:, None, :]


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry (rows >= cols), i.e. V with V^dagger V = 1."""
    if rows < cols:
        raise ValueError("isometry requires rows >= cols")
    q, r = np.linalg.qr(ginibre(rows, cols, rng))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(d, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix (Hilbert-Schmidt-style, Ginibre GG^dagger)."""
    rank = d if rank is None else rank
    g = ginibre(d, rank, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def maximally_entangled(d: int) -> np.ndarray:
    """Unnormalised maximally entangled operator sum_ij |ii><jj|."""
    vec = np.eye(d, dtype=complex).reshape(-1)
    return np.outer(vec, vec)
