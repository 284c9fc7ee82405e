"""Symmetric-group and unitary-group representation data.

Partitions are weakly decreasing tuples of positive integers. All
combinatorial quantities (irrep dimensions, characters) are computed in
exact integer arithmetic; only the representation matrices and twirls are
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tensor import (
    DIM_CAP,
    ShapeMismatchError,
    all_permutations,
    adjacent_decomposition,
    check_cap,
    check_shape,
    compose,
    cycle_type,
    inverse,
    permutation_unitary,
    reorder_factors,
)

Partition = tuple[int, ...]


def is_partition(parts: Sequence[int]) -> bool:
    parts = tuple(parts)
    if any(p <= 0 for p in parts):
        return False
    return all(parts[i] >= parts[i + 1] for i in range(len(parts) - 1))


@lru_cache(maxsize=None)
def partitions(n: int, max_len: int | None = None) -> tuple[Partition, ...]:
    """All partitions of n with at most ``max_len`` parts, lexicographically
    decreasing; ``partitions(0)`` is ``((),)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    limit = n if max_len is None else max_len

    def gen(remaining: int, largest: int, room: int):
        if remaining == 0:
            yield ()
            return
        if room == 0:
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in gen(remaining - first, first, room - 1):
                yield (first,) + rest

    return tuple(gen(n, n, limit))


def conjugate_partition(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > i) for i in range(lam[0]))


@lru_cache(maxsize=None)
def dim_irrep_sym(lam: Partition) -> int:
    """Dimension of the S_n irrep labelled by ``lam`` (hook length formula)."""
    lam = tuple(lam)
    n = sum(lam)
    if n == 0:
        return 1
    conj = conjugate_partition(lam)
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j) + (conj[j] - i) - 1
    return math.factorial(n) // hooks


@lru_cache(maxsize=None)
def dim_irrep_unitary(d: int, lam: Partition) -> int:
    """Dimension of the U(d) irrep labelled by ``lam`` (Weyl formula).

    Returns 0 when the diagram has more than d rows.
    """
    lam = tuple(lam)
    if len(lam) > d:
        return 0
    padded = lam + (0,) * (d - len(lam))
    value = Fraction(1)
    for i in range(d):
        for j in range(i + 1, d):
            value *= Fraction(padded[i] - padded[j] + j - i, j - i)
    assert value.denominator == 1
    return int(value)


# ---------------------------------------------------------------------------
# Characters (Murnaghan-Nakayama, exact integers)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def character(lam: Partition, mu: Partition) -> int:
    """Character chi_lam on the conjugacy class of cycle type ``mu``.

    Recursive Murnaghan-Nakayama rule over border strips, carried out on
    the beta-set (first-column hook lengths) of ``lam``.
    """
    lam, mu = tuple(lam), tuple(mu)
    if sum(lam) != sum(mu):
        raise ValueError(f"cycle type {mu} is not a partition of {sum(lam)}")
    if not mu:
        return 1
    t, rest = mu[0], mu[1:]
    m = len(lam)
    beta = [lam[i] + (m - 1 - i) for i in range(m)]
    beta_set = set(beta)
    total = 0
    for k, b in enumerate(beta):
        if b - t < 0 or (b - t) in beta_set:
            continue
        height = sum(1 for c in beta if b - t < c < b)
        new_beta = sorted(beta_set - {b} | {b - t}, reverse=True)
        new_lam = tuple(
            nb - (len(new_beta) - 1 - i) for i, nb in enumerate(new_beta)
        )
        new_lam = tuple(p for p in new_lam if p > 0)
        total += (-1) ** height * character(new_lam, rest)
    return total


# ---------------------------------------------------------------------------
# Young's orthogonal form
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def standard_tableaux(lam: Partition) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Standard Young tableaux of shape ``lam`` filled with 0..n-1.

    Deterministic order: ascending in the row-word (row index of 0, of 1,
    ..., of n-1).
    """
    lam = tuple(lam)
    n = sum(lam)

    def grow(tableau: list[list[int]], value: int):
        if value == n:
            yield tuple(tuple(row) for row in tableau)
            return
        for r in range(len(lam)):
            filled = len(tableau[r])
            if filled >= lam[r]:
                continue
            if r > 0 and len(tableau[r - 1]) <= filled:
                continue
            tableau[r].append(value)
            yield from grow(tableau, value + 1)
            tableau[r].pop()

    tabs = list(grow([[] for _ in lam], 0))
    return tuple(sorted(tabs, key=_row_word))


def _row_word(tableau) -> tuple[int, ...]:
    n = sum(len(row) for row in tableau)
    word = [0] * n
    for r, row in enumerate(tableau):
        for v in row:
            word[v] = r
    return tuple(word)


def _positions(tableau) -> dict[int, tuple[int, int]]:
    return {v: (r, c) for r, row in enumerate(tableau) for c, v in enumerate(row)}


@lru_cache(maxsize=None)
def young_generator_matrices(lam: Partition) -> tuple[np.ndarray, ...]:
    """Orthogonal-form matrices of the adjacent transpositions (k, k+1).

    Entry conventions follow the axial distance 1/d rule: same row gives a
    +1 diagonal, same column -1, and otherwise a 2x2 rotation-like block
    mixing the tableau with its (k, k+1)-swapped partner.
    """
    lam = tuple(lam)
    n = sum(lam)
    tabs = standard_tableaux(lam)
    index = {t: i for i, t in enumerate(tabs)}
    dim = len(tabs)
    mats = []
    for k in range(n - 1):
        m = np.zeros((dim, dim))
        for a, tab in enumerate(tabs):
            pos = _positions(tab)
            (r1, c1), (r2, c2) = pos[k], pos[k + 1]
            if r1 == r2:
                m[a, a] = 1.0
            elif c1 == c2:
                m[a, a] = -1.0
            else:
                dist = (c2 - r2) - (c1 - r1)
                m[a, a] = 1.0 / dist
                swapped = tuple(
                    tuple(k + 1 if v == k else k if v == k + 1 else v for v in row)
                    for row in tab
                )
                b = index[swapped]
                if b > a:
                    val = math.sqrt(1.0 - 1.0 / dist**2)
                    m[a, b] = val
                    m[b, a] = val
        m.setflags(write=False)
        mats.append(m)
    return tuple(mats)


def young_orthogonal_matrix(lam: Partition, sigma: Sequence[int]) -> np.ndarray:
    """Representation matrix R_lam(sigma) in the orthogonal (Young) form."""
    lam = tuple(lam)
    sigma = tuple(sigma)
    if len(sigma) != sum(lam):
        raise ValueError("permutation size does not match the partition")
    gens = young_generator_matrices(lam)
    out = np.eye(dim_irrep_sym(lam))
    for k in adjacent_decomposition(sigma):
        out = out @ gens[k]
    return out


@lru_cache(maxsize=None)
def _young_rep_table(lam: Partition, n: int) -> tuple[np.ndarray, ...]:
    """R_lam(sigma) for every sigma in S_n, in shared enumeration order."""
    return tuple(young_orthogonal_matrix(lam, s) for s in all_permutations(n))


def isotypical_projector(lam: Partition, d: int, cap: int = DIM_CAP) -> np.ndarray:
    """Projector onto the lam-isotypical block of (C^d)^(x)n.

    ``(dim[lam]/n!) sum_sigma chi_lam(sigma) U_sigma``; the zero matrix
    when the diagram has more than d rows.
    """
    lam = tuple(lam)
    n = sum(lam)
    check_cap(d**n, cap)
    size = d**n
    out = np.zeros((size, size), dtype=complex)
    if len(lam) > d:
        return out
    for sigma in all_permutations(n):
        chi = character(lam, cycle_type(sigma))
        if chi:
            out += chi * permutation_unitary(sigma, d, cap)
    return out * (dim_irrep_sym(lam) / math.factorial(n))


# ---------------------------------------------------------------------------
# Weingarten calculus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeingartenTable:
    """Weingarten function of U(d) on S_n, tabulated per conjugacy class."""

    n: int
    d: int
    values: dict[Partition, float]

    def __call__(self, sigma: Sequence[int]) -> float:
        return self.values[cycle_type(sigma)]


@lru_cache(maxsize=None)
def weingarten_table(n: int, d: int) -> WeingartenTable:
    values = {}
    for mu in partitions(n):
        total = 0.0
        for lam in partitions(n):
            if len(lam) > d:
                continue
            total += dim_irrep_sym(lam) ** 2 / dim_irrep_unitary(d, lam) * character(lam, mu)
        values[mu] = total / math.factorial(n) ** 2
    return WeingartenTable(n, d, values)


def weingarten(ct: Partition, d: int) -> float:
    """Weingarten function Wg(sigma, d) for a cycle type ``ct``."""
    return weingarten_table(sum(ct), d).values[tuple(ct)]


def haar_twirl(a: np.ndarray, d: int, n: int, cap: int = DIM_CAP) -> np.ndarray:
    """Exact Haar average E_U[U^(x)n a U^dagger(x)n] on (C^d)^(x)n."""
    size = d**n
    check_cap(size, cap)
    if a.shape != (size, size):
        raise ShapeMismatchError(f"shape mismatch: expected {size}x{size}, got {a.shape}")
    wg = weingarten_table(n, d)
    perms = all_permutations(n)
    unitaries = [permutation_unitary(s, d, cap) for s in perms]
    out = np.zeros_like(a, dtype=complex)
    for si, sigma in enumerate(perms):
        overlap = np.trace(unitaries[si].conj().T @ a)
        if overlap == 0:
            continue
        for ti, tau in enumerate(perms):
            out += wg(compose(inverse(tau), sigma)) * overlap * unitaries[ti]
    return out


def partial_haar_twirl(
    x: np.ndarray,
    dims: Sequence[int],
    twirled: Sequence[int],
    cap: int = DIM_CAP,
) -> np.ndarray:
    """Haar average with spectators: E_U[(1 (x) U^(x)n) x (1 (x) U^dagger(x)n)].

    ``twirled`` lists the factors acted on by the same random unitary; they
    must share one dimension d. Evaluated exactly through the Weingarten
    expansion, with U_tau reinserted on the twirled slots.
    """
    dims = tuple(dims)
    check_shape(x, dims)
    twirled = sorted(set(twirled))
    if not twirled:
        return x.copy()
    d = dims[twirled[0]]
    if any(dims[t] != d for t in twirled):
        raise ShapeMismatchError("shape mismatch: twirled factors must share one dimension")
    n = len(twirled)
    spectators = [i for i in range(len(dims)) if i not in twirled]
    order = spectators + twirled
    moved = reorder_factors(x, dims, order)
    spec_dim = int(np.prod([dims[i] for i in spectators])) if spectators else 1
    tw_dim = d**n
    wg = weingarten_table(n, d)
    perms = all_permutations(n)
    unitaries = [permutation_unitary(s, d, cap) for s in perms]
    moved4 = moved.reshape(spec_dim, tw_dim, spec_dim, tw_dim)
    out = np.zeros_like(moved)
    for si, sigma in enumerate(perms):
        # Tr_twirled[(1 (x) U_sigma^dagger) x]
        udag = unitaries[si].conj().T
        reduced = np.einsum("ba,iajb->ij", udag, moved4, optimize=True)
        coeffs = np.array([wg(compose(inverse(tau), sigma)) for tau in perms])
        block = np.tensordot(coeffs, np.stack(unitaries), axes=(0, 0))
        out += np.einsum("ij,ab->iajb", reduced, block, optimize=True).reshape(out.shape)
    # undo the spectator/twirled regrouping
    undo = [0] * len(dims)
    for new_pos, old_pos in enumerate(order):
        undo[old_pos] = new_pos
    return reorder_factors(out, tuple(dims[i] for i in order), undo)
