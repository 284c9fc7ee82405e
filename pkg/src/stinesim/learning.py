"""Toy-scale channel tomography through the dilation reduction, plus the
exact counting-bound calculators.

All logarithms in the bound calculators are base 2; binomials are exact
Python integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    ChoiMatrix,
    KrausChannel,
    choi_to_kraus,
    choi_trace_distance,
    kraus_to_choi,
    kraus_to_stinespring,
    procrustes_dilation_distance,
)
from .superchannel import pad_kraus
from .tensor import dagger, haar_unitaries, partial_trace


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class TomographyConfig:
    """Measurement budget for the tomography demo.

    ``shots = 0`` is the exact-expectation sentinel: the reconstruction
    uses true outcome probabilities instead of sampled frequencies.
    ``n_queries`` records the copy count at which the superchannel would be
    invoked; the single-copy learner below does not depend on it.
    """

    shots: int
    bases: int
    seed: int
    n_queries: int = 1

    def __post_init__(self):
        if self.shots < 0 or self.bases < 1 or self.n_queries < 1:
            raise ValueError("shots must be >= 0, bases and n_queries positive")


@dataclass(frozen=True)
class LearnResult:
    estimate: KrausChannel
    choi_distance: float
    dilation_distance: float
    shots_used: int


def learn_channel(truth: KrausChannel, r: int, cfg: TomographyConfig) -> LearnResult:
    """Estimate a channel from single-copy measurements of its dilation's
    Choi state.

    Pipeline: fix one random environment gauge of the dilation (the
    superchannel's output isometry), prepare its pure Choi state on
    A' (x) B (x) E, measure in Haar-random orthonormal bases, reconstruct
    by linear inversion, project to the nearest pure state, trace out the
    environment and restore trace preservation.
    """
    padded = pad_kraus(truth, r)
    v_truth = kraus_to_stinespring(padded)
    d_a, d_b = truth.d_in, truth.d_out
    d = d_a * d_b * r
    if cfg.bases < d * d:
        raise FrameError(
            f"frame not informationally complete: need bases >= {d * d}, got {cfg.bases}"
        )
    rng = np.random.default_rng(cfg.seed)
    u_env = haar_unitaries(r, 1, rng)[0]
    w = np.kron(np.eye(d_b), u_env) @ v_truth.matrix
    phi = w.T.reshape(-1) / math.sqrt(d_a)  # A' slow, then (B, E)

    bases_u = haar_unitaries(d, cfg.bases, rng)
    coeffs = np.einsum("bjk,j->bk", bases_u.conj(), phi, optimize=True)
    probs = np.abs(coeffs) ** 2
    if cfg.shots == 0:
        freqs = probs
    else:
        freqs = np.empty_like(probs)
        for b in range(cfg.bases):
            p = np.clip(probs[b], 0.0, None)
            p /= p.sum()
            freqs[b] = rng.multinomial(cfg.shots, p) / cfg.shots

    # design matrix rows <vec(E_bk)| against column-major vec(rho)
    design = np.einsum("bjk,blk->bklj", bases_u.conj(), bases_u, optimize=True)
    design = design.reshape(cfg.bases * d, d * d)
    sol, *_ = np.linalg.lstsq(design, freqs.reshape(-1), rcond=None)
    rho = sol.reshape((d, d), order="F")
    rho = (rho + dagger(rho)) / 2

    vals, vecs = np.linalg.eigh(rho)
    phi_hat = vecs[:, -1]
    pivot = np.argmax(np.abs(phi_hat))
    phi_hat = phi_hat * (phi_hat[pivot].conj() / abs(phi_hat[pivot]))

    j_w = d_a * np.outer(phi_hat, phi_hat.conj())
    j_channel = partial_trace(j_w, (d_a, d_b, r), {2})
    # restore trace preservation with the symmetric marginal correction
    marginal = partial_trace(j_channel, (d_a, d_b), {1})
    mvals, mvecs = np.linalg.eigh((marginal + dagger(marginal)) / 2)
    mvals = np.clip(mvals, 1e-12 * max(float(mvals[-1]), 1e-12), None)
    inv_sqrt = (mvecs / np.sqrt(mvals)) @ dagger(mvecs)
    corr = np.kron(inv_sqrt, np.eye(d_b))
    j_fixed = ChoiMatrix(d_a, d_b, corr @ j_channel @ dagger(corr))

    estimate = choi_to_kraus(j_fixed, tol=1e-10)
    est_padded = pad_kraus(estimate, r)
    dilation = procrustes_dilation_distance(
        kraus_to_stinespring(est_padded, tol=1e-6), v_truth
    )
    return LearnResult(
        estimate=estimate,
        choi_distance=choi_trace_distance(j_fixed, kraus_to_choi(truth)),
        dilation_distance=dilation.frobenius,
        shots_used=cfg.shots * cfg.bases,
    )


# ---------------------------------------------------------------------------
# Counting-bound calculators (exact integers, base-2 logs)
# ---------------------------------------------------------------------------

def sym_multiset_count(dimension: int, n: int) -> int:
    """Number of n-element multisets over ``dimension`` symbols."""
    if dimension < 1 or n < 0:
        raise ValueError("dimension must be positive and n nonnegative")
    return math.comb(n + dimension - 1, n)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the distinguishing inequality (1/2) log M <= log binom."""

    sym_count: int
    lhs: float
    rhs: float
    passed: bool
    n_min: int | None


def distinguishing_bound_check(
    m_hypotheses: int, n: int, d_a: int, d_b: int, r: int
) -> BoundReport:
    """Evaluate the channel-distinguishing counting bound.

    The pass flag uses the exact integer inequality M <= binom^2; ``n_min``
    is the smallest query count at which it holds (None when unsatisfiable,
    which happens only in the degenerate one-parameter case).
    """
    if min(m_hypotheses, d_a, d_b, r) < 1 or n < 0:
        raise ValueError("all parameters must be positive (n nonnegative)")
    dim = r * d_a * d_b
    count = sym_multiset_count(dim, n)
    passed = m_hypotheses <= count * count
    n_min: int | None = None
    if dim == 1:
        n_min = 0 if m_hypotheses <= 1 else None
    else:
        k = 0
        while True:
            c = sym_multiset_count(dim, k)
            if m_hypotheses <= c * c:
                n_min = k
                break
            k += 1
    return BoundReport(
        sym_count=count,
        lhs=0.5 * math.log2(m_hypotheses),
        rhs=float(math.log2(count)) if count > 0 else 0.0,
        passed=passed,
        n_min=n_min,
    )


def bosonic_entropy(x: float) -> float:
    """g(x) = (1+x) log2(1+x) - x log2(x), monotonically increasing."""
    if x <= 0:
        raise ValueError("bosonic entropy requires x > 0")
    return (1 + x) * math.log2(1 + x) - x * math.log2(x)


def invert_bosonic_entropy(c: float, tol: float = 1e-10) -> float:
    """Inverse of the bosonic entropy by bisection (g is increasing)."""
    if c <= 0:
        raise ValueError("inverse bosonic entropy requires c > 0")
    lo, hi = 1e-300, 1.0
    while bosonic_entropy(hi) < c:
        lo = hi
        hi *= 2.0
    for _ in range(300):
        mid = (lo + hi) / 2
        if bosonic_entropy(mid) < c:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return (lo + hi) / 2


def query_lower_bound(c: float, dimension: int) -> int:
    """Query lower bound ceil(g^{-1}(c) (dimension - 1)); 0 for dimension 1."""
    if c <= 0 or dimension < 1:
        raise ValueError("c must be positive and dimension >= 1")
    if dimension == 1:
        return 0
    value = invert_bosonic_entropy(c) * (dimension - 1)
    return max(math.ceil(value - 1e-8), 0)


@dataclass(frozen=True)
class PackingInterval:
    """Two-sided log-cardinality estimate of a channel packing net.

    ``dim_count`` is the exact dimension count 2 r d_a d_b - d_a^2 - r^2
    (isometry manifold minus the environment gauge group);
    ``sandwich_ok`` records (3/4) r d_a d_b <= dim_count <= 2 r d_a d_b.
    """

    lower: float
    upper: float
    dim_count: int
    sandwich_ok: bool


def packing_log_cardinality(
    d_a: int, d_b: int, r: int, epsilon: float, c_lower: float, c_upper: float
) -> PackingInterval:
    if d_b < 2:
        raise ValueError("packing bound requires output dimension d_b >= 2")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if min(d_a, r) < 1:
        raise ValueError("dimensions must be positive")
    dim_count = 2 * r * d_a * d_b - d_a * d_a - r * r
    log_inv_eps = math.log2(1.0 / epsilon)
    sandwich = 3 * r * d_a * d_b <= 4 * dim_count and dim_count <= 2 * r * d_a * d_b
    return PackingInterval(
        lower=c_lower * dim_count * log_inv_eps,
        upper=c_upper * 2 * r * d_a * d_b * log_inv_eps,
        dim_count=dim_count,
        sandwich_ok=sandwich,
    )
