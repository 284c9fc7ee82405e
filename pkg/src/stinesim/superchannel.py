"""The random-purification channel, the explicit random-dilation formula,
its circuit realisation, and the Monte-Carlo and consistency oracles.

Factor-order conventions:

* All maps derived from a channel query emit ``B^n (x) E^n``: the n output
  factors (dimension d_b each) first, then the n environment factors
  (dimension r each), each block in copy order. Interleaved per-copy
  orders arising from tensor powers are converted at the boundary.
* The purification channel works in grouped order ``A^n (x) B^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np

from .channels import (
    KrausChannel,
    StinespringIsometry,
    Superoperator,
    kraus_to_choi,
    kraus_to_stinespring,
    rotate_kraus_gauge,
    superoperator_to_choi,
)
from .schur import controlled_permutation, fourier_labels, schur_transform, sn_qft
from .symrep import (
    dim_irrep_sym,
    dim_irrep_unitary,
    isotypical_projector,
    partial_haar_twirl,
    partitions,
)
from .tensor import (
    all_permutations,
    check_cap,
    haar_unitaries,
    kron_all,
    maximally_entangled,
    permutation_index_map,
    permutation_unitary,
    random_density,
    reorder_factors,
    tensor_power,
)


@dataclass(frozen=True)
class PurificationSpec:
    """Parameters of the n-copy random purification channel.

    The purifying register has the same local dimension as the system.
    """

    d_a: int
    n: int

    def __post_init__(self):
        if self.d_a < 1 or self.n < 1:
            raise ValueError("dimensions and copy counts must be positive")
        check_cap(self.d_a ** (2 * self.n))


@dataclass(frozen=True)
class SuperchannelSpec:
    """Validated parameter set (n, d_a, d_b, r) with r <= d_a * d_b."""

    n: int
    d_a: int
    d_b: int
    r: int

    def __post_init__(self):
        if min(self.n, self.d_a, self.d_b, self.r) < 1:
            raise ValueError("dimensions and copy counts must be positive")
        if self.r > self.d_a * self.d_b:
            raise ValueError(f"rank promise r={self.r} exceeds d_a*d_b={self.d_a * self.d_b}")
        check_cap(self.d_a**self.n)
        check_cap(self.d_b**self.n * self.r**self.n)
        check_cap(math.factorial(self.n) * max(self.d_a, self.d_b) ** self.n)


def pad_kraus(ch: KrausChannel, r: int) -> KrausChannel:
    """Pad the Kraus list with zero operators up to the promised rank r."""
    if len(ch.kraus) > r:
        raise ValueError(
            f"channel has {len(ch.kraus)} Kraus operators, inconsistent with rank promise r={r}"
        )
    zeros = tuple(
        np.zeros((ch.d_out, ch.d_in), dtype=complex) for _ in range(r - len(ch.kraus))
    )
    return KrausChannel(ch.d_in, ch.d_out, ch.kraus + zeros)


# ---------------------------------------------------------------------------
# Random purification channel
# ---------------------------------------------------------------------------

def r_n_operator(spec: PurificationSpec) -> np.ndarray:
    """The PSD operator defining the purification channel, on A^n (x) B^n.

    Exact Haar average of the n-th tensor power of the twirled maximally
    entangled operator, computed by the Weingarten expansion with the A
    factors as spectators.
    """
    return _purification_data(spec)[0]


@lru_cache(maxsize=None)
def _purification_data(spec: PurificationSpec) -> tuple[np.ndarray, np.ndarray]:
    d, n = spec.d_a, spec.n
    gamma_n = tensor_power(maximally_entangled(d), n)  # (A1 B1 A2 B2 ...)
    dims = (d, d) * n
    grouped = reorder_factors(
        gamma_n, dims, tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    )
    r_n = partial_haar_twirl(grouped, (d,) * (2 * n), tuple(range(n, 2 * n)))
    vals, vecs = np.linalg.eigh((r_n + r_n.conj().T) / 2)
    floor = -1e-12 * max(1.0, float(vals[-1]))
    if vals[0] < floor:
        raise ValueError(f"R_n must be PSD; found eigenvalue {vals[0]:.3e}")
    sqrt_r = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    return r_n, sqrt_r


def random_purification_apply(spec: PurificationSpec, x: np.ndarray) -> np.ndarray:
    """Apply the purification channel: sqrt(R_n) (x (x) 1_B^n) sqrt(R_n).

    ``x`` acts on A^n; the output acts on A^n (x) B^n (grouped order).
    """
    d_n = spec.d_a**spec.n
    if x.shape != (d_n, d_n):
        raise ValueError(f"operator shape {x.shape} != ({d_n}, {d_n})")
    _, sqrt_r = _purification_data(spec)
    return sqrt_r @ np.kron(x, np.eye(d_n)) @ sqrt_r


def twirled_purification_power(spec: PurificationSpec, rho: np.ndarray) -> np.ndarray:
    """Independent oracle for the defining property on product inputs.

    Builds a fixed purification of ``rho``, takes its n-th tensor power and
    Haar-averages the purifying side: E_U[((1 (x) U) psi (1 (x) U^dag))^(x)n],
    returned in grouped A^n (x) B^n order.
    """
    d, n = spec.d_a, spec.n
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    amps = np.sqrt(np.clip(vals, 0.0, None))
    psi = (vecs * amps).reshape(-1)  # sum_k sqrt(p_k) |v_k> (x) |k>, A slow
    pure = np.outer(psi, psi.conj())
    power = tensor_power(pure, n)  # (A1 B1 A2 B2 ...)
    grouped = reorder_factors(
        power, (d, d) * n, tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    )
    return partial_haar_twirl(grouped, (d,) * (2 * n), tuple(range(n, 2 * n)))


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

def _unit_batch(d: int, cols: np.ndarray) -> np.ndarray:
    """Matrix units |x><y| for the column-major vec indices in ``cols``."""
    batch = np.zeros((len(cols), d, d), dtype=complex)
    batch[np.arange(len(cols)), cols % d, cols // d] = 1.0
    return batch


def superoperator_from_apply(
    apply_fn: Callable[[np.ndarray], np.ndarray], d_in: int, d_out: int, chunk: int = 96
) -> Superoperator:
    """Materialise the superoperator matrix of a batched operator map."""
    matrix = np.empty((d_out**2, d_in**2), dtype=complex)
    for start in range(0, d_in**2, chunk):
        cols = np.arange(start, min(start + chunk, d_in**2))
        out = apply_fn(_unit_batch(d_in, cols))
        matrix[:, cols] = out.transpose(0, 2, 1).reshape(len(cols), -1).T
    return Superoperator(d_in, d_out, matrix)


def _grouping_index(d_b: int, r: int, n: int) -> np.ndarray:
    """Flat index map from interleaved (B1 E1 B2 E2 ...) to grouped B^n E^n."""
    idx = np.arange((d_b * r) ** n).reshape((d_b, r) * n)
    axes = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    return idx.transpose(axes).reshape(-1)


def _tensor_kraus(ch: KrausChannel, n: int) -> list[np.ndarray]:
    """Nonzero Kraus operators of Phi^(x)n (zero padding drops out)."""
    live = [k for k in ch.kraus if np.any(k)]
    return [kron_all(combo) if n > 1 else combo[0] for combo in product(live, repeat=n)]


def _phi_n_superoperator(ch: KrausChannel, n: int) -> Superoperator:
    mat = sum(np.kron(k.conj(), k) for k in _tensor_kraus(ch, n))
    return Superoperator(ch.d_in**n, ch.d_out**n, mat)


# ---------------------------------------------------------------------------
# Explicit formula for the random-dilation channel
# ---------------------------------------------------------------------------

class _OmegaEngine:
    """Evaluates the closed-form channel sum over S_n and Young diagrams.

    Omega(X) = sum_sigma [U_sigma Phi^(x)n(U_sigma^dag X)] (x) C_sigma with
    C_sigma = (1/n!) sum_{lam, rows<=r} (dim[lam]/dim[U_{r,lam}])
    U_sigma Pi_lam collected once per permutation.
    """

    def __init__(self, ch: KrausChannel, n: int, r: int):
        SuperchannelSpec(n, ch.d_in, ch.d_out, r)
        if len(ch.kraus) != r:
            raise ValueError(f"expected exactly r={r} Kraus operators, got {len(ch.kraus)}")
        self.n, self.r = n, r
        self.d_in = ch.d_in**n
        self.db_n = ch.d_out**n
        self.rn = r**n
        self.d_out = self.db_n * self.rn
        self.phi_n = _phi_n_superoperator(ch, n)
        perms = all_permutations(n)
        self.u_a = [permutation_unitary(s, ch.d_in) for s in perms]
        self.u_b = [permutation_unitary(s, ch.d_out) for s in perms]
        weighted = np.zeros((self.rn, self.rn), dtype=complex)
        for lam in partitions(n, r):
            weight = dim_irrep_sym(lam) / dim_irrep_unitary(r, lam)
            weighted += weight * isotypical_projector(lam, r)
        self.c_env = [
            permutation_unitary(s, r) @ weighted / math.factorial(n) for s in perms
        ]

    def apply(self, batch: np.ndarray) -> np.ndarray:
        m = batch.shape[0]
        out = np.zeros((m, self.db_n, self.rn, self.db_n, self.rn), dtype=complex)
        for u_a, u_b, c_env in zip(self.u_a, self.u_b, self.c_env):
            rotated = np.matmul(u_a.conj().T, batch)
            vecs = rotated.transpose(0, 2, 1).reshape(m, -1)
            mapped = vecs @ self.phi_n.matrix.T
            mapped = mapped.reshape(m, self.db_n, self.db_n).transpose(0, 2, 1)
            mapped = np.matmul(u_b, mapped)
            out += np.einsum("mbc,ef->mbecf", mapped, c_env, optimize=True)
        return out.reshape(m, self.d_out, self.d_out)


def omega_explicit(ch: KrausChannel, n: int, r: int, chunk: int = 96) -> Superoperator:
    """Superoperator of the random-dilation channel via the explicit sum.

    The channel must carry exactly r Kraus operators; use
    :func:`pad_kraus` first when the promise exceeds the actual rank.
    Output factor order is B^n then E^n.
    """
    engine = _OmegaEngine(ch, n, r)
    return superoperator_from_apply(engine.apply, engine.d_in, engine.d_out, chunk)


# ---------------------------------------------------------------------------
# Circuit realisation
# ---------------------------------------------------------------------------

def _t_channel_kraus(n: int, r: int) -> list[np.ndarray]:
    """Kraus operators of the label-measurement channel C^{n!} -> (C^r)^(x)n.

    On diagrams with at most r rows it keeps the column label, discards the
    row label and prepares the maximally mixed multiplicity state, writing
    the output in the Schur-label basis; taller diagrams are replaced by
    the maximally mixed state.
    """
    order = math.factorial(n)
    rn = r**n
    schur = schur_transform(r, n)
    schur_pos = {label: col for col, label in enumerate(schur.labels)}
    fourier_pos = {label: row for row, label in enumerate(fourier_labels(n))}
    kraus: list[np.ndarray] = []
    for lam in partitions(n):
        dim_s = dim_irrep_sym(lam)
        if len(lam) <= r:
            mult = dim_irrep_unitary(r, lam)
            for i in range(dim_s):
                for alpha in range(mult):
                    a = np.zeros((rn, order), dtype=complex)
                    for j in range(dim_s):
                        a[schur_pos[(lam, j, alpha)], fourier_pos[(lam, i, j)]] = 1.0
                    kraus.append(a / math.sqrt(mult))
        else:
            for i in range(dim_s):
                for j in range(dim_s):
                    row = fourier_pos[(lam, i, j)]
                    for m in range(rn):
                        a = np.zeros((rn, order), dtype=complex)
                        a[m, row] = 1.0
                        kraus.append(a / math.sqrt(rn))
    return kraus


class _CircuitEngine:
    """Composes the encoder, channel queries, decoder, label measurement and
    Schur rotation, stage by stage, in Kraus form.

    Each stage is a channel, so the composite is the channel whose Kraus
    operators are all products (one factor per stage); the composite stack
    is assembled once and reused for every input.
    """

    def __init__(self, ch: KrausChannel, n: int, r: int):
        SuperchannelSpec(n, ch.d_in, ch.d_out, r)
        if len(ch.kraus) != r:
            raise ValueError(f"expected exactly r={r} Kraus operators, got {len(ch.kraus)}")
        self.n, self.r = n, r
        order = math.factorial(n)
        da_n = ch.d_in**n
        db_n = ch.d_out**n
        rn = r**n
        self.db_n, self.rn = db_n, rn
        self.d_in = da_n
        self.d_out = db_n * rn
        qft = sn_qft(n).matrix
        # encoder isometry: controlled permutation applied to the uniform
        # control state prepared as QFT^dagger |trivial label>
        u0 = qft.conj().T[:, 0]
        encoder = controlled_permutation(ch.d_in, n) @ np.kron(u0[:, None], np.eye(da_n))
        decoder = np.kron(qft, np.eye(db_n)) @ controlled_permutation(
            ch.d_out, n, inverse=True
        )
        u_schur = schur_transform(r, n).matrix
        t_kraus = [u_schur @ a for a in _t_channel_kraus(n, r)]
        stack = []
        for k_phi in _tensor_kraus(ch, n):
            mid = decoder @ np.kron(np.eye(order), k_phi) @ encoder
            for a in t_kraus:
                stack.append(np.kron(a, np.eye(db_n)) @ mid)
        stacked = np.stack(stack)  # [s, (e, b), a] with the environment slow
        self.kraus_stack = np.ascontiguousarray(
            stacked.reshape(-1, rn, db_n, da_n).transpose(0, 2, 1, 3).reshape(
                -1, self.d_out, da_n
            )
        )

    def apply(self, batch: np.ndarray) -> np.ndarray:
        left = np.einsum("sia,mab->msib", self.kraus_stack, batch, optimize=True)
        return np.einsum("msib,sjb->mij", left, self.kraus_stack.conj(), optimize=True)

    def superoperator_matrix(self) -> np.ndarray:
        """One Gram-style contraction over the composite Kraus stack."""
        d_out, d_in = self.d_out, self.d_in
        flat = self.kraus_stack.reshape(len(self.kraus_stack), d_out * d_in)
        gram = flat.T @ flat.conj()  # [(i, k), (j, l)] -> sum_s K[i,k] K*[j,l]
        return (
            gram.reshape(d_out, d_in, d_out, d_in)
            .transpose(2, 0, 3, 1)
            .reshape(d_out * d_out, d_in * d_in)
        )


def circuit_superchannel(ch: KrausChannel, n: int, r: int) -> Superoperator:
    """Superoperator of the encoder/decoder circuit realisation.

    Composes, as channels: encode with a controlled permutation over the
    uniform permutation superposition, query the channel n times, decode
    with the inverse controlled permutation and the group Fourier
    transform, measure the diagram label, and rotate the environment with
    the Schur transform. Output factor order is B^n then E^n, matching
    :func:`omega_explicit`.
    """
    engine = _CircuitEngine(ch, n, r)
    return Superoperator(engine.d_in, engine.d_out, engine.superoperator_matrix())


# ---------------------------------------------------------------------------
# Monte-Carlo oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McSuperoperator:
    """Monte-Carlo estimate with a per-entry standard error."""

    superoperator: Superoperator
    std_err: np.ndarray
    samples: int


def _random_dilation_batch(
    v: StinespringIsometry, n: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """W^(x)n for W = (1_B (x) U_E) V over ``count`` Haar samples, rows in
    grouped B^n E^n order."""
    db, r, da = v.d_out, v.d_env, v.d_in
    units = haar_unitaries(r, count, rng)
    v3 = v.matrix.reshape(db, r, da)
    w = np.einsum("sef,bfa->sbea", units, v3, optimize=True).reshape(count, db * r, da)
    wn = w
    for _ in range(n - 1):
        wn = np.einsum("sxa,syb->sxyab", wn, w, optimize=True).reshape(
            count, wn.shape[1] * w.shape[1], wn.shape[2] * da
        )
    return wn[:, _grouping_index(db, r, n), :]


def stinespring_rand_isometry_mc(
    v: StinespringIsometry,
    n: int,
    samples: int,
    rng: np.random.Generator,
    chunk: int = 512,
) -> McSuperoperator:
    """Monte-Carlo average of the channel induced by the random dilation.

    Accumulation is chunked in a fixed order, so results are bit-identical
    for a fixed (seed, samples, chunk).
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    d_in = v.d_in**n
    d_out = (v.d_out * v.d_env) ** n
    acc = np.zeros((d_out**2, d_in**2), dtype=complex)
    acc_sq = np.zeros((d_out**2, d_in**2))
    done = 0
    while done < samples:
        count = min(chunk, samples - done)
        wn = _random_dilation_batch(v, n, count, rng)
        sups = np.einsum("sij,skl->sikjl", wn.conj(), wn, optimize=True).reshape(
            count, d_out**2, d_in**2
        )
        acc += sups.sum(axis=0)
        acc_sq += (sups.real**2 + sups.imag**2).sum(axis=0)
        done += count
    mean = acc / samples
    var = np.maximum(acc_sq / samples - np.abs(mean) ** 2, 0.0)
    std_err = np.sqrt(var / samples)
    return McSuperoperator(Superoperator(d_in, d_out, mean), std_err, samples)


# ---------------------------------------------------------------------------
# Verification reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckReport:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


@dataclass(frozen=True)
class InstanceReport:
    params: dict
    checks: tuple[CheckReport, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max(c.max_deviation for c in self.checks)


def instance_equality_report(
    ch: KrausChannel,
    n: int,
    r: int,
    tol_equality: float = 1e-9,
    tol_marginal: float = 1e-10,
    tol_covariance: float = 1e-9,
    chunk: int = 96,
) -> InstanceReport:
    """Check circuit = formula, the environment-trace marginal law, and
    permutation covariance for one (channel, n, r) instance.

    The formula outputs for all input matrix units are held in memory; the
    circuit outputs are compared chunk by chunk.
    """
    padded = pad_kraus(ch, r)
    omega = _OmegaEngine(padded, n, r)
    circuit = _CircuitEngine(padded, n, r)
    d_in, d_out = omega.d_in, omega.d_out
    db_n, rn = omega.db_n, omega.rn
    n_cols = d_in**2
    circuit_matrix = circuit.superoperator_matrix()
    outputs = np.empty((n_cols, d_out, d_out), dtype=complex)
    circuit_dev = 0.0
    for start in range(0, n_cols, chunk):
        cols = np.arange(start, min(start + chunk, n_cols))
        outputs[cols] = omega.apply(_unit_batch(d_in, cols))
        circ_cols = (
            circuit_matrix[:, cols].reshape((d_out, d_out, len(cols)), order="F")
            .transpose(2, 0, 1)
        )
        circuit_dev = max(circuit_dev, float(np.max(np.abs(circ_cols - outputs[cols]))))
    del circuit_matrix
    # marginal law: tracing the environment recovers the n-fold channel
    traced = np.einsum(
        "cbeqe->cbq", outputs.reshape(n_cols, db_n, rn, db_n, rn), optimize=True
    )
    phi_cols = omega.phi_n.matrix.T.reshape(n_cols, db_n, db_n).transpose(0, 2, 1)
    marginal_dev = float(np.max(np.abs(traced - phi_cols)))
    # permutation covariance, checked on the adjacent transpositions and the
    # full cycle (they generate S_n, and the relabellings compose exactly)
    generators = [
        tuple(range(k)) + (k + 1, k) + tuple(range(k + 2, n)) for k in range(n - 1)
    ]
    if n > 2:
        generators.append(tuple(range(1, n)) + (0,))
    covariance_dev = 0.0
    for sigma in generators:
        in_map = permutation_index_map(sigma, ch.d_in)
        col_map = in_map[np.arange(n_cols) % d_in] + d_in * in_map[np.arange(n_cols) // d_in]
        out_map = (
            permutation_index_map(sigma, ch.d_out)[:, None] * rn
            + permutation_index_map(sigma, r)[None, :]
        ).reshape(-1)
        inv_out = np.empty_like(out_map)
        inv_out[out_map] = np.arange(d_out)
        for start in range(0, n_cols, chunk):
            cols = np.arange(start, min(start + chunk, n_cols))
            lhs = outputs[col_map[cols]]
            rhs = outputs[np.ix_(cols, inv_out, inv_out)]
            covariance_dev = max(covariance_dev, float(np.max(np.abs(lhs - rhs))))
    return InstanceReport(
        params={"n": n, "d_a": ch.d_in, "d_b": ch.d_out, "r": r},
        checks=(
            CheckReport("circuit_vs_formula", circuit_dev, tol_equality),
            CheckReport("environment_marginal", marginal_dev, tol_marginal),
            CheckReport("permutation_covariance", covariance_dev, tol_covariance),
        ),
    )


def choi_consistency_check(ch: KrausChannel, n: int, tolerance: float = 1e-9) -> CheckReport:
    """Choi-level consistency of the full-rank construction.

    With r = d_a * d_b, the Choi operator of the explicit channel must
    equal the purification channel applied to the n-th tensor power of the
    channel's Choi operator (computed by an independent code path), after
    regrouping the per-copy factors.
    """
    d_a, d_b = ch.d_in, ch.d_out
    r = d_a * d_b
    padded = pad_kraus(ch, r)
    lhs = superoperator_to_choi(omega_explicit(padded, n, r)).matrix
    spec = PurificationSpec(d_a * d_b, n)
    j_phi = kraus_to_choi(ch).matrix
    rhs_grouped = random_purification_apply(spec, tensor_power(j_phi, n))
    dims = (d_a, d_b) * n + (r,) * n
    order = (
        tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)) + tuple(range(2 * n, 3 * n))
    )
    rhs = reorder_factors(rhs_grouped, dims, order)
    deviation = float(np.max(np.abs(lhs - rhs)))
    return CheckReport("choi_consistency", deviation, tolerance)


@dataclass(frozen=True)
class ConversionCheckReport:
    params: dict
    gauge_deviation: float
    max_deviation: float
    max_z_score: float
    samples: int

    def passed(self, tol_gauge: float = 1e-9, z_gate: float = 3.0) -> bool:
        return self.gauge_deviation <= tol_gauge and self.max_z_score <= z_gate


def dilation_conversion_check(
    ch: KrausChannel,
    n: int,
    r: int,
    trials: int,
    samples: int,
    rng: np.random.Generator,
    chunk: int = 512,
) -> ConversionCheckReport:
    """Statement-level check of the query-conversion identity.

    The circuit output is compared, on random product and entangled
    inputs, against a Monte-Carlo average built from an independently
    gauged dilation (environment rotated by a Haar unitary), verifying the
    'any fixed dilation' clause; deviations are reported in units of the
    Monte-Carlo standard error.
    """
    padded = pad_kraus(ch, r)
    gauge = haar_unitaries(r, 1, rng)[0]
    regauged = rotate_kraus_gauge(padded, gauge)
    gauge_dev = float(
        np.max(np.abs(omega_explicit(padded, n, r).matrix - omega_explicit(regauged, n, r).matrix))
    )
    v2 = kraus_to_stinespring(regauged)
    circuit = _CircuitEngine(padded, n, r)
    d_a = ch.d_in
    states = []
    for t in range(trials):
        if t % 2 == 0:
            parts = [random_density(d_a, rng) for _ in range(n)]
            states.append(kron_all(parts) if n > 1 else parts[0])
        else:
            states.append(random_density(d_a**n, rng))
    states = np.stack(states)
    exact = circuit.apply(states)
    d_out = circuit.d_out
    acc = np.zeros((trials, d_out, d_out), dtype=complex)
    acc_sq = np.zeros((trials, d_out, d_out))
    done = 0
    while done < samples:
        count = min(chunk, samples - done)
        wn = _random_dilation_batch(v2, n, count, rng)
        outs = np.einsum("sxa,tab,syb->stxy", wn, states, wn.conj(), optimize=True)
        acc += outs.sum(axis=0)
        acc_sq += (outs.real**2 + outs.imag**2).sum(axis=0)
        done += count
    mean = acc / samples
    var = np.maximum(acc_sq / samples - np.abs(mean) ** 2, 0.0)
    std_err = np.sqrt(var / samples)
    delta = np.abs(exact - mean)
    floor = 1e-12 + 1e-9 * float(np.max(np.abs(exact)))
    z = delta / (std_err + floor)
    return ConversionCheckReport(
        params={"n": n, "d_a": ch.d_in, "d_b": ch.d_out, "r": r, "trials": trials},
        gauge_deviation=gauge_dev,
        max_deviation=float(np.max(delta)),
        max_z_score=float(np.max(z)),
        samples=samples,
    )


def environment_twirl_deviation(ch: KrausChannel, n: int, r: int) -> float:
    """Residual of a further Haar twirl on E^n applied to the Choi operator."""
    padded = pad_kraus(ch, r)
    j = superoperator_to_choi(omega_explicit(padded, n, r)).matrix
    dims = (ch.d_in**n, ch.d_out**n) + (r,) * n
    twirled = partial_haar_twirl(j, dims, tuple(range(2, 2 + n)))
    return float(np.max(np.abs(twirled - j)))
