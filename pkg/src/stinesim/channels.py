"""Channel representations, conversions between them, and distance measures.

Conventions (fixed once, enforced by round-trip tests):

* Vectorisation is column-major: ``vec(X) = X.ravel(order="F")``, so the
  superoperator of ``X -> A X B`` is ``kron(B.T, A)``.
* The Choi operator is unnormalised, ``J = sum_ij |i><j| (x) Phi(|i><j|)``
  with factor order A' then B and ``Tr J = d_in``.
* A Stinespring isometry ``V = sum_i K_i (x) |i>_E`` maps A to B (x) E
  with the B factor slow and the E factor fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import dagger, haar_isometry, partial_trace

DEFAULT_TOL = 1e-9
RANK_TOL = 1e-8


class NotCompletelyPositiveError(ValueError):
    pass


class NotTracePreservingError(ValueError):
    pass


class NotIsometryError(ValueError):
    pass


def vec(x: np.ndarray) -> np.ndarray:
    return x.ravel(order="F")


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return v.reshape((rows, cols), order="F")


@dataclass(frozen=True)
class KrausChannel:
    """Channel given by Kraus operators, each of shape (d_out, d_in)."""

    d_in: int
    d_out: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("Kraus list must be nonempty")
        for k in self.kraus:
            if k.shape != (self.d_out, self.d_in):
                raise ValueError(f"Kraus operator shape {k.shape} != ({self.d_out}, {self.d_in})")

    def tp_deviation(self) -> float:
        acc = sum(dagger(k) @ k for k in self.kraus)
        return float(np.max(np.abs(acc - np.eye(self.d_in))))

    def validate_tp(self, tol: float = DEFAULT_TOL) -> None:
        dev = self.tp_deviation()
        if dev > tol:
            raise NotTracePreservingError(
                f"trace-preservation violated (max deviation {dev:.3e})"
            )

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Linear extension sum_i K_i x K_i^dagger (x need not be Hermitian)."""
        return sum(k @ x @ dagger(k) for k in self.kraus)


@dataclass(frozen=True)
class ChoiMatrix:
    d_in: int
    d_out: int
    matrix: np.ndarray

    def __post_init__(self):
        side = self.d_in * self.d_out
        if self.matrix.shape != (side, side):
            raise ValueError(f"Choi matrix shape {self.matrix.shape} != ({side}, {side})")

    def tp_deviation(self) -> float:
        marg = partial_trace(self.matrix, (self.d_in, self.d_out), {1})
        return float(np.max(np.abs(marg - np.eye(self.d_in))))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + dagger(self.matrix)) / 2)[0])


@dataclass(frozen=True)
class StinespringIsometry:
    d_in: int
    d_out: int
    d_env: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.d_out * self.d_env, self.d_in):
            raise ValueError(
                f"isometry shape {self.matrix.shape} != ({self.d_out * self.d_env}, {self.d_in})"
            )

    def isometry_deviation(self) -> float:
        return float(np.max(np.abs(dagger(self.matrix) @ self.matrix - np.eye(self.d_in))))

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        dev = self.isometry_deviation()
        if dev > tol:
            raise NotIsometryError(f"not an isometry (max deviation {dev:.3e})")


@dataclass(frozen=True)
class Superoperator:
    """Matrix acting on column-major vectorised operators."""

    d_in: int
    d_out: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.d_out**2, self.d_in**2):
            raise ValueError(
                f"superoperator shape {self.matrix.shape} != ({self.d_out**2}, {self.d_in**2})"
            )


def apply_superoperator(s: Superoperator, x: np.ndarray) -> np.ndarray:
    if x.shape != (s.d_in, s.d_in):
        raise ValueError(f"operator shape {x.shape} != ({s.d_in}, {s.d_in})")
    return unvec(s.matrix @ vec(x), s.d_out)


def conjugation_superoperator(m: np.ndarray) -> Superoperator:
    """Superoperator of X -> m X m^dagger (m may be a rectangular isometry)."""
    d_out, d_in = m.shape
    return Superoperator(d_in, d_out, np.kron(m.conj(), m))


def kraus_to_superoperator(ch: KrausChannel) -> Superoperator:
    mat = sum(np.kron(k.conj(), k) for k in ch.kraus)
    return Superoperator(ch.d_in, ch.d_out, mat)


def compose(second: Superoperator, first: Superoperator) -> Superoperator:
    if first.d_out != second.d_in:
        raise ValueError("superoperator dimensions do not compose")
    return Superoperator(first.d_in, second.d_out, second.matrix @ first.matrix)


def superoperator_to_choi(s: Superoperator) -> ChoiMatrix:
    """J = sum_ij |i><j| (x) Phi(|i><j|), computed by index reshuffling."""
    da, db = s.d_in, s.d_out
    s4 = s.matrix.reshape((db, db, da, da), order="F")  # [b, b', i, j]
    j4 = s4.transpose(2, 0, 3, 1)  # [i, b, j, b']
    return ChoiMatrix(da, db, np.ascontiguousarray(j4.reshape(da * db, da * db)))


def choi_to_superoperator(j: ChoiMatrix) -> Superoperator:
    da, db = j.d_in, j.d_out
    j4 = j.matrix.reshape(da, db, da, db)  # [i, b, j, b']
    s4 = j4.transpose(1, 3, 0, 2)  # [b, b', i, j]
    return Superoperator(da, db, s4.reshape((db * db, da * da), order="F"))


def kraus_to_choi(ch: KrausChannel, tol: float = DEFAULT_TOL) -> ChoiMatrix:
    ch.validate_tp(tol)
    da, db = ch.d_in, ch.d_out
    acc = np.zeros((da * db, da * db), dtype=complex)
    for k in ch.kraus:
        kvec = k.T.reshape(-1)  # sum_i |i>_{A'} (x) K|i>, index (i, b) with i slow
        acc += np.outer(kvec, kvec.conj())
    return ChoiMatrix(da, db, acc)


def choi_to_kraus(j: ChoiMatrix, tol: float = RANK_TOL) -> KrausChannel:
    """Eigendecomposition of the Choi operator into Kraus operators.

    Eigenvector phases are fixed by making the largest-magnitude entry real
    positive, so the output is deterministic.
    """
    herm = (j.matrix + dagger(j.matrix)) / 2
    vals, vecs = np.linalg.eigh(herm)
    scale = max(vals[-1], 0.0)
    if vals[0] < -max(tol * scale, tol):
        raise NotCompletelyPositiveError(
            f"not completely positive (eigenvalue {vals[0]:.3e})"
        )
    kraus = []
    for val, vec_ in zip(vals, vecs.T):
        if val <= tol * scale:
            continue
        pivot = np.argmax(np.abs(vec_))
        phase = vec_[pivot] / abs(vec_[pivot])
        vec_ = vec_ * phase.conj()
        k = np.sqrt(val) * vec_.reshape(j.d_in, j.d_out).T  # [i, b] -> K[b, i]
        kraus.append(k)
    if not kraus:
        raise NotCompletelyPositiveError("not completely positive (zero Choi operator)")
    return KrausChannel(j.d_in, j.d_out, tuple(reversed(kraus)))


def choi_rank(j: ChoiMatrix, tol: float = RANK_TOL) -> int:
    vals = np.linalg.eigvalsh((j.matrix + dagger(j.matrix)) / 2)
    scale = max(float(vals[-1]), 0.0)
    return int(np.sum(vals > tol * scale)) if scale > 0 else 0


def kraus_to_stinespring(ch: KrausChannel, tol: float = DEFAULT_TOL) -> StinespringIsometry:
    """V = sum_i K_i (x) |i>_E with d_env = number of Kraus operators."""
    ch.validate_tp(tol)
    r = len(ch.kraus)
    v = np.zeros((ch.d_out * r, ch.d_in), dtype=complex)
    for i, k in enumerate(ch.kraus):
        v[i::r, :] = k  # row (b, e=i) = b*r + i
    return StinespringIsometry(ch.d_in, ch.d_out, r, v)


def stinespring_to_kraus(v: StinespringIsometry) -> KrausChannel:
    kraus = tuple(v.matrix[i :: v.d_env, :] for i in range(v.d_env))
    return KrausChannel(v.d_in, v.d_out, kraus)


def stinespring_to_channel(v: StinespringIsometry, tol: float = DEFAULT_TOL) -> Superoperator:
    """Superoperator of rho -> Tr_E[V rho V^dagger]."""
    v.validate(tol)
    return kraus_to_superoperator(stinespring_to_kraus(v))


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def choi_trace_distance(j1: ChoiMatrix, j2: ChoiMatrix) -> float:
    """Normalised trace distance (1/(2 d_in)) ||J1 - J2||_1.

    Zero for identical channels; lower-bounds the diamond-norm distance.
    """
    if (j1.d_in, j1.d_out) != (j2.d_in, j2.d_out):
        raise ValueError("Choi matrices have different dimensions")
    return trace_norm(j1.matrix - j2.matrix) / (2 * j1.d_in)


@dataclass(frozen=True)
class DilationDistance:
    """Result of the environment-gauge Procrustes alignment of two dilations.

    ``frobenius`` is min over unitaries U on E of ||(1_B (x) U) v1 - v2||_F,
    attained at ``u_env``; ``operator_norm`` is the spectral norm of the
    aligned difference, so ``2 * operator_norm`` upper-bounds the diamond
    distance of the two channels.
    """

    frobenius: float
    u_env: np.ndarray
    operator_norm: float

    @property
    def diamond_upper_bound(self) -> float:
        return 2.0 * self.operator_norm


def procrustes_dilation_distance(
    v1: StinespringIsometry, v2: StinespringIsometry
) -> DilationDistance:
    if (v1.d_in, v1.d_out, v1.d_env) != (v2.d_in, v2.d_out, v2.d_env):
        raise ValueError("isometries have different dimensions")
    db, r, da = v1.d_out, v1.d_env, v1.d_in
    t1 = v1.matrix.reshape(db, r, da)
    t2 = v2.matrix.reshape(db, r, da)
    # environment-contracted overlap M[e, e'] = sum_{b,a} v1[b,e,a] v2*[b,e',a]
    overlap = np.einsum("bea,bfa->ef", t1, t2.conj())
    u_svd, singvals, vh = np.linalg.svd(overlap)
    u_env = dagger(vh) @ dagger(u_svd)
    n1 = np.sum(np.abs(v1.matrix) ** 2).real
    n2 = np.sum(np.abs(v2.matrix) ** 2).real
    gap2 = max(n1 + n2 - 2.0 * float(np.sum(singvals)), 0.0)
    aligned = np.kron(np.eye(db), u_env) @ v1.matrix - v2.matrix
    opnorm = float(np.linalg.svd(aligned, compute_uv=False)[0])
    return DilationDistance(np.sqrt(gap2), u_env, opnorm)


# ---------------------------------------------------------------------------
# Channel constructors
# ---------------------------------------------------------------------------

def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d, dtype=complex),))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel(u.shape[1], u.shape[0], (u.astype(complex),))


def depolarizing_channel(d: int, p: float) -> KrausChannel:
    """Mixes the identity with the completely depolarising channel.

    Kraus set {sqrt(1 - p + p/d^2) 1} plus the d^2 - 1 remaining
    Heisenberg-Weyl operators, each with weight sqrt(p)/d; Choi rank d^2
    for 0 < p <= 1.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    kraus = []
    for a in range(d):
        for b in range(d):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = np.sqrt(1 - p + p / d**2) if a == b == 0 else np.sqrt(p) / d
            kraus.append(weight * w)
    return KrausChannel(d, d, tuple(kraus))


def random_kraus_channel(
    d_in: int, d_out: int, r: int, rng: np.random.Generator
) -> KrausChannel:
    """Random channel of Choi rank r from a Haar isometry A -> B (x) E."""
    if r > d_in * d_out:
        raise ValueError("rank cannot exceed d_in * d_out")
    v = haar_isometry(d_out * r, d_in, rng)
    return stinespring_to_kraus(StinespringIsometry(d_in, d_out, r, v))


def rotate_kraus_gauge(ch: KrausChannel, g: np.ndarray) -> KrausChannel:
    """Equivalent Kraus decomposition K'_j = sum_i g[j, i] K_i."""
    r = len(ch.kraus)
    if g.shape != (r, r):
        raise ValueError("gauge matrix must be r x r")
    stacked = np.stack(ch.kraus)
    rotated = np.tensordot(g, stacked, axes=(1, 0))
    return KrausChannel(ch.d_in, ch.d_out, tuple(rotated))
