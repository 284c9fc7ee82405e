import numpy as np
import pytest

from stinesim import channels as ch
from stinesim import superchannel as sc
from stinesim import tensor


def test_spec_validation():
    with pytest.raises(ValueError, match="exceeds d_a"):
        sc.SuperchannelSpec(2, 2, 2, 5)
    with pytest.raises(ValueError):
        sc.SuperchannelSpec(0, 2, 2, 1)
    with pytest.raises(tensor.InstanceTooLargeError, match="instance too large"):
        sc.PurificationSpec(2, 12)


def test_pad_kraus():
    identity = ch.identity_channel(2)
    padded = sc.pad_kraus(identity, 3)
    assert len(padded.kraus) == 3
    assert np.array_equal(padded.kraus[0], np.eye(2))
    assert not np.any(padded.kraus[1])
    with pytest.raises(ValueError, match="inconsistent with rank promise"):
        sc.pad_kraus(ch.depolarizing_channel(2, 1.0), 2)


def test_r_n_operator_small_case():
    r1 = sc.r_n_operator(sc.PurificationSpec(2, 1))
    assert np.max(np.abs(r1 - np.eye(4) / 2)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_r_n_operator_properties(n):
    spec = sc.PurificationSpec(2, n)
    r_n = sc.r_n_operator(spec)
    assert np.max(np.abs(r_n - r_n.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(r_n)[0] >= -1e-10
    # invariant under joint permutations of the (A, B) copy pairs
    blocks = [(k, n + k) for k in range(n)]
    twirled = tensor.permutation_twirl(r_n, (2,) * (2 * n), blocks)
    assert np.max(np.abs(r_n - twirled)) <= 1e-10


def test_r_n_monte_carlo():
    spec = sc.PurificationSpec(2, 2)
    exact = sc.r_n_operator(spec)
    rng = np.random.default_rng(15)
    samples = 20_000
    units = tensor.haar_unitaries(2, samples, rng)
    gamma = tensor.maximally_entangled(2)
    twirled = np.einsum("ij,skl->sikjl", np.eye(2), units).reshape(samples, 4, 4)
    one = np.einsum("sij,jk,slk->sil", twirled, gamma, twirled.conj())
    two = np.einsum("sij,skl->sikjl", one, one).reshape(samples, 16, 16)
    # regroup (A1 B1 A2 B2) -> (A1 A2 B1 B2)
    idx = np.arange(16).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(-1)
    two = two[:, idx][:, :, idx]
    mean = two.mean(axis=0)
    se = np.sqrt(
        np.maximum((np.abs(two) ** 2).mean(axis=0) - np.abs(mean) ** 2, 0) / samples
    )
    z = np.abs(mean - exact) / (se + 1e-12)
    assert z.max() < 3.0  # pinned seed


def test_random_purification_of_maximally_mixed_state():
    # the fixed purification of 1/d is maximally entangled, so the output
    # is the twirled tensor square, i.e. the defining operator itself
    spec = sc.PurificationSpec(2, 2)
    out = sc.random_purification_apply(spec, np.eye(4, dtype=complex) / 4)
    assert np.max(np.abs(out - sc.r_n_operator(spec) / 4)) < 1e-12


def test_random_purification_pure_state():
    spec = sc.PurificationSpec(2, 1)
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = 1.0
    out = sc.random_purification_apply(spec, rho)
    assert np.max(np.abs(out - np.kron(rho, np.eye(2) / 2))) < 1e-12


def test_random_purification_matches_twirled_power():
    rng = np.random.default_rng(16)
    for n in (1, 2, 3):
        spec = sc.PurificationSpec(2, n)
        for _ in range(3):
            rho = tensor.random_density(2, rng)
            rho_n = rho
            for _ in range(n - 1):
                rho_n = np.kron(rho_n, rho)
            lhs = sc.random_purification_apply(spec, rho_n)
            rhs = sc.twirled_purification_power(spec, rho)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_random_purification_trace_preserving_on_arbitrary_inputs():
    rng = np.random.default_rng(17)
    spec = sc.PurificationSpec(2, 2)
    for _ in range(20):
        x = tensor.ginibre(4, 4, rng)  # not symmetric, not Hermitian
        out = sc.random_purification_apply(spec, x)
        assert abs(np.trace(out) - np.trace(x)) <= 1e-10


def test_omega_n1_closed_form():
    rng = np.random.default_rng(18)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    omega = sc.omega_explicit(channel, 1, 2)
    phi = ch.kraus_to_superoperator(channel)
    for _ in range(5):
        x = tensor.ginibre(2, 2, rng)
        out = ch.apply_superoperator(omega, x)
        expected = np.kron(ch.apply_superoperator(phi, x), np.eye(2) / 2)
        assert np.max(np.abs(out - expected)) < 1e-12


def test_omega_marginal_is_tensor_power():
    rng = np.random.default_rng(19)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    for n in (1, 2, 3):
        omega = sc.omega_explicit(channel, n, 2)
        phi_n = sc._phi_n_superoperator(channel, n)
        for _ in range(3):
            x = tensor.ginibre(2**n, 2**n, rng)
            out = ch.apply_superoperator(omega, x)
            marginal = tensor.partial_trace(out, (2**n, 2**n), {1})
            expected = ch.apply_superoperator(phi_n, x)
            assert np.max(np.abs(marginal - expected)) <= 1e-10


def test_omega_is_cptp():
    rng = np.random.default_rng(20)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    omega = sc.omega_explicit(channel, 2, 2)
    j = ch.superoperator_to_choi(omega)
    assert j.min_eigenvalue() >= -1e-9
    assert j.tp_deviation() <= 1e-10


def test_omega_gauge_independence():
    rng = np.random.default_rng(21)
    channel = sc.pad_kraus(ch.random_kraus_channel(2, 2, 2, rng), 3)
    g = tensor.haar_unitary(3, rng)
    other = ch.rotate_kraus_gauge(channel, g)
    a = sc.omega_explicit(channel, 2, 3)
    b = sc.omega_explicit(other, 2, 3)
    assert np.max(np.abs(a.matrix - b.matrix)) <= 1e-9


@pytest.mark.parametrize("n,da,db,r", [(1, 2, 2, 2), (2, 2, 2, 1), (2, 2, 2, 2), (2, 3, 2, 2), (2, 2, 3, 2), (3, 2, 2, 2)])
def test_circuit_equals_formula(n, da, db, r):
    rng = np.random.default_rng(100 + 10 * n + da + db + r)
    channel = ch.random_kraus_channel(da, db, r, rng)
    circuit = sc.circuit_superchannel(channel, n, r)
    formula = sc.omega_explicit(channel, n, r)
    assert np.max(np.abs(circuit.matrix - formula.matrix)) <= 1e-9


def test_circuit_unitary_channel_r1():
    rng = np.random.default_rng(22)
    u = tensor.haar_unitary(2, rng)
    channel = ch.unitary_channel(u)
    circuit = sc.circuit_superchannel(channel, 2, 1)
    formula = sc.omega_explicit(channel, 2, 1)
    assert np.max(np.abs(circuit.matrix - formula.matrix)) <= 1e-9
    # trivial environment: output E factor is the unique symmetric label state
    j = ch.superoperator_to_choi(circuit)
    assert j.min_eigenvalue() >= -1e-9


def test_instance_equality_report():
    rng = np.random.default_rng(23)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    report = sc.instance_equality_report(channel, 2, 2)
    assert report.passed
    names = [c.name for c in report.checks]
    assert names == ["circuit_vs_formula", "environment_marginal", "permutation_covariance"]


def test_mc_r1_has_zero_variance():
    rng = np.random.default_rng(24)
    u = tensor.haar_unitary(2, rng)
    v = ch.kraus_to_stinespring(ch.unitary_channel(u))
    mc = sc.stinespring_rand_isometry_mc(v, 2, 25, np.random.default_rng(0))
    exact = sc.omega_explicit(ch.unitary_channel(u), 2, 1)
    # the sampled phase cancels; the residual std error is cancellation noise
    assert np.max(mc.std_err) < 1e-8
    assert np.max(np.abs(mc.superoperator.matrix - exact.matrix)) < 1e-12


def test_mc_single_sample_marginal_is_exact():
    # tracing the environment kills the random unitary sample by sample
    rng = np.random.default_rng(25)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    v = ch.kraus_to_stinespring(channel)
    mc = sc.stinespring_rand_isometry_mc(v, 1, 1, np.random.default_rng(9))
    phi = ch.kraus_to_superoperator(channel)
    x = tensor.random_density(2, rng)
    out = ch.apply_superoperator(mc.superoperator, x)
    marg = tensor.partial_trace(out, (2, 2), {1})
    assert np.max(np.abs(marg - ch.apply_superoperator(phi, x))) < 1e-12


def test_mc_agrees_with_formula():
    rng = np.random.default_rng(26)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    v = ch.kraus_to_stinespring(channel)
    mc = sc.stinespring_rand_isometry_mc(v, 2, 4000, np.random.default_rng(3))
    exact = sc.omega_explicit(channel, 2, 2)
    z = np.abs(mc.superoperator.matrix - exact.matrix) / (mc.std_err + 1e-12)
    assert z.max() < 4.5


def test_mc_deterministic_for_fixed_seed():
    rng = np.random.default_rng(27)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    v = ch.kraus_to_stinespring(channel)
    a = sc.stinespring_rand_isometry_mc(v, 2, 600, np.random.default_rng(4))
    b = sc.stinespring_rand_isometry_mc(v, 2, 600, np.random.default_rng(4))
    assert np.array_equal(a.superoperator.matrix, b.superoperator.matrix)


@pytest.mark.parametrize("n", [1, 2])
def test_choi_consistency(n):
    rng = np.random.default_rng(28)
    for channel in (
        ch.identity_channel(2),
        ch.random_kraus_channel(2, 2, 3, rng),
        ch.depolarizing_channel(2, 0.3),
    ):
        report = sc.choi_consistency_check(channel, n)
        assert report.max_deviation <= 1e-9, report


def test_dilation_conversion_check():
    rng = np.random.default_rng(29)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    report = sc.dilation_conversion_check(
        channel, 2, 2, trials=4, samples=8000, rng=np.random.default_rng(30)
    )
    assert report.gauge_deviation <= 1e-9
    assert report.max_z_score <= 3.5


def test_superchannel_does_not_symmetrize():
    # on a non-symmetric product input the two code paths still agree,
    # and the output differs from the one for the swapped input
    rng = np.random.default_rng(31)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    engine = sc._CircuitEngine(sc.pad_kraus(channel, 2), 2, 2)
    rho = tensor.random_density(2, rng)
    sigma = tensor.random_density(2, rng)
    batch = np.stack([np.kron(rho, sigma), np.kron(sigma, rho)])
    outs = engine.apply(batch)
    omega = sc.omega_explicit(channel, 2, 2)
    assert np.max(np.abs(outs[0] - ch.apply_superoperator(omega, batch[0]))) < 1e-10
    assert np.max(np.abs(outs[0] - outs[1])) > 1e-3


def test_environment_twirl_idempotence():
    rng = np.random.default_rng(32)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    assert sc.environment_twirl_deviation(channel, 2, 2) <= 1e-9


def test_circuit_kraus_stack_is_trace_preserving():
    # the composite stack must satisfy sum_s K_s^dag K_s = 1 exactly, for
    # taller-than-r diagram sectors (replacer branch) included
    for n, da, db, r in [(1, 2, 2, 2), (2, 2, 2, 1), (2, 2, 3, 2), (3, 2, 2, 2)]:
        rng = np.random.default_rng(60 + n + r)
        channel = ch.random_kraus_channel(da, db, r, rng)
        engine = sc._CircuitEngine(sc.pad_kraus(channel, r), n, r)
        gram = np.einsum("sia,sib->ab", engine.kraus_stack.conj(), engine.kraus_stack)
        assert np.max(np.abs(gram - np.eye(da**n))) < 1e-12


def test_grouping_index_roundtrip():
    # per-copy interleaved (B1 E1 B2 E2 ...) -> grouped (B^n E^n) relabelling
    # agrees with the generic factor reordering and is invertible
    db, r, n = 3, 2, 2
    idx = sc._grouping_index(db, r, n)
    assert sorted(idx) == list(range((db * r) ** n))
    rng = np.random.default_rng(50)
    op = tensor.ginibre((db * r) ** n, (db * r) ** n, rng)
    via_index = op[np.ix_(idx, idx)]
    via_reorder = tensor.reorder_factors(op, (db, r) * n, (0, 2, 1, 3))
    assert np.array_equal(via_index, via_reorder)


def test_superoperator_from_apply_matches_matrix():
    rng = np.random.default_rng(33)
    channel = ch.random_kraus_channel(2, 2, 2, rng)
    padded = sc.pad_kraus(channel, 2)
    engine = sc._CircuitEngine(padded, 2, 2)
    via_apply = sc.superoperator_from_apply(engine.apply, engine.d_in, engine.d_out, chunk=5)
    assert np.max(np.abs(via_apply.matrix - engine.superoperator_matrix())) < 1e-12
