import math

import numpy as np
import pytest

from fluctua.channels import (
    CPTPReport,
    HamiltonianSchedule,
    IntegrationFailure,
    JumpOperatorSet,
    LindbladChannel,
    SuperoperatorChannel,
    UnitaryChannel,
    channel_as_superoperator,
    check_cptp,
    choi_matrix,
    identity_channel,
    lindblad_rhs,
    propagate,
    propagator_series,
    unvec,
    vec,
)
from fluctua.qcore import DimensionMismatch, NonHermitianInput

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
SM = np.array([[0, 1], [0, 0]], dtype=complex)  # lowers |1> to |0>


def random_state(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / rho.trace()


def random_unitary(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# vectorization and unitary channels


def test_vec_roundtrip():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(unvec(vec(m)), m)


def test_unitary_superoperator_is_kron():
    # S = kron(U, conj(U)) must reproduce direct conjugation
    rng = np.random.default_rng(2)
    for d in (2, 3, 4):
        u = random_unitary(rng, d)
        chan = UnitaryChannel(u)
        s = chan.as_superoperator()
        assert np.allclose(s, np.kron(u, u.conj()))
        for _ in range(20):
            rho = random_state(rng, d)
            direct = u @ rho @ u.conj().T
            assert np.max(np.abs(unvec(s @ vec(rho)) - direct)) < 1e-12


def test_unitary_channel_preserves_spectrum():
    rng = np.random.default_rng(3)
    rho = random_state(rng, 4)
    u = random_unitary(rng, 4)
    out = UnitaryChannel(u).apply(rho)
    assert np.max(np.abs(np.sort(np.linalg.eigvalsh(out))
                         - np.sort(np.linalg.eigvalsh(rho)))) < 1e-12


def test_unitary_rejects_nonunitary():
    with pytest.raises(ValueError):
        UnitaryChannel(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_identity_channel():
    rho = np.diag([0.2, 0.8]).astype(complex)
    assert np.allclose(identity_channel(2).apply(rho), rho)


# ---------------------------------------------------------------------------
# lindblad_rhs


def test_rhs_pure_hamiltonian_commutator():
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = lindblad_rhs(SZ, None, rho)
    assert np.allclose(out, -1j * (SZ @ rho - rho @ SZ))


def test_rhs_traceless_and_hermiticity_preserving():
    rng = np.random.default_rng(5)
    rho = random_state(rng, 3)
    ops = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2)]
    h = rng.normal(size=(3, 3))
    h = h + h.T
    out = lindblad_rhs(h, ops, rho)
    assert abs(out.trace()) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12


def test_rhs_broadcasts_over_stacks():
    rng = np.random.default_rng(6)
    stack = np.stack([random_state(rng, 2) for _ in range(4)])
    out = lindblad_rhs(SZ, [SM], stack)
    for i in range(4):
        assert np.allclose(out[i], lindblad_rhs(SZ, [SM], stack[i]))


# ---------------------------------------------------------------------------
# propagation against closed-form solutions

# frozen analytic values, amplitude damping at rate 0.8 for t = 1
DAMP_E = 0.44932896411722156      # exp(-0.8)
DAMP_EHALF = 0.6703200460356393   # exp(-0.4)


def test_amplitude_damping_matches_analytic():
    gamma = 0.8
    rho0 = np.array([[0.25, 0.3 - 0.1j], [0.3 + 0.1j, 0.75]])
    sched = HamiltonianSchedule(np.zeros((2, 2)), t_final=1.0)
    out = propagate(sched, [math.sqrt(gamma) * SM], rho0, step=1e-3)
    assert abs(out[1, 1] - 0.75 * DAMP_E) < 1e-9
    assert abs(out[0, 0] - (1 - 0.75 * DAMP_E)) < 1e-9
    assert abs(out[0, 1] - (0.3 - 0.1j) * DAMP_EHALF) < 1e-9


def test_rabi_oscillation_matches_analytic():
    # H = sigma_x from |0><0|: excited population sin^2(t)
    sched = HamiltonianSchedule(SX, t_final=0.7)
    out = propagate(sched, None, np.diag([1.0, 0.0]), step=1e-3)
    assert abs(out[1, 1].real - 0.41501642854987947) < 1e-9


def test_driven_dephasing_phase():
    # H(t) = sin(t) sz commutes with itself; coherence picks up
    # exp(-2i * integral sin) = exp(-2i (1 - cos t))
    sched = HamiltonianSchedule(np.zeros((2, 2)),
                                drive=lambda t: math.sin(t) * SZ,
                                t_final=2.0)
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]])
    out = propagate(sched, None, rho0, step=1e-3)
    expected = 0.5 * (-0.9525471879205125 - 0.30439095713362413j)
    assert abs(out[0, 1] - expected) < 1e-9


def test_propagate_zero_window_is_identity():
    sched = HamiltonianSchedule(SX)
    rho0 = np.diag([0.3, 0.7]).astype(complex)
    assert np.allclose(propagate(sched, None, rho0), rho0)


def test_propagate_keeps_state_valid():
    rng = np.random.default_rng(8)
    sched = HamiltonianSchedule(SX + 0.3 * SZ, t_final=3.0)
    out = propagate(sched, [0.5 * SM], random_state(rng, 2), step=1e-3)
    assert abs(out.trace() - 1.0) < 1e-10
    assert np.min(np.linalg.eigvalsh(out)) > -1e-9


def test_propagate_convergence_check():
    sched = HamiltonianSchedule(5.0 * SX, t_final=2.0)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    propagate(sched, None, rho0, step=1e-3, check_convergence=True)
    with pytest.raises(IntegrationFailure):
        propagate(sched, None, rho0, step=0.4, check_convergence=True)


def test_propagate_detects_blowup():
    # overdamped jump with a huge step makes RK4 unstable
    sched = HamiltonianSchedule(np.zeros((2, 2)), t_final=50.0)
    with pytest.raises(IntegrationFailure):
        propagate(sched, [math.sqrt(50.0) * SM], np.diag([0.0, 1.0]), step=0.2)


def test_rk4_order_halving_factor():
    # global error should drop ~16x per halving; 12 is the acceptance floor
    sched = HamiltonianSchedule(SX + 0.7 * SZ,
                                drive=lambda t: math.sin(3 * t) * SX,
                                t_final=2.0)
    ops = [0.4 * SM]
    rho0 = np.diag([0.2, 0.8]).astype(complex)
    sols = {h: propagate(sched, ops, rho0, step=h) for h in (0.04, 0.02, 0.01)}
    e1 = np.max(np.abs(sols[0.04] - sols[0.01]))
    e2 = np.max(np.abs(sols[0.02] - sols[0.01]))
    assert e1 / e2 > 12.0


# ---------------------------------------------------------------------------
# superoperator assembly


def test_lindblad_superoperator_matches_propagation():
    rng = np.random.default_rng(9)
    sched = HamiltonianSchedule(SX + 0.2 * SZ,
                                drive=lambda t: 0.5 * math.cos(t) * SX,
                                t_final=1.5)
    chan = LindbladChannel(sched, [0.6 * SM], step=1e-3)
    sup = channel_as_superoperator(chan)
    for _ in range(5):
        rho = random_state(rng, 2)
        assert np.max(np.abs(sup.apply(rho) - chan.apply(rho))) < 1e-7


def test_apply_matrix_is_linear_extension():
    sched = HamiltonianSchedule(SX, t_final=0.8)
    chan = LindbladChannel(sched, [0.5 * SM], step=1e-3)
    rng = np.random.default_rng(10)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    za, zb = 0.3 - 0.2j, 1.1 + 0.4j
    combo = chan.apply_matrix(za * a + zb * b)
    split = za * chan.apply_matrix(a) + zb * chan.apply_matrix(b)
    assert np.max(np.abs(combo - split)) < 1e-10


def test_propagator_series_matches_individual_runs():
    sched = HamiltonianSchedule(SX + 0.1 * SZ,
                                drive=lambda t: math.sin(t) * SZ,
                                t_initial=0.0, t_final=2.0)
    ops = [0.3 * SM]
    times = [0.0, 0.5, 1.3, 2.0]
    series = propagator_series(sched, ops, times, step=1e-3)
    rng = np.random.default_rng(11)
    rho = random_state(rng, 2)
    for t, snap in zip(times, series):
        one = HamiltonianSchedule(sched.base, sched.drive, 0.0, t)
        direct = propagate(one, ops, rho, step=1e-3)
        assert np.max(np.abs(snap.apply(rho) - direct)) < 1e-8
    # t = 0 snapshot is the identity map
    assert np.max(np.abs(series[0].superoperator - np.eye(4))) < 1e-12


def test_propagator_series_rejects_decreasing_times():
    sched = HamiltonianSchedule(SX, t_final=1.0)
    with pytest.raises(ValueError):
        propagator_series(sched, None, [0.5, 0.2])


# ---------------------------------------------------------------------------
# CPTP diagnostics


def test_choi_of_identity_channel():
    c = choi_matrix(np.eye(4))
    expected = 0.5 * np.array([[1, 0, 0, 1],
                               [0, 0, 0, 0],
                               [0, 0, 0, 0],
                               [1, 0, 0, 1]], dtype=complex)
    assert np.allclose(c, expected)


def test_check_cptp_unitary():
    rng = np.random.default_rng(12)
    rep = check_cptp(UnitaryChannel(random_unitary(rng, 3)))
    assert isinstance(rep, CPTPReport)
    assert rep.trace_preserving
    assert abs(rep.choi_min_eig) < 1e-10


def test_check_cptp_flags_transpose_map():
    # the transpose map is positive but not completely positive
    d = 2
    s = np.zeros((4, 4), dtype=complex)
    for j in range(d):
        for k in range(d):
            s[(k * d) + j, (j * d) + k] = 1.0
    rep = check_cptp(s)
    assert rep.trace_preserving
    assert rep.choi_min_eig < -0.4  # exactly -1/2 for a qubit


def test_check_cptp_lindblad_propagator():
    sched = HamiltonianSchedule(SX + 0.2 * SZ, t_final=2.0)
    rep = check_cptp(LindbladChannel(sched, [0.7 * SM], step=1e-3))
    assert rep.trace_preserving
    assert rep.choi_min_eig > -1e-10


# ---------------------------------------------------------------------------
# input validation


def test_schedule_rejects_nonhermitian_base():
    with pytest.raises(NonHermitianInput):
        HamiltonianSchedule(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_jump_set_validation():
    with pytest.raises(DimensionMismatch):
        JumpOperatorSet([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        JumpOperatorSet([np.eye(2)], labels=["a", "b"])
    js = JumpOperatorSet([SM, SM.T], labels=["down", "up"])
    assert len(js) == 2


def test_superoperator_channel_rejects_bad_shape():
    with pytest.raises(DimensionMismatch):
        SuperoperatorChannel(np.eye(5))


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        UnitaryChannel(np.eye(2)).apply(np.eye(3) / 3)
