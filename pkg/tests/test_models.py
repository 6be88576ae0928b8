import math

import numpy as np
import pytest

from fluctua.channels import propagate
from fluctua.models import (
    DEFAULT_THETA_GRID,
    PRESETS,
    InconsistentConfig,
    InitialStateSpec,
    InvalidConfig,
    ThreeLevelConfig,
    TwoQubitExperimentConfig,
    closed_form_characteristics,
    controlled_gate,
    thermal_occupation,
    three_level_experiment,
    three_level_hamiltonian,
    three_level_initial_state,
    three_level_model,
    two_qubit_hamiltonian,
    two_qubit_initial_state,
    two_qubit_sweep,
    u_gate,
)
from fluctua.protocols import NonThermalDiagonal
from fluctua.qcore import dephase, gibbs_state, hermitian_eig
from fluctua.sampling import SeededGenerator

SWEEP_QUANTITIES = ("G_TPM", "G_EPM", "G_EPM_diag", "G_EPM_coh")


# ---------------------------------------------------------------------------
# gates and configuration


def test_u_gate_identity_and_unitarity():
    assert np.allclose(u_gate(0.0), np.eye(2), atol=1e-15)
    rng = np.random.default_rng(3)
    for _ in range(20):
        th, ph, la = rng.uniform(-2 * math.pi, 2 * math.pi, size=3)
        u = u_gate(th, ph, la)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-13)


def test_u_gate_half_angle_convention():
    u = u_gate(math.pi)
    # A half turn of the parameter moves |0> fully to |1>.
    assert abs(u[0, 0]) < 1e-15 and abs(abs(u[1, 0]) - 1.0) < 1e-15
    u = u_gate(math.pi / 2.0)
    assert abs(u[0, 0] - math.cos(math.pi / 4.0)) < 1e-15


def test_controlled_gate_blocks():
    th, ph, la = 0.7, 0.3, -0.9
    g = controlled_gate(th, ph, la)
    assert np.allclose(g[:2, :2], np.eye(2), atol=1e-15)
    assert np.allclose(g[:2, 2:], 0.0, atol=1e-15)
    assert np.allclose(g[2:, :2], 0.0, atol=1e-15)
    assert np.allclose(g[2:, 2:], u_gate(th, ph, la), atol=1e-15)
    assert np.allclose(g.conj().T @ g, np.eye(4), atol=1e-13)


def test_config_defaults_resolve_to_derived_beta():
    t0, beta = TwoQubitExperimentConfig().resolved()
    assert t0 == 2.0
    assert abs(beta - math.log(math.tan(1.0))) < 1e-15


def test_config_beta_only_inverts_the_relation():
    cfg = TwoQubitExperimentConfig(beta=0.7, epsilon=1.3)
    t0, beta = cfg.resolved()
    assert beta == 0.7
    assert abs(math.log(math.tan(t0 / 2.0)) / 1.3 - 0.7) < 1e-12


def test_config_consistent_pair_accepted():
    t0 = 2.0
    beta = math.log(math.tan(t0 / 2.0))
    out = TwoQubitExperimentConfig(theta0=t0, beta=beta).resolved()
    assert out == (t0, beta)


def test_config_rejects_contradictions():
    with pytest.raises(InconsistentConfig):
        TwoQubitExperimentConfig(theta0=2.0, beta=2.0).resolved()
    with pytest.raises(InconsistentConfig):
        TwoQubitExperimentConfig(theta0=-0.1).resolved()
    with pytest.raises(InconsistentConfig):
        TwoQubitExperimentConfig(theta0=math.pi).resolved()
    with pytest.raises(InvalidConfig):
        TwoQubitExperimentConfig(epsilon=0.0).resolved()


def test_initial_state_is_pure_product_with_thermal_diagonal():
    cfg = TwoQubitExperimentConfig()
    rho = two_qubit_initial_state(cfg)
    assert abs(np.trace(rho @ rho).real - 1.0) < 1e-12
    _, beta = cfg.resolved()
    target = gibbs_state(two_qubit_hamiltonian(), beta)
    assert np.abs(dephase(rho) - target).max() < 1e-12
    # Both qubits carry the same reduced state.
    r = rho.reshape(2, 2, 2, 2)
    first = np.einsum("ikjk->ij", r)
    second = np.einsum("kikj->ij", r)
    assert np.abs(first - second).max() < 1e-12


def test_initial_state_balanced_at_right_angle():
    rho = two_qubit_initial_state(TwoQubitExperimentConfig(theta0=math.pi / 2.0))
    assert np.abs(np.diag(rho).real - 0.25).max() < 1e-12


# ---------------------------------------------------------------------------
# closed forms and the exact sweep


def test_closed_form_baseline_values():
    for th in (0.0, 0.4, 1.1):
        vals = closed_form_characteristics(th, 0.443)
        assert vals["G_TPM"] == 1.0
    # Infinite-temperature limit: every average collapses to one.
    for th in np.linspace(0.0, math.pi, 9):
        assert abs(closed_form_characteristics(th, 0.0)["G_EPM"] - 1.0) < 1e-12
    # sin(4 theta) zeros kill the coherence part.
    for th in (0.0, math.pi / 4.0, math.pi / 2.0):
        assert abs(closed_form_characteristics(th, 0.8)["G_EPM_coh"]) < 1e-15


def test_closed_form_spot_value():
    val = closed_form_characteristics(0.0, 0.443)["G_EPM"]
    assert abs(val - 1.37632) < 1e-4


def test_closed_form_splits_add_up():
    for th in np.linspace(0.0, math.pi, 11):
        vals = closed_form_characteristics(th, 0.443)
        assert abs(vals["G_EPM_diag"] + vals["G_EPM_coh"] - vals["G_EPM"]) < 1e-12


def test_exact_sweep_matches_closed_forms():
    cfg = TwoQubitExperimentConfig()
    _, beta = cfg.resolved()
    res = two_qubit_sweep(cfg)
    assert len(res.columns["theta"]) == 21
    for q in SWEEP_QUANTITIES:
        expected = [closed_form_characteristics(th, beta)[q]
                    for th in res.columns["theta"]]
        assert np.abs(res.columns[q] - expected).max() < 1e-9


def test_exact_sweep_tpm_average_is_one():
    res = two_qubit_sweep(TwoQubitExperimentConfig())
    assert np.abs(res.columns["G_TPM"] - 1.0).max() < 1e-9


def test_sweep_is_pi_periodic():
    grid = (0.1, 0.1 + math.pi, 0.7, 0.7 + math.pi)
    res = two_qubit_sweep(TwoQubitExperimentConfig(theta_grid=grid))
    for q in SWEEP_QUANTITIES + ("m2_EPM", "m3_TPM"):
        col = res.columns[q]
        assert abs(col[0] - col[1]) < 1e-12, q
        assert abs(col[2] - col[3]) < 1e-12, q


def test_exact_sweep_first_moments_match_trace_formula():
    cfg = TwoQubitExperimentConfig()
    rho = two_qubit_initial_state(cfg)
    h = two_qubit_hamiltonian()
    res = two_qubit_sweep(cfg)
    for i, th in enumerate(res.columns["theta"]):
        u = controlled_gate(-4.0 * th)
        out = u @ rho @ u.conj().T
        expected = np.trace(h @ out).real - np.trace(h @ rho).real
        assert abs(res.columns["mean_EPM"][i] - expected) < 1e-9


def test_exact_sweep_has_no_error_columns():
    res = two_qubit_sweep(TwoQubitExperimentConfig())
    assert res.n_shots is None
    assert all(not name.endswith("_se") for name in res.column_names())


def test_default_grid_spacing():
    assert len(DEFAULT_THETA_GRID) == 21
    diffs = np.diff(DEFAULT_THETA_GRID)
    assert np.abs(diffs - math.pi / 10.0).max() < 1e-15


# ---------------------------------------------------------------------------
# shot-mode sweep


def test_shot_sweep_reproducible_and_consistent():
    cfg = TwoQubitExperimentConfig(n_shots=512, theta_grid=(0.3, 1.2))
    a = two_qubit_sweep(cfg, SeededGenerator(5))
    b = two_qubit_sweep(cfg, SeededGenerator(5))
    for name in a.column_names():
        assert np.array_equal(a.columns[name], b.columns[name]), name
    c = two_qubit_sweep(cfg, SeededGenerator(6))
    assert not np.array_equal(a.columns["G_EPM"], c.columns["G_EPM"])


def test_shot_sweep_column_layout():
    cfg = TwoQubitExperimentConfig(n_shots=256, theta_grid=(0.5,))
    res = two_qubit_sweep(cfg, SeededGenerator(0))
    names = res.column_names()
    base = [n for n in names if n != "theta" and not n.endswith("_se")]
    assert names[0] == "theta"
    assert [n + "_se" for n in base] == names[1 + len(base):]
    assert res.columns["G_EPM_se"][0] > 0.0


def test_shot_sweep_estimates_near_closed_forms():
    cfg = TwoQubitExperimentConfig(n_shots=4096)
    _, beta = cfg.resolved()
    res = two_qubit_sweep(cfg, SeededGenerator(11))
    for i, th in enumerate(res.columns["theta"]):
        expected = closed_form_characteristics(th, beta)["G_EPM"]
        gap = abs(res.columns["G_EPM"][i] - expected)
        assert gap <= 5.0 * max(res.columns["G_EPM_se"][i], 1e-6)


def test_shot_sweep_split_decomposes_estimate():
    cfg = TwoQubitExperimentConfig(n_shots=512, theta_grid=(0.3, 0.9, 2.2))
    res = two_qubit_sweep(cfg, SeededGenerator(2))
    total = res.columns["G_EPM_diag"] + res.columns["G_EPM_coh"]
    assert np.abs(total - res.columns["G_EPM"]).max() < 1e-12


# ---------------------------------------------------------------------------
# three-level model construction


def test_three_level_hamiltonian_and_gaps():
    cfg = ThreeLevelConfig(omega1=1.0, omega3=3.0)
    h = three_level_hamiltonian(cfg)
    assert np.allclose(np.diag(h), [0.0, 1.0, 3.0])
    assert cfg.omega2 == 2.0


def test_thermal_occupation_conventions():
    assert abs(thermal_occupation(3.0, 1.0, "bose")
               - 1.0 / (math.exp(3.0) - 1.0)) < 1e-15
    assert abs(thermal_occupation(3.0, 1.0, "as_printed")
               - 1.0 / (math.exp(3.0) + 1.0)) < 1e-15
    with pytest.raises(InvalidConfig):
        thermal_occupation(1.0, 1.0, "nope")


def test_jump_rates_by_hand():
    cfg = ThreeLevelConfig()
    _, jumps = three_level_model(cfg)
    assert len(jumps.operators) == 6
    occ = [1.0 / math.expm1(3.0), 1.0 / math.expm1(2.0), 1.0 / math.expm1(6.0)]
    expected = {"g<-A": 0.1 * (occ[0] + 1.0), "A<-g": 0.1 * occ[0],
                "A<-B": 0.1 * (occ[1] + 1.0), "B<-A": 0.1 * occ[1],
                "g<-B": 0.1 * (occ[2] + 1.0), "B<-g": 0.1 * occ[2]}
    for op, label in zip(jumps.operators, jumps.labels):
        assert abs(float(np.abs(op).max()) ** 2 - expected[label]) < 1e-14
        assert np.count_nonzero(op) == 1


def test_jump_rates_respect_occupation_flag():
    _, bose = three_level_model(ThreeLevelConfig())
    _, printed = three_level_model(ThreeLevelConfig(occupation_convention="as_printed"))
    up_bose = next(op for op, l in zip(bose.operators, bose.labels) if l == "A<-g")
    up_printed = next(op for op, l in zip(printed.operators, printed.labels)
                      if l == "A<-g")
    assert abs(float(np.abs(up_printed).max()) ** 2
               - 0.1 / (math.exp(3.0) + 1.0)) < 1e-15
    assert not np.allclose(up_bose, up_printed)


def test_closed_system_has_no_jumps_and_keeps_purity():
    cfg = ThreeLevelConfig(gamma=0.0, t_max=2.0)
    schedule, jumps = three_level_model(cfg)
    assert len(jumps.operators) == 0
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0
    out = propagate(schedule, jumps, rho, step=1e-3)
    assert abs(np.trace(out @ out).real - 1.0) < 1e-7


def test_drive_forms():
    amp = 1.5
    sched_c, _ = three_level_model(ThreeLevelConfig(gamma=0.0))
    sched_d, _ = three_level_model(
        ThreeLevelConfig(gamma=0.0, drive_form="double_frequency"))
    for t in (0.0, 0.4, 1.1, 2.9):
        g = amp * math.sin(t) ** 2
        hc = sched_c.at(t)
        assert abs(hc[0, 2] - g) < 1e-14
        assert abs(hc[1, 2] - (amp - g)) < 1e-14
        hd = sched_d.at(t)
        assert abs(hd[0, 2] - g) < 1e-14
        assert abs(hd[1, 2] - amp * (1.0 - math.sin(2.0 * t) ** 2)) < 1e-14
    # The complementary form keeps the total coupling constant.
    assert abs(sched_c.at(0.77)[0, 2] + sched_c.at(0.77)[1, 2] - amp) < 1e-14


def test_no_drive_when_amplitude_zero():
    sched, _ = three_level_model(ThreeLevelConfig(drive_amplitude=0.0))
    assert sched.drive is None


def test_equal_temperature_baths_relax_to_gibbs():
    cfg = ThreeLevelConfig(gamma=0.5, beta1=1.0, beta2=1.0, beta3=1.0,
                           drive_amplitude=0.0, t_max=40.0)
    schedule, jumps = three_level_model(cfg)
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0
    out = propagate(schedule, jumps, rho, step=5e-3)
    target = gibbs_state(three_level_hamiltonian(cfg), 1.0)
    assert np.abs(out - target).max() < 1e-8


def test_three_level_config_validation():
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(gamma=-0.1)
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(omega1=2.0, omega3=1.0)
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(step=0.0)
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(drive_form="sawtooth")
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(measurement_convention="middle")
    with pytest.raises(InvalidConfig):
        ThreeLevelConfig(beta2=-1.0)  # bose occupation needs beta*omega > 0
    # The alternative convention tolerates nonpositive beta.
    ThreeLevelConfig(beta2=-1.0, occupation_convention="as_printed")


# ---------------------------------------------------------------------------
# three-level initial state and experiment


def test_initial_state_thermal_without_seed():
    cfg = ThreeLevelConfig()
    state = InitialStateSpec(beta_ref=0.5, coherence_seed=None)
    rho = three_level_initial_state(cfg, state)
    schedule, _ = three_level_model(cfg)
    evals, vecs = hermitian_eig(schedule.at(0.0))
    w = np.exp(-0.5 * (evals - evals.min()))
    w /= w.sum()
    assert np.abs(rho - vecs @ np.diag(w.astype(complex)) @ vecs.conj().T).max() < 1e-12


def test_initial_state_with_coherence_is_valid_density():
    rho = three_level_initial_state(
        ThreeLevelConfig(), InitialStateSpec(beta_ref=0.5, coherence_seed=129))
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    assert abs(np.trace(rho).real - 1.0) < 1e-12
    evals, _ = hermitian_eig(rho)
    assert evals.min() > -1e-10
    # Same populations as the bare thermal state in the measurement basis.
    bare = three_level_initial_state(
        ThreeLevelConfig(), InitialStateSpec(beta_ref=0.5, coherence_seed=None))
    schedule, _ = three_level_model(ThreeLevelConfig())
    _, vecs = hermitian_eig(schedule.at(0.0))
    pops = np.diag(vecs.conj().T @ rho @ vecs).real
    pops_bare = np.diag(vecs.conj().T @ bare @ vecs).real
    assert np.abs(pops - pops_bare).max() < 1e-12


def test_experiment_start_point_is_identity_channel():
    cfg = ThreeLevelConfig(t_max=1.0)
    ser = three_level_experiment(cfg, InitialStateSpec(beta_ref=0.5, coherence_seed=7),
                                 t_samples=[0.0, 0.5, 1.0])
    c = ser.columns
    assert c["t"][0] == 0.0
    assert abs(c["jarzynski_tpm"][0] - 1.0) < 1e-9
    # Identity evolution keeps the coherence terms orthogonal to the
    # thermal reference, so the coherence correction starts at zero.
    assert abs(c["jarzynski_coherence"][0]) < 1e-10
    # The end-point joint is a product of marginals, so its energy-change
    # spread is positive even before anything has evolved.
    assert c["m2_epm"][0] > 0.0


def test_experiment_parts_always_sum():
    ser = three_level_experiment(
        ThreeLevelConfig(t_max=1.5),
        InitialStateSpec(beta_ref=0.5, coherence_seed=3),
        t_samples=np.linspace(0.0, 1.5, 7))
    c = ser.columns
    total = c["jarzynski_diagonal"] + c["jarzynski_coherence"]
    assert np.abs(total - c["jarzynski_epm"]).max() < 1e-10
    total2 = c["m2_population"] + c["m2_coherence"]
    assert np.abs(total2 - c["m2_epm"]).max() < 1e-10


def test_experiment_without_coherence_has_null_corrections():
    ser = three_level_experiment(
        ThreeLevelConfig(t_max=1.0),
        InitialStateSpec(beta_ref=0.5, coherence_seed=None),
        t_samples=np.linspace(0.0, 1.0, 5))
    c = ser.columns
    assert np.abs(c["jarzynski_coherence"]).max() < 1e-10
    assert np.abs(c["m2_coherence"]).max() < 1e-10
    # Without initial coherence the eigenstate-mixture scheme reduces to
    # the two-point scheme for this nondegenerate measurement.
    assert np.abs(c["entropy_mll"] - c["entropy_tpm"]).max() < 1e-10


def test_experiment_entropy_ordering():
    ser = three_level_experiment(
        ThreeLevelConfig(t_max=1.5),
        InitialStateSpec(beta_ref=0.5, coherence_seed=129),
        t_samples=np.linspace(0.0, 1.5, 7))
    c = ser.columns
    assert np.all(c["entropy_mll"] <= c["entropy_epm"] + 1e-10)


def test_experiment_measurement_conventions_differ_under_drive():
    spec = InitialStateSpec(beta_ref=0.5, coherence_seed=None)
    ts = [0.0, 0.8]
    full = three_level_experiment(
        ThreeLevelConfig(t_max=0.8), spec, t_samples=ts)
    bare = three_level_experiment(
        ThreeLevelConfig(t_max=0.8, measurement_convention="bare"), spec,
        t_samples=ts)
    assert abs(full.columns["jarzynski_epm"][1]
               - bare.columns["jarzynski_epm"][1]) > 1e-6
    # Without a drive the two conventions coincide.
    quiet = ThreeLevelConfig(t_max=0.8, drive_amplitude=0.0)
    a = three_level_experiment(quiet, spec, t_samples=ts)
    b = three_level_experiment(
        ThreeLevelConfig(t_max=0.8, drive_amplitude=0.0,
                         measurement_convention="bare"), spec, t_samples=ts)
    assert np.abs(a.columns["jarzynski_epm"] - b.columns["jarzynski_epm"]).max() < 1e-12


def test_experiment_accepts_explicit_state_matrix():
    cfg = ThreeLevelConfig(t_max=0.5)
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    # An arbitrary state does not have the Gibbs diagonal the exponential
    # average decomposition assumes, so the run flags it and continues.
    with pytest.warns(NonThermalDiagonal):
        ser = three_level_experiment(cfg, rho, t_samples=[0.0, 0.5])
    assert np.abs(ser.rho_initial - rho).max() < 1e-14
    assert np.all(np.isfinite(ser.columns["jarzynski_epm"]))


def test_experiment_rejects_bad_sample_times():
    cfg = ThreeLevelConfig(t_max=1.0)
    with pytest.raises(InvalidConfig):
        three_level_experiment(cfg, t_samples=[])
    with pytest.raises(InvalidConfig):
        three_level_experiment(cfg, t_samples=[0.0, 2.0])


# ---------------------------------------------------------------------------
# presets


def test_preset_registry_is_complete():
    expected = {"fig2-sweep", "figS2-jarzynski-closed", "figS2b-jarzynski-open",
                "figS3-second-moment", "figS4-entropy", "figS5-mll-second-moment",
                "figS6-entropy-mll"}
    assert set(PRESETS) == expected
    for name, preset in PRESETS.items():
        assert preset.name == name
        assert preset.kind in ("two_qubit", "three_level")
        if preset.kind == "two_qubit":
            assert preset.two_qubit is not None
        else:
            assert preset.three_level is not None
            assert preset.initial_state is not None


def test_preset_parameters():
    assert PRESETS["figS2-jarzynski-closed"].three_level.gamma == 0.0
    assert PRESETS["figS2-jarzynski-closed"].initial_state.beta_ref == 0.6
    assert PRESETS["figS2b-jarzynski-open"].three_level.gamma == 0.1
    assert PRESETS["figS2b-jarzynski-open"].initial_state.beta_ref == 0.5
    assert PRESETS["figS4-entropy"].three_level.drive_form == "double_frequency"
    assert PRESETS["figS3-second-moment"].initial_state.coherence_seed == 129
