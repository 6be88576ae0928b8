"""Concrete model systems behind the named experiment presets.

Two systems are implemented.  The first is a pair of qubits with local
gap ``epsilon``, prepared in a pure product state whose computational
populations are thermal, then subjected to a controlled single-qubit
rotation; the swept characteristic functions of that circuit have simple
closed forms that double as an oracle.  The second is a three-level
system driven on its two upper transitions and coupled to three thermal
baths, integrated with the Lindblad propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    HamiltonianSchedule,
    JumpOperatorSet,
    UnitaryChannel,
    propagator_series,
)
from .protocols import (
    JointEnergyDistribution,
    characteristic_function,
    characteristic_of_distribution,
    characteristic_split,
    delta_distribution,
    epm_joint,
    epm_second_moment_split,
    jarzynski,
    mll_joint,
    moment,
    sample_shots,
    shannon_entropy,
    tpm_joint,
)
from .qcore import coherence_l1, dephase, hermitian_eig, spectral_decompose
from .sampling import SeededGenerator, _rng, random_coherence

__all__ = [
    "InconsistentConfig",
    "InvalidConfig",
    "TwoQubitExperimentConfig",
    "ThreeLevelConfig",
    "InitialStateSpec",
    "SweepResult",
    "ThreeLevelSeries",
    "ExperimentPreset",
    "PRESETS",
    "u_gate",
    "controlled_gate",
    "two_qubit_hamiltonian",
    "two_qubit_initial_state",
    "two_qubit_sweep",
    "closed_form_characteristics",
    "three_level_hamiltonian",
    "thermal_occupation",
    "three_level_model",
    "three_level_initial_state",
    "three_level_experiment",
]


class InconsistentConfig(ValueError):
    """Mutually contradictory configuration values."""


class InvalidConfig(ValueError):
    """A configuration value outside its allowed range."""


DEFAULT_THETA0 = 2.0
DEFAULT_THETA_GRID = tuple(n * math.pi / 10.0 for n in range(21))

SWEEP_COLUMNS = ("G_TPM", "G_EPM", "G_EPM_diag", "G_EPM_coh",
                 "mean_EPM", "mean_TPM", "m2_EPM", "m2_TPM",
                 "m3_EPM", "m3_TPM", "m4_EPM", "m4_TPM")


# ---------------------------------------------------------------------------
# qubit pair


@dataclass(frozen=True)
class TwoQubitExperimentConfig:
    """Sweep configuration for the controlled-rotation circuit.

    ``theta0`` (the preparation angle) is the primary knob; ``beta`` is
    derived from it through sech(beta*epsilon) = sin(theta0) unless given
    explicitly.  When both are supplied they must satisfy that relation
    to within 1e-3.
    """

    epsilon: float = 1.0
    theta0: float | None = None
    beta: float | None = None
    theta_grid: tuple[float, ...] = DEFAULT_THETA_GRID
    phi: float = 0.0
    lam: float = 0.0
    n_shots: int | None = None

    def resolved(self) -> tuple[float, float]:
        """(theta0, beta) with the missing member derived."""
        if self.epsilon <= 0.0:
            raise InvalidConfig("epsilon must be positive")
        t0, b = self.theta0, self.beta
        if t0 is None and b is None:
            t0 = DEFAULT_THETA0
        if t0 is not None:
            if not 0.0 < t0 < math.pi:
                raise InconsistentConfig(
                    "theta0 must lie in (0, pi) for thermal populations")
            derived = math.log(math.tan(0.5 * t0)) / self.epsilon
            if b is None:
                b = derived
            elif abs(1.0 / math.cosh(b * self.epsilon) - math.sin(t0)) >= 1e-3:
                raise InconsistentConfig(
                    f"beta={b!r} and theta0={t0!r} violate "
                    "sech(beta*epsilon) = sin(theta0)")
        else:
            t0 = 2.0 * math.atan(math.exp(b * self.epsilon))
        return float(t0), float(b)


def u_gate(theta: float, phi: float = 0.0, lam: float = 0.0) -> np.ndarray:
    """Single-qubit rotation with half-angle parameterization."""
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    return np.array([[c, -np.exp(1j * lam) * s],
                     [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c]])


def controlled_gate(theta: float, phi: float = 0.0, lam: float = 0.0) -> np.ndarray:
    """Rotation of the second qubit controlled on the first being |1>."""
    out = np.eye(4, dtype=np.complex128)
    out[2:, 2:] = u_gate(theta, phi, lam)
    return out


def two_qubit_hamiltonian(epsilon: float = 1.0) -> np.ndarray:
    """Sum of local sigma_z terms: diag(2e, 0, 0, -2e) on |00>,|01>,|10>,|11>."""
    if epsilon <= 0.0:
        raise InvalidConfig("epsilon must be positive")
    return np.diag([2.0 * epsilon, 0.0, 0.0, -2.0 * epsilon]).astype(np.complex128)


def two_qubit_initial_state(config: TwoQubitExperimentConfig) -> np.ndarray:
    """Pure product state whose computational populations are thermal.

    Applying the same rotation to both qubits of |00> gives real
    nonnegative amplitudes; dephasing the result in the computational
    basis recovers the Gibbs state of the pair Hamiltonian at the
    resolved beta.
    """
    theta0, _ = config.resolved()
    v = u_gate(theta0)[:, 0]
    psi = np.kron(v, v)
    return np.outer(psi, psi.conj())


def closed_form_characteristics(theta: float, beta: float,
                                epsilon: float = 1.0) -> dict[str, float]:
    """Characteristic functions of the sweep at u = i*beta, in closed form.

    ``theta`` is the sweep abscissa (see :func:`two_qubit_sweep` for how
    it parameterizes the gate).  The expressions depend on 2*theta and
    4*theta only, so the sweep repeats with period pi.
    """
    b = beta * epsilon
    e1 = math.exp(b)
    e2, e4, e6, e8 = e1 ** 2, e1 ** 4, e1 ** 6, e1 ** 8
    s2, c2 = math.sin(2.0 * theta), math.cos(2.0 * theta)
    denom = (e2 + 1.0) ** 4
    g_epm = 4.0 * (e6 * (s2 - e1 * c2) ** 2
                   + e4 * (e1 * s2 + c2) ** 2 + e4 + 1.0) / denom
    g_diag = 4.0 * (2.0 * e6 * s2 ** 2
                    + (e4 + e8) * c2 ** 2 + e4 + 1.0) / denom
    sech = 1.0 / math.cosh(b)
    g_coh = -0.5 * e2 * math.sin(4.0 * theta) * math.tanh(b) * sech ** 3
    return {"G_TPM": 1.0, "G_EPM": g_epm,
            "G_EPM_diag": g_diag, "G_EPM_coh": g_coh}


@dataclass
class SweepResult:
    """Column-oriented sweep output; ``columns`` preserves CSV order."""

    theta0: float
    beta: float
    epsilon: float
    n_shots: int | None
    columns: dict[str, np.ndarray]

    def column_names(self) -> list[str]:
        return list(self.columns)

    def rows(self):
        names = self.column_names()
        for i in range(len(self.columns["theta"])):
            yield {name: self.columns[name][i] for name in names}


def _linear_weights(joint: JointEnergyDistribution, beta: float) -> dict[str, np.ndarray]:
    delta = joint.delta_grid()
    return {"G": np.exp(-beta * delta), "mean": delta,
            "m2": delta ** 2, "m3": delta ** 3, "m4": delta ** 4}


def _bootstrap_ses(joint: JointEnergyDistribution, weights: dict[str, np.ndarray],
                   n_resamples: int, gen) -> dict[str, float]:
    """Multinomial-bootstrap errors for statistics linear in the table."""
    n = joint.n_shots
    tables = _rng(gen).multinomial(n, joint.probs.reshape(-1),
                                   size=n_resamples) / float(n)
    return {name: float(np.std(tables @ w.reshape(-1), ddof=1))
            for name, w in weights.items()}


def two_qubit_sweep(config: TwoQubitExperimentConfig, gen=None,
                    n_resamples: int = 400) -> SweepResult:
    """Characteristic functions and moments across the rotation sweep.

    The sweep abscissa theta enters the circuit as controlled_gate(-4*theta,
    phi, lam); with that parameterization the swept quantities take the
    closed forms of :func:`closed_form_characteristics` and the sweep is
    pi-periodic.  In exact mode every column is computed from the operator
    expressions.  With ``n_shots`` set, columns hold finite-shot estimates
    from the simulated measurement records and ``*_se`` columns append
    their bootstrap standard errors; the generator seeds the whole run.
    """
    theta0, beta = config.resolved()
    h = two_qubit_hamiltonian(config.epsilon)
    spec = spectral_decompose(h)
    rho = two_qubit_initial_state(config)
    pops = dephase(rho)
    master = gen if isinstance(gen, SeededGenerator) else SeededGenerator(gen or 0)

    names = ["theta"] + list(SWEEP_COLUMNS)
    if config.n_shots is not None:
        names += [c + "_se" for c in SWEEP_COLUMNS]
    cols: dict[str, list[float]] = {name: [] for name in names}

    for idx, theta in enumerate(config.theta_grid):
        chan = UnitaryChannel(controlled_gate(-4.0 * theta, config.phi, config.lam))
        cols["theta"].append(float(theta))
        if config.n_shots is None:
            g_tpm = characteristic_function("TPM", rho, chan, spec, spec, 1j * beta)
            g_epm = characteristic_function("EPM", rho, chan, spec, spec, 1j * beta)
            g_pop, g_coh = characteristic_split(rho, chan, spec, spec, 1j * beta)
            je = epm_joint(rho, chan, spec, spec)
            jt = tpm_joint(rho, chan, spec, spec)
            cols["G_TPM"].append(g_tpm.real)
            cols["G_EPM"].append(g_epm.real)
            cols["G_EPM_diag"].append(g_pop.real)
            cols["G_EPM_coh"].append(g_coh.real)
            for n, label in enumerate(("mean", "m2", "m3", "m4"), start=1):
                cols[f"{label}_EPM"].append(moment(je, n))
                cols[f"{label}_TPM"].append(moment(jt, n))
        else:
            point = master.spawn(idx)
            emp_epm = sample_shots("EPM", rho, chan, spec, spec,
                                   config.n_shots, point.spawn(0))
            emp_tpm = sample_shots("TPM", rho, chan, spec, spec,
                                   config.n_shots, point.spawn(1))
            emp_dia = sample_shots("EPM", pops, chan, spec, spec,
                                   config.n_shots, point.spawn(2))
            w = _linear_weights(emp_epm, beta)
            se_epm = _bootstrap_ses(emp_epm, w, n_resamples, point.spawn(3))
            se_tpm = _bootstrap_ses(emp_tpm, w, n_resamples, point.spawn(4))
            se_dia = _bootstrap_ses(emp_dia, {"G": w["G"]}, n_resamples,
                                    point.spawn(5))
            g_epm = characteristic_of_distribution(emp_epm, 1j * beta).real
            g_dia = characteristic_of_distribution(emp_dia, 1j * beta).real
            cols["G_TPM"].append(
                characteristic_of_distribution(emp_tpm, 1j * beta).real)
            cols["G_EPM"].append(g_epm)
            cols["G_EPM_diag"].append(g_dia)
            cols["G_EPM_coh"].append(g_epm - g_dia)
            cols["G_TPM_se"].append(se_tpm["G"])
            cols["G_EPM_se"].append(se_epm["G"])
            cols["G_EPM_diag_se"].append(se_dia["G"])
            cols["G_EPM_coh_se"].append(math.hypot(se_epm["G"], se_dia["G"]))
            for n, label in enumerate(("mean", "m2", "m3", "m4"), start=1):
                cols[f"{label}_EPM"].append(moment(emp_epm, n))
                cols[f"{label}_TPM"].append(moment(emp_tpm, n))
                cols[f"{label}_EPM_se"].append(se_epm[label])
                cols[f"{label}_TPM_se"].append(se_tpm[label])

    columns = {name: np.asarray(cols[name], dtype=float) for name in names}
    return SweepResult(theta0, beta, config.epsilon, config.n_shots, columns)


# ---------------------------------------------------------------------------
# driven three-level system


@dataclass(frozen=True)
class ThreeLevelConfig:
    """Three-level system with two drive couplings and three baths.

    The bare energies are 0, omega1, omega3; bath r couples to the
    transition of frequency omega_r with omega2 = omega3 - omega1.  The
    drive g(t) acts on the ground/top transition and f(t) on the
    middle/top one; ``drive_form`` selects how f complements g.
    ``occupation_convention`` picks the thermal occupation entering the
    jump rates: "bose" uses 1/(exp(beta*omega) - 1), "as_printed" uses
    1/(exp(beta*omega) + 1).
    """

    omega1: float = 1.0
    omega3: float = 3.0
    gamma: float = 0.1
    beta1: float = 3.0
    beta2: float = 1.0
    beta3: float = 2.0
    drive_amplitude: float = 1.5
    drive_form: str = "complement"
    t_max: float = 10.0
    step: float = 1e-3
    occupation_convention: str = "bose"
    measurement_convention: str = "full"

    def __post_init__(self):
        if self.omega1 <= 0.0 or self.omega3 <= self.omega1:
            raise InvalidConfig("energies must satisfy 0 < omega1 < omega3")
        if self.gamma < 0.0:
            raise InvalidConfig("gamma must be nonnegative")
        if self.t_max <= 0.0 or self.step <= 0.0:
            raise InvalidConfig("t_max and step must be positive")
        if self.drive_form not in ("complement", "double_frequency"):
            raise InvalidConfig(f"unknown drive_form {self.drive_form!r}")
        if self.occupation_convention not in ("bose", "as_printed"):
            raise InvalidConfig(
                f"unknown occupation_convention {self.occupation_convention!r}")
        if self.measurement_convention not in ("full", "bare"):
            raise InvalidConfig(
                f"unknown measurement_convention {self.measurement_convention!r}")
        if self.gamma > 0.0 and self.occupation_convention == "bose":
            for r, (b, w) in enumerate(self.bath_pairs(), start=1):
                if b * w <= 0.0:
                    raise InvalidConfig(
                        f"bath {r} needs beta*omega > 0 under the bose convention")

    @property
    def omega2(self) -> float:
        return self.omega3 - self.omega1

    def bath_pairs(self) -> list[tuple[float, float]]:
        """(beta_r, omega_r) for the three baths."""
        return [(self.beta1, self.omega1), (self.beta2, self.omega2),
                (self.beta3, self.omega3)]


def three_level_hamiltonian(config: ThreeLevelConfig) -> np.ndarray:
    return np.diag([0.0, config.omega1, config.omega3]).astype(np.complex128)


def thermal_occupation(beta: float, omega: float, convention: str = "bose") -> float:
    """Bath occupation at frequency omega for the chosen convention."""
    if convention == "bose":
        return 1.0 / math.expm1(beta * omega)
    if convention == "as_printed":
        return 1.0 / (math.exp(beta * omega) + 1.0)
    raise InvalidConfig(f"unknown occupation convention {convention!r}")


def three_level_model(config: ThreeLevelConfig) -> tuple[HamiltonianSchedule, JumpOperatorSet]:
    """Schedule and jump operators of the driven three-level system."""
    h = three_level_hamiltonian(config)
    amp = config.drive_amplitude
    couple_gb = np.zeros((3, 3), dtype=np.complex128)
    couple_gb[0, 2] = couple_gb[2, 0] = 1.0
    couple_ab = np.zeros((3, 3), dtype=np.complex128)
    couple_ab[1, 2] = couple_ab[2, 1] = 1.0

    if amp == 0.0:
        drive = None
    elif config.drive_form == "complement":
        def drive(t):
            g = amp * math.sin(t) ** 2
            return g * couple_gb + (amp - g) * couple_ab
    else:
        def drive(t):
            g = amp * math.sin(t) ** 2
            f = amp * (1.0 - math.sin(2.0 * t) ** 2)
            return g * couple_gb + f * couple_ab

    schedule = HamiltonianSchedule(h, drive, 0.0, config.t_max)

    operators, labels = [], []
    if config.gamma > 0.0:
        occ = [thermal_occupation(b, w, config.occupation_convention)
               for b, w in config.bath_pairs()]
        levels = {"g": 0, "A": 1, "B": 2}
        # (destination, source, rate): downward rates gamma*(n+1), upward gamma*n
        rates = [("g", "A", config.gamma * (occ[0] + 1.0)),
                 ("A", "g", config.gamma * occ[0]),
                 ("A", "B", config.gamma * (occ[1] + 1.0)),
                 ("B", "A", config.gamma * occ[1]),
                 ("g", "B", config.gamma * (occ[2] + 1.0)),
                 ("B", "g", config.gamma * occ[2])]
        for dst, src, rate in rates:
            op = np.zeros((3, 3), dtype=np.complex128)
            op[levels[dst], levels[src]] = math.sqrt(rate)
            operators.append(op)
            labels.append(f"{dst}<-{src}")
    return schedule, JumpOperatorSet(operators, labels)


@dataclass(frozen=True)
class InitialStateSpec:
    """Thermal state of the initial measurement Hamiltonian plus coherence.

    The coherence block is drawn in that Hamiltonian's eigenbasis with
    :func:`fluctua.sampling.random_coherence`; ``coherence_seed = None``
    or ``coherence_scale = 0`` gives the bare thermal state.
    """

    beta_ref: float = 0.5
    coherence_seed: int | None = 7
    coherence_scale: float = 1.0


def _measurement_hamiltonian(config: ThreeLevelConfig,
                             schedule: HamiltonianSchedule, t: float) -> np.ndarray:
    if config.measurement_convention == "bare":
        return schedule.base
    return schedule.at(t)


def three_level_initial_state(config: ThreeLevelConfig,
                              state: InitialStateSpec) -> np.ndarray:
    """Build the configured initial state (thermal populations + coherence)."""
    schedule, _ = three_level_model(config)
    h0 = _measurement_hamiltonian(config, schedule, 0.0)
    evals, vecs = hermitian_eig(h0)
    w = np.exp(-state.beta_ref * (evals - evals.min()))
    w /= w.sum()
    if state.coherence_seed is None or state.coherence_scale == 0.0:
        chi = np.zeros((3, 3), dtype=np.complex128)
    else:
        chi = random_coherence(w, SeededGenerator(state.coherence_seed),
                               scale=state.coherence_scale)
    return vecs @ (np.diag(w.astype(np.complex128)) + chi) @ vecs.conj().T


THREE_LEVEL_COLUMNS = (
    "t", "jarzynski_epm", "jarzynski_diagonal", "jarzynski_coherence",
    "jarzynski_tpm", "m2_epm", "m2_population", "m2_coherence",
    "m2_coherence_fraction", "entropy_epm", "entropy_tpm", "entropy_mll",
    "m2_mll_minus_epm", "coherence_l1")


@dataclass
class ThreeLevelSeries:
    """Time series of protocol quantities along the driven evolution."""

    times: np.ndarray
    columns: dict[str, np.ndarray]
    config: ThreeLevelConfig
    state: InitialStateSpec | None
    beta_ref: float
    rho_initial: np.ndarray

    def column_names(self) -> list[str]:
        return list(self.columns)


def three_level_experiment(config: ThreeLevelConfig,
                           state: InitialStateSpec | np.ndarray | None = None,
                           t_samples=None) -> ThreeLevelSeries:
    """Evolve the three-level system and evaluate all protocol quantities.

    At every sample time the channel from 0 to t is assembled once and
    the exponential averages, second-moment split, and entropies of the
    three measurement schemes are recorded.  The measurement Hamiltonian
    at each end follows ``config.measurement_convention``: "full" uses
    the instantaneous driven Hamiltonian, "bare" the static part only.
    """
    if t_samples is None:
        t_samples = np.linspace(0.0, config.t_max, 101)
    times = np.asarray([float(t) for t in t_samples])
    if times.size == 0:
        raise InvalidConfig("need at least one sample time")
    if times[0] < 0.0 or times[-1] > config.t_max + 1e-12:
        raise InvalidConfig("sample times must lie in [0, t_max]")

    schedule, jumps = three_level_model(config)
    h0 = _measurement_hamiltonian(config, schedule, 0.0)
    spec_i = spectral_decompose(h0)
    _, basis_i = hermitian_eig(h0)

    if state is None:
        state = InitialStateSpec()
    if isinstance(state, InitialStateSpec):
        rho_i = three_level_initial_state(config, state)
        spec_echo = state
        beta_ref = state.beta_ref
    else:
        rho_i = np.asarray(state, dtype=np.complex128)
        spec_echo = None
        beta_ref = InitialStateSpec().beta_ref

    channels = propagator_series(schedule, jumps, times, step=config.step)
    cols: dict[str, list[float]] = {name: [] for name in THREE_LEVEL_COLUMNS}
    for t, chan in zip(times, channels):
        h_t = _measurement_hamiltonian(config, schedule, t)
        spec_f = spec_i if config.measurement_convention == "bare" \
            else spectral_decompose(h_t)
        _, basis_f = (None, basis_i) if config.measurement_convention == "bare" \
            else hermitian_eig(h_t)

        rep = jarzynski(rho_i, chan, spec_i, spec_f, beta_ref, basis=basis_i)
        z_i = float(np.sum(np.exp(-beta_ref * spec_i.energies) * spec_i.ranks))
        z_f = float(np.sum(np.exp(-beta_ref * spec_f.energies) * spec_f.ranks))
        g_tpm = characteristic_function("TPM", rho_i, chan, spec_i, spec_f,
                                        1j * beta_ref)
        split = epm_second_moment_split(rho_i, chan, spec_i, spec_f, basis=basis_i)
        je = epm_joint(rho_i, chan, spec_i, spec_f)
        jt = tpm_joint(rho_i, chan, spec_i, spec_f)
        jm = mll_joint(rho_i, chan, spec_i, spec_f)
        de, dt, dm = (delta_distribution(j) for j in (je, jt, jm))

        cols["t"].append(float(t))
        cols["jarzynski_epm"].append(rep.total)
        cols["jarzynski_diagonal"].append(rep.diagonal_part)
        cols["jarzynski_coherence"].append(rep.coherence_part)
        cols["jarzynski_tpm"].append(float((g_tpm * (z_i / z_f)).real))
        cols["m2_epm"].append(split.total)
        cols["m2_population"].append(split.population_part)
        cols["m2_coherence"].append(split.coherence_part)
        fraction = 0.0 if split.total == 0.0 \
            else split.coherence_part / split.total
        cols["m2_coherence_fraction"].append(fraction)
        cols["entropy_epm"].append(shannon_entropy(de))
        cols["entropy_tpm"].append(shannon_entropy(dt))
        cols["entropy_mll"].append(shannon_entropy(dm))
        cols["m2_mll_minus_epm"].append(moment(dm, 2) - moment(de, 2))
        cols["coherence_l1"].append(coherence_l1(chan.apply(rho_i), basis=basis_f))

    columns = {name: np.asarray(cols[name], dtype=float)
               for name in THREE_LEVEL_COLUMNS}
    return ThreeLevelSeries(times, columns, config, spec_echo, beta_ref, rho_i)


# ---------------------------------------------------------------------------
# presets


@dataclass(frozen=True)
class ExperimentPreset:
    """A named, fully-parameterized experiment run."""

    name: str
    description: str
    kind: str  # "two_qubit" or "three_level"
    two_qubit: TwoQubitExperimentConfig | None = None
    three_level: ThreeLevelConfig | None = None
    initial_state: InitialStateSpec | None = None
    plot_columns: tuple[str, ...] = ()


PRESETS: dict[str, ExperimentPreset] = {
    "fig2-sweep": ExperimentPreset(
        name="fig2-sweep",
        description="Characteristic functions of the qubit-pair circuit "
                    "across the controlled-rotation sweep",
        kind="two_qubit",
        two_qubit=TwoQubitExperimentConfig(),
        plot_columns=("G_TPM", "G_EPM", "G_EPM_diag", "G_EPM_coh")),
    "figS2-jarzynski-closed": ExperimentPreset(
        name="figS2-jarzynski-closed",
        description="Exponential energy-change averages for the driven "
                    "three-level system without baths",
        kind="three_level",
        three_level=ThreeLevelConfig(gamma=0.0),
        initial_state=InitialStateSpec(beta_ref=0.6, coherence_seed=11),
        plot_columns=("jarzynski_epm", "jarzynski_diagonal",
                      "jarzynski_coherence", "jarzynski_tpm")),
    "figS2b-jarzynski-open": ExperimentPreset(
        name="figS2b-jarzynski-open",
        description="Exponential energy-change averages with the three "
                    "baths attached",
        kind="three_level",
        three_level=ThreeLevelConfig(),
        initial_state=InitialStateSpec(beta_ref=0.5, coherence_seed=11),
        plot_columns=("jarzynski_epm", "jarzynski_diagonal",
                      "jarzynski_coherence", "jarzynski_tpm")),
    "figS3-second-moment": ExperimentPreset(
        name="figS3-second-moment",
        description="Share of the second energy moment carried by initial "
                    "coherence along the driven dissipative evolution",
        kind="three_level",
        three_level=ThreeLevelConfig(),
        initial_state=InitialStateSpec(beta_ref=0.5, coherence_seed=129),
        plot_columns=("m2_coherence_fraction",)),
    "figS4-entropy": ExperimentPreset(
        name="figS4-entropy",
        description="Shannon entropies of the three measurement schemes "
                    "under the double-frequency drive",
        kind="three_level",
        three_level=ThreeLevelConfig(drive_form="double_frequency"),
        initial_state=InitialStateSpec(beta_ref=0.5, coherence_seed=11),
        plot_columns=("entropy_epm", "entropy_tpm", "entropy_mll")),
    "figS5-mll-second-moment": ExperimentPreset(
        name="figS5-mll-second-moment",
        description="Second-moment gap between the eigenstate-mixture "
                    "scheme and the end-point scheme",
        kind="three_level",
        three_level=ThreeLevelConfig(),
        initial_state=InitialStateSpec(beta_ref=0.5, coherence_seed=11),
        plot_columns=("m2_mll_minus_epm",)),
    "figS6-entropy-mll": ExperimentPreset(
        name="figS6-entropy-mll",
        description="Entropy excess of the end-point scheme over the "
                    "eigenstate-mixture scheme",
        kind="three_level",
        three_level=ThreeLevelConfig(),
        initial_state=InitialStateSpec(beta_ref=0.5, coherence_seed=11),
        plot_columns=("entropy_epm", "entropy_mll")),
}
