"""Quantum channels and Lindblad time evolution.

A channel maps density operators to density operators.  Three concrete
kinds are provided:

* :class:`UnitaryChannel` conjugates by a fixed unitary,
* :class:`SuperoperatorChannel` applies a precomputed matrix to the
  vectorized state,
* :class:`LindbladChannel` integrates a (possibly driven) Lindblad
  master equation with a fixed-step classic Runge-Kutta rule.

Vectorization is row-major throughout: ``vec(rho) = rho.reshape(d*d)``
stacks rows, so conjugation by a unitary U has superoperator
``kron(U, conj(U))`` and a map ``rho -> A rho B`` has ``kron(A, B.T)``.

The integrator is deliberately fixed-step (no adaptivity) so runs are
bitwise reproducible; the step is an upper bound and the window is
subdivided uniformly.  Each accepted step re-symmetrizes the state,
``rho <- (rho + rho^dag)/2``, which removes the slow Hermiticity drift
of plain RK4 without touching the dynamics.  Trace is monitored every
step and a drift beyond 1e-6 (or any NaN) aborts the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .qcore import (
    DimensionMismatch,
    NonHermitianInput,
    as_complex_matrix,
    assert_density_operator,
    hermitian_eig,
    is_hermitian,
)

__all__ = [
    "IntegrationFailure",
    "HamiltonianSchedule",
    "JumpOperatorSet",
    "Channel",
    "UnitaryChannel",
    "SuperoperatorChannel",
    "LindbladChannel",
    "identity_channel",
    "lindblad_rhs",
    "propagate",
    "propagator_series",
    "channel_as_superoperator",
    "check_cptp",
    "CPTPReport",
    "vec",
    "unvec",
]

TRACE_DRIFT_ABORT = 1e-6


class IntegrationFailure(RuntimeError):
    """The RK4 run produced NaNs, lost the trace, or failed its convergence check."""


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major vectorization (stack rows)."""
    return np.asarray(m, dtype=np.complex128).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not a square matrix")
    return v.reshape(d, d)


@dataclass
class HamiltonianSchedule:
    """Time-dependent Hamiltonian h(t) = base + drive(t).

    ``drive`` maps a time to a Hermitian matrix (or is ``None`` for a
    static Hamiltonian).  ``t_initial``/``t_final`` delimit the window the
    schedule is meant to be integrated over.
    """

    base: np.ndarray
    drive: Callable[[float], np.ndarray] | None = None
    t_initial: float = 0.0
    t_final: float = 0.0

    def __post_init__(self):
        self.base = as_complex_matrix(self.base, "base Hamiltonian")
        if not is_hermitian(self.base):
            raise NonHermitianInput("base Hamiltonian is not Hermitian")

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    def at(self, t: float) -> np.ndarray:
        if self.drive is None:
            return self.base
        return self.base + self.drive(t)


@dataclass
class JumpOperatorSet:
    """Lindblad jump operators with optional human-readable labels."""

    operators: list
    labels: list[str] | None = None

    def __post_init__(self):
        self.operators = [as_complex_matrix(op, "jump operator") for op in self.operators]
        dims = {op.shape[0] for op in self.operators}
        if len(dims) > 1:
            raise DimensionMismatch(f"jump operators of mixed dimensions {sorted(dims)}")
        if self.labels is not None and len(self.labels) != len(self.operators):
            raise ValueError("label count differs from operator count")

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


def _as_operator_list(jump_operators) -> list:
    if jump_operators is None:
        return []
    if isinstance(jump_operators, JumpOperatorSet):
        return list(jump_operators.operators)
    return [as_complex_matrix(op, "jump operator") for op in jump_operators]


def lindblad_rhs(hamiltonian, jump_operators, rho) -> np.ndarray:
    """Right-hand side -i[H, rho] + sum_k (L rho L^dag - {L^dag L, rho}/2).

    ``rho`` may carry leading batch axes; the rule broadcasts over them.
    """
    h = np.asarray(hamiltonian, dtype=np.complex128)
    r = np.asarray(rho, dtype=np.complex128)
    out = -1j * (h @ r - r @ h)
    ops = _as_operator_list(jump_operators)
    if ops:
        k = np.zeros_like(h)
        for L in ops:
            out += L @ r @ L.conj().T
            k += L.conj().T @ L
        out -= 0.5 * (k @ r + r @ k)
    return out


def _dagger(stack: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(stack, -1, -2))


def _rk4_run(schedule: HamiltonianSchedule, ops: list, state: np.ndarray,
             t0: float, t1: float, step: float) -> np.ndarray:
    """Integrate a (stack of) Hermitian matrices from t0 to t1.

    Re-symmetrizes after every step and aborts on NaN or trace drift.
    Returns the final stack; the input is not modified.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    y = np.array(state, dtype=np.complex128)
    span = t1 - t0
    if span < 0:
        raise ValueError("cannot integrate backwards in time")
    if span == 0:
        return y
    n_steps = max(1, math.ceil(span / step - 1e-12))
    h = span / n_steps

    kmat = np.zeros((schedule.dim, schedule.dim), dtype=np.complex128)
    for L in ops:
        kmat += L.conj().T @ L

    def rhs(t, r):
        ht = schedule.at(t)
        out = -1j * (ht @ r - r @ ht)
        for L in ops:
            out += L @ r @ L.conj().T
        out -= 0.5 * (kmat @ r + r @ kmat)
        return out

    tr0 = np.einsum("...ii->...", y)
    t = t0
    for i in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = 0.5 * (y + _dagger(y))
        t = t0 + (i + 1) * h
        drift = np.max(np.abs(np.einsum("...ii->...", y) - tr0))
        if not (drift <= TRACE_DRIFT_ABORT):
            raise IntegrationFailure(
                f"trace drift {drift:.3e} at t = {t:.6g} (step {h:.3g})")
    if np.isnan(y).any():
        raise IntegrationFailure("NaN in integrated state")
    return y


def propagate(schedule: HamiltonianSchedule, jump_operators, rho0,
              step: float = 1e-3, check_convergence: bool = False) -> np.ndarray:
    """Evolve a density operator over the schedule window with fixed-step RK4.

    With ``check_convergence`` the run is repeated at half the step and the
    two endpoints must agree to 1e-6, otherwise :class:`IntegrationFailure`
    is raised.
    """
    rho = assert_density_operator(rho0)
    if rho.shape[0] != schedule.dim:
        raise DimensionMismatch("state and schedule dimensions differ")
    ops = _as_operator_list(jump_operators)
    out = _rk4_run(schedule, ops, rho, schedule.t_initial, schedule.t_final, step)
    if check_convergence:
        ref = _rk4_run(schedule, ops, rho, schedule.t_initial, schedule.t_final, step / 2.0)
        dist = float(np.max(np.abs(out - ref)))
        if not (dist <= 1e-6):
            raise IntegrationFailure(
                f"halving the step moved the endpoint by {dist:.3e}; "
                "the integration is not converged")
    return out


# ---------------------------------------------------------------------------
# Channel classes.


class Channel:
    """Common channel interface: a linear, trace-preserving state map."""

    dim: int

    def apply(self, rho) -> np.ndarray:
        """Apply to a density operator (validated)."""
        raise NotImplementedError

    def apply_matrix(self, m) -> np.ndarray:
        """Linear extension to arbitrary matrices (no state validation)."""
        raise NotImplementedError

    def as_superoperator(self) -> np.ndarray:
        """The d^2 x d^2 matrix acting on row-major vectorized states."""
        raise NotImplementedError


class UnitaryChannel(Channel):
    """rho -> U rho U^dag."""

    def __init__(self, unitary):
        u = as_complex_matrix(unitary, "unitary")
        d = u.shape[0]
        if float(np.max(np.abs(u.conj().T @ u - np.eye(d)))) > 1e-10:
            raise ValueError("matrix is not unitary")
        self.unitary = u
        self.dim = d

    def apply(self, rho) -> np.ndarray:
        r = assert_density_operator(rho)
        if r.shape[0] != self.dim:
            raise DimensionMismatch("state and channel dimensions differ")
        return self.unitary @ r @ self.unitary.conj().T

    def apply_matrix(self, m) -> np.ndarray:
        a = as_complex_matrix(m, "matrix")
        return self.unitary @ a @ self.unitary.conj().T

    def as_superoperator(self) -> np.ndarray:
        return np.kron(self.unitary, self.unitary.conj())


class SuperoperatorChannel(Channel):
    """A channel given directly by its vectorized-state matrix."""

    def __init__(self, superoperator):
        s = as_complex_matrix(superoperator, "superoperator")
        d = math.isqrt(s.shape[0])
        if d * d != s.shape[0]:
            raise DimensionMismatch("superoperator side is not a perfect square")
        self.superoperator = s
        self.dim = d

    def apply(self, rho) -> np.ndarray:
        r = assert_density_operator(rho)
        if r.shape[0] != self.dim:
            raise DimensionMismatch("state and channel dimensions differ")
        out = unvec(self.superoperator @ vec(r))
        return 0.5 * (out + out.conj().T)

    def apply_matrix(self, m) -> np.ndarray:
        a = as_complex_matrix(m, "matrix")
        return unvec(self.superoperator @ vec(a))

    def as_superoperator(self) -> np.ndarray:
        return self.superoperator


class LindbladChannel(Channel):
    """The propagator of a Lindblad equation over the schedule window."""

    def __init__(self, schedule: HamiltonianSchedule, jump_operators=None,
                 step: float = 1e-3):
        self.schedule = schedule
        self.jump_operators = _as_operator_list(jump_operators)
        self.step = step
        self.dim = schedule.dim
        self._superoperator = None

    def apply(self, rho) -> np.ndarray:
        return propagate(self.schedule, self.jump_operators, rho, self.step)

    def apply_matrix(self, m) -> np.ndarray:
        a = as_complex_matrix(m, "matrix")
        # split into Hermitian parts so the symmetrizing integrator applies
        hpart = 0.5 * (a + a.conj().T)
        apart = -0.5j * (a - a.conj().T)
        stack = np.stack([hpart, apart])
        out = _rk4_run(self.schedule, self.jump_operators, stack,
                       self.schedule.t_initial, self.schedule.t_final, self.step)
        return out[0] + 1j * out[1]

    def as_superoperator(self) -> np.ndarray:
        if self._superoperator is None:
            basis, rebuild = _hermitian_unit_basis(self.dim)
            final = _rk4_run(self.schedule, self.jump_operators, basis,
                             self.schedule.t_initial, self.schedule.t_final, self.step)
            self._superoperator = rebuild(final)
        return self._superoperator


def identity_channel(dim: int) -> UnitaryChannel:
    return UnitaryChannel(np.eye(dim))


def _hermitian_unit_basis(d: int):
    """Hermitian stand-ins for the matrix units, plus the rebuild map.

    Propagating matrix units directly would defeat the integrator's
    re-symmetrization, so each unit E_jk is reached through the Hermitian
    pair X = E_jk + E_kj and Y = -i(E_jk - E_kj).  ``rebuild`` turns the
    propagated stack back into the superoperator columns.
    """
    mats = []
    index = {}
    for j in range(d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, j] = 1.0
        index["d", j] = len(mats)
        mats.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            x = np.zeros((d, d), dtype=np.complex128)
            x[j, k] = 1.0
            x[k, j] = 1.0
            index["x", j, k] = len(mats)
            mats.append(x)
            y = np.zeros((d, d), dtype=np.complex128)
            y[j, k] = -1.0j
            y[k, j] = 1.0j
            index["y", j, k] = len(mats)
            mats.append(y)

    def rebuild(final: np.ndarray) -> np.ndarray:
        s = np.zeros((d * d, d * d), dtype=np.complex128)
        for j in range(d):
            s[:, j * d + j] = final[index["d", j]].reshape(-1)
        for j in range(d):
            for k in range(j + 1, d):
                fx = final[index["x", j, k]]
                fy = final[index["y", j, k]]
                s[:, j * d + k] = (0.5 * (fx + 1j * fy)).reshape(-1)
                s[:, k * d + j] = (0.5 * (fx - 1j * fy)).reshape(-1)
        return s

    return np.stack(mats), rebuild


def propagator_series(schedule: HamiltonianSchedule, jump_operators, times,
                      step: float = 1e-3) -> list[SuperoperatorChannel]:
    """Propagators from the schedule start to each requested time.

    The whole operator basis is integrated once, incrementally, so the
    cost is one pass over [t_initial, max(times)] regardless of how many
    snapshot times are requested.  Times must be non-decreasing and lie
    inside the schedule window.
    """
    ops = _as_operator_list(jump_operators)
    ts = [float(t) for t in times]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("snapshot times must be non-decreasing")
    if ts and (ts[0] < schedule.t_initial - 1e-12):
        raise ValueError("snapshot before the schedule start")
    basis, rebuild = _hermitian_unit_basis(schedule.dim)
    out = []
    t_prev = schedule.t_initial
    current = basis
    for t in ts:
        current = _rk4_run(schedule, ops, current, t_prev, t, step)
        t_prev = t
        out.append(SuperoperatorChannel(rebuild(current)))
    return out


def channel_as_superoperator(channel: Channel) -> SuperoperatorChannel:
    """Rewrite any channel as an explicit superoperator channel."""
    if isinstance(channel, SuperoperatorChannel):
        return channel
    return SuperoperatorChannel(channel.as_superoperator())


# ---------------------------------------------------------------------------
# CPTP diagnostics.


@dataclass
class CPTPReport:
    trace_preserving: bool
    choi_min_eig: float
    max_trace_defect: float = 0.0


def choi_matrix(superoperator: np.ndarray) -> np.ndarray:
    """Trace-normalized Choi matrix of a superoperator.

    Row-major vectorization means ``Phi[E_jk]_{mn} = S[(m,n),(j,k)]``; the
    Choi matrix collects these blocks as sum_jk E_jk (x) Phi[E_jk], here
    scaled by 1/d so a trace-preserving map gives trace one.
    """
    s = as_complex_matrix(superoperator, "superoperator")
    d = math.isqrt(s.shape[0])
    if d * d != s.shape[0]:
        raise DimensionMismatch("superoperator side is not a perfect square")
    c = s.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    return c / d


def check_cptp(channel_or_superoperator, tol: float = 1e-8) -> CPTPReport:
    """Trace preservation on matrix units plus Choi positivity.

    ``choi_min_eig`` is the smallest eigenvalue of the trace-normalized
    Choi matrix; complete positivity up to numerical noise means it is not
    meaningfully negative.
    """
    if isinstance(channel_or_superoperator, Channel):
        s = channel_or_superoperator.as_superoperator()
    else:
        s = as_complex_matrix(channel_or_superoperator, "superoperator")
    d = math.isqrt(s.shape[0])
    traces = np.einsum("mmjk->jk", s.reshape(d, d, d, d))
    defect = float(np.max(np.abs(traces - np.eye(d))))
    c = choi_matrix(s)
    if not is_hermitian(c, 1e-8):
        raise NonHermitianInput("Choi matrix is not Hermitian; map does not preserve Hermiticity")
    evals, _ = hermitian_eig(0.5 * (c + c.conj().T))
    return CPTPReport(trace_preserving=defect <= tol,
                      choi_min_eig=float(evals[0]),
                      max_trace_defect=defect)
