"""Dense complex linear algebra for small quantum systems.

Everything in this package works on plain numpy arrays of complex128.
A Hamiltonian is a Hermitian matrix, a state is a density operator
(Hermitian, unit trace, positive semidefinite), and an energy basis is
the column set returned by the eigensolver below.

The eigensolver is a cyclic Jacobi iteration specialised to complex
Hermitian input.  For the matrix sizes this package targets (dimension
<= 9 or so) Jacobi is simple, accurate to machine precision, and gives
deterministic output, which matters for reproducible sampling runs.

Conventions used throughout:

* eigenvalues are returned in ascending order;
* eigenvectors are columns of a unitary matrix;
* a "basis" argument is a matrix whose columns are the basis vectors;
  ``None`` means the computational basis;
* dephasing means removing off-diagonal entries in a given basis, or
  removing inter-sector blocks when done per energy sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DimensionMismatch",
    "NonHermitianInput",
    "NoConvergence",
    "NonOrthonormalBasis",
    "SpectralDecomposition",
    "CoherenceSplit",
    "as_complex_matrix",
    "is_hermitian",
    "assert_density_operator",
    "hermitian_eig",
    "spectral_decompose",
    "gibbs_state",
    "dephase",
    "dephase_sectors",
    "coherence_split",
    "coherence_l1",
    "matrix_phase_exp",
]


class DimensionMismatch(ValueError):
    """Operands act on different Hilbert space dimensions."""


class NonHermitianInput(ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class NoConvergence(RuntimeError):
    """The Jacobi sweep cap was reached before the off-diagonal norm target."""


class NonOrthonormalBasis(ValueError):
    """A basis matrix whose columns are not orthonormal."""


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex128 array, copying only if needed."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    return float(np.max(np.abs(m - m.conj().T))) <= tol * scale


def assert_density_operator(rho, *, herm_tol: float = 1e-10,
                            trace_tol: float = 1e-8,
                            psd_tol: float = 1e-9) -> np.ndarray:
    """Validate a density operator and return it as complex128.

    Checks Hermiticity, unit trace and positive semidefiniteness (the
    smallest eigenvalue may be slightly negative, down to -psd_tol, to
    admit states assembled from floating-point arithmetic).
    """
    a = as_complex_matrix(rho, "density operator")
    if not is_hermitian(a, herm_tol):
        raise NonHermitianInput("density operator is not Hermitian")
    tr = a.trace()
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density operator trace {tr:.12g} differs from 1")
    evals, _ = hermitian_eig(a)
    if evals[0] < -psd_tol:
        raise ValueError(f"density operator has negative eigenvalue {evals[0]:.3e}")
    return a


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for complex Hermitian matrices.

_MAX_SWEEPS = 100


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def hermitian_eig(matrix, tol: float = 1e-12):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as orthonormal columns, so that
    ``matrix @ vecs[:, j] == vals[j] * vecs[:, j]``.

    The iteration sweeps over all upper-triangle pairs, applying a complex
    Givens rotation that annihilates each pair in turn, until the
    off-diagonal Frobenius norm falls below ``tol`` (scaled by the input's
    Frobenius norm when that exceeds one).  Raises :class:`NoConvergence`
    after 100 sweeps, which for well-formed Hermitian input never happens
    at the sizes used here.
    """
    a = as_complex_matrix(matrix, "eig input").copy()
    n = a.shape[0]
    if not is_hermitian(a):
        raise NonHermitianInput("hermitian_eig requires a Hermitian matrix")
    # Work on the exactly Hermitian average so roundoff in the input does
    # not leak into complex eigenvalues.
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([a[0, 0].real]), v

    fro = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    target = tol * max(1.0, fro)
    skip = 1e-18 * max(1.0, fro)

    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                u = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Right-multiply by the rotation, then left-multiply by its
                # adjoint: A <- R^dag A R, V <- V R.
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * np.conj(u) * aq
                a[:, q] = s * u * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * u * rq
                a[q, :] = s * np.conj(u) * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(u) * vq
                v[:, q] = s * u * vp + c * vq
    else:
        raise NoConvergence(
            f"off-diagonal norm {_offdiag_norm(a):.3e} above {target:.3e} "
            f"after {_MAX_SWEEPS} sweeps")

    vals = np.real(np.diag(a))
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


@dataclass
class SpectralDecomposition:
    """Distinct energy levels of a Hamiltonian with their eigenprojectors.

    ``energies[k]`` is the (possibly degenerate) level value and
    ``projectors[k]`` the rank-``ranks[k]`` orthogonal projector onto its
    eigenspace.  Levels are ascending and the projectors resolve the
    identity.
    """

    energies: np.ndarray
    projectors: list[np.ndarray]
    grouping_tol: float = 0.0

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> list[int]:
        return [int(round(p.trace().real)) for p in self.projectors]

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.projectors[0])
        for e, p in zip(self.energies, self.projectors):
            out += e * p
        return out


def spectral_decompose(hamiltonian, grouping_tol: float | None = None) -> SpectralDecomposition:
    """Group eigenvalues into degenerate levels and build their projectors.

    Eigenvalues closer than ``grouping_tol`` (default ``1e-8 * max|E|``)
    are merged into a single level whose projector spans the combined
    eigenvectors; the reported level value is the group mean.
    """
    vals, vecs = hermitian_eig(hamiltonian)
    if grouping_tol is None:
        grouping_tol = 1e-8 * float(np.max(np.abs(vals))) if vals.size else 0.0
    energies = []
    projectors = []
    start = 0
    n = len(vals)
    for j in range(1, n + 1):
        if j < n and vals[j] - vals[j - 1] <= grouping_tol:
            continue
        block = vecs[:, start:j]
        projectors.append(block @ block.conj().T)
        energies.append(float(np.mean(vals[start:j])))
        start = j
    return SpectralDecomposition(np.array(energies), projectors, grouping_tol)


def gibbs_state(hamiltonian, beta: float,
                decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """Thermal state exp(-beta H) / Z."""
    if decomposition is None:
        decomposition = spectral_decompose(hamiltonian)
    # Shift energies so the exponentials stay in range for large beta.
    e0 = float(np.min(decomposition.energies))
    weights = [math.exp(-beta * (e - e0)) for e in decomposition.energies]
    z = sum(w * r for w, r in zip(weights, decomposition.ranks))
    out = np.zeros_like(decomposition.projectors[0])
    for w, p in zip(weights, decomposition.projectors):
        out += (w / z) * p
    return out


# ---------------------------------------------------------------------------
# Dephasing and coherence bookkeeping.


def _check_basis(basis, dim: int) -> np.ndarray:
    b = as_complex_matrix(basis, "basis")
    if b.shape[0] != dim:
        raise DimensionMismatch(f"basis dimension {b.shape[0]} != state dimension {dim}")
    gram = b.conj().T @ b
    if float(np.max(np.abs(gram - np.eye(dim)))) > 1e-10:
        raise NonOrthonormalBasis("basis columns are not orthonormal")
    return b


def dephase(rho, basis=None) -> np.ndarray:
    """Remove off-diagonal entries of ``rho`` in the given basis.

    ``basis`` is a matrix whose columns are the basis vectors; ``None``
    means the computational basis.  The result is returned in the original
    (computational) representation.
    """
    a = as_complex_matrix(rho, "state")
    if basis is None:
        return np.diag(np.diag(a).copy())
    b = _check_basis(basis, a.shape[0])
    diag = np.diag(b.conj().T @ a @ b)
    return (b * diag) @ b.conj().T


def dephase_sectors(rho, decomposition: SpectralDecomposition) -> np.ndarray:
    """Project out inter-sector blocks: sum_l P_l rho P_l.

    Unlike :func:`dephase` this keeps coherence inside each degenerate
    energy sector, which is the right notion when only level populations
    (not individual basis states) are resolved.
    """
    a = as_complex_matrix(rho, "state")
    if a.shape[0] != decomposition.dim:
        raise DimensionMismatch("state and decomposition dimensions differ")
    out = np.zeros_like(a)
    for p in decomposition.projectors:
        out += p @ a @ p
    return out


@dataclass
class CoherenceSplit:
    """A state written as populations plus coherences, rho = P + chi.

    ``populations`` is the dephased part and ``coherences`` the traceless
    remainder.  ``basis`` records the basis the split was taken in
    (``None`` for the computational basis or for a per-sector split).
    """

    populations: np.ndarray
    coherences: np.ndarray
    basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.populations.shape[0]


def coherence_split(rho, basis=None,
                    sectors: SpectralDecomposition | None = None) -> CoherenceSplit:
    """Split a state into its dephased part and the coherence remainder.

    With ``sectors`` given, the split keeps intra-sector blocks intact
    (useful for degenerate Hamiltonians); otherwise it removes every
    off-diagonal entry in ``basis``.
    """
    a = as_complex_matrix(rho, "state")
    if sectors is not None:
        pops = dephase_sectors(a, sectors)
        return CoherenceSplit(pops, a - pops, None)
    pops = dephase(a, basis)
    return CoherenceSplit(pops, a - pops, None if basis is None else np.asarray(basis, dtype=np.complex128))


def coherence_l1(rho, basis=None) -> float:
    """l1 coherence measure: half the sum of off-diagonal magnitudes."""
    a = as_complex_matrix(rho, "state")
    if basis is not None:
        b = _check_basis(basis, a.shape[0])
        a = b.conj().T @ a @ b
    off = np.abs(a - np.diag(np.diag(a)))
    return 0.5 * float(np.sum(off))


def matrix_phase_exp(hamiltonian, z: complex,
                     decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """exp(z H) for Hermitian H and arbitrary complex z.

    Built from the spectral decomposition, sum_l exp(z E_l) P_l, so purely
    imaginary z gives the unitary phase and real z the Boltzmann-type
    weighting used in exponential averages.
    """
    if decomposition is None:
        decomposition = spectral_decompose(hamiltonian)
    out = np.zeros_like(decomposition.projectors[0])
    for e, p in zip(decomposition.energies, decomposition.projectors):
        out += np.exp(z * e) * p
    return out
