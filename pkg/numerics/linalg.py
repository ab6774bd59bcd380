"""Dense complex linear algebra for qudit operators and states.

Matrices are plain ``numpy`` complex arrays; the predicates below are the
testable invariants of the matrix, state and distribution types used across
the library. Propagators are built from the Hermitian eigendecomposition
(``scipy.linalg.eigh``) so their unitarity is exact up to rounding.
"""

import numpy as np
import scipy.linalg

from numerics.errors import ContractViolationError, DimensionMismatchError

DEFAULT_TOL = 1e-10
STATE_NORM_TOL = 1e-10
DISTRIBUTION_SUM_TOL = 1e-9


def as_square_matrix(matrix, name: str = 'matrix') -> np.ndarray:
    """Return ``matrix`` as a finite square complex array.

    Raises:
        ValueError: If the array is not square or has non-finite entries.
    """
    array = np.asarray(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        raise ValueError(f'{name} must be a non-empty square matrix, got shape {array.shape}')
    if not np.all(np.isfinite(array)):
        raise ValueError(f'{name} has non-finite entries')
    return array


def _scaled_tol(matrix: np.ndarray, tol: float) -> float:
    # Absolute for matrices of order-one norm, relative for larger ones.
    return tol * max(1.0, float(np.max(np.abs(matrix))))


def is_hermitian(matrix, tol: float = DEFAULT_TOL) -> bool:
    """True if ``matrix`` equals its conjugate transpose within ``tol``."""
    m = as_square_matrix(matrix)
    return bool(np.max(np.abs(m - m.conj().T)) <= _scaled_tol(m, tol))


def is_unitary(matrix, tol: float = DEFAULT_TOL) -> bool:
    """True if ``matrix`` satisfies U^dagger U = I within ``tol``."""
    m = as_square_matrix(matrix)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def is_diagonal(matrix, tol: float = DEFAULT_TOL) -> bool:
    """True if every off-diagonal entry is below ``tol`` in magnitude."""
    m = as_square_matrix(matrix)
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off)) <= tol)


def propagate(hamiltonian, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return exp(-i H t) for Hermitian H.

    Args:
        hamiltonian: Hermitian generator.
        t: Duration in units matching the generator (dimensionless for
            rotation angles, ms for Hamiltonians in angular kHz).
        tol: Hermiticity tolerance, scaled by the largest entry when that
            exceeds one.

    Returns:
        np.ndarray: The unitary propagator.

    Raises:
        ContractViolationError: If H is not Hermitian within tolerance.

    Examples:
        >>> np.allclose(propagate(np.zeros((2, 2)), 1.0), np.eye(2))
        True
    """
    h = as_square_matrix(hamiltonian, 'Hamiltonian')
    if not is_hermitian(h, tol):
        raise ContractViolationError('Hamiltonian must be Hermitian to build a propagator')
    h = 0.5 * (h + h.conj().T)
    energies, vectors = scipy.linalg.eigh(h)
    phases = np.exp(-1j * energies * float(t))
    return (vectors * phases) @ vectors.conj().T


def unitary_log_generator(unitary, t: float = 1.0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return a Hermitian H with exp(-i H t) = U.

    The complex Schur form of a unitary matrix is diagonal, so the eigenbasis
    stays orthonormal even for degenerate eigenvalues. Eigenphases are taken in
    (-pi, pi].

    Raises:
        ContractViolationError: If U is not unitary or t is not positive.
    """
    u = as_square_matrix(unitary, 'unitary')
    if not is_unitary(u, tol):
        raise ContractViolationError('Generator requested for a non-unitary matrix')
    if t <= 0:
        raise ContractViolationError(f'Generator duration must be positive, got {t}')
    schur_form, basis = scipy.linalg.schur(u, output='complex')
    angles = np.angle(np.diag(schur_form))
    generator = (basis * (-angles / t)) @ basis.conj().T
    return 0.5 * (generator + generator.conj().T)


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f'{what} dimensions differ: {a.shape} vs {b.shape}')


def unitary_fidelity(u, v) -> float:
    """Return |Tr(U^dagger V)| / d, invariant under a global phase on either argument.

    Raises:
        DimensionMismatchError: If U and V differ in shape.
    """
    a = as_square_matrix(u, 'U')
    b = as_square_matrix(v, 'V')
    _check_same_shape(a, b, 'Unitary')
    value = abs(np.trace(a.conj().T @ b)) / a.shape[0]
    return float(min(1.0, value))


def as_state(vector, tol: float = STATE_NORM_TOL) -> np.ndarray:
    """Return ``vector`` as a complex state, checking its L2 norm is one."""
    psi = np.asarray(vector, dtype=complex).reshape(-1)
    if psi.size == 0 or not np.all(np.isfinite(psi)):
        raise ValueError('State vector must be non-empty and finite')
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValueError(f'State vector must be normalized, got norm {norm}')
    return psi


def basis_state(d: int, level: int) -> np.ndarray:
    """Return |level> in a d-dimensional space."""
    if not 0 <= level < d:
        raise ValueError(f'Level {level} out of range for dimension {d}')
    psi = np.zeros(d, dtype=complex)
    psi[level] = 1.0
    return psi


def equal_superposition(d: int) -> np.ndarray:
    """Return |s> = sum_k |k> / sqrt(d)."""
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def density_matrix(psi) -> np.ndarray:
    """Return |psi><psi| for a normalized state."""
    state = as_state(psi)
    return np.outer(state, state.conj())


def state_fidelity(rho, psi) -> float:
    """Return <psi|rho|psi>, the overlap of a density matrix with a pure state."""
    r = as_square_matrix(rho, 'density matrix')
    state = as_state(psi)
    if state.shape[0] != r.shape[0]:
        raise DimensionMismatchError(
            f'State dimension {state.shape[0]} does not match density matrix {r.shape[0]}')
    return float(np.real(state.conj() @ r @ state))


def as_distribution(probs, tol: float = DISTRIBUTION_SUM_TOL) -> np.ndarray:
    """Return ``probs`` as a real probability vector.

    Entries may undershoot zero by rounding noise (clipped); they must sum to
    one within ``tol``.
    """
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ValueError('Probability distribution must be non-empty and finite')
    if np.any(p < -tol) or np.any(p > 1 + tol):
        raise ValueError(f'Probabilities must lie in [0, 1], got {p}')
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f'Probabilities must sum to 1, got {p.sum()}')
    return np.clip(p, 0.0, 1.0)


def sso(e, p) -> float:
    """Squared statistical overlap (sum_k sqrt(e_k p_k))^2 of two distributions.

    Examples:
        >>> round(sso([1.0, 0.0], [0.5, 0.5]), 12)
        0.5
    """
    a = as_distribution(e)
    b = as_distribution(p)
    _check_same_shape(a, b, 'Distribution')
    return float(min(1.0, np.sum(np.sqrt(a * b)) ** 2))
