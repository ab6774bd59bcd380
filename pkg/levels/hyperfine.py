"""Hyperfine plus Zeeman Hamiltonian of a single (I, J) manifold.

The Hamiltonian is assembled in the uncoupled product basis |mI> (x) |mJ>,
with basis index ``iI * (2J+1) + iJ`` and both factors ordered by ascending
magnetic quantum number. Energies are in MHz.

Since the Zeeman field lies along z, H commutes with Fz = Iz + Jz and
diagonalization proceeds one mF block at a time, so every eigenvector is
supported on a single mF block by construction.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import scipy.linalg

from levels.constants import HyperfineConstants
from levels.field import FieldConfig
from numerics.spin import spin_operators

logger = logging.getLogger(__name__)

COMPOSITION_NORM_TOL = 1e-10


def _angular_momentum_operators(s: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-s matrices, including the trivial 1x1 case s=0."""
    size = int(round(2 * s + 1))
    if size == 1:
        zero = np.zeros((1, 1), dtype=complex)
        return zero, zero, zero
    return spin_operators(size)


def _product_operators(hc: HyperfineConstants):
    """Return the I and J vector operators embedded in the product space."""
    i_ops = _angular_momentum_operators(hc.nuclear_spin)
    j_ops = _angular_momentum_operators(hc.electronic_j)
    eye_i = np.eye(i_ops[0].shape[0])
    eye_j = np.eye(j_ops[0].shape[0])
    nuclear = [np.kron(op, eye_j) for op in i_ops]
    electronic = [np.kron(eye_i, op) for op in j_ops]
    return nuclear, electronic


def electronic_operator(hc: HyperfineConstants, axis: str) -> np.ndarray:
    """J_axis acting on the electronic factor of the product space."""
    _, electronic = _product_operators(hc)
    return electronic['xyz'.index(axis)]


def basis_quantum_numbers(hc: HyperfineConstants) -> np.ndarray:
    """Return an (n, 2) array of (mI, mJ) per uncoupled basis state."""
    m_i = np.arange(int(round(2 * hc.nuclear_spin + 1))) - hc.nuclear_spin
    m_j = np.arange(int(round(2 * hc.electronic_j + 1))) - hc.electronic_j
    return np.array([(a, b) for a in m_i for b in m_j])


def _hamiltonian(hc: HyperfineConstants, bz: float, bohr_magneton: float) -> np.ndarray:
    """Unvalidated Hamiltonian at any real field (negative values allowed for finite differences)."""
    nuclear, electronic = _product_operators(hc)
    i_dot_j = sum(a @ b for a, b in zip(nuclear, electronic))
    i, j = hc.nuclear_spin, hc.electronic_j
    h = hc.a_mhz * i_dot_j
    if i > 0.5 and j > 0.5:
        identity = np.eye(i_dot_j.shape[0])
        numerator = 3 * i_dot_j @ i_dot_j + 1.5 * i_dot_j - i * (i + 1) * j * (j + 1) * identity
        h = h + hc.b_mhz * numerator / (2 * i * (2 * i - 1) * j * (2 * j - 1))
    h = h + bohr_magneton * bz * (hc.g_j * electronic[2] + hc.g_i * nuclear[2])
    return 0.5 * (h + h.conj().T)


def build_hamiltonian(hc: HyperfineConstants, fc: FieldConfig) -> np.ndarray:
    """Return the hyperfine plus Zeeman Hamiltonian in MHz.

    H = A I.J + B Q(I, J) + muB Bz (gJ Jz + gI Iz), where the quadrupole term
    Q = [3(I.J)^2 + 3/2 I.J - I(I+1)J(J+1)] / [2I(2I-1)J(2J-1)] vanishes when
    I or J is below one.

    Args:
        hc: Fully populated hyperfine constants.
        fc: Field configuration.

    Returns:
        np.ndarray: Hermitian matrix of dimension (2I+1)(2J+1).

    Raises:
        ValueError: If any constant has not been set.

    Examples:
        >>> hc = HyperfineConstants.from_mapping('toy', {'nuclear_spin': 1.5,
        ...     'electronic_j': 2.5, 'a_mhz': -12.0, 'b_mhz': 60.0, 'g_j': 1.2, 'g_i': 0.0})
        >>> build_hamiltonian(hc, FieldConfig(bz=7.2)).shape
        (24, 24)
    """
    return _hamiltonian(hc, fc.bz, fc.bohr_magneton)


@dataclass
class Level:
    """One hyperfine eigenlevel.

    Attributes:
        index: Position in the energy-sorted level list.
        energy: Energy in MHz.
        m_f: Magnetic quantum number mF = mI + mJ.
        composition: Amplitudes over the uncoupled basis.
        block_rank: Energy rank of the level inside its mF block.
    """
    index: int
    energy: float
    m_f: float
    composition: np.ndarray = field(repr=False)
    block_rank: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Check the composition vector is normalized."""
        norm = np.linalg.norm(self.composition)
        if abs(norm - 1.0) > COMPOSITION_NORM_TOL:
            raise ValueError(f'Level {self.index} composition has norm {norm}, expected 1')


def diagonalize_levels(hamiltonian: np.ndarray, hc: HyperfineConstants) -> List[Level]:
    """Diagonalize a manifold Hamiltonian block by block in mF.

    Levels are sorted by energy; exactly degenerate energies are ordered by
    ascending mF, then by rank within the block.

    Args:
        hamiltonian: Matrix returned by ``build_hamiltonian``.
        hc: The constants it was built from (fixes the basis labels).

    Returns:
        list of Level: (2I+1)(2J+1) levels.
    """
    quantum_numbers = basis_quantum_numbers(hc)
    if hamiltonian.shape != (len(quantum_numbers), len(quantum_numbers)):
        raise ValueError(
            f'Hamiltonian shape {hamiltonian.shape} does not match manifold dimension {len(quantum_numbers)}')
    m_f_basis = quantum_numbers.sum(axis=1)
    raw = []
    for m_f in np.unique(m_f_basis):
        block = np.flatnonzero(np.isclose(m_f_basis, m_f))
        energies, vectors = scipy.linalg.eigh(hamiltonian[np.ix_(block, block)])
        for rank, (energy, vector) in enumerate(zip(energies, vectors.T)):
            composition = np.zeros(len(quantum_numbers), dtype=complex)
            composition[block] = vector
            raw.append((float(energy), float(m_f), rank, composition))
    raw.sort(key=lambda item: (item[0], item[1], item[2]))
    levels = [Level(index=k, energy=e, m_f=m, composition=c, block_rank=r)
              for k, (e, m, r, c) in enumerate(raw)]
    logger.debug('Diagonalized %d levels spanning %.6g MHz', len(levels),
                 levels[-1].energy - levels[0].energy)
    return levels

