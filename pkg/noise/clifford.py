"""The single-qubit Clifford group embedded in SU(d) and its native pulses.

Each qubit Clifford is written with ZYZ Euler angles and lifted through the
spin-j representation, exp(-i a Jz) exp(-i b Jy) exp(-i c Jz). Because

    Rz(a) Ry(b) Rz(c) = D(pi/2 + a, b) Rz(a + c),

every element is one equatorial displacement pulse (or none) preceded by a
virtual z rotation. Virtual rotations commute through later pulses as phase
shifts, so a whole sequence compiles to drive pulses plus one trailing frame.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from control.gates import displacement, snap
from control.tones import PulseParams, PulseSequence
from numerics.errors import InvalidDimensionError
from numerics.linalg import propagate
from numerics.spin import spin_operators

logger = logging.getLogger(__name__)

N_CLIFFORDS = 24
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PHASE = np.diag([1, 1j]).astype(complex)
_ANGLE_TOL = 1e-9


def _canonical_key(matrix: np.ndarray) -> Tuple[float, ...]:
    """Key identifying a matrix up to global phase."""
    flat = matrix.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat) > 1e-6)]
    normalized = flat * abs(pivot) / pivot
    return tuple(np.round(np.concatenate([normalized.real, normalized.imag]), 8) + 0.0)


@lru_cache(maxsize=1)
def qubit_cliffords() -> Tuple[np.ndarray, ...]:
    """The 24 single-qubit Cliffords, generated from H and S, identity first."""
    elements = [np.eye(2, dtype=complex)]
    seen = {_canonical_key(elements[0])}
    frontier = list(elements)
    while frontier:
        next_frontier = []
        for element in frontier:
            for generator in (_HADAMARD, _PHASE):
                product = generator @ element
                key = _canonical_key(product)
                if key not in seen:
                    seen.add(key)
                    elements.append(product)
                    next_frontier.append(product)
        frontier = next_frontier
    if len(elements) != N_CLIFFORDS:
        raise RuntimeError(f'Clifford closure produced {len(elements)} elements')
    return tuple(elements)


@lru_cache(maxsize=1)
def _index_by_key() -> Dict[Tuple[float, ...], int]:
    return {_canonical_key(c): i for i, c in enumerate(qubit_cliffords())}


def clifford_index(matrix: np.ndarray) -> int:
    """Index of a 2x2 Clifford given up to global phase.

    Raises:
        KeyError: If the matrix is not a Clifford.
    """
    return _index_by_key()[_canonical_key(np.asarray(matrix, dtype=complex))]


def _snap_angle(value: float) -> float:
    quarter = np.round(value / (np.pi / 2)) * (np.pi / 2)
    return float(quarter) if abs(value - quarter) < _ANGLE_TOL else float(value)


def euler_zyz(matrix: np.ndarray) -> Tuple[float, float, float]:
    """Angles (a, b, c) with matrix = e^{i chi} Rz(a) Ry(b) Rz(c), Rz(t) = exp(-i t Z/2)."""
    u = np.asarray(matrix, dtype=complex)
    u = u / np.sqrt(np.linalg.det(u))
    top, bottom = u[0, 0], u[1, 0]
    beta = 2.0 * np.arctan2(abs(bottom), abs(top))
    total = -2.0 * np.angle(top) if abs(top) > 1e-12 else 0.0
    difference = 2.0 * np.angle(bottom) if abs(bottom) > 1e-12 else 0.0
    return (_snap_angle((total + difference) / 2), _snap_angle(beta),
            _snap_angle((total - difference) / 2))


def lift(d: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz) for spin (d-1)/2."""
    if d < 2:
        raise InvalidDimensionError(f'Dimension must be at least 2, got {d}')
    _, jy, jz = spin_operators(d)
    return propagate(jz, alpha) @ propagate(jy, beta) @ propagate(jz, gamma)


def clifford_su2_embedded(d: int) -> List[np.ndarray]:
    """The 24 qubit Cliffords in the weight-d representation of SU(2)."""
    return [lift(d, *euler_zyz(c)) for c in qubit_cliffords()]


def z_frame(d: int, chi: float) -> Tuple[float, ...]:
    """SNAP phases implementing exp(-i chi Jz) up to global phase."""
    return (-float(chi),) * (d - 1)


@dataclass(frozen=True)
class CliffordPulses:
    """Native form of one Clifford: a virtual z rotation, then at most one pulse.

    Attributes:
        index: Position in ``qubit_cliffords``.
        frame_angle: Angle chi of the leading exp(-i chi Jz).
        drive_angle: Displacement angle, 0 when no pulse is needed.
        drive_phase: Common phase of every tone during the pulse.
    """
    index: int
    frame_angle: float
    drive_angle: float
    drive_phase: float

    @property
    def n_pulses(self) -> int:
        return 0 if self.drive_angle == 0 else 1

    def sequence(self, d: int) -> PulseSequence:
        if not self.n_pulses:
            return PulseSequence(d=d)
        return PulseSequence(d=d, pulses=(PulseParams.uniform(d, self.drive_angle, self.drive_phase),))

    def frame(self, d: int) -> Tuple[float, ...]:
        return z_frame(d, self.frame_angle)

    def unitary(self, d: int) -> np.ndarray:
        """Pulse after frame, as executed."""
        u = snap(d, self.frame(d))
        if self.n_pulses:
            u = displacement(d, PulseParams.uniform(d, self.drive_angle, self.drive_phase)) @ u
        return u


@lru_cache(maxsize=None)
def decompose_clifford(index: int) -> CliffordPulses:
    """Native pulses of Clifford ``index``.

    The identity and the z rotations need no pulse; every other element needs
    one pulse of angle pi or pi/2.
    """
    if not 0 <= index < N_CLIFFORDS:
        raise ValueError(f'Clifford index must be in 0..{N_CLIFFORDS - 1}, got {index}')
    alpha, beta, gamma = euler_zyz(qubit_cliffords()[index])
    if beta == 0.0:
        return CliffordPulses(index, alpha + gamma, 0.0, 0.0)
    # beta = pi/2 (the Hadamard class) has no pi-pulse form under frame phases alone,
    # so it runs as a single pi/2 pulse.
    return CliffordPulses(index, alpha + gamma, beta, np.pi / 2 + alpha)


def mean_pulses_per_clifford() -> float:
    """Average pulse count over the group (5/6)."""
    return float(np.mean([decompose_clifford(i).n_pulses for i in range(N_CLIFFORDS)]))


def inverse_index(indices: Sequence[int]) -> int:
    """Index of the Clifford undoing ``indices`` applied in order."""
    product = np.eye(2, dtype=complex)
    elements = qubit_cliffords()
    for i in indices:
        product = elements[i] @ product
    return clifford_index(product.conj().T)


def compile_cliffords(indices: Sequence[int], d: int) -> Tuple[PulseSequence, float]:
    """Pulses for a Clifford sequence with every virtual rotation pushed to the end.

    Returns:
        The pulse sequence and the angle chi of the trailing exp(-i chi Jz),
        which leaves populations unchanged.
    """
    pulses = []
    chi = 0.0
    for index in indices:
        native = decompose_clifford(index)
        chi += native.frame_angle
        if native.n_pulses:
            pulses.append(PulseParams.uniform(d, native.drive_angle, native.drive_phase - chi))
    return PulseSequence(d=d, pulses=tuple(pulses)), chi
