"""Rotating-frame Hamiltonian, displacement and SNAP gates, and their composition.

A pulse sequence read under a ``PulseConvention`` becomes a schedule of
drive steps (square pulses, which take time) and frame steps (virtual SNAP
gates, which are instantaneous and exact). Exact composition, non-ideal
evolution and the noisy simulator all execute the same schedule.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from control.tones import (GENERATOR_SCALE, DEFAULT_CONVENTION, PulseConvention,
    PulseParams, PulseSequence, ToneSet, pulse_duration)
from numerics.errors import DimensionMismatchError
from numerics.linalg import as_square_matrix, is_unitary, propagate, unitary_log_generator

logger = logging.getLogger(__name__)


def _phase_vector(d: int, phases: Sequence[float]) -> np.ndarray:
    values = np.asarray(phases, dtype=float).reshape(-1)
    if values.size != d - 1:
        raise DimensionMismatchError(f'Expected {d - 1} phases for d={d}, got {values.size}')
    return values


def rotating_hamiltonian(tones: ToneSet, phases: Sequence[float]) -> np.ndarray:
    """Return the time-independent multi-tone Hamiltonian in angular kHz.

    The (k, k+1) entry is Omega_k exp(i phi_k) and the diagonal holds the
    cumulative detunings 0, delta_0, delta_0 + delta_1, ...

    Examples:
        >>> h = rotating_hamiltonian(ToneSet(d=2, amplitudes=(3.0,), detunings=(0.5,)), [0.0])
        >>> h.real
        array([[0. , 3. ],
               [3. , 0.5]])
    """
    phi = _phase_vector(tones.d, phases)
    couplings = np.asarray(tones.amplitudes) * np.exp(1j * phi)
    h = np.diag(couplings, k=1) + np.diag(couplings.conj(), k=-1)
    h = h + np.diag(np.concatenate([[0.0], np.cumsum(tones.detunings)]))
    return h.astype(complex)


def generator(d: int, phases: Sequence[float]) -> np.ndarray:
    """Displacement generator G(phi), normalized so that G(0) = Jx."""
    return rotating_hamiltonian(ToneSet.ideal(d, 1.0), phases) / GENERATOR_SCALE


def displacement(d: int, pulse: PulseParams) -> np.ndarray:
    """Return D(phi, theta) = exp(-i theta G(phi))."""
    if pulse.d != d:
        raise DimensionMismatchError(f'Pulse has {len(pulse.phases)} phases, expected {d - 1}')
    return propagate(generator(d, pulse.phases), pulse.theta)


def snap(d: int, phases: Sequence[float]) -> np.ndarray:
    """Return diag(exp(i Phi_k)) with Phi_0 = 0 and Phi_{k+1} = Phi_k + phi_k.

    Conjugation moves a SNAP into the drive phases:
    snap(phi)^dagger D(0, theta) snap(phi) = D(phi, theta).
    """
    phi = _phase_vector(d, phases)
    return np.diag(np.exp(1j * np.concatenate([[0.0], np.cumsum(phi)])))


@dataclass(frozen=True)
class DriveStep:
    """A square displacement pulse of angle ``theta`` with tone phases ``phases``."""
    theta: float
    phases: Tuple[float, ...]


@dataclass(frozen=True)
class FrameStep:
    """A virtual SNAP gate."""
    phases: Tuple[float, ...]


Step = Union[DriveStep, FrameStep]


def pulse_steps(pulse: PulseParams, convention: PulseConvention = DEFAULT_CONVENTION) -> List[Step]:
    """Steps of one pulse, in time order, under ``convention``."""
    phases = tuple(convention.phase_sign * p for p in pulse.phases)
    theta = convention.theta_scale * pulse.theta
    if convention.phase_model == 'tone':
        return [DriveStep(theta, phases)]
    drive = DriveStep(theta, (0.0,) * len(phases))
    if convention.phase_model == 'frame':
        return [drive, FrameStep(phases)]
    return [FrameStep(phases), drive]


def pulse_schedule(seq: PulseSequence, convention: PulseConvention = DEFAULT_CONVENTION) -> List[Step]:
    """Steps of a whole sequence in time order."""
    pulses = seq.pulses if convention.order == 'forward' else seq.pulses[::-1]
    return [step for pulse in pulses for step in pulse_steps(pulse, convention)]


def step_unitary(d: int, step: Step) -> np.ndarray:
    """Exact unitary of one schedule step."""
    if isinstance(step, FrameStep):
        return snap(d, step.phases)
    return propagate(generator(d, step.phases), step.theta)


def pulse_unitary(d: int, pulse: PulseParams,
                  convention: PulseConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Unitary of one pulse under a table-reading convention."""
    return reduce(lambda acc, s: step_unitary(d, s) @ acc, pulse_steps(pulse, convention),
                  np.eye(d, dtype=complex))


def compose(seq: PulseSequence, convention: PulseConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Return D_n ... D_2 D_1 for the sequence; the empty sequence gives the identity."""
    return reduce(lambda acc, s: step_unitary(seq.d, s) @ acc, pulse_schedule(seq, convention),
                  np.eye(seq.d, dtype=complex))


def physical_drive(step: DriveStep) -> DriveStep:
    """Rewrite a negative-angle drive as a positive angle about the opposite axis."""
    if step.theta >= 0:
        return step
    return DriveStep(-step.theta, tuple(p + np.pi for p in step.phases))


def drive_duration(step: DriveStep, tones: ToneSet) -> float:
    """Duration in ms of a drive step at the nominal Rabi scale of ``tones``."""
    return pulse_duration(step.theta, tones.nominal_omega)


def drive_propagator(step: DriveStep, tones: ToneSet) -> np.ndarray:
    """Propagator of one square pulse under possibly miscalibrated tones."""
    drive = physical_drive(step)
    return propagate(rotating_hamiltonian(tones, drive.phases), drive_duration(drive, tones))


def evolve_nonideal(seq: PulseSequence, tones: ToneSet,
                    convention: PulseConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Product of square-pulse propagators exp(-i H_rot(tones, phi_n) t_n) in time order.

    Each pulse lasts |theta_n| / (2 Omega), with Omega the nominal scale of the
    tones, so ideal tones without detuning reproduce ``compose``. Frame steps
    are applied exactly.
    """
    if tones.d != seq.d:
        raise DimensionMismatchError(f'Tones are for d={tones.d}, sequence for d={seq.d}')
    result = np.eye(seq.d, dtype=complex)
    for step in pulse_schedule(seq, convention):
        if isinstance(step, FrameStep):
            result = snap(seq.d, step.phases) @ result
        else:
            result = drive_propagator(step, tones) @ result
    return result


@dataclass(frozen=True, eq=False)
class GateBlock:
    """An exact unitary executed as one timed block.

    Used to run analytic gates through the noisy simulator: the block evolves
    under the generator H with exp(-i H duration) = matrix.

    Attributes:
        matrix: Target unitary.
        duration: Block duration in ms.
        label: Free-form name.
    """
    matrix: np.ndarray
    duration: float
    label: str = ''

    def __post_init__(self):
        matrix = as_square_matrix(self.matrix, 'Gate block')
        if not is_unitary(matrix):
            raise ValueError(f'Gate block {self.label!r} is not unitary')
        if self.duration < 0:
            raise ValueError(f'Gate block duration must be non-negative, got {self.duration}')
        object.__setattr__(self, 'matrix', matrix)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def hamiltonian(self) -> np.ndarray:
        """Generator in angular kHz realizing the block over its duration."""
        return unitary_log_generator(self.matrix, self.duration)


def blocks_unitary(blocks: Sequence[GateBlock], d: Optional[int] = None) -> np.ndarray:
    """Product of block matrices in time order."""
    size = d if d is not None else blocks[0].d
    return reduce(lambda acc, b: b.matrix @ acc, blocks, np.eye(size, dtype=complex))
