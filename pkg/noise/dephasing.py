"""Field-noise dephasing: the Lindblad model and its integrator.

The master equation integrated here is

    drho/dt = -i [H, rho] + gamma (L rho L^dagger - 1/2 {L^dagger L, rho})

with L = diag(sensitivities). For diagonal L the dissipator acts entrywise:
coherence (j, k) decays at rate gamma (s_j - s_k)^2 / 2 and populations are
untouched.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import ClassVar, Optional, Sequence, Tuple, Union

import numpy as np

from control.gates import (FrameStep, GateBlock, drive_duration, drive_propagator,
    physical_drive, pulse_schedule, rotating_hamiltonian, snap)
from control.tones import DEFAULT_CONVENTION, PulseConvention, PulseSequence, ToneSet
from numerics.errors import (ContractViolationError, DegenerateSpectrumError,
    DimensionMismatchError, IntegrationError)
from numerics.linalg import as_square_matrix, is_diagonal, is_hermitian, propagate
from units_config import Quantity
from utils.unit_utils import canonical_magnitude, to_canonical

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PULSE = 200
TRACE_DRIFT_LIMIT = 1e-6
STATE_TOL = 1e-8
MIN_EIGENVALUE = -1e-7
# RK4 is stable for |lambda dt| up to about 2.8; the default step stays well inside.
STABLE_STEP = 0.5


def _sensitivity_vector(values) -> Tuple[float, ...]:
    if isinstance(values, Quantity):
        values = np.atleast_1d(canonical_magnitude(values, 'sensitivity'))
    result = tuple(to_canonical(float(v), 'sensitivity') for v in np.atleast_1d(values))
    if len(result) < 2:
        raise ValueError(f'Need a sensitivity for each of at least two levels, got {result}')
    return result


@dataclass(frozen=True)
class DephasingModel:
    """Dephasing by a fluctuating field coupling through level sensitivities.

    Attributes:
        sensitivities: Field sensitivity of each level in MHz/G.
        gamma: Rate scale in 1/ms multiplying the dissipator.
        t2_reference: Coherence time in ms the rate was normalized to, if any.
        normalization: Which coherence ``t2_reference`` refers to: 'slowest'
            (the slowest-decaying level pair) or 'sensitivity_sum' (a
            coherence whose sensitivity is the sum of |s_k|).
    """
    NORMALIZATIONS: ClassVar[Tuple[str, ...]] = ('slowest', 'sensitivity_sum')
    sensitivities: Tuple[float, ...]
    gamma: float = 0.0
    t2_reference: Optional[float] = None
    normalization: str = 'slowest'

    def __post_init__(self):
        object.__setattr__(self, 'sensitivities', _sensitivity_vector(self.sensitivities))
        object.__setattr__(self, 'gamma', to_canonical(self.gamma, 'rate'))
        if self.t2_reference is not None:
            object.__setattr__(self, 't2_reference', to_canonical(self.t2_reference, 'time'))
        self.validate()

    def validate(self) -> None:
        if self.gamma < 0:
            raise ValueError(f'Dephasing rate gamma must be non-negative, got {self.gamma}')
        if self.normalization not in self.NORMALIZATIONS:
            raise ValueError(f'normalization must be one of {self.NORMALIZATIONS}, '
                             f'got {self.normalization!r}')
        if self.t2_reference is not None and not self.t2_reference > 0:
            raise ValueError(f't2_reference must be positive, got {self.t2_reference}')

    @property
    def d(self) -> int:
        return len(self.sensitivities)

    @classmethod
    def noiseless(cls, d: int) -> 'DephasingModel':
        return cls(sensitivities=(0.0,) * d)

    @classmethod
    def from_t2(cls, sensitivities, t2: Union[Quantity, float],
                normalization: str = 'slowest') -> 'DephasingModel':
        """Model whose reference coherence decays as exp(-t / t2).

        Raises:
            DegenerateSpectrumError: If every level has the same sensitivity
                (no coherence dephases).
        """
        s = np.asarray(_sensitivity_vector(sensitivities))
        t2 = to_canonical(t2, 'time')
        if not t2 > 0:
            raise ValueError(f'T2 must be positive, got {t2}')
        if normalization == 'slowest':
            gaps = np.abs(s[:, None] - s[None, :])
            gaps = gaps[gaps > 0]
            scale = gaps.min() if gaps.size else 0.0
        elif normalization == 'sensitivity_sum':
            scale = float(np.sum(np.abs(s)))
        else:
            raise ValueError(f'normalization must be one of {cls.NORMALIZATIONS}, got {normalization!r}')
        if scale == 0.0:
            raise DegenerateSpectrumError('All sensitivities are equal; nothing to normalize')
        gamma = 2.0 / (t2 * scale ** 2)
        return cls(sensitivities=tuple(s), gamma=gamma, t2_reference=t2, normalization=normalization)

    def scaled(self, factor: float) -> 'DephasingModel':
        """Same model with the rate multiplied by ``factor``."""
        if factor < 0:
            raise ValueError(f'Scale factor must be non-negative, got {factor}')
        return replace(self, gamma=self.gamma * factor, t2_reference=None)

    def lindblad_operator(self) -> np.ndarray:
        return np.diag(np.asarray(self.sensitivities, dtype=complex))

    def coherence_rates(self) -> np.ndarray:
        """Decay rate in 1/ms of each coherence rho_jk."""
        s = np.asarray(self.sensitivities)
        return 0.5 * self.gamma * (s[:, None] - s[None, :]) ** 2


def _check_density_matrix(rho: np.ndarray) -> np.ndarray:
    r = as_square_matrix(rho, 'density matrix')
    if not is_hermitian(r, STATE_TOL):
        raise ContractViolationError('Density matrix must be Hermitian')
    if abs(np.trace(r) - 1.0) > STATE_TOL:
        raise ContractViolationError(f'Density matrix must have unit trace, got {np.trace(r).real}')
    if np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() < MIN_EIGENVALUE:
        raise ContractViolationError('Density matrix must be positive semidefinite')
    return r.astype(complex)


def lindblad_evolve(rho, hamiltonian, lindblad, gamma: float, duration: float,
                    dt: Optional[float] = None) -> np.ndarray:
    """Integrate the dephasing master equation for ``duration`` ms.

    Fixed-step fourth-order Runge-Kutta; the state is symmetrized after every
    step and never renormalized. With gamma = 0 the exact unitary propagator
    is used instead.

    Args:
        rho: Initial density matrix.
        hamiltonian: Hermitian generator in angular kHz.
        lindblad: Diagonal jump operator.
        gamma: Rate scale in 1/ms.
        duration: Evolution time in ms.
        dt: Step in ms. Defaults to duration/200, shortened if needed to keep
            the step inside the stable region.

    Raises:
        ContractViolationError: If rho is not a density matrix, H is not
            Hermitian or L is not diagonal.
        IntegrationError: If dt is not positive or the trace drifts by more
            than 1e-6.
    """
    r = _check_density_matrix(rho)
    h = as_square_matrix(hamiltonian, 'Hamiltonian')
    l_op = as_square_matrix(lindblad, 'Lindblad operator')
    if h.shape != r.shape or l_op.shape != r.shape:
        raise DimensionMismatchError(f'Shapes differ: rho {r.shape}, H {h.shape}, L {l_op.shape}')
    if not is_hermitian(h):
        raise ContractViolationError('Hamiltonian must be Hermitian')
    if not is_diagonal(l_op):
        raise ContractViolationError('Lindblad operator must be diagonal')
    if gamma < 0:
        raise ValueError(f'gamma must be non-negative, got {gamma}')
    if duration < 0:
        raise ValueError(f'Duration must be non-negative, got {duration}')
    if dt is not None and not dt > 0:
        raise IntegrationError(f'Integration step must be positive, got {dt}')
    if duration == 0:
        return r.copy()
    if gamma == 0:
        u = propagate(h, duration)
        return u @ r @ u.conj().T

    l_diag = np.diag(l_op)
    weight = np.abs(l_diag) ** 2
    damping = gamma * (np.outer(l_diag, l_diag.conj()) - 0.5 * (weight[:, None] + weight[None, :]))
    h = 0.5 * (h + h.conj().T)

    def rhs(state: np.ndarray) -> np.ndarray:
        return -1j * (h @ state - state @ h) + damping * state

    if dt is None:
        step = duration / DEFAULT_STEPS_PER_PULSE
        bound = 2.0 * np.linalg.norm(h, 2) + np.abs(damping).max()
        if bound > 0:
            step = min(step, STABLE_STEP / bound)
    else:
        step = dt
    n_steps = max(1, math.ceil(duration / step - 1e-9))
    step = duration / n_steps
    start_trace = np.trace(r).real
    state = r
    for _ in range(n_steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * step * k1)
        k3 = rhs(state + 0.5 * step * k2)
        k4 = rhs(state + step * k3)
        state = state + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        state = 0.5 * (state + state.conj().T)
    drift = abs(np.trace(state).real - start_trace)
    if not np.all(np.isfinite(state)) or drift > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f'Trace drifted by {drift:.3e} over {n_steps} steps of {step:.3e} ms')
    logger.debug('Integrated %.4g ms in %d steps', duration, n_steps)
    return state


def _check_model(model: DephasingModel, d: int) -> None:
    if model.d != d:
        raise DimensionMismatchError(f'Dephasing model is for d={model.d}, state for d={d}')


def noisy_sequence(rho0, seq: PulseSequence, tones: ToneSet, model: DephasingModel,
                   convention: PulseConvention = DEFAULT_CONVENTION,
                   dt: Optional[float] = None) -> np.ndarray:
    """Run a pulse sequence under dephasing.

    Each drive step evolves for |theta|/(2 Omega) under the rotating-frame
    Hamiltonian of ``tones``; frame steps are applied exactly and take no time.
    """
    rho = _check_density_matrix(rho0)
    if tones.d != seq.d or rho.shape[0] != seq.d:
        raise DimensionMismatchError(f'Sequence d={seq.d}, tones d={tones.d}, state d={rho.shape[0]}')
    _check_model(model, seq.d)
    lindblad = model.lindblad_operator()
    for step in pulse_schedule(seq, convention):
        if isinstance(step, FrameStep):
            s = snap(seq.d, step.phases)
            rho = s @ rho @ s.conj().T
            continue
        drive = physical_drive(step)
        duration = drive_duration(drive, tones)
        if model.gamma == 0:
            u = drive_propagator(drive, tones)
            rho = u @ rho @ u.conj().T
        else:
            rho = lindblad_evolve(rho, rotating_hamiltonian(tones, drive.phases), lindblad,
                                  model.gamma, duration, dt)
    return rho


def noisy_blocks(rho0, blocks: Sequence[GateBlock], model: DephasingModel,
                 dt: Optional[float] = None) -> np.ndarray:
    """Run timed exact gates under dephasing; zero-duration blocks act instantly."""
    rho = _check_density_matrix(rho0)
    _check_model(model, rho.shape[0])
    lindblad = model.lindblad_operator()
    for block in blocks:
        if block.d != rho.shape[0]:
            raise DimensionMismatchError(f'Block {block.label!r} is for d={block.d}')
        if block.duration == 0 or model.gamma == 0:
            rho = block.matrix @ rho @ block.matrix.conj().T
        else:
            rho = lindblad_evolve(rho, block.hamiltonian(), lindblad, model.gamma, block.duration, dt)
    return rho
