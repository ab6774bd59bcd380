"""Synthesis targets, the infidelity loss and its finite-difference gradient."""

import logging
from dataclasses import dataclass
from typing import ClassVar, List, Tuple

import numpy as np

from control.gates import compose, pulse_unitary
from control.tones import DEFAULT_CONVENTION, PulseConvention, PulseParams, PulseSequence
from numerics.errors import DimensionMismatchError
from numerics.linalg import as_square_matrix, as_state, basis_state, is_unitary

logger = logging.getLogger(__name__)

DEFAULT_GRAD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """What a pulse sequence should implement.

    Attributes:
        kind: 'full-unitary', 'state-map' (|0> to ``target``) or
            'diagonal-up-to-phase'.
        target: Unitary matrix, or state vector for 'state-map'.
        d: Qudit dimension.
    """
    KINDS: ClassVar[Tuple[str, ...]] = ('full-unitary', 'state-map', 'diagonal-up-to-phase')
    kind: str
    target: np.ndarray
    d: int

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f'Target kind must be one of {self.KINDS}, got {self.kind!r}')
        if self.kind == 'state-map':
            state = as_state(self.target)
            if state.size != self.d:
                raise DimensionMismatchError(f'Target state has length {state.size}, expected {self.d}')
            object.__setattr__(self, 'target', state)
            return
        matrix = as_square_matrix(self.target, 'Target')
        if matrix.shape[0] != self.d:
            raise DimensionMismatchError(f'Target is {matrix.shape[0]}x{matrix.shape[0]}, expected d={self.d}')
        if not is_unitary(matrix):
            raise ValueError('Target matrix is not unitary')
        if self.kind == 'diagonal-up-to-phase' and not np.allclose(matrix, np.diag(np.diag(matrix))):
            raise ValueError('Diagonal target has off-diagonal entries')
        object.__setattr__(self, 'target', matrix)

    @classmethod
    def unitary(cls, matrix) -> 'TargetSpec':
        matrix = as_square_matrix(matrix, 'Target')
        return cls(kind='full-unitary', target=matrix, d=matrix.shape[0])

    @classmethod
    def state(cls, vector) -> 'TargetSpec':
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(kind='state-map', target=vector, d=vector.size)

    @classmethod
    def diagonal(cls, matrix) -> 'TargetSpec':
        matrix = as_square_matrix(matrix, 'Target')
        return cls(kind='diagonal-up-to-phase', target=matrix, d=matrix.shape[0])

    @property
    def is_state(self) -> bool:
        return self.kind == 'state-map'


def _check_dims(seq: PulseSequence, target: TargetSpec) -> None:
    if seq.d != target.d:
        raise DimensionMismatchError(f'Sequence is for d={seq.d}, target for d={target.d}')


def unitary_infidelity(unitary: np.ndarray, target: TargetSpec) -> float:
    """Loss of a realized unitary against ``target``."""
    if target.is_state:
        overlap = np.vdot(target.target, unitary[:, 0])
        return float(max(0.0, 1.0 - abs(overlap) ** 2))
    overlap = np.trace(target.target.conj().T @ unitary)
    return float(max(0.0, 1.0 - abs(overlap) ** 2 / target.d ** 2))


def infidelity(seq: PulseSequence, target: TargetSpec,
               convention: PulseConvention = DEFAULT_CONVENTION) -> float:
    """Infidelity of ``compose(seq, convention)`` against ``target``.

    Full-unitary and diagonal targets use 1 - |Tr(Ut^dagger U)|^2 / d^2,
    which is blind to global phase; state maps use 1 - |<psi_t|U|0>|^2.

    Raises:
        DimensionMismatchError: If the sequence and target dimensions differ.
    """
    _check_dims(seq, target)
    return unitary_infidelity(compose(seq, convention), target)


class _SplitProducts:
    """Prefix and suffix products of a sequence's pulse unitaries.

    Replacing the unitary of one pulse only needs the product of the pulses
    applied before it and after it, so each finite-difference evaluation
    costs one pulse propagator and one contraction.
    """

    def __init__(self, seq: PulseSequence, target: TargetSpec, convention: PulseConvention):
        self.d = seq.d
        self.target = target
        self.convention = convention
        n = len(seq.pulses)
        # Position of each listed pulse in application order.
        self.order = list(range(n)) if convention.order == 'forward' else list(range(n))[::-1]
        applied = [pulse_unitary(self.d, seq.pulses[i], convention) for i in self.order]
        identity = np.eye(self.d, dtype=complex)
        prefix: List[np.ndarray] = [identity]
        for u in applied[:-1]:
            prefix.append(u @ prefix[-1])
        suffix: List[np.ndarray] = [identity]
        for u in applied[:0:-1]:
            suffix.append(suffix[-1] @ u)
        suffix.reverse()
        self.position = {pulse: slot for slot, pulse in enumerate(self.order)}
        if target.is_state:
            zero = basis_state(self.d, 0)
            bra = target.target.conj()
            self.left = [bra @ s for s in suffix]
            self.right = [p @ zero for p in prefix]
        else:
            dagger = target.target.conj().T
            # Tr(Ut^dagger S U P) = sum((P Ut^dagger S) * U^T)
            self.contractions = [p @ dagger @ s for p, s in zip(prefix, suffix)]

    def loss(self, pulse_index: int, pulse: PulseParams) -> float:
        slot = self.position[pulse_index]
        u = pulse_unitary(self.d, pulse, self.convention)
        if self.target.is_state:
            overlap = self.left[slot] @ u @ self.right[slot]
            return float(max(0.0, 1.0 - abs(overlap) ** 2))
        overlap = np.sum(self.contractions[slot] * u.T)
        return float(max(0.0, 1.0 - abs(overlap) ** 2 / self.d ** 2))


def _shifted(pulse: PulseParams, component: int, delta: float) -> PulseParams:
    values = np.array([pulse.theta, *pulse.phases])
    values[component] += delta
    return PulseParams(theta=values[0], phases=tuple(values[1:]))


def gradient(seq: PulseSequence, target: TargetSpec, grad_step: float = DEFAULT_GRAD_STEP,
             convention: PulseConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Central finite-difference gradient of ``infidelity``.

    Components follow ``PulseSequence.to_vector``: theta then the d-1 phases
    of each pulse, in listed order.

    Raises:
        DimensionMismatchError: If the sequence and target dimensions differ.
        ValueError: If ``grad_step`` is not positive.
    """
    _check_dims(seq, target)
    if not grad_step > 0:
        raise ValueError(f'grad_step must be positive, got {grad_step}')
    if not seq.pulses:
        return np.zeros(0)
    products = _SplitProducts(seq, target, convention)
    grad = np.zeros(len(seq.pulses) * seq.d)
    for n, pulse in enumerate(seq.pulses):
        for k in range(seq.d):
            plus = products.loss(n, _shifted(pulse, k, grad_step))
            minus = products.loss(n, _shifted(pulse, k, -grad_step))
            grad[n * seq.d + k] = (plus - minus) / (2.0 * grad_step)
    return grad
