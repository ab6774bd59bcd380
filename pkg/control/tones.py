"""Drive tones, pulse parameters and pulse sequences.

Units: amplitudes and detunings are angular frequencies in rad/ms (angular
kHz); rotation angles and phases are in radians; durations are in ms.
"""

import itertools
import math
from dataclasses import dataclass, replace
from typing import ClassVar, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from numerics.errors import DimensionMismatchError, InvalidDimensionError
from units_config import Quantity
from utils.unit_utils import to_angular_khz

# The ideal amplitudes put Omega*sqrt(k(d-k)) on the off-diagonal where Jx has
# sqrt(k(d-k))/2, so H_rot(phi=0) = GENERATOR_SCALE * Omega * Jx.
GENERATOR_SCALE = 2.0


def _check_dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f'Dimension must be an integer, got {d!r}')
    if d < 2:
        raise InvalidDimensionError(f'Dimension must be at least 2, got {d}')
    return int(d)


def _finite_tuple(values: Iterable[float], name: str) -> Tuple[float, ...]:
    result = tuple(float(v) for v in values)
    if not all(math.isfinite(v) for v in result):
        raise ValueError(f'{name} must be finite, got {result}')
    return result


def ideal_amplitudes(d: int, omega: Union[Quantity, float]) -> np.ndarray:
    """Return the spin-rotation amplitudes Omega*sqrt(k(d-k)) for k = 1..d-1.

    Args:
        d: Qudit dimension.
        omega: Rabi scale, angular kHz as a float or a frequency Quantity.

    Examples:
        >>> ideal_amplitudes(3, 1.0)
        array([1.41421356, 1.41421356])
    """
    d = _check_dimension(d)
    k = np.arange(1, d)
    return to_angular_khz(omega) * np.sqrt(k * (d - k))


def pulse_duration(theta: float, omega: float) -> float:
    """Duration in ms of a displacement pulse of angle ``theta`` at Rabi scale ``omega``."""
    if omega <= 0:
        raise ValueError(f'Rabi scale must be positive, got {omega}')
    return abs(theta) / (GENERATOR_SCALE * omega)


@dataclass(frozen=True)
class ToneSet:
    """Per-coupling drive amplitudes and detunings.

    Attributes:
        d: Qudit dimension.
        amplitudes: Omega_k for couplings k = 0..d-2 (angular kHz).
        detunings: delta_k for couplings k = 0..d-2 (angular kHz).
        nominal_omega: Rabi scale the pulse timings are derived from. Defaults
            to the least-squares fit of ``amplitudes`` to the ideal profile.
    """
    d: int
    amplitudes: Tuple[float, ...]
    detunings: Tuple[float, ...] = ()
    nominal_omega: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'd', _check_dimension(self.d))
        object.__setattr__(self, 'amplitudes', _finite_tuple(self.amplitudes, 'Amplitudes'))
        detunings = self.detunings if len(self.detunings) else (0.0,) * (self.d - 1)
        object.__setattr__(self, 'detunings', _finite_tuple(detunings, 'Detunings'))
        self._check_lengths()
        if self.nominal_omega is None:
            profile = ideal_amplitudes(self.d, 1.0)
            fitted = float(np.dot(profile, self.amplitudes) / np.dot(profile, profile))
            object.__setattr__(self, 'nominal_omega', fitted)
        self.validate()

    def validate(self) -> None:
        """Validate lengths and signs.

        Raises:
            DimensionMismatchError: If a vector does not have d-1 entries.
            ValueError: If an amplitude is negative or the nominal scale is not positive.
        """
        self._check_lengths()
        if any(a < 0 for a in self.amplitudes):
            raise ValueError(f'Amplitudes must be non-negative, got {self.amplitudes}')
        if not math.isfinite(self.nominal_omega) or self.nominal_omega <= 0:
            raise ValueError(f'Nominal Rabi scale must be positive, got {self.nominal_omega}')

    def _check_lengths(self) -> None:
        for name in ('amplitudes', 'detunings'):
            if len(getattr(self, name)) != self.d - 1:
                raise DimensionMismatchError(
                    f'{name} must have {self.d - 1} entries for d={self.d}, got {len(getattr(self, name))}')

    @classmethod
    def ideal(cls, d: int, omega: Union[Quantity, float],
              detunings: Optional[Sequence[float]] = None) -> 'ToneSet':
        """Tones with the spin-rotation amplitude profile at scale ``omega``."""
        scale = to_angular_khz(omega)
        return cls(d=d, amplitudes=tuple(ideal_amplitudes(d, scale)),
                   detunings=tuple(detunings) if detunings is not None else (),
                   nominal_omega=scale)

    def with_amplitudes(self, amplitudes: Sequence[float]) -> 'ToneSet':
        """Copy with new amplitudes and the same nominal timing scale."""
        return replace(self, amplitudes=tuple(amplitudes))

    def with_detunings(self, detunings: Sequence[float]) -> 'ToneSet':
        """Copy with new detunings."""
        return replace(self, detunings=tuple(detunings))

    @property
    def relative_amplitudes(self) -> np.ndarray:
        """Amplitudes divided by their ideal values at the nominal scale."""
        return np.array(self.amplitudes) / ideal_amplitudes(self.d, self.nominal_omega)


@dataclass(frozen=True)
class PulseParams:
    """One displacement pulse: rotation angle and per-tone phases (radians).

    Phases are kept exactly as given; they are never reduced mod 2*pi.
    """
    theta: float
    phases: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'theta', float(self.theta))
        object.__setattr__(self, 'phases', _finite_tuple(self.phases, 'Pulse phases'))
        if not math.isfinite(self.theta):
            raise ValueError(f'Pulse angle must be finite, got {self.theta}')
        if len(self.phases) < 1:
            raise InvalidDimensionError('A pulse needs at least one tone phase')

    @property
    def d(self) -> int:
        """Qudit dimension implied by the number of phases."""
        return len(self.phases) + 1

    @classmethod
    def uniform(cls, d: int, theta: float, phi: float = 0.0) -> 'PulseParams':
        """Pulse with every tone at the common phase ``phi``."""
        return cls(theta=theta, phases=(float(phi),) * (_check_dimension(d) - 1))

    def inverse(self) -> 'PulseParams':
        """Same axis, opposite angle."""
        return replace(self, theta=-self.theta)

    def display_phases(self) -> Tuple[float, ...]:
        """Phases wrapped to [-pi, pi) for display only."""
        return tuple((p + math.pi) % (2 * math.pi) - math.pi for p in self.phases)


@dataclass(frozen=True)
class PulseSequence:
    """Time-ordered displacement pulses; the first pulse is applied first."""
    d: int
    pulses: Tuple[PulseParams, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'd', _check_dimension(self.d))
        object.__setattr__(self, 'pulses', tuple(self.pulses))
        for n, pulse in enumerate(self.pulses):
            if pulse.d != self.d:
                raise DimensionMismatchError(
                    f'Pulse {n} has {len(pulse.phases)} phases, expected {self.d - 1}')

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def then(self, other: 'PulseSequence') -> 'PulseSequence':
        """This sequence followed by ``other``."""
        if other.d != self.d:
            raise DimensionMismatchError(f'Cannot join d={self.d} and d={other.d} sequences')
        return replace(self, pulses=self.pulses + other.pulses)

    def inverse(self) -> 'PulseSequence':
        """Sequence undoing this one."""
        return replace(self, pulses=tuple(p.inverse() for p in reversed(self.pulses)))

    def to_vector(self) -> np.ndarray:
        """Flatten to [theta_1, phi_1..., theta_2, phi_2..., ...]."""
        if not self.pulses:
            return np.zeros(0)
        return np.concatenate([[p.theta, *p.phases] for p in self.pulses])

    @classmethod
    def from_vector(cls, d: int, vector: Sequence[float]) -> 'PulseSequence':
        """Inverse of ``to_vector``."""
        values = np.asarray(vector, dtype=float)
        if values.size % d:
            raise DimensionMismatchError(f'Parameter vector of length {values.size} is not a multiple of {d}')
        pulses = [PulseParams(theta=chunk[0], phases=tuple(chunk[1:])) for chunk in values.reshape(-1, d)]
        return cls(d=d, pulses=tuple(pulses))

    def total_duration(self, omega: float) -> float:
        """Total drive time in ms at Rabi scale ``omega``."""
        return sum(pulse_duration(p.theta, omega) for p in self.pulses)


@dataclass(frozen=True)
class PulseConvention:
    """How a published pulse table maps onto displacement unitaries.

    Attributes:
        theta_scale: 1 if theta multiplies Jx, 2 if it multiplies the raw
            rotating-frame generator (2 Jx).
        order: 'forward' applies the first listed pulse first; 'reverse' the last.
        phase_model: 'tone' applies phases to the drive tones of each pulse;
            'frame' treats them as a virtual SNAP applied after the pulse and
            'frame_before' as a virtual SNAP applied before it.
        phase_sign: +1 or -1, applied to every phase.
    """
    ORDERS: ClassVar[Tuple[str, ...]] = ('forward', 'reverse')
    PHASE_MODELS: ClassVar[Tuple[str, ...]] = ('tone', 'frame', 'frame_before')
    theta_scale: float = 1.0
    order: str = 'forward'
    phase_model: str = 'tone'
    phase_sign: int = 1

    def __post_init__(self):
        if self.theta_scale not in (1, 2):
            raise ValueError(f'theta_scale must be 1 or 2, got {self.theta_scale}')
        if self.order not in self.ORDERS:
            raise ValueError(f'order must be one of {self.ORDERS}, got {self.order!r}')
        if self.phase_model not in self.PHASE_MODELS:
            raise ValueError(f'phase_model must be one of {self.PHASE_MODELS}, got {self.phase_model!r}')
        if self.phase_sign not in (1, -1):
            raise ValueError(f'phase_sign must be +1 or -1, got {self.phase_sign}')

    @property
    def name(self) -> str:
        sign = 'plus' if self.phase_sign > 0 else 'minus'
        return f'theta{int(self.theta_scale)}-{self.order}-{self.phase_model}-{sign}'

    @classmethod
    def grid(cls) -> List['PulseConvention']:
        """Every combination, with the library default first."""
        return [cls(theta_scale=s, order=o, phase_model=m, phase_sign=p)
                for s, o, m, p in itertools.product((1, 2), cls.ORDERS, cls.PHASE_MODELS, (1, -1))]

    @classmethod
    def from_name(cls, name: str) -> 'PulseConvention':
        """Parse a name produced by ``name``."""
        for convention in cls.grid():
            if convention.name == name:
                return convention
        raise ValueError(f'Unknown pulse convention {name!r}')


DEFAULT_CONVENTION = PulseConvention()
