"""Drive-amplitude calibration against averaged Clifford sequences.

Amplitudes are handled in normalized form: each coupling's amplitude divided
by its ideal spin-rotation value, so the ideal calibration is all ones.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from control.gates import compose, evolve_nonideal
from control.tones import PulseSequence, ToneSet, ideal_amplitudes
from noise.benchmarking import random_clifford_sequence
from noise.clifford import compile_cliffords
from numerics.errors import DimensionMismatchError
from numerics.random import task_rng

logger = logging.getLogger(__name__)

NM_XATOL = 1e-6
NM_FATOL = 1e-10
NM_MAX_ITERS = 2000
INITIAL_SIMPLEX_SCALE = 0.05


@dataclass(frozen=True, eq=False)
class CalibrationProblem:
    """A simulated miscalibrated drive.

    Attributes:
        d: Qudit dimension.
        omega: Nominal Rabi scale in angular kHz; sets pulse timings.
        true_amplitudes: Normalized amplitudes at which the device realizes
            ideal rotations.
        start_amplitudes: Normalized starting point of the search.
        sequences: Compiled Clifford sequences averaged by the objective.
        bounds: (low, high) per amplitude, normalized.
    """
    d: int
    omega: float
    true_amplitudes: Tuple[float, ...]
    start_amplitudes: Tuple[float, ...]
    sequences: Tuple[PulseSequence, ...]
    bounds: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'true_amplitudes', tuple(float(a) for a in self.true_amplitudes))
        object.__setattr__(self, 'start_amplitudes', tuple(float(a) for a in self.start_amplitudes))
        object.__setattr__(self, 'sequences', tuple(self.sequences))
        if not self.bounds:
            object.__setattr__(self, 'bounds', ((0.5, 1.5),) * (self.d - 1))
        self.validate()

    def validate(self) -> None:
        n = self.d - 1
        for name in ('true_amplitudes', 'start_amplitudes', 'bounds'):
            if len(getattr(self, name)) != n:
                raise DimensionMismatchError(f'{name} needs {n} entries for d={self.d}')
        if not self.omega > 0:
            raise ValueError(f'Rabi scale must be positive, got {self.omega}')
        for value, (low, high) in zip(self.start_amplitudes, self.bounds):
            if not low < high:
                raise ValueError(f'Empty bound ({low}, {high})')
            if not low <= value <= high:
                raise ValueError(f'Start amplitude {value} outside bounds ({low}, {high})')
        for seq in self.sequences:
            if seq.d != self.d:
                raise DimensionMismatchError(f'Sequence for d={seq.d} in a d={self.d} problem')

    @classmethod
    def from_rb(cls, d: int, omega: float, n_sequences: int = 4, length: int = 10,
                seed: int = 0, perturbation: float = 0.1,
                true_amplitudes: Optional[Sequence[float]] = None) -> 'CalibrationProblem':
        """Problem with random inverted Clifford sequences and a uniform start offset."""
        true = tuple(true_amplitudes) if true_amplitudes is not None else (1.0,) * (d - 1)
        sequences = tuple(
            compile_cliffords(random_clifford_sequence(length, task_rng(seed, s)), d)[0]
            for s in range(n_sequences))
        start = tuple((1.0 + perturbation) * a for a in true)
        return cls(d=d, omega=omega, true_amplitudes=true, start_amplitudes=start,
                   sequences=sequences)

    def device_tones(self, amplitudes: Sequence[float]) -> ToneSet:
        """Tones the device actually produces for normalized settings ``amplitudes``."""
        gains = np.asarray(amplitudes) / np.asarray(self.true_amplitudes)
        return ToneSet(d=self.d, amplitudes=tuple(gains * ideal_amplitudes(self.d, self.omega)),
                       nominal_omega=self.omega)

    def sequence_fidelities(self, amplitudes: Sequence[float]) -> np.ndarray:
        """Overlap of each sequence's output with its ideal output, starting from |0>."""
        tones = self.device_tones(amplitudes)
        values = []
        for seq in self.sequences:
            ideal = compose(seq)[:, 0]
            actual = evolve_nonideal(seq, tones)[:, 0]
            values.append(abs(np.vdot(ideal, actual)) ** 2)
        return np.asarray(values)

    def objective(self, amplitudes: Sequence[float]) -> float:
        """Negated mean sequence fidelity."""
        return -float(np.mean(self.sequence_fidelities(amplitudes)))


@dataclass(frozen=True, eq=False)
class Landscape:
    """Sequence fidelity over a grid of two normalized amplitudes.

    ``per_sequence`` has shape (n_sequences, len(x), len(y)).
    """
    axes: Tuple[int, int]
    x: np.ndarray
    y: np.ndarray
    per_sequence: np.ndarray
    averaged: np.ndarray

    def argmax(self) -> Optional[Tuple[float, float]]:
        """Grid point of the largest averaged fidelity, or None for an empty grid."""
        if self.averaged.size == 0:
            return None
        i, j = np.unravel_index(np.argmax(self.averaged), self.averaged.shape)
        return float(self.x[i]), float(self.y[j])

    def rows(self) -> List[Tuple[float, ...]]:
        """Dense grid rows: x value then one column per y value."""
        return [(float(xv), *self.averaged[i].tolist()) for i, xv in enumerate(self.x)]


def calibration_landscape(problem: CalibrationProblem, axes: Tuple[int, int],
                          x_values: Sequence[float], y_values: Sequence[float]) -> Landscape:
    """Evaluate every sequence's fidelity over a grid of two amplitudes.

    The other amplitudes stay at their true values.
    """
    i, j = axes
    if i == j or not (0 <= i < problem.d - 1 and 0 <= j < problem.d - 1):
        raise ValueError(f'Axes must be two distinct couplings in 0..{problem.d - 2}, got {axes}')
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    grid = np.zeros((len(problem.sequences), x.size, y.size))
    point = np.array(problem.true_amplitudes)
    for a, xv in enumerate(x):
        for b, yv in enumerate(y):
            point[i], point[j] = xv, yv
            grid[:, a, b] = problem.sequence_fidelities(point)
    averaged = grid.mean(axis=0) if len(problem.sequences) else np.zeros((x.size, y.size))
    return Landscape(axes=(i, j), x=x, y=y, per_sequence=grid, averaged=averaged)


@dataclass(frozen=True, eq=False)
class NelderMeadResult:
    """Best vertex, its objective and the best objective after each iteration."""
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    trace: Tuple[float, ...] = field(default=(), repr=False)


def nelder_mead(objective: Callable[[np.ndarray], float], start: Sequence[float],
                bounds: Optional[Sequence[Tuple[float, float]]] = None,
                max_iters: int = NM_MAX_ITERS, xatol: float = NM_XATOL,
                fatol: float = NM_FATOL, scale: float = INITIAL_SIMPLEX_SCALE) -> NelderMeadResult:
    """Minimize with scipy's standard Nelder-Mead (coefficients 1, 2, 0.5, 0.5).

    Vertices are clipped to ``bounds``. The initial simplex steps each
    coordinate by ``scale`` of its value (or ``scale`` itself at zero). A run
    that hits ``max_iters`` returns its best vertex with ``converged=False``.
    """
    x0 = np.asarray(start, dtype=float)
    simplex = [x0]
    for k in range(x0.size):
        vertex = x0.copy()
        vertex[k] = vertex[k] * (1 + scale) if vertex[k] != 0 else scale
        simplex.append(vertex)
    simplex = np.asarray(simplex)
    if bounds is not None:
        low, high = np.asarray(bounds, dtype=float).T
        simplex = np.clip(simplex, low, high)
    trace = [float(objective(x0))]
    result = minimize(objective, x0, method='Nelder-Mead', bounds=bounds,
                      callback=lambda xk: trace.append(float(objective(xk))),
                      options={'maxiter': max_iters, 'xatol': xatol, 'fatol': fatol,
                               'initial_simplex': simplex, 'adaptive': False})
    converged = bool(result.success)
    if not converged:
        logger.warning('Nelder-Mead stopped without converging: %s', result.message)
    return NelderMeadResult(x=np.asarray(result.x), fun=float(result.fun), iterations=int(result.nit),
                            converged=converged, trace=tuple(trace))


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    recovered: np.ndarray
    true: np.ndarray
    optimizer: NelderMeadResult

    @property
    def rel_error(self) -> np.ndarray:
        return np.abs(self.recovered - self.true) / np.abs(self.true)

    def to_record(self) -> dict:
        return {'recovered': self.recovered.tolist(), 'true': self.true.tolist(),
                'rel_error': self.rel_error.tolist(), 'iterations': self.optimizer.iterations,
                'converged': self.optimizer.converged, 'objective': self.optimizer.fun}


def nelder_mead_calibrate(problem: CalibrationProblem, max_iters: int = NM_MAX_ITERS) -> CalibrationResult:
    """Recover the true amplitudes by maximizing the averaged sequence fidelity."""
    result = nelder_mead(problem.objective, problem.start_amplitudes, problem.bounds, max_iters)
    calibration = CalibrationResult(recovered=result.x, true=np.asarray(problem.true_amplitudes),
                                    optimizer=result)
    logger.info('Calibration finished after %d iterations, max relative error %.3e',
                result.iterations, calibration.rel_error.max())
    return calibration
