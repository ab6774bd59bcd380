"""Randomized benchmarking with the embedded Clifford group."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from control.tones import PulseSequence, ToneSet
from noise.clifford import N_CLIFFORDS, compile_cliffords, inverse_index, mean_pulses_per_clifford
from noise.dephasing import DephasingModel, noisy_sequence
from numerics.errors import DimensionMismatchError, FitError
from numerics.linalg import basis_state, density_matrix
from numerics.random import check_seed, task_rng

logger = logging.getLogger(__name__)

MIN_FIT_LENGTHS = 3
FLAT_SURVIVAL = 1e-10


@dataclass(frozen=True)
class RBConfig:
    """Randomized benchmarking settings.

    Attributes:
        lengths: Clifford counts m, positive and strictly increasing.
        n_sequences: Random sequences per length.
        seed: Root seed; sequence s of length index i draws from (seed, i, s).
        include_inverse: Append the Clifford that undoes each sequence.
    """
    lengths: Tuple[int, ...] = (1, 5, 10, 20, 50)
    n_sequences: int = 10
    seed: int = 0
    include_inverse: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'lengths', tuple(int(m) for m in self.lengths))
        self.validate()

    def validate(self) -> None:
        if not self.lengths or any(m < 1 for m in self.lengths):
            raise ValueError(f'RB lengths must be positive, got {self.lengths}')
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError(f'RB lengths must be strictly increasing, got {self.lengths}')
        if self.n_sequences < 1:
            raise ValueError(f'n_sequences must be at least 1, got {self.n_sequences}')
        check_seed(self.seed)


@dataclass(frozen=True, eq=False)
class RBResult:
    """Survival data and the A p^m + B fit.

    ``pulse_fidelity`` converts the depolarizing parameter with
    p^(1/n_bar), n_bar being the mean number of pulses per Clifford.
    """
    lengths: Tuple[int, ...]
    survival: np.ndarray
    amplitude: float
    decay: float
    offset: float
    n_bar: float

    @property
    def mean_survival(self) -> np.ndarray:
        return self.survival.mean(axis=1)

    @property
    def stderr(self) -> np.ndarray:
        n = self.survival.shape[1]
        if n < 2:
            return np.zeros(len(self.lengths))
        return self.survival.std(axis=1, ddof=1) / math.sqrt(n)

    @property
    def pulse_fidelity(self) -> float:
        return float(self.decay ** (1.0 / self.n_bar))

    def rows(self) -> List[Tuple[int, float, float]]:
        return list(zip(self.lengths, self.mean_survival.tolist(), self.stderr.tolist()))

    def to_record(self) -> dict:
        return {'A': self.amplitude, 'p': self.decay, 'B': self.offset, 'n_bar': self.n_bar,
                'pulse_fidelity': self.pulse_fidelity}


def random_clifford_sequence(length: int, rng: np.random.Generator,
                             include_inverse: bool = True) -> List[int]:
    indices = [int(i) for i in rng.integers(0, N_CLIFFORDS, size=length)]
    if include_inverse:
        indices.append(inverse_index(indices))
    return indices


def rb_sequences(cfg: RBConfig, d: int) -> List[List[PulseSequence]]:
    """Compiled pulse sequences, indexed [length][sequence]."""
    result = []
    for i, m in enumerate(cfg.lengths):
        row = []
        for s in range(cfg.n_sequences):
            indices = random_clifford_sequence(m, task_rng(cfg.seed, i, s), cfg.include_inverse)
            row.append(compile_cliffords(indices, d)[0])
        result.append(row)
    return result


def survival(seq: PulseSequence, tones: ToneSet, model: DephasingModel) -> float:
    """Population left in |0> after running ``seq`` from |0>."""
    rho = noisy_sequence(density_matrix(basis_state(seq.d, 0)), seq, tones, model)
    return float(np.clip(rho[0, 0].real, 0.0, 1.0))


def decay_model(m, amplitude, decay, offset):
    return amplitude * decay ** m + offset


def fit_decay(lengths: Sequence[int], mean_survival: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares A p^m + B.

    A flat curve has no decay to fit and gives (0, 1, mean).

    Raises:
        FitError: With fewer than three lengths or if the fit fails.
    """
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(mean_survival, dtype=float)
    if m.size < MIN_FIT_LENGTHS:
        raise FitError(f'Need at least {MIN_FIT_LENGTHS} lengths to fit A p^m + B, got {m.size}')
    if np.ptp(y) < FLAT_SURVIVAL:
        return 0.0, 1.0, float(y.mean())
    p0 = (max(y[0] - y[-1], 1e-3), 0.99, float(y[-1]))
    try:
        params, _ = curve_fit(decay_model, m, y, p0=p0,
                              bounds=([-1.0, 0.0, 0.0], [2.0, 1.0, 1.0]), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f'RB decay fit failed: {exc}') from exc
    return tuple(float(p) for p in params)


def rb_run(cfg: RBConfig, d: int, tones: ToneSet, model: DephasingModel,
           workers: int = 1) -> RBResult:
    """Simulate randomized benchmarking and fit the survival decay.

    Raises:
        FitError: With fewer than three lengths (checked before simulating).
        DimensionMismatchError: If tones or model are not for dimension d.
    """
    if len(cfg.lengths) < MIN_FIT_LENGTHS:
        raise FitError(f'Need at least {MIN_FIT_LENGTHS} lengths to fit A p^m + B, '
                       f'got {len(cfg.lengths)}')
    if tones.d != d or model.d != d:
        raise DimensionMismatchError(f'Tones d={tones.d} and model d={model.d} for d={d}')
    sequences = rb_sequences(cfg, d)
    tasks = [seq for row in sequences for seq in row]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(lambda seq: survival(seq, tones, model), tasks))
    data = np.asarray(values).reshape(len(cfg.lengths), cfg.n_sequences)
    amplitude, decay, offset = fit_decay(cfg.lengths, data.mean(axis=1))
    result = RBResult(lengths=cfg.lengths, survival=data, amplitude=amplitude, decay=decay,
                      offset=offset, n_bar=mean_pulses_per_clifford())
    logger.info('RB d=%d: p = %.6f, pulse fidelity %.6f', d, decay, result.pulse_fidelity)
    return result
