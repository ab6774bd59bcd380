"""Grover circuits on one qudit: construction, execution and sweeps.

A circuit holds three kinds of gate: the equal-superposition preparation, one
oracle per marked level and the reflection. Each gate is either a pulse
sequence, run under the circuit's ``PulseConvention``, or a tuple of timed
exact ``GateBlock``s.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import curve_fit

from control.gates import GateBlock, blocks_unitary, compose
from control.pulse_table import PulseTable
from control.tones import DEFAULT_CONVENTION, PulseConvention, PulseSequence, ToneSet
from grover.algorithm import (asp, grover_step, optimal_iterations, oracle_matrix,
    parse_operation_name, reflection_matrix)
from noise.dephasing import DephasingModel, noisy_blocks, noisy_sequence
from numerics.errors import DimensionMismatchError, FitError
from numerics.linalg import as_distribution, basis_state, density_matrix, equal_superposition, sso

logger = logging.getLogger(__name__)

Gate = Union[PulseSequence, Tuple[GateBlock, ...]]

# Pulses per gate in the published circuits: (preparation, oracle, reflection).
PUBLISHED_PULSE_COUNTS = {5: (2, 2, 4), 8: (3, 2, 8)}
DEFAULT_PULSE_DURATION = 0.033  # ms


def _gate_dimension(gate: Gate) -> int:
    if isinstance(gate, PulseSequence):
        return gate.d
    if not gate:
        raise ValueError('A block gate needs at least one block')
    return gate[0].d


@dataclass(frozen=True, eq=False)
class GroverCircuit:
    """Gates of a single-qudit Grover search.

    Attributes:
        d: Qudit dimension.
        prep: Gate taking |0> to the equal superposition.
        oracles: Phase oracle gate for each marked level.
        reflection: Reflection about the equal superposition.
        n_iterations: Oracle-reflection rounds N.
        convention: How pulse-sequence gates are read.
        tones: Drive used when pulse-sequence gates run under dephasing.
        provenance: Where the gates came from (table hash, seed, 'analytic').
    """
    d: int
    prep: Gate
    oracles: Mapping[int, Gate]
    reflection: Gate
    n_iterations: int = 1
    convention: PulseConvention = DEFAULT_CONVENTION
    tones: Optional[ToneSet] = None
    provenance: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'oracles', dict(self.oracles))
        self.validate()

    def validate(self) -> None:
        if self.n_iterations < 0:
            raise ValueError(f'Iteration count must be non-negative, got {self.n_iterations}')
        gates = [('prep', self.prep), ('reflection', self.reflection)]
        gates += [(f'oracle {m}', g) for m, g in self.oracles.items()]
        for name, gate in gates:
            if _gate_dimension(gate) != self.d:
                raise DimensionMismatchError(f'{name} gate is for d={_gate_dimension(gate)}, circuit for d={self.d}')
        for m in self.oracles:
            if not 0 <= m < self.d:
                raise ValueError(f'Oracle for level {m} out of range for d={self.d}')
        if self.tones is not None and self.tones.d != self.d:
            raise DimensionMismatchError(f'Tones are for d={self.tones.d}')

    @property
    def marks(self) -> List[int]:
        return sorted(self.oracles)

    def oracle(self, marked: int) -> Gate:
        if marked not in self.oracles:
            raise ValueError(f'Circuit has no oracle for level {marked}; available: {self.marks}')
        return self.oracles[marked]

    def unitary(self, gate: Gate) -> np.ndarray:
        if isinstance(gate, PulseSequence):
            return compose(gate, self.convention)
        return blocks_unitary(gate, self.d)

    def apply_noisy(self, rho: np.ndarray, gate: Gate, noise: DephasingModel) -> np.ndarray:
        if isinstance(gate, PulseSequence):
            if self.tones is None:
                raise ValueError('Running pulse sequences under dephasing needs circuit tones')
            return noisy_sequence(rho, gate, self.tones, noise, self.convention)
        return noisy_blocks(rho, gate, noise)


@dataclass(frozen=True, eq=False)
class GroverOutcome:
    """Measured distribution of one run and its scores."""
    marked: int
    distribution: np.ndarray
    asp_measured: float
    sso_vs_ideal: float
    n_iterations: int


def preparation_matrix(d: int) -> np.ndarray:
    """Householder reflection exchanging |0> and the equal superposition."""
    v = basis_state(d, 0) - equal_superposition(d)
    v = v / np.linalg.norm(v)
    return np.eye(d, dtype=complex) - 2.0 * np.outer(v, v.conj())


def ideal_distribution(d: int, marked: int, n_iterations: int) -> np.ndarray:
    """Noiseless output distribution of exact Grover search."""
    psi = equal_superposition(d)
    step = grover_step(d, marked)
    for _ in range(n_iterations):
        psi = step @ psi
    return as_distribution(np.abs(psi) ** 2)


def analytic_circuit(d: int, pulse_duration: float = DEFAULT_PULSE_DURATION,
                     n_iterations: Optional[int] = None,
                     pulse_counts: Optional[Tuple[int, int, int]] = None) -> GroverCircuit:
    """Circuit of exact gates, each lasting its pulse count times ``pulse_duration``.

    Pulse counts default to the published ones for d=5 and d=8 and to
    (2, 2, d-1) otherwise.
    """
    prep_n, oracle_n, reflection_n = pulse_counts or PUBLISHED_PULSE_COUNTS.get(d, (2, 2, d - 1))
    oracles = {m: (GateBlock(oracle_matrix(d, m), oracle_n * pulse_duration, f'mark {m}'),)
               for m in range(d)}
    return GroverCircuit(
        d=d,
        prep=(GateBlock(preparation_matrix(d), prep_n * pulse_duration, 'prep'),),
        oracles=oracles,
        reflection=(GateBlock(reflection_matrix(d), reflection_n * pulse_duration, 'reflection'),),
        n_iterations=optimal_iterations(d) if n_iterations is None else n_iterations,
        provenance='analytic')


def circuit_from_table(table: PulseTable, convention: PulseConvention = DEFAULT_CONVENTION,
                       tones: Optional[ToneSet] = None, n_iterations: Optional[int] = None,
                       provenance: str = '') -> GroverCircuit:
    """Circuit whose gates are the pulse sequences of a published table.

    Raises:
        ValueError: If the table lacks the preparation or the reflection.
    """
    prep = reflection = None
    oracles: Dict[int, PulseSequence] = {}
    for name, seq in table.operations().items():
        parsed = parse_operation_name(name)
        if parsed is None:
            logger.warning('%s: ignoring unknown operation %r', table.source, name)
            continue
        kind, level = parsed
        if kind == 'mark':
            oracles[level] = seq
        elif kind == 'prep':
            prep = seq
        else:
            reflection = seq
    if prep is None or reflection is None:
        raise ValueError(f'{table.source}: table needs both a preparation and a reflection')
    return GroverCircuit(d=table.d, prep=prep, oracles=oracles, reflection=reflection,
                         n_iterations=optimal_iterations(table.d) if n_iterations is None else n_iterations,
                         convention=convention, tones=tones, provenance=provenance or table.source)


def _distributions(circuit: GroverCircuit, marked: int, n_max: int,
                   noise: Optional[DephasingModel]) -> Iterator[np.ndarray]:
    """Distributions after 0, 1, ..., n_max rounds."""
    oracle = circuit.oracle(marked)
    if noise is None:
        step = circuit.unitary(circuit.reflection) @ circuit.unitary(oracle)
        psi = circuit.unitary(circuit.prep)[:, 0]
        yield np.abs(psi) ** 2
        for _ in range(n_max):
            psi = step @ psi
            yield np.abs(psi) ** 2
        return
    if noise.d != circuit.d:
        raise DimensionMismatchError(f'Dephasing model is for d={noise.d}')
    rho = circuit.apply_noisy(density_matrix(basis_state(circuit.d, 0)), circuit.prep, noise)
    yield np.real(np.diag(rho)).copy()
    for _ in range(n_max):
        rho = circuit.apply_noisy(rho, oracle, noise)
        rho = circuit.apply_noisy(rho, circuit.reflection, noise)
        yield np.real(np.diag(rho)).copy()


def _normalized(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _outcome(d: int, marked: int, n: int, p: np.ndarray) -> GroverOutcome:
    p = _normalized(p)
    return GroverOutcome(marked=marked, distribution=p, asp_measured=float(p[marked]),
                         sso_vs_ideal=sso(ideal_distribution(d, marked, n), p), n_iterations=n)


def run(circuit: GroverCircuit, marked: int, noise: Optional[DephasingModel] = None,
        n_iterations: Optional[int] = None) -> GroverOutcome:
    """Prepare, apply N oracle-reflection rounds and read out every level.

    Readout is the exact diagonal of the final state. ``sso_vs_ideal``
    compares it with exact noiseless Grover search.

    Raises:
        ValueError: If the circuit has no oracle for ``marked``.
    """
    n = circuit.n_iterations if n_iterations is None else n_iterations
    if n < 0:
        raise ValueError(f'Iteration count must be non-negative, got {n}')
    *_, final = _distributions(circuit, marked, n, noise)
    return _outcome(circuit.d, marked, n, final)


def mark_sweep_outcomes(circuit: GroverCircuit, noise: Optional[DephasingModel] = None,
                        workers: int = 1) -> List[GroverOutcome]:
    """Run every marked level of the circuit, in level order."""
    for m in range(circuit.d):
        circuit.oracle(m)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda m: run(circuit, m, noise), range(circuit.d)))


def mark_sweep(circuit: GroverCircuit, noise: Optional[DephasingModel] = None,
               workers: int = 1) -> np.ndarray:
    """d x d matrix: row m is the distribution measured when level m is marked."""
    return np.vstack([o.distribution for o in mark_sweep_outcomes(circuit, noise, workers)])


def average_sso(outcomes: Sequence[GroverOutcome]) -> float:
    return float(np.mean([o.sso_vs_ideal for o in outcomes]))


@dataclass(frozen=True, eq=False)
class IterationSweep:
    """Success probability against round count and the per-round fidelity fit."""
    n: np.ndarray
    measured: np.ndarray
    ideal: np.ndarray
    fidelity: float
    slope: float
    intercept: float
    fit: str = 'linear'

    @property
    def ratio(self) -> np.ndarray:
        return self.measured / self.ideal

    def rows(self) -> List[Tuple[int, float, float]]:
        return [(int(n), float(m), float(i)) for n, m, i in zip(self.n, self.measured, self.ideal)]


def _exponential(n, scale, fidelity):
    return scale * fidelity ** n


def fit_iteration_fidelity(n: np.ndarray, ratio: np.ndarray, weights: np.ndarray,
                           fit: str = 'linear') -> Tuple[float, float, float]:
    """(fidelity, slope, intercept) of measured/ideal against N.

    'linear' fits a weighted straight line and reports 1 + slope; 'exponential'
    fits scale * F^N and reports F with slope F - 1.
    """
    if fit == 'linear':
        slope, intercept = np.polyfit(n, ratio, 1, w=weights)
        return 1.0 + float(slope), float(slope), float(intercept)
    if fit == 'exponential':
        try:
            (scale, fidelity), _ = curve_fit(_exponential, n, ratio, p0=(1.0, 0.99),
                                             sigma=1.0 / weights, maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise FitError(f'Exponential iteration fit failed: {exc}') from exc
        return float(fidelity), float(fidelity) - 1.0, float(scale)
    raise ValueError(f"fit must be 'linear' or 'exponential', got {fit!r}")


def iteration_sweep(circuit: GroverCircuit, marked: int, n_max: int,
                    noise: Optional[DephasingModel] = None, fit: str = 'linear') -> IterationSweep:
    """Success probability for N = 1..n_max and the per-round fidelity.

    Points are weighted by the ideal success probability, so rounds where
    the ideal probability nearly vanishes barely count.
    """
    if n_max < 2:
        raise ValueError(f'n_max must be at least 2, got {n_max}')
    distributions = list(_distributions(circuit, marked, n_max, noise))[1:]
    n = np.arange(1, n_max + 1)
    measured = np.array([_normalized(p)[marked] for p in distributions])
    ideal = np.array([asp(circuit.d, int(k)) for k in n])
    weights = np.clip(ideal, 1e-6, None)
    fidelity, slope, intercept = fit_iteration_fidelity(n, measured / weights, weights, fit)
    logger.info('Iteration sweep d=%d mark %d: per-round fidelity %.6f', circuit.d, marked, fidelity)
    return IterationSweep(n=n, measured=measured, ideal=ideal, fidelity=fidelity, slope=slope,
                          intercept=intercept, fit=fit)
