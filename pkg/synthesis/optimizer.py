"""Gradient-descent compilation of targets into fixed-length pulse sequences."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import ClassVar, List, Optional, Tuple

import numpy as np

from control.tones import DEFAULT_CONVENTION, PulseConvention, PulseSequence
from numerics.random import check_seed, task_rng
from synthesis.targets import DEFAULT_GRAD_STEP, TargetSpec, gradient, infidelity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthesisConfig:
    """Optimizer settings.

    Attributes:
        n_pulses: Pulses in the ansatz.
        restarts: Independent random starts; the best one is returned.
        max_iters: Gradient steps per restart.
        step: Initial line-search step.
        grad_step: Finite-difference step.
        tol: Infidelity at or below which a result counts as converged.
        seed: Root seed; restart r draws from stream (seed, r).
        workers: Threads running restarts concurrently.
        early_stop: Stop launching restarts once one has converged.
        convention: How pulse parameters map onto unitaries.
    """
    STALL_WINDOW: ClassVar[int] = 50
    STALL_DECREASE: ClassVar[float] = 1e-12
    ARMIJO: ClassVar[float] = 1e-4
    MIN_STEP: ClassVar[float] = 1e-16
    MAX_STEP: ClassVar[float] = 1e6
    LOSS_FLOOR: ClassVar[float] = 1e-15

    n_pulses: int = 2
    restarts: int = 10
    max_iters: int = 2000
    step: float = 0.1
    grad_step: float = DEFAULT_GRAD_STEP
    tol: float = 1e-3
    seed: int = 0
    workers: int = 1
    early_stop: bool = False
    convention: PulseConvention = DEFAULT_CONVENTION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ('n_pulses', 'restarts', 'max_iters', 'workers'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f'{name} must be a positive integer, got {value!r}')
        for name in ('step', 'grad_step'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f'{name} must be positive, got {value!r}')
        if not 0 < self.tol < 1:
            raise ValueError(f'tol must be in (0, 1), got {self.tol}')
        check_seed(self.seed)


@dataclass(frozen=True)
class SynthesisResult:
    """Best sequence found and how the search went.

    ``trace`` holds the loss at the start and after every accepted step.
    """
    sequence: PulseSequence
    infidelity: float
    iterations: int
    converged: bool
    trace: Tuple[float, ...] = field(default=(), repr=False)
    restart: int = 0

    def to_record(self) -> dict:
        return {
            'infidelity': self.infidelity,
            'iterations': self.iterations,
            'converged': self.converged,
            'restart': self.restart,
            'n_pulses': len(self.sequence),
            'parameters': self.sequence.to_vector().tolist(),
        }


def initial_sequence(d: int, n_pulses: int, rng: np.random.Generator) -> PulseSequence:
    """Random start: theta uniform in (0, pi], phases uniform in [-pi, pi)."""
    values = []
    for _ in range(n_pulses):
        theta = np.pi - rng.uniform(0.0, np.pi)
        phases = rng.uniform(-np.pi, np.pi, size=d - 1)
        values.extend([theta, *phases])
    return PulseSequence.from_vector(d, values)


def descend(start: PulseSequence, target: TargetSpec, cfg: SynthesisConfig,
            restart: int = 0) -> SynthesisResult:
    """Plain gradient descent with Armijo backtracking from ``start``.

    The step doubles after every accepted move and halves on every rejected
    trial; the run ends at ``max_iters``, when the step underflows, when the
    loss falls below machine precision or when it decreased by less than
    ``STALL_DECREASE`` over the last ``STALL_WINDOW`` steps.
    """
    d = start.d
    x = start.to_vector()
    loss = infidelity(start, target, cfg.convention)
    trace = [loss]
    step = cfg.step
    iterations = 0
    while iterations < cfg.max_iters and loss > cfg.LOSS_FLOOR:
        grad = gradient(PulseSequence.from_vector(d, x), target, cfg.grad_step, cfg.convention)
        slope = float(grad @ grad)
        if slope == 0.0:
            break
        while step >= cfg.MIN_STEP:
            trial = x - step * grad
            trial_loss = infidelity(PulseSequence.from_vector(d, trial), target, cfg.convention)
            if trial_loss <= loss - cfg.ARMIJO * step * slope:
                break
            step *= 0.5
        else:
            logger.debug('Restart %d: line search exhausted at iteration %d', restart, iterations)
            break
        x, loss = trial, trial_loss
        step = min(2.0 * step, cfg.MAX_STEP)
        iterations += 1
        trace.append(loss)
        if iterations >= cfg.STALL_WINDOW and trace[-cfg.STALL_WINDOW - 1] - loss < cfg.STALL_DECREASE:
            logger.debug('Restart %d: stalled at iteration %d, loss %.3e', restart, iterations, loss)
            break
    return SynthesisResult(sequence=PulseSequence.from_vector(d, x), infidelity=loss,
                           iterations=iterations, converged=loss <= cfg.tol,
                           trace=tuple(trace), restart=restart)


def _run_restart(target: TargetSpec, cfg: SynthesisConfig, restart: int) -> SynthesisResult:
    rng = task_rng(cfg.seed, restart)
    result = descend(initial_sequence(target.d, cfg.n_pulses, rng), target, cfg, restart)
    logger.info('Restart %d finished: infidelity %.3e after %d iterations',
                restart, result.infidelity, result.iterations)
    return result


def _best(results: List[SynthesisResult]) -> SynthesisResult:
    return min(results, key=lambda r: (r.infidelity, r.restart))


def synthesize(target: TargetSpec, cfg: Optional[SynthesisConfig] = None) -> SynthesisResult:
    """Best-of-restarts gradient descent towards ``target``.

    Restarts are independent and seeded per index, so the result does not
    depend on ``workers``. With ``early_stop`` the restarts run in batches of
    ``workers`` and no further batch starts once one has converged; the result
    then depends on ``workers`` as well as the seed.

    Returns:
        SynthesisResult: The minimum-infidelity restart, ties going to the
        lower restart index. ``converged`` is False when no restart reached
        ``tol``; that is logged, not raised.
    """
    cfg = cfg or SynthesisConfig()
    results: List[SynthesisResult] = []
    batch = cfg.workers if cfg.early_stop else cfg.restarts
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for first in range(0, cfg.restarts, batch):
            indices = range(first, min(first + batch, cfg.restarts))
            results.extend(pool.map(lambda r: _run_restart(target, cfg, r), indices))
            if cfg.early_stop and any(r.converged for r in results):
                break
    best = _best(results)
    if not best.converged:
        logger.warning('No restart reached tol=%.1e; best infidelity %.3e (restart %d)',
                       cfg.tol, best.infidelity, best.restart)
    return best
