"""Ramsey coherence measurement on the whole qudit."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from control.gates import displacement, rotating_hamiltonian
from control.tones import PulseParams, ToneSet
from noise.dephasing import DephasingModel, lindblad_evolve
from numerics.errors import DimensionMismatchError
from numerics.linalg import basis_state, density_matrix
from numerics.spin import spin_operators

logger = logging.getLogger(__name__)

FLAT_SIGNAL = 1e-9


@dataclass(frozen=True)
class RamseyResult:
    """Simulated <Jz> against delay and the decaying-cosine fit.

    ``fit_ok`` is False when the data are flat or the fit failed; the fitted
    fields are then None and ``message`` says why.
    """
    delays: Tuple[float, ...]
    jz: Tuple[float, ...]
    fit_ok: bool
    t2: Optional[float] = None
    frequency: Optional[float] = None
    amplitude: Optional[float] = None
    offset: Optional[float] = None
    message: str = ''

    def rows(self):
        return list(zip(self.delays, self.jz))


def ramsey_signal(t, amplitude, t2, frequency, phase, offset):
    """A exp(-t/T2) cos(w t + phase) + c."""
    return amplitude * np.exp(-t / t2) * np.cos(frequency * t + phase) + offset


def _check_delays(delays: Sequence[float]) -> np.ndarray:
    values = np.asarray(delays, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValueError('Ramsey needs at least one delay')
    if np.any(values < 0) or np.any(np.diff(values) <= 0):
        raise ValueError(f'Delays must be non-negative and strictly increasing, got {values}')
    return values


def ramsey_jz(d: int, tones: ToneSet, model: DephasingModel, delays: Sequence[float],
              dt: Optional[float] = None) -> np.ndarray:
    """<Jz> after pi/2 - free evolution - pi/2 for each delay.

    The pi/2 displacements are taken as instantaneous; free evolution runs
    under the detuning part of ``tones`` only.
    """
    values = _check_delays(delays)
    if tones.d != d or model.d != d:
        raise DimensionMismatchError(f'Tones d={tones.d} and model d={model.d} for a d={d} Ramsey')
    half_pi = displacement(d, PulseParams.uniform(d, np.pi / 2))
    free = rotating_hamiltonian(tones.with_amplitudes(np.zeros(d - 1)), np.zeros(d - 1))
    lindblad = model.lindblad_operator()
    jz = spin_operators(d)[2]
    rho = half_pi @ density_matrix(basis_state(d, 0)) @ half_pi.conj().T
    signal = []
    elapsed = 0.0
    # Each delay continues from the previous one.
    for delay in values:
        rho = lindblad_evolve(rho, free, lindblad, model.gamma, delay - elapsed, dt)
        elapsed = delay
        final = half_pi @ rho @ half_pi.conj().T
        signal.append(float(np.real(np.trace(final @ jz))))
    return np.asarray(signal)


def fit_ramsey(delays: Sequence[float], jz: Sequence[float],
               frequency_guess: float = 0.0) -> RamseyResult:
    """Fit a decaying cosine; failures are reported in the result, not raised."""
    t = _check_delays(delays)
    y = np.asarray(jz, dtype=float)
    base = dict(delays=tuple(t.tolist()), jz=tuple(y.tolist()))
    if np.ptp(y) < FLAT_SIGNAL:
        logger.warning('Ramsey signal is flat; no coherence decay to fit')
        return RamseyResult(fit_ok=False, message='flat signal', **base)
    span = t[-1] - t[0] if t.size > 1 else 1.0
    p0 = (0.5 * np.ptp(y), span / 2, abs(frequency_guess), 0.0, float(np.mean(y)))
    bounds = ([0.0, 1e-9, 0.0, -np.pi, -np.inf], [np.inf, np.inf, np.inf, np.pi, np.inf])
    try:
        params, covariance = curve_fit(ramsey_signal, t, y, p0=p0, bounds=bounds, maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        logger.warning('Ramsey fit failed: %s', exc)
        return RamseyResult(fit_ok=False, message=str(exc), **base)
    if not np.all(np.isfinite(covariance)):
        logger.warning('Ramsey fit is underdetermined')
        return RamseyResult(fit_ok=False, message='singular covariance', **base)
    amplitude, t2, frequency, _, offset = (float(p) for p in params)
    logger.info('Ramsey fit: T2 = %.4g ms, frequency = %.4g rad/ms', t2, frequency)
    return RamseyResult(fit_ok=True, t2=t2, frequency=frequency, amplitude=amplitude,
                        offset=offset, **base)


def ramsey(d: int, tones: ToneSet, model: DephasingModel, delays: Sequence[float],
           dt: Optional[float] = None) -> RamseyResult:
    """Simulate a Ramsey scan and fit its T2.

    The frequency guess is the largest tone detuning in rad/ms.
    """
    jz = ramsey_jz(d, tones, model, delays, dt)
    guess = float(np.max(np.abs(tones.detunings))) if len(tones.detunings) else 0.0
    return fit_ramsey(delays, jz, guess)
