"""Magnetic-dipole transition table of a hyperfine manifold."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from levels.constants import HyperfineConstants
from levels.field import FieldConfig
from levels.hyperfine import Level, _hamiltonian, basis_quantum_numbers, electronic_operator

logger = logging.getLogger(__name__)

VALID_POLARIZATIONS = ('x', 'z')
TRANSITION_CSV_HEADER = ('lower', 'upper', 'freq_mhz', 'strength', 'sensitivity_mhz_per_g')


@dataclass(frozen=True)
class Transition:
    """A dipole transition between two levels.

    Attributes:
        lower: Index of the lower-energy level.
        upper: Index of the upper-energy level.
        frequency: Transition frequency in MHz.
        strength: max over requested polarizations of |<upper|J_alpha|lower>|.
        sensitivity: d(frequency)/dBz in MHz/G.
    """
    lower: int
    upper: int
    frequency: float
    strength: float
    sensitivity: float

    def __post_init__(self):
        if self.frequency < 0:
            raise ValueError(f'Transition frequency must be non-negative, got {self.frequency}')
        if self.strength < 0:
            raise ValueError(f'Transition strength must be non-negative, got {self.strength}')

    def touches(self, states: Iterable[int]) -> bool:
        """True if either end of the transition is in ``states``."""
        members = set(states)
        return self.lower in members or self.upper in members


def _check_polarizations(pols: Iterable[str]) -> Tuple[str, ...]:
    chosen = tuple(sorted(set(pols)))
    if not chosen or any(p not in VALID_POLARIZATIONS for p in chosen):
        raise ValueError(f'Polarizations must be a non-empty subset of {VALID_POLARIZATIONS}, got {pols}')
    return chosen


def transition_strength(a: Level, b: Level, operators: Dict[str, np.ndarray]) -> float:
    """Return max over operators of |<b|J_alpha|a>|."""
    return max(float(abs(b.composition.conj() @ op @ a.composition)) for op in operators.values())


def _block_energies(hc: HyperfineConstants, bz: float, bohr_magneton: float) -> Dict[Tuple[float, int], float]:
    """Energies keyed by (mF, rank within the mF block) at an arbitrary field."""
    h = _hamiltonian(hc, bz, bohr_magneton)
    m_f_basis = basis_quantum_numbers(hc).sum(axis=1)
    energies = {}
    for m_f in np.unique(m_f_basis):
        block = np.flatnonzero(np.isclose(m_f_basis, m_f))
        values = scipy.linalg.eigvalsh(h[np.ix_(block, block)])
        for rank, value in enumerate(values):
            energies[(float(m_f), rank)] = float(value)
    return energies


def transition_table(levels: Sequence[Level], hc: HyperfineConstants, fc: FieldConfig,
                     pols: Iterable[str] = VALID_POLARIZATIONS) -> List[Transition]:
    """Build the transition table for every level pair with |delta mF| <= 1.

    Sensitivities are central finite differences of the transition frequency
    with a 1 mG step, matching levels across fields by (mF, rank in block).

    Args:
        levels: Output of ``diagonalize_levels``.
        hc: Constants the levels were computed from.
        fc: Field the levels were computed at.
        pols: Subset of {'x', 'z'}.

    Returns:
        list of Transition: Sorted by (lower, upper).
    """
    chosen = _check_polarizations(pols)
    operators = {axis: electronic_operator(hc, axis) for axis in chosen}
    step = FieldConfig.FINITE_DIFFERENCE_STEP
    above = _block_energies(hc, fc.bz + step, fc.bohr_magneton)
    below = _block_energies(hc, fc.bz - step, fc.bohr_magneton)
    table = []
    for i, low in enumerate(levels):
        for high in levels[i + 1:]:
            if abs(high.m_f - low.m_f) > 1 + 1e-9:
                continue
            key_low = (low.m_f, low.block_rank)
            key_high = (high.m_f, high.block_rank)
            shift = ((above[key_high] - above[key_low]) - (below[key_high] - below[key_low])) / (2 * step)
            table.append(Transition(
                lower=low.index, upper=high.index,
                frequency=max(0.0, high.energy - low.energy),
                strength=transition_strength(low, high, operators),
                sensitivity=shift))
    logger.debug('Transition table: %d pairs with |dmF| <= 1', len(table))
    return table


def transition_rows(table: Sequence[Transition]) -> List[Tuple]:
    """Rows matching ``TRANSITION_CSV_HEADER`` for CSV export."""
    return [(t.lower, t.upper, t.frequency, t.strength, t.sensitivity) for t in table]
