from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from levels.constants import HyperfineConstants
from levels.field import FieldConfig
from levels.hyperfine import build_hamiltonian, diagonalize_levels
from levels.transitions import Transition, transition_table


class LevelStructure:
    """Energy levels of a manifold at a given field.

    Bundles the constants, the field and the diagonalized levels, and offers
    the transition table and field scans built on them.

    Args:
        constants: Fully populated hyperfine constants.
        field_config: Static field.

    Raises:
        ValueError: If any hyperfine constant has not been set.
    """

    def __init__(self, constants: HyperfineConstants, field_config: FieldConfig):
        missing = constants.missing()
        if missing:
            raise ValueError(f'Hyperfine constants not set: {", ".join(missing)}')
        self.constants = constants
        self.field = field_config
        self.hamiltonian = build_hamiltonian(constants, field_config)
        self.levels = diagonalize_levels(self.hamiltonian, constants)

    def transitions(self, pols: Iterable[str] = ('x', 'z')) -> List[Transition]:
        """Return the transition table for the requested polarizations."""
        return transition_table(self.levels, self.constants, self.field, pols)

    def scan_field(self, values: Sequence[float]) -> List['LevelStructure']:
        """Return level structures at each field in ``values``."""
        return [LevelStructure(self.constants, config) for config in
                FieldConfig.scan(values, self.field.bohr_magneton)]

    def energies(self) -> np.ndarray:
        """Level energies in MHz, ascending."""
        return np.array([level.energy for level in self.levels])

    def level_key_map(self) -> Dict[Tuple[float, int], int]:
        """Map (mF, rank within the mF block) to level index."""
        return {(level.m_f, level.block_rank): level.index for level in self.levels}
