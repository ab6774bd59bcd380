from levels.constants import HyperfineConstants
from levels.field import FieldConfig
from levels.hyperfine import Level, build_hamiltonian, diagonalize_levels, basis_quantum_numbers
from levels.transitions import (Transition, transition_table, transition_rows,
    TRANSITION_CSV_HEADER)
from levels.structure import LevelStructure
from levels.selection import (ScoringWeights, QuditAssignment, score_qudit_candidates,
    off_resonant_error, assignment_rows, ASSIGNMENT_CSV_HEADER)
