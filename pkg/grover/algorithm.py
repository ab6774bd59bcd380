"""Analytic Grover search on a single d-level qudit."""

import math
import re
from typing import Optional, Tuple

import numpy as np

from numerics.errors import InvalidDimensionError
from numerics.linalg import equal_superposition

_MARK_PATTERN = re.compile(r'^mark\s*(\d+)$', re.IGNORECASE)
_PREP_NAMES = ('equal sup.', 'equal sup', 'equal superposition', 'prep', 'preparation')
_REFLECTION_NAMES = ('reflection', 'diffusion')


def _check_dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f'Dimension must be an integer, got {d!r}')
    if d < 2:
        raise InvalidDimensionError(f'Dimension must be at least 2, got {d}')
    return int(d)


def oracle_matrix(d: int, m: int) -> np.ndarray:
    """Phase oracle: -1 on level ``m``, +1 elsewhere.

    Raises:
        ValueError: If m is not a level of the qudit.
    """
    d = _check_dimension(d)
    if not 0 <= m < d:
        raise ValueError(f'Marked level {m} out of range for d={d}')
    signs = np.ones(d, dtype=complex)
    signs[m] = -1.0
    return np.diag(signs)


def reflection_phase(d: int) -> complex:
    """exp(i pi/d) for even d, 1 for odd d; puts the reflection in SU(d)."""
    return complex(np.exp(1j * np.pi / d)) if _check_dimension(d) % 2 == 0 else 1.0 + 0j


def reflection_matrix(d: int) -> np.ndarray:
    """Return c (2|s><s| - I) with c from ``reflection_phase``."""
    s = equal_superposition(_check_dimension(d))
    return reflection_phase(d) * (2.0 * np.outer(s, s.conj()) - np.eye(d))


def grover_step(d: int, m: int) -> np.ndarray:
    """One Grover iteration: oracle followed by the reflection."""
    return reflection_matrix(d) @ oracle_matrix(d, m)


def asp(d: int, n_iterations: int) -> float:
    """Algorithm success probability sin^2((2N+1) arcsin(1/sqrt(d))).

    Examples:
        >>> round(asp(5, 1), 12)
        0.968
        >>> round(asp(8, 1), 12)
        0.78125
    """
    d = _check_dimension(d)
    if n_iterations < 0:
        raise ValueError(f'Iteration count must be non-negative, got {n_iterations}')
    return math.sin((2 * n_iterations + 1) * math.asin(1.0 / math.sqrt(d))) ** 2


def optimal_iterations(d: int) -> int:
    """Iteration count maximizing ``asp`` near pi sqrt(d)/4 - 1/2.

    Candidates are the floor and ceiling of the estimate and their immediate
    neighbours; ties go to the smaller count.
    """
    estimate = math.pi * math.sqrt(_check_dimension(d)) / 4 - 0.5
    low = math.floor(estimate)
    candidates = sorted({n for n in range(low - 1, low + 3) if n >= 0})
    best = candidates[0]
    for n in candidates[1:]:
        if asp(d, n) > asp(d, best) + 1e-15:
            best = n
    return best


def parse_operation_name(name: str) -> Optional[Tuple[str, Optional[int]]]:
    """Classify a pulse-table operation name.

    Returns:
        ('mark', m) for "Mark m", ('prep', None) for the equal-superposition
        preparation, ('reflection', None) for the reflection, or None.
    """
    key = name.strip().lower()
    match = _MARK_PATTERN.match(key)
    if match:
        return 'mark', int(match.group(1))
    if key in _PREP_NAMES:
        return 'prep', None
    if key in _REFLECTION_NAMES:
        return 'reflection', None
    return None
