"""Spin-j angular momentum matrices for a d-level qudit.

Level i is the Jz eigenvector with eigenvalue -(d-1)/2 + i, so Jz is
diagonal and ascending and J+ raises the level index by one.
"""

from typing import Tuple
import numpy as np

from numerics.errors import InvalidDimensionError


def _check_dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f'Dimension must be an integer, got {d!r}')
    if d < 2:
        raise InvalidDimensionError(f'Dimension must be at least 2, got {d}')
    return int(d)


def spin_values(d: int) -> np.ndarray:
    """Return the Jz eigenvalues -(d-1)/2 ... (d-1)/2 in level order."""
    d = _check_dimension(d)
    j = (d - 1) / 2.0
    return np.arange(d, dtype=float) - j


def raising_operator(d: int) -> np.ndarray:
    """Return J+ with entries <m+1|J+|m> = sqrt(j(j+1) - m(m+1))."""
    m = spin_values(d)
    j = (d - 1) / 2.0
    coupling = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    return np.diag(coupling, k=-1).astype(complex)


def spin_operators(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Jx, Jy, Jz) for effective spin j = (d-1)/2.

    Args:
        d: Qudit dimension, at least 2.

    Returns:
        Tuple of three d x d complex arrays satisfying [Jx, Jy] = iJz.

    Raises:
        InvalidDimensionError: If d < 2.

    Examples:
        >>> jx, jy, jz = spin_operators(2)
        >>> jx.real
        array([[0. , 0.5],
               [0.5, 0. ]])
    """
    j_plus = raising_operator(d)
    j_minus = j_plus.conj().T
    jx = (j_plus + j_minus) / 2.0
    jy = (j_plus - j_minus) / 2.0j
    jz = np.diag(spin_values(d)).astype(complex)
    return jx, jy, jz


def rotation_generator(d: int, phi: float) -> np.ndarray:
    """Return cos(phi) Jx + sin(phi) Jy, the equatorial rotation axis at angle phi."""
    jx, jy, _ = spin_operators(d)
    return np.cos(phi) * jx + np.sin(phi) * jy
