"""Unit handling utilities for qudit control and simulation.

This module converts physical inputs to the canonical units used by the library
internals. Values may be given either as pint Quantities (converted and
validated here) or as plain floats that are already in canonical units.

Canonical units:
    - frequency: megahertz (MHz), for level energies and transition frequencies
    - field: gauss (G)
    - sensitivity: MHz per gauss
    - time: milliseconds (ms)
    - rate: inverse milliseconds (1/ms)
    - drive: kilohertz (kHz), ordinary (not angular) drive scales

Angular rates (the Rabi amplitudes and detunings of the rotating-frame
Hamiltonian) are kept in rad/ms, i.e. angular kHz. Because pint treats the
radian as dimensionless, ``1 kHz`` and ``1 rad/ms`` compare equal; use
``to_angular_khz`` rather than ``to_canonical`` to get the 2*pi factor right.

Common Usage:
    >>> to_canonical(7.2 * ureg.gauss, 'field')
    7.2
    >>> to_canonical(3000 * ureg.microsecond, 'time')
    3.0
    >>> to_angular_khz(1 * ureg.kHz)
    6.283185307179586
    >>> format_number(0.96800000000001)
    '0.968'

Error Handling:
    ValueError is raised for unknown kinds, incompatible dimensions and
    non-finite values. TypeError is raised for values that are neither numbers
    nor Quantities.
"""

import math
from typing import Union
from units_config import ureg, Quantity, GAUSS_PER_TESLA

Number = Union[int, float]

CANONICAL_UNITS = {
    'frequency': 'MHz',
    'field': 'gauss',
    'sensitivity': 'MHz / gauss',
    'time': 'ms',
    'rate': '1 / ms',
    'drive': 'kHz',
}

# SI spellings of the Gaussian-system kinds and the factor to the canonical unit.
SI_EQUIVALENTS = {
    'field': ('tesla', GAUSS_PER_TESLA),
    'sensitivity': ('MHz / tesla', 1.0 / GAUSS_PER_TESLA),
}


def _check_kind(kind: str) -> None:
    if kind not in CANONICAL_UNITS:
        raise ValueError(f'Unknown unit kind {kind!r}; expected one of {sorted(CANONICAL_UNITS)}')


def canonical_magnitude(quantity: Quantity, kind: str):
    """Return the magnitude of ``quantity`` in the canonical unit for ``kind``.

    Works for scalar and array Quantities. SI fields and sensitivities are
    converted with the exact tesla to gauss factor.

    Raises:
        ValueError: If the kind is unknown or the dimensions are incompatible.

    Examples:
        >>> canonical_magnitude(2 * ureg.millitesla, 'field')
        20.0
    """
    _check_kind(kind)
    canonical = ureg(CANONICAL_UNITS[kind])
    if quantity.dimensionality == canonical.dimensionality:
        return quantity.to(CANONICAL_UNITS[kind]).magnitude
    if kind in SI_EQUIVALENTS:
        unit, factor = SI_EQUIVALENTS[kind]
        if quantity.dimensionality == ureg(unit).dimensionality:
            return quantity.to(unit).magnitude * factor
    raise ValueError(f'{kind} value {quantity} must be convertible to {CANONICAL_UNITS[kind]}')


def is_valid_unit_type(quantity: Quantity, kind: str) -> bool:
    """Check whether a quantity can be expressed in the canonical unit of ``kind``.

    Args:
        quantity: The quantity to check.
        kind: One of the keys of ``CANONICAL_UNITS``.

    Returns:
        bool: True if the dimensions are compatible.

    Raises:
        ValueError: If ``kind`` is unknown.

    Examples:
        >>> is_valid_unit_type(1 * ureg.tesla, 'field')
        True
        >>> is_valid_unit_type(1 * ureg.second, 'field')
        False
    """
    _check_kind(kind)
    if quantity.dimensionality == ureg(CANONICAL_UNITS[kind]).dimensionality:
        return True
    return (kind in SI_EQUIVALENTS
            and quantity.dimensionality == ureg(SI_EQUIVALENTS[kind][0]).dimensionality)


def to_canonical(value: Union[Quantity, Number], kind: str) -> float:
    """Convert a value to a float in the canonical unit for ``kind``.

    Args:
        value: A pint Quantity or a number already in canonical units.
        kind: One of 'frequency', 'field', 'sensitivity', 'time', 'rate', 'drive'.

    Returns:
        float: The magnitude in canonical units.

    Raises:
        ValueError: If the kind is unknown, the dimensions are incompatible or
            the value is not finite.
        TypeError: If the value is neither a number nor a Quantity.

    Examples:
        >>> to_canonical(1 * ureg.tesla, 'field')
        10000.0
        >>> to_canonical(2.5, 'frequency')
        2.5
    """
    _check_kind(kind)
    if isinstance(value, Quantity):
        result = float(canonical_magnitude(value, kind))
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        result = float(value)
    else:
        raise TypeError(f'{kind} value must be a number or a pint Quantity, got {type(value).__name__}')
    if not math.isfinite(result):
        raise ValueError(f'{kind} value must be finite, got {result}')
    return result


def to_angular_khz(value: Union[Quantity, Number]) -> float:
    """Convert a drive amplitude or detuning to angular kHz (rad/ms).

    Quantities with frequency units are ordinary frequencies and are multiplied
    by 2*pi; plain numbers are taken to be angular kHz already.

    Examples:
        >>> to_angular_khz(1 * ureg.kHz)
        6.283185307179586
        >>> to_angular_khz(6.0)
        6.0
    """
    if isinstance(value, Quantity):
        return 2.0 * math.pi * to_canonical(value, 'drive')
    return to_canonical(value, 'drive')


def format_number(value: Number, digits: int = 9) -> str:
    """Format a number with ``digits`` significant digits for CSV output."""
    return f'{float(value):.{digits}g}'


def format_quantity(value: Union[Quantity, Number], kind: str, precision: int = 3) -> str:
    """Format a value in canonical units with a fixed number of decimals.

    Examples:
        >>> format_quantity(7.2 * ureg.gauss, 'field', 1)
        '7.2 gauss'
    """
    magnitude = to_canonical(value, kind)
    return f'{magnitude:.{precision}f} {CANONICAL_UNITS[kind]}'
