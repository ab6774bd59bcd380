import math
from typing import Mapping, Optional, Union
from units_config import Quantity
from utils.unit_utils import to_canonical
from numerics.errors import ConfigurationError

Number = Union[int, float]


class HyperfineConstants:
    """Hyperfine and Zeeman constants of an atomic manifold.

    Holds the angular momenta and coupling constants that enter the
    hyperfine-plus-Zeeman Hamiltonian. There are no built-in values for any
    species: every constant must be supplied, and reading one that was never
    set raises ``ValueError``. The hyperfine constants accept pint Quantities
    with frequency units or floats in MHz and are stored in MHz.

    Args:
        name (str): Label for the manifold (e.g. "D5/2, I=3/2").
    """

    REQUIRED_KEYS = ('nuclear_spin', 'electronic_j', 'a_mhz', 'b_mhz', 'g_j', 'g_i')

    def __init__(self, name: str):
        """Initialize an empty constant set with a name."""
        self.name = name
        self._nuclear_spin: Optional[float] = None
        self._electronic_j: Optional[float] = None
        self._a_mhz: Optional[float] = None
        self._b_mhz: Optional[float] = None
        self._g_j: Optional[float] = None
        self._g_i: Optional[float] = None

    @classmethod
    def from_mapping(cls, name: str, values: Mapping[str, object]) -> 'HyperfineConstants':
        """Create a constant set from a configuration mapping.

        Args:
            name: Label for the manifold.
            values: Mapping containing every key in ``REQUIRED_KEYS``.

        Returns:
            HyperfineConstants: Fully populated constants.

        Raises:
            ConfigurationError: If a key is missing or its value is invalid.
        """
        constants = cls(name)
        for key in cls.REQUIRED_KEYS:
            if key not in values:
                raise ConfigurationError(key, 'hyperfine constant is required and has no default')
            try:
                setattr(constants, key, values[key])
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(key, str(exc)) from exc
        return constants

    @property
    def name(self) -> str:
        """Get the manifold label."""
        return self._name

    @name.setter
    def name(self, value: str):
        """Set the manifold label."""
        if not isinstance(value, str):
            raise TypeError('Name must be a string')
        if not value.strip():
            raise ValueError('Name cannot be empty')
        self._name = value.strip()

    def _validate_angular_momentum(self, value: Number, name: str) -> float:
        """Validate a non-negative integer or half-integer."""
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f'{name} must be a number')
        doubled = 2 * float(value)
        if value < 0 or not math.isclose(doubled, round(doubled), abs_tol=1e-12):
            raise ValueError(f'{name} must be a non-negative integer or half-integer, got {value}')
        return round(doubled) / 2.0

    def _validate_finite(self, value: Number, name: str) -> float:
        """Validate a finite dimensionless number."""
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f'{name} must be a number')
        if not math.isfinite(value):
            raise ValueError(f'{name} must be finite')
        return float(value)

    @property
    def nuclear_spin(self) -> float:
        """Get the nuclear spin I."""
        if self._nuclear_spin is None:
            raise ValueError('Nuclear spin has not been set')
        return self._nuclear_spin

    @nuclear_spin.setter
    def nuclear_spin(self, value: Number):
        """Set the nuclear spin I."""
        self._nuclear_spin = self._validate_angular_momentum(value, 'Nuclear spin')

    @property
    def electronic_j(self) -> float:
        """Get the electronic angular momentum J."""
        if self._electronic_j is None:
            raise ValueError('Electronic angular momentum has not been set')
        return self._electronic_j

    @electronic_j.setter
    def electronic_j(self, value: Number):
        """Set the electronic angular momentum J."""
        self._electronic_j = self._validate_angular_momentum(value, 'Electronic angular momentum')

    @property
    def a_mhz(self) -> float:
        """Get the magnetic-dipole constant A in MHz."""
        if self._a_mhz is None:
            raise ValueError('Magnetic-dipole constant has not been set')
        return self._a_mhz

    @a_mhz.setter
    def a_mhz(self, value: Union[Quantity, Number]):
        """Set the magnetic-dipole constant A."""
        self._a_mhz = to_canonical(value, 'frequency')

    @property
    def b_mhz(self) -> float:
        """Get the electric-quadrupole constant B in MHz."""
        if self._b_mhz is None:
            raise ValueError('Electric-quadrupole constant has not been set')
        return self._b_mhz

    @b_mhz.setter
    def b_mhz(self, value: Union[Quantity, Number]):
        """Set the electric-quadrupole constant B."""
        self._b_mhz = to_canonical(value, 'frequency')

    @property
    def g_j(self) -> float:
        """Get the electronic Lande g-factor."""
        if self._g_j is None:
            raise ValueError('Electronic g-factor has not been set')
        return self._g_j

    @g_j.setter
    def g_j(self, value: Number):
        """Set the electronic Lande g-factor."""
        self._g_j = self._validate_finite(value, 'Electronic g-factor')

    @property
    def g_i(self) -> float:
        """Get the nuclear g-factor."""
        if self._g_i is None:
            raise ValueError('Nuclear g-factor has not been set')
        return self._g_i

    @g_i.setter
    def g_i(self, value: Number):
        """Set the nuclear g-factor."""
        self._g_i = self._validate_finite(value, 'Nuclear g-factor')

    @property
    def manifold_dimension(self) -> int:
        """Number of states (2I+1)(2J+1) in the manifold."""
        return int(round((2 * self.nuclear_spin + 1) * (2 * self.electronic_j + 1)))

    def missing(self) -> tuple:
        """Return the names of constants that have not been set."""
        return tuple(key for key in self.REQUIRED_KEYS if getattr(self, f'_{key}') is None)

    def __repr__(self) -> str:
        return f'HyperfineConstants({self.name!r}, missing={self.missing()})'
