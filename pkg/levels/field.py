import math
from dataclasses import dataclass, field, replace
from typing import ClassVar, Iterable, List, Tuple, Union
from units_config import Quantity, BOHR_MAGNETON_MHZ_PER_GAUSS
from utils.unit_utils import to_canonical


@dataclass
class FieldConfig:
    """Static quantization field applied to the manifold.

    Attributes:
        bz: Field along the quantization axis in gauss (Quantity or float).
        bohr_magneton: Bohr magneton over Planck's constant in MHz/G. Defaults
            to the value derived from pint's physical constants.
    """
    FINITE_DIFFERENCE_STEP: ClassVar[float] = 1e-3
    bz: Union[Quantity, float]
    bohr_magneton: Union[Quantity, float] = field(default=BOHR_MAGNETON_MHZ_PER_GAUSS)

    def __post_init__(self) -> None:
        """Convert to canonical units and validate."""
        self.bz = to_canonical(self.bz, 'field')
        self.bohr_magneton = to_canonical(self.bohr_magneton, 'sensitivity')
        self.validate()

    def validate(self) -> None:
        """Validate field parameters.

        Checks:
        - Bz is finite and non-negative
        - The Bohr magneton is finite and positive

        Raises:
            ValueError: If any validation check fails
        """
        if not math.isfinite(self.bz) or self.bz < 0:
            raise ValueError(f'Field Bz must be finite and non-negative, got {self.bz} G')
        if not math.isfinite(self.bohr_magneton) or self.bohr_magneton <= 0:
            raise ValueError(f'Bohr magneton must be positive, got {self.bohr_magneton} MHz/G')

    def with_field(self, bz: Union[Quantity, float]) -> 'FieldConfig':
        """Return a copy at a different field strength."""
        return replace(self, bz=bz)

    @classmethod
    def scan(cls, values: Iterable[Union[Quantity, float]],
             bohr_magneton: Union[Quantity, float] = BOHR_MAGNETON_MHZ_PER_GAUSS) -> List['FieldConfig']:
        """Create one configuration per field value, preserving order."""
        return [cls(bz=value, bohr_magneton=bohr_magneton) for value in values]
