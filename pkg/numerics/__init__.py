from numerics.errors import (ConfigurationError, ContractViolationError,
    DegenerateSpectrumError, DimensionMismatchError, FitError,
    IntegrationError, InvalidDimensionError, PulseTableError)
from numerics.spin import spin_operators, spin_values, raising_operator, rotation_generator
from numerics.linalg import (is_hermitian, is_unitary, is_diagonal, propagate,
    unitary_log_generator, unitary_fidelity, sso, as_state, as_distribution,
    basis_state, equal_superposition, density_matrix, state_fidelity)
from numerics.random import task_rng, check_seed, random_unitary, random_hermitian
