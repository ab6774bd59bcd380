"""Seeded, splittable random streams.

All randomness flows from one integer seed. Each independent task (a
synthesis restart, an RB sequence, a calibration sequence) draws from its own
stream identified by a tuple of non-negative integer keys, so results do not
depend on the order in which parallel tasks finish.
"""

import numpy as np
from scipy.stats import unitary_group

MAX_SEED = 2 ** 64 - 1


def check_seed(seed: int) -> int:
    """Validate a 64-bit unsigned seed."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f'Seed must be an integer, got {seed!r}')
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f'Seed must be in [0, 2**64 - 1], got {seed}')
    return int(seed)


def task_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for the task identified by ``keys`` under ``seed``.

    Examples:
        >>> a = task_rng(7, 0, 3).random()
        >>> b = task_rng(7, 0, 3).random()
        >>> a == b
        True
    """
    for key in keys:
        if isinstance(key, bool) or not isinstance(key, (int, np.integer)) or key < 0:
            raise ValueError(f'Stream keys must be non-negative integers, got {key!r}')
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary drawn from ``rng``."""
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=complex)


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries of standard deviation ``scale``."""
    a = rng.normal(scale=scale, size=(d, d)) + 1j * rng.normal(scale=scale, size=(d, d))
    return 0.5 * (a + a.conj().T)
