import unittest
import numpy as np
from hypothesis import given, settings, strategies as st

from numerics import (spin_operators, propagate, unitary_fidelity, sso,
    is_hermitian, is_unitary, is_diagonal, unitary_log_generator,
    density_matrix, state_fidelity, basis_state, task_rng, random_unitary,
    random_hermitian, InvalidDimensionError, ContractViolationError,
    DimensionMismatchError)

dimensions = st.integers(min_value=2, max_value=8)
seeds = st.integers(min_value=0, max_value=2 ** 32)


def _commutator(a, b):
    return a @ b - b @ a


class TestSpinOperators(unittest.TestCase):
    """Test suite for spin-j matrices."""

    def setUp(self):
        """Set up the d=2 and d=3 operator sets."""
        self.jx2, self.jy2, self.jz2 = spin_operators(2)
        self.jx3, self.jy3, self.jz3 = spin_operators(3)

    def test_qubit_jx(self):
        """Test d=2 Jx is Pauli-x over two."""
        np.testing.assert_allclose(self.jx2, [[0, 0.5], [0.5, 0]], atol=1e-15)

    def test_qutrit_jx_entries(self):
        """Test d=3 Jx off-diagonal entries are all 1/sqrt(2)."""
        off = np.diag(self.jx3, k=1)
        np.testing.assert_allclose(off, [1 / np.sqrt(2)] * 2, atol=1e-15)

    def test_jz_ascending(self):
        """Test Jz is diagonal with entries -j..+j in level order."""
        _, _, jz = spin_operators(5)
        np.testing.assert_allclose(np.diag(jz).real, [-2, -1, 0, 1, 2])
        self.assertTrue(is_diagonal(jz))

    def test_invalid_dimension(self):
        """Test dimensions below two are rejected."""
        with self.assertRaises(InvalidDimensionError):
            spin_operators(1)
        with self.assertRaises(TypeError):
            spin_operators(2.0)

    @given(dimensions)
    def test_casimir(self, d):
        """Test Jx^2 + Jy^2 + Jz^2 = j(j+1) I."""
        jx, jy, jz = spin_operators(d)
        j = (d - 1) / 2
        np.testing.assert_allclose(jx @ jx + jy @ jy + jz @ jz,
            j * (j + 1) * np.eye(d), atol=1e-10)

    @given(dimensions)
    def test_commutation_relations(self, d):
        """Test [Jx,Jy]=iJz and cyclic permutations."""
        jx, jy, jz = spin_operators(d)
        np.testing.assert_allclose(_commutator(jx, jy), 1j * jz, atol=1e-10)
        np.testing.assert_allclose(_commutator(jy, jz), 1j * jx, atol=1e-10)
        np.testing.assert_allclose(_commutator(jz, jx), 1j * jy, atol=1e-10)


class TestPropagate(unittest.TestCase):
    """Test suite for the Hermitian propagator."""

    def setUp(self):
        """Set up a seeded generator."""
        self.rng = task_rng(11)

    def test_zero_hamiltonian(self):
        """Test exp(0) is the identity."""
        np.testing.assert_allclose(propagate(np.zeros((3, 3)), 2.0), np.eye(3), atol=1e-15)

    def test_scalar_exponentials(self):
        """Test H=diag(1,-1), t=pi gives -I."""
        u = propagate(np.diag([1.0, -1.0]), np.pi)
        np.testing.assert_allclose(u, -np.eye(2), atol=1e-12)

    def test_non_hermitian_rejected(self):
        """Test non-Hermitian input raises a contract violation."""
        with self.assertRaises(ContractViolationError):
            propagate(np.array([[0, 1], [0, 0]]), 1.0)

    @settings(max_examples=30)
    @given(st.integers(min_value=1, max_value=24), seeds,
        st.floats(min_value=-50, max_value=50))
    def test_random_hermitian_unitary(self, d, seed, t):
        """Test the propagator of a random Hermitian matrix is unitary."""
        h = random_hermitian(d, task_rng(seed))
        u = propagate(h, t)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(d), atol=1e-10)

    def test_log_generator_inverts_propagate(self):
        """Test unitary_log_generator recovers a generator reproducing U."""
        u = random_unitary(4, self.rng)
        h = unitary_log_generator(u, t=0.25)
        self.assertTrue(is_hermitian(h))
        np.testing.assert_allclose(propagate(h, 0.25), u, atol=1e-10)

    def test_log_generator_degenerate(self):
        """Test a degenerate unitary (reflection) still yields a Hermitian generator."""
        u = np.diag([1, 1, -1, 1]).astype(complex)
        h = unitary_log_generator(u, t=2.0)
        np.testing.assert_allclose(propagate(h, 2.0), u, atol=1e-10)


class TestFidelityMetrics(unittest.TestCase):
    """Test suite for unitary fidelity and SSO."""

    def setUp(self):
        """Set up a pair of random unitaries."""
        rng = task_rng(5)
        self.u = random_unitary(3, rng)
        self.v = random_unitary(3, rng)
        self.pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)

    def test_self_fidelity(self):
        """Test fidelity of U with itself and with a phased copy is one."""
        self.assertAlmostEqual(unitary_fidelity(self.u, self.u), 1.0, places=12)
        self.assertAlmostEqual(unitary_fidelity(self.u, np.exp(0.7j) * self.u), 1.0, places=12)

    def test_orthogonal_unitaries(self):
        """Test I against Pauli-x gives zero."""
        self.assertAlmostEqual(unitary_fidelity(np.eye(2), self.pauli_x), 0.0)

    def test_dimension_mismatch(self):
        """Test mismatched shapes are rejected."""
        with self.assertRaises(DimensionMismatchError):
            unitary_fidelity(np.eye(2), np.eye(3))
        with self.assertRaises(DimensionMismatchError):
            sso([1.0, 0.0], [1.0, 0.0, 0.0])

    @settings(max_examples=25)
    @given(st.integers(min_value=2, max_value=6), seeds)
    def test_fidelity_symmetric_and_left_invariant(self, d, seed):
        """Test F(U,V)=F(V,U) and F(WU,WV)=F(U,V)."""
        rng = task_rng(seed)
        u, v, w = (random_unitary(d, rng) for _ in range(3))
        self.assertAlmostEqual(unitary_fidelity(u, v), unitary_fidelity(v, u), places=10)
        self.assertAlmostEqual(unitary_fidelity(w @ u, w @ v), unitary_fidelity(u, v), places=10)

    def test_sso_examples(self):
        """Test SSO closed-form values."""
        self.assertAlmostEqual(sso([0.2, 0.8], [0.2, 0.8]), 1.0)
        self.assertAlmostEqual(sso([1.0, 0.0], [0.0, 1.0]), 0.0)
        self.assertAlmostEqual(sso([1.0, 0.0], [0.5, 0.5]), 0.5)

    def test_sso_rejects_invalid_distribution(self):
        """Test distributions not summing to one are rejected."""
        with self.assertRaises(ValueError):
            sso([0.5, 0.2], [0.5, 0.5])

    @given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=8), seeds)
    def test_sso_symmetric(self, weights, seed):
        """Test SSO symmetry and that it is one only for equal distributions."""
        e = np.array(weights) / np.sum(weights)
        p = task_rng(seed).dirichlet(np.ones(len(weights)))
        self.assertAlmostEqual(sso(e, p), sso(p, e), places=12)
        self.assertAlmostEqual(sso(e, e), 1.0, places=12)
        if np.max(np.abs(e - p)) > 1e-3:
            self.assertLess(sso(e, p), 1.0)


class TestStates(unittest.TestCase):
    """Test suite for state helpers."""

    def setUp(self):
        """Set up a qutrit basis state."""
        self.psi = basis_state(3, 1)

    def test_density_matrix_fidelity(self):
        """Test a pure state has unit overlap with its own density matrix."""
        rho = density_matrix(self.psi)
        self.assertAlmostEqual(state_fidelity(rho, self.psi), 1.0)
        self.assertAlmostEqual(state_fidelity(rho, basis_state(3, 0)), 0.0)

    def test_unnormalized_state_rejected(self):
        """Test an unnormalized vector is rejected."""
        with self.assertRaises(ValueError):
            density_matrix([1.0, 1.0])

    def test_predicates(self):
        """Test the structural predicates on simple matrices."""
        self.assertTrue(is_unitary(np.eye(2)))
        self.assertFalse(is_unitary(2 * np.eye(2)))
        self.assertFalse(is_diagonal([[1, 1], [0, 1]]))


class TestRandomStreams(unittest.TestCase):
    """Test suite for seeded task streams."""

    def setUp(self):
        """Set up the base seed."""
        self.seed = 1234

    def test_same_keys_same_stream(self):
        """Test identical (seed, keys) reproduce the same draws."""
        a = task_rng(self.seed, 2, 5).random(4)
        b = task_rng(self.seed, 2, 5).random(4)
        np.testing.assert_array_equal(a, b)

    def test_different_keys_differ(self):
        """Test different keys give independent streams."""
        a = task_rng(self.seed, 0).random(4)
        b = task_rng(self.seed, 1).random(4)
        self.assertFalse(np.array_equal(a, b))

    def test_invalid_seed(self):
        """Test negative seeds and keys are rejected."""
        with self.assertRaises(ValueError):
            task_rng(-1)
        with self.assertRaises(ValueError):
            task_rng(1, -3)


if __name__ == '__main__':
    unittest.main()
