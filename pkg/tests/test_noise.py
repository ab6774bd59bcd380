import unittest
import numpy as np
from hypothesis import given, strategies as st

from control import (PulseParams, PulseSequence, PulseConvention, ToneSet, compose, displacement,
    rotating_hamiltonian)
from noise import (DephasingModel, lindblad_evolve, noisy_sequence, ramsey, ramsey_jz, fit_ramsey,
    qubit_cliffords, clifford_index, clifford_su2_embedded, decompose_clifford, euler_zyz,
    compile_cliffords, inverse_index, mean_pulses_per_clifford, RBConfig, rb_run, rb_sequences,
    CalibrationProblem, calibration_landscape, nelder_mead, nelder_mead_calibrate)
from numerics import (ContractViolationError, DegenerateSpectrumError, FitError, IntegrationError,
    basis_state, density_matrix, propagate, random_hermitian, random_unitary, spin_operators,
    state_fidelity, task_rng, unitary_fidelity)
from units_config import ureg

OMEGA = 2 * np.pi * 10.0


def random_density(d, seed):
    psi = random_unitary(d, task_rng(seed))[:, 0]
    return density_matrix(psi)


class TestDephasingModel(unittest.TestCase):
    """Test suite for the dephasing model and its normalizations."""

    def setUp(self):
        """Set up linear sensitivities for d=4."""
        self.sensitivities = (0.0, 1.4, 2.8, 4.2)

    def test_slowest_normalization(self):
        """Test the slowest coherence decays at 1/T2."""
        model = DephasingModel.from_t2(self.sensitivities, 3.0)
        rates = model.coherence_rates()
        self.assertAlmostEqual(rates[rates > 0].min(), 1 / 3.0)
        self.assertEqual(model.t2_reference, 3.0)

    def test_sensitivity_sum_normalization(self):
        """Test a coherence with the summed sensitivity decays at 1/T2."""
        model = DephasingModel.from_t2(self.sensitivities, 3 * ureg.ms, 'sensitivity_sum')
        total = sum(abs(s) for s in self.sensitivities)
        self.assertAlmostEqual(0.5 * model.gamma * total ** 2, 1 / 3.0)

    def test_quantity_sensitivities(self):
        """Test sensitivities given in kHz/G are converted."""
        model = DephasingModel(sensitivities=np.array([0.0, 1400.0]) * ureg.kHz / ureg.gauss)
        np.testing.assert_allclose(model.sensitivities, (0.0, 1.4))

    def test_validation(self):
        """Test negative rates, unknown normalizations and equal sensitivities."""
        with self.assertRaises(ValueError):
            DephasingModel(sensitivities=(0, 1), gamma=-1.0)
        with self.assertRaises(ValueError):
            DephasingModel.from_t2((0, 1), 3.0, 'fastest')
        with self.assertRaises(DegenerateSpectrumError):
            DephasingModel.from_t2((1, 1, 1), 3.0)

    def test_scaled(self):
        """Test rate scaling."""
        model = DephasingModel.from_t2(self.sensitivities, 3.0)
        self.assertAlmostEqual(model.scaled(2.0).gamma, 2 * model.gamma)
        self.assertIsNone(model.scaled(2.0).t2_reference)


class TestLindblad(unittest.TestCase):
    """Test suite for the master-equation integrator."""

    def setUp(self):
        """Set up a d=3 state, Hamiltonian and jump operator."""
        self.rho = random_density(3, 1)
        self.h = random_hermitian(3, task_rng(2))
        self.l = np.diag([0.0, 1.0, 2.5]).astype(complex)

    def test_no_dephasing_is_unitary(self):
        """Test gamma=0 reproduces exp(-iHT) rho exp(iHT)."""
        u = propagate(self.h, 0.7)
        np.testing.assert_allclose(lindblad_evolve(self.rho, self.h, self.l, 0.0, 0.7),
                                   u @ self.rho @ u.conj().T, atol=1e-8)

    def test_runge_kutta_coherent_part(self):
        """Test the integrator against the exact propagator when L vanishes."""
        u = propagate(self.h, 0.7)
        out = lindblad_evolve(self.rho, self.h, np.zeros((3, 3)), 1.0, 0.7)
        np.testing.assert_allclose(out, u @ self.rho @ u.conj().T, atol=1e-7)

    def test_pure_dephasing_closed_form(self):
        """Test H=0 keeps populations and damps coherences as exp(-gamma dL^2 T/2)."""
        gamma, t = 0.8, 1.3
        out = lindblad_evolve(self.rho, np.zeros((3, 3)), self.l, gamma, t)
        np.testing.assert_allclose(np.diag(out), np.diag(self.rho), atol=1e-12)
        s = np.diag(self.l).real
        expected = self.rho * np.exp(-0.5 * gamma * (s[:, None] - s[None, :]) ** 2 * t)
        np.testing.assert_allclose(out, expected, atol=1e-9)

    def test_two_level_closed_form(self):
        """Test the qubit coherence decays exactly as the closed form."""
        plus = density_matrix(np.array([1, 1]) / np.sqrt(2))
        out = lindblad_evolve(plus, np.zeros((2, 2)), np.diag([0.0, 1.0]), 2.0, 1.5)
        self.assertAlmostEqual(out[0, 1].real, 0.5 * np.exp(-1.5), delta=1e-4)

    def test_maximally_mixed_stationary(self):
        """Test I/d is a fixed point for any H and diagonal L."""
        mixed = np.eye(3) / 3
        np.testing.assert_allclose(lindblad_evolve(mixed, self.h, self.l, 1.5, 2.0), mixed, atol=1e-12)

    def test_long_run_trace(self):
        """Test ten milliseconds of driven dephasing keep the trace and positivity."""
        tones = ToneSet.ideal(5, 2 * np.pi * 1.0)
        h = rotating_hamiltonian(tones, np.linspace(0, 1, 4))
        model = DephasingModel.from_t2((0.0, 1.0, 2.0, 3.0, 4.0), 3.0)
        out = lindblad_evolve(random_density(5, 3), h, model.lindblad_operator(), model.gamma, 10.0)
        self.assertLess(abs(np.trace(out) - 1), 1e-8)
        np.testing.assert_array_equal(out, out.conj().T)
        self.assertGreater(np.linalg.eigvalsh(out).min(), -1e-7)

    def test_errors(self):
        """Test bad steps, operators and states are rejected."""
        with self.assertRaises(IntegrationError):
            lindblad_evolve(self.rho, self.h, self.l, 1.0, 1.0, dt=0.0)
        with self.assertRaises(ContractViolationError):
            lindblad_evolve(self.rho, self.h, np.ones((3, 3)), 1.0, 1.0)
        with self.assertRaises(ContractViolationError):
            lindblad_evolve(2 * self.rho, self.h, self.l, 1.0, 1.0)
        with self.assertRaises(IntegrationError):
            lindblad_evolve(self.rho, self.h, self.l, 1e6, 1.0, dt=0.5)


class TestNoisySequence(unittest.TestCase):
    """Test suite for pulse sequences under dephasing."""

    def setUp(self):
        """Set up a d=4 sequence, ideal tones and a dephasing model."""
        self.seq = PulseSequence(d=4, pulses=(PulseParams(1.1, (0.3, -0.2, 0.9)),
                                              PulseParams(-0.6, (1.0, 0.0, 2.0))))
        self.tones = ToneSet.ideal(4, OMEGA)
        self.model = DephasingModel.from_t2((0.0, 1.0, 2.0, 3.0), 0.5)
        self.rho0 = density_matrix(basis_state(4, 0))

    def test_noiseless_matches_compose(self):
        """Test gamma=0 gives the composed unitary for every phase model."""
        for convention in (PulseConvention(), PulseConvention(phase_model='frame', order='reverse')):
            u = compose(self.seq, convention)
            out = noisy_sequence(self.rho0, self.seq, self.tones, self.model.scaled(0.0), convention)
            np.testing.assert_allclose(out, u @ self.rho0 @ u.conj().T, atol=1e-8)

    def test_empty_sequence(self):
        """Test a sequence without pulses leaves the state unchanged."""
        out = noisy_sequence(self.rho0, PulseSequence(d=4), self.tones, self.model)
        np.testing.assert_array_equal(out, self.rho0)

    def test_fidelity_monotone(self):
        """Test fidelity to the ideal output falls as gamma grows."""
        ideal = compose(self.seq)[:, 0]
        values = [state_fidelity(noisy_sequence(self.rho0, self.seq, self.tones, self.model.scaled(k)), ideal)
                  for k in (0.0, 1.0, 2.0, 4.0, 8.0)]
        self.assertTrue(all(b < a for a, b in zip(values, values[1:])))


class TestRamsey(unittest.TestCase):
    """Test suite for the Ramsey simulation and fit."""

    def setUp(self):
        """Set up a detuned qubit."""
        self.delta = 2 * np.pi * 1.0
        self.tones = ToneSet.ideal(2, OMEGA, detunings=(self.delta,))
        self.delays = np.linspace(0.05, 4.0, 60)

    def test_coherent_oscillation(self):
        """Test the noiseless signal is cos(delta t)/2."""
        jz = ramsey_jz(2, self.tones, DephasingModel.noiseless(2), self.delays)
        np.testing.assert_allclose(jz, 0.5 * np.cos(self.delta * self.delays), atol=1e-8)

    def test_zero_delay(self):
        """Test back-to-back pi/2 pulses move |0> to the top level."""
        jz = ramsey_jz(5, ToneSet.ideal(5, OMEGA), DephasingModel.noiseless(5), [0.0])
        self.assertAlmostEqual(jz[0], 2.0, delta=1e-9)

    def test_fitted_t2(self):
        """Test the fitted T2 is within 10% of the two-level closed form."""
        model = DephasingModel.from_t2((0.0, 1.0), 2.0)
        result = ramsey(2, self.tones, model, self.delays)
        self.assertTrue(result.fit_ok)
        self.assertAlmostEqual(result.t2, 2.0, delta=0.2)
        self.assertAlmostEqual(result.frequency, self.delta, delta=0.05 * self.delta)

    def test_flat_signal_reported(self):
        """Test data without oscillation or decay are reported as a failed fit."""
        tones = ToneSet.ideal(2, OMEGA)
        result = ramsey(2, tones, DephasingModel.noiseless(2), self.delays)
        self.assertFalse(result.fit_ok)
        self.assertIsNone(result.t2)
        self.assertEqual(len(result.rows()), 60)

    def test_delay_validation(self):
        """Test delays must increase."""
        with self.assertRaises(ValueError):
            fit_ramsey([1.0, 0.5], [0.1, 0.2])


class TestClifford(unittest.TestCase):
    """Test suite for the embedded Clifford group and its native pulses."""

    def setUp(self):
        """Set up the qubit group."""
        self.group = qubit_cliffords()

    def test_group_size(self):
        """Test there are 24 elements and the identity comes first."""
        self.assertEqual(len(self.group), 24)
        np.testing.assert_array_equal(self.group[0], np.eye(2))
        np.testing.assert_allclose(clifford_su2_embedded(5)[0], np.eye(5), atol=1e-12)

    def test_euler_round_trip(self):
        """Test the Euler angles rebuild each qubit element."""
        for c in self.group:
            alpha, beta, gamma = euler_zyz(c)
            rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
            ry = np.array([[np.cos(beta / 2), -np.sin(beta / 2)], [np.sin(beta / 2), np.cos(beta / 2)]])
            self.assertAlmostEqual(unitary_fidelity(rz(alpha) @ ry @ rz(gamma), c), 1.0, delta=1e-12)

    def test_closure(self):
        """Test products and inverses stay in the group for d = 2..8."""
        for d in range(2, 9):
            elements = np.array(clifford_su2_embedded(d))
            products = np.einsum('aij,bjk->abik', elements, elements).reshape(-1, d, d)
            overlaps = np.abs(np.einsum('cij,pij->pc', elements.conj(), products)) / d
            self.assertTrue(np.all(overlaps.max(axis=1) > 1 - 1e-9), f'd={d}')
            inverses = np.abs(np.einsum('cij,pji->pc', elements.conj(), elements.conj())) / d
            self.assertTrue(np.all(inverses.max(axis=1) > 1 - 1e-9), f'd={d}')

    def test_recomposition(self):
        """Test every native form reproduces its Clifford for d = 2..8."""
        for d in range(2, 9):
            for index, target in enumerate(clifford_su2_embedded(d)):
                native = decompose_clifford(index)
                self.assertGreater(unitary_fidelity(native.unitary(d), target), 1 - 1e-8)

    def test_identity_and_x(self):
        """Test the identity needs nothing and X is a single pi pulse at phase zero."""
        identity = decompose_clifford(0)
        self.assertEqual(identity.n_pulses, 0)
        self.assertEqual(len(identity.sequence(3)), 0)
        x = decompose_clifford(clifford_index(np.array([[0, 1], [1, 0]])))
        self.assertEqual(x.drive_angle, np.pi)
        self.assertAlmostEqual(unitary_fidelity(x.unitary(4), displacement(4, PulseParams.uniform(4, np.pi))),
                               1.0, delta=1e-9)

    def test_hadamard(self):
        """Test the Hadamard is one pi/2 pulse plus a frame update."""
        h = decompose_clifford(clifford_index(np.array([[1, 1], [1, -1]]) / np.sqrt(2)))
        self.assertEqual(h.n_pulses, 1)
        self.assertAlmostEqual(h.drive_angle, np.pi / 2)

    def test_mean_pulses(self):
        """Test twenty of the twenty-four elements need a pulse."""
        self.assertAlmostEqual(mean_pulses_per_clifford(), 5 / 6)

    def test_pulse_angles(self):
        """Test each element runs as no pulse, one pi pulse or one pi/2 pulse."""
        angles = [decompose_clifford(i).drive_angle for i in range(24)]
        self.assertEqual(sum(np.isclose(a, 0.0) for a in angles), 4)
        self.assertEqual(sum(np.isclose(a, np.pi) for a in angles), 4)
        self.assertEqual(sum(np.isclose(a, np.pi / 2) for a in angles), 16)

    @given(st.integers(min_value=0, max_value=2 ** 32), st.integers(min_value=2, max_value=6))
    def test_compiled_sequence(self, seed, d):
        """Test frame push-through keeps the sequence unitary up to a trailing z rotation."""
        indices = [int(i) for i in task_rng(seed).integers(0, 24, size=6)]
        seq, chi = compile_cliffords(indices, d)
        expected = np.eye(d, dtype=complex)
        embedded = clifford_su2_embedded(d)
        for i in indices:
            expected = embedded[i] @ expected
        actual = propagate(spin_operators(d)[2], chi) @ compose(seq)
        self.assertGreater(unitary_fidelity(actual, expected), 1 - 1e-8)
        inverted, _ = compile_cliffords(indices + [inverse_index(indices)], d)
        self.assertAlmostEqual(abs(compose(inverted)[0, 0]), 1.0, delta=1e-8)


class TestRandomizedBenchmarking(unittest.TestCase):
    """Test suite for randomized benchmarking."""

    def setUp(self):
        """Set up d=3 tones and a dephasing model."""
        self.tones = ToneSet.ideal(3, OMEGA)
        self.model = DephasingModel.from_t2((0.0, 1.0, 2.0), 0.5)

    def test_config_validation(self):
        """Test lengths must increase and sequences be positive."""
        with self.assertRaises(ValueError):
            RBConfig(lengths=(5, 5, 10))
        with self.assertRaises(ValueError):
            RBConfig(n_sequences=0)

    def test_noiseless_flat(self):
        """Test survival is one at every length up to 100 without noise."""
        cfg = RBConfig(lengths=(1, 10, 50, 100), n_sequences=3, seed=4)
        result = rb_run(cfg, 3, self.tones, self.model.scaled(0.0))
        np.testing.assert_allclose(result.survival, 1.0, atol=1e-8)
        self.assertAlmostEqual(result.decay, 1.0, delta=1e-4)
        self.assertEqual(len(result.rows()), 4)

    def test_too_few_lengths(self):
        """Test a two-length run cannot be fitted."""
        with self.assertRaises(FitError):
            rb_run(RBConfig(lengths=(1, 10)), 3, self.tones, self.model)

    def test_decay_grows_with_noise(self):
        """Test doubling gamma lowers the fitted p."""
        cfg = RBConfig(lengths=(1, 5, 10, 20, 40), n_sequences=4, seed=2)
        weak = rb_run(cfg, 3, self.tones, self.model)
        strong = rb_run(cfg, 3, self.tones, self.model.scaled(2.0), workers=2)
        self.assertLess(weak.decay, 1.0)
        self.assertGreater(1 - strong.decay, 1 - weak.decay)
        self.assertLess(strong.pulse_fidelity, weak.pulse_fidelity)

    def test_sequences_seeded(self):
        """Test sequences depend only on the seed."""
        cfg = RBConfig(lengths=(1, 2, 3), n_sequences=2, seed=9)
        self.assertEqual(rb_sequences(cfg, 3), rb_sequences(cfg, 3))


class TestCalibration(unittest.TestCase):
    """Test suite for Nelder-Mead amplitude calibration."""

    def test_quadratic(self):
        """Test convergence on a three-dimensional quadratic."""
        a = np.array([0.3, -1.2, 2.0])
        result = nelder_mead(lambda x: float(np.sum((x - a) ** 2)), [1.0, 1.0, 1.0])
        np.testing.assert_allclose(result.x, a, atol=1e-5)
        self.assertTrue(result.converged)

    def test_start_at_truth(self):
        """Test a search started at the optimum stays there."""
        problem = CalibrationProblem.from_rb(3, OMEGA, perturbation=0.0)
        result = nelder_mead_calibrate(problem)
        np.testing.assert_allclose(result.recovered, [1.0, 1.0], atol=1e-6)

    def test_recovery(self):
        """Test a +10% start is pulled back within 1% of the ideal amplitudes."""
        problem = CalibrationProblem.from_rb(5, OMEGA, n_sequences=4, length=10, seed=1)
        result = nelder_mead_calibrate(problem)
        self.assertLess(result.rel_error.max(), 0.01)
        self.assertEqual(set(result.to_record()), {'recovered', 'true', 'rel_error', 'iterations',
                                                   'converged', 'objective'})

    def test_landscape_peak(self):
        """Test the averaged landscape peaks at the true amplitudes."""
        problem = CalibrationProblem.from_rb(3, OMEGA, n_sequences=4, length=10, seed=3)
        grid = np.linspace(0.8, 1.2, 11)
        landscape = calibration_landscape(problem, (0, 1), grid, grid)
        x, y = landscape.argmax()
        step = grid[1] - grid[0]
        self.assertLessEqual(abs(x - 1.0), step + 1e-12)
        self.assertLessEqual(abs(y - 1.0), step + 1e-12)
        self.assertEqual(landscape.per_sequence.shape, (4, 11, 11))

    def test_empty_landscape(self):
        """Test a zero-size grid gives empty output."""
        problem = CalibrationProblem.from_rb(3, OMEGA, n_sequences=2, length=3)
        landscape = calibration_landscape(problem, (0, 1), [], [])
        self.assertEqual(landscape.averaged.size, 0)
        self.assertIsNone(landscape.argmax())

    def test_validation(self):
        """Test starts outside the bounds are rejected."""
        with self.assertRaises(ValueError):
            CalibrationProblem(d=3, omega=OMEGA, true_amplitudes=(1, 1), start_amplitudes=(2, 1),
                               sequences=())
