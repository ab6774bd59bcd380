import numpy as np

from units_config import ureg
from control import PulseConvention, ToneSet, read_pulse_table
from grover import analytic_circuit, asp, circuit_from_table, mark_sweep_outcomes, average_sso, run
from grover.algorithm import oracle_matrix
from noise import DephasingModel, RBConfig, rb_run
from synthesis import SynthesisConfig, TargetSpec, synthesize, verify_pulse_table, combined_winner


def create_sample_noise():
    """Create a dephasing model for a d=5 qudit.

    Creates a model with:
    - Alternating field sensitivities of 0 and 1 MHz/G
    - The sensitivity-sum coherence decaying with T2 = 3 ms

    Returns:
        DephasingModel: The noise model
    """
    return DephasingModel.from_t2(np.array([0, 1, 0, 1, 0]) * ureg('MHz / gauss'), 3 * ureg.ms,
                                  normalization='sensitivity_sum')


def verify_tables():
    """Check the shipped pulse tables and report the winning convention."""
    tables = [read_pulse_table(f'fixtures/{name}') for name in ('table1_d5.csv', 'table2_d8.csv')]
    reports = [verify_pulse_table(table) for table in tables]
    winner = combined_winner(reports)
    print('\nPulse Table Verification:')
    print(f'Winning convention: {winner}')
    for table, report in zip(tables, reports):
        circuit = circuit_from_table(table, PulseConvention.from_name(winner), n_iterations=1)
        success = [o.asp_measured for o in mark_sweep_outcomes(circuit)]
        print(f'd={table.d}: mean fidelity {report.mean_fidelity(winner):.4f}, '
              f'success {min(success):.3f}..{max(success):.3f} (ideal {asp(table.d, 1):.3f})')


def run_synthesis():
    """Synthesize a two-pulse d=5 oracle."""
    cfg = SynthesisConfig(n_pulses=2, restarts=20, seed=0, early_stop=True,
                          convention=PulseConvention(phase_model='frame'))
    result = synthesize(TargetSpec.unitary(oracle_matrix(5, 2)), cfg)
    print('\nSynthesis:')
    print(f'Mark 2 oracle infidelity: {result.infidelity:.2e} after {result.iterations} iterations')


def run_grover():
    """Run ideal and dephased Grover search on d=5."""
    circuit = analytic_circuit(5, pulse_duration=(33 * ureg.microsecond).to('ms').magnitude)
    noise = create_sample_noise()
    ideal = run(circuit, marked=2)
    noisy = run(circuit, marked=2, noise=noise)
    print('\nGrover Search (d=5, mark 2):')
    print(f'Ideal success probability: {ideal.asp_measured:.4f}')
    print(f'Dephased success probability: {noisy.asp_measured:.4f}')
    print(f'Average SSO over marks: {average_sso(mark_sweep_outcomes(circuit, noise)):.4f}')


def run_benchmarking():
    """Run randomized benchmarking on d=5 under the sample noise."""
    tones = ToneSet.ideal(5, 10 * ureg.kHz)
    result = rb_run(RBConfig(lengths=(1, 5, 10, 20), n_sequences=5, seed=1), 5, tones,
                    create_sample_noise())
    print('\nRandomized Benchmarking (d=5):')
    print(f'Decay p: {result.decay:.5f}')
    print(f'Pulse fidelity: {result.pulse_fidelity:.5f}')


if __name__ == '__main__':
    verify_tables()
    run_synthesis()
    run_grover()
    run_benchmarking()
