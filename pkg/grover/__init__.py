from grover.algorithm import (oracle_matrix, reflection_matrix, reflection_phase, grover_step,
    asp, optimal_iterations, parse_operation_name)
from grover.circuit import (GroverCircuit, GroverOutcome, IterationSweep, analytic_circuit,
    circuit_from_table, preparation_matrix, ideal_distribution, run, mark_sweep,
    mark_sweep_outcomes, average_sso, iteration_sweep, fit_iteration_fidelity)
