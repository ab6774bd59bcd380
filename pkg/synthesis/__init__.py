from synthesis.targets import (TargetSpec, infidelity, unitary_infidelity, gradient,
    DEFAULT_GRAD_STEP)
from synthesis.optimizer import (SynthesisConfig, SynthesisResult, synthesize, descend,
    initial_sequence)
from synthesis.verification import (OperationCheck, VerificationReport, verify_pulse_table,
    combined_winner, operation_target, target_fidelity, action_fidelity)
