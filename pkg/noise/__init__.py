from noise.dephasing import (DephasingModel, lindblad_evolve, noisy_sequence, noisy_blocks)
from noise.ramsey import RamseyResult, ramsey, ramsey_jz, fit_ramsey, ramsey_signal
from noise.clifford import (N_CLIFFORDS, CliffordPulses, qubit_cliffords, clifford_index,
    clifford_su2_embedded, decompose_clifford, euler_zyz, lift, z_frame, inverse_index,
    compile_cliffords, mean_pulses_per_clifford)
from noise.benchmarking import (RBConfig, RBResult, rb_run, rb_sequences, survival,
    fit_decay, random_clifford_sequence)
from noise.calibration import (CalibrationProblem, CalibrationResult, Landscape,
    NelderMeadResult, calibration_landscape, nelder_mead, nelder_mead_calibrate)
