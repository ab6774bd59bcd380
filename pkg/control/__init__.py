from control.tones import (GENERATOR_SCALE, ToneSet, PulseParams, PulseSequence,
    PulseConvention, DEFAULT_CONVENTION, ideal_amplitudes, pulse_duration)
from control.gates import (rotating_hamiltonian, generator, displacement, snap,
    DriveStep, FrameStep, pulse_steps, pulse_schedule, step_unitary, pulse_unitary,
    compose, evolve_nonideal, drive_propagator, drive_duration, physical_drive,
    GateBlock, blocks_unitary)
from control.pulse_table import (PulseTable, PulseTableRow, parse_pulse_table,
    read_pulse_table, format_pulse_table, pulse_table_rows, pulse_table_header)
