"""Command-line front end.

Usage:
    quditctl <command> [--config FILE] [--seed N] [--out DIR] [--threads N] [--log-level LEVEL]

Commands: levels, synth, verify-tables, grover, rb, ramsey, calibrate. Each
reads its section of the JSON config, writes plot-ready CSV and JSON result
files plus a ``<command>_run.json`` record into the output directory, and
exits 0 only when every requested computation completed.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from cli import __version__
from cli.config import COMMANDS, RunConfig, load_run_config
from cli.records import RunRecord, plain, write_csv, write_json, write_text_atomic
from control import PulseConvention, ToneSet, format_pulse_table, read_pulse_table
from grover import (analytic_circuit, asp, average_sso, circuit_from_table, iteration_sweep,
                    mark_sweep_outcomes, oracle_matrix, reflection_matrix)
from levels import (FieldConfig, HyperfineConstants, LevelStructure, ScoringWeights,
                    TRANSITION_CSV_HEADER, ASSIGNMENT_CSV_HEADER, assignment_rows,
                    score_qudit_candidates, transition_rows)
from noise import (CalibrationProblem, DephasingModel, RBConfig, calibration_landscape,
                   nelder_mead_calibrate, ramsey, rb_run)
from numerics import equal_superposition
from numerics.errors import ConfigurationError, PulseTableError
from numerics.random import random_unitary, task_rng
from synthesis import SynthesisConfig, TargetSpec, combined_winner, synthesize, verify_pulse_table
from units_config import ureg
from utils.unit_utils import format_number, to_angular_khz, to_canonical

logger = logging.getLogger(__name__)

PROGRAM = 'quditctl'
REPO_ROOT = Path(__file__).resolve().parents[1]
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')
# Stream (seed, 0, 0) draws random synthesis targets; restarts use (seed, r).
TARGET_STREAM = (0, 0)
# The shipped pulse tables run a single oracle-reflection round.
PUBLISHED_ROUNDS = 1


class CommandFailed(RuntimeError):
    """Raised when some sub-tasks of a command failed; the others were written."""


def resolve_input(path: str) -> Path:
    """Input path as given, falling back to the repository root for relative paths."""
    candidate = Path(path)
    if not candidate.is_absolute() and not candidate.exists() and (REPO_ROOT / candidate).exists():
        return REPO_ROOT / candidate
    return candidate


def _emit_csv(config: RunConfig, record: RunRecord, name: str, header, rows) -> None:
    write_csv(config.out_dir / name, header, rows)
    record.outputs.append(name)


def _emit_json(config: RunConfig, record: RunRecord, name: str, value) -> None:
    write_json(config.out_dir / name, value)
    record.outputs.append(name)


def noise_model(section: Optional[dict], d: int) -> DephasingModel:
    """Dephasing model for a config ``noise`` section; noiseless when absent."""
    if section is None:
        return DephasingModel.noiseless(d)
    values = section['sensitivities'] if section['sensitivities'] is not None else (0.0,) * d
    if len(values) != d:
        raise ConfigurationError('noise.sensitivities', f'needs {d} entries, got {len(values)}')
    sensitivities = np.asarray(values) * ureg('MHz / gauss')
    if section['t2_ms'] is not None:
        return DephasingModel.from_t2(sensitivities, section['t2_ms'] * ureg.ms,
                                      section['normalization'])
    return DephasingModel(sensitivities=sensitivities, gamma=section['gamma'] / ureg.ms)


def drive_tones(d: int, omega_khz: float, detunings_khz: Optional[Sequence[float]] = None) -> ToneSet:
    detunings = None
    if detunings_khz is not None:
        if len(detunings_khz) != d - 1:
            raise ConfigurationError('ramsey.detunings_khz', f'needs {d - 1} entries, got {len(detunings_khz)}')
        detunings = [to_angular_khz(v * ureg.kHz) for v in detunings_khz]
    return ToneSet.ideal(d, omega_khz * ureg.kHz, detunings)


def cmd_levels(config: RunConfig) -> RunRecord:
    """Transition table and ranked qudit assignments, optionally over a field scan."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    raw = dict(config['constants'])
    name = raw.pop('name')
    raw['a_mhz'] = raw['a_mhz'] * ureg.MHz
    raw['b_mhz'] = raw['b_mhz'] * ureg.MHz
    constants = HyperfineConstants.from_mapping(name, raw)
    structure = LevelStructure(constants, FieldConfig(bz=config['bz_gauss'] * ureg.gauss))
    table = structure.transitions(config['pols'])
    _emit_csv(config, record, 'levels_transitions.csv', TRANSITION_CSV_HEADER, transition_rows(table))
    weights = ScoringWeights(**config['weights']) if config['weights'] is not None else None
    assignments = score_qudit_candidates(table, config.d, weights, config['top_k']) if table else []
    _emit_csv(config, record, 'levels_assignments.csv', ASSIGNMENT_CSV_HEADER,
              assignment_rows(assignments))
    if config['bz_scan_gauss']:
        rows = []
        for scanned in structure.scan_field([b * ureg.gauss for b in config['bz_scan_gauss']]):
            rows.extend((scanned.field.bz, *row) for row in
                        transition_rows(scanned.transitions(config['pols'])))
        _emit_csv(config, record, 'levels_scan.csv', ('bz_gauss', *TRANSITION_CSV_HEADER), rows)
    record.results = plain({
        'n_levels': len(structure.levels),
        'n_transitions': len(table),
        'energies_mhz': structure.energies(),
        'best_assignment': list(assignments[0].state_indices) if assignments else None,
    })
    record.metrics = {'n_assignments': len(assignments)}
    return record


def synthesis_target(config: RunConfig) -> TargetSpec:
    d, kind = config.d, config['target']
    if kind == 'oracle':
        if config['mark'] >= d:
            raise ConfigurationError('synth.mark', f'must be below d={d}, got {config["mark"]}')
        return TargetSpec.unitary(oracle_matrix(d, config['mark']))
    if kind == 'identity':
        return TargetSpec.unitary(np.eye(d))
    if kind == 'equal_superposition':
        return TargetSpec.state(equal_superposition(d))
    if kind == 'reflection':
        return TargetSpec.unitary(reflection_matrix(d))
    return TargetSpec.unitary(random_unitary(d, task_rng(config.seed, *TARGET_STREAM)))


def _operation_name(config: RunConfig) -> str:
    if config['name']:
        return config['name']
    return {'oracle': f'Mark {config["mark"]}', 'identity': 'Identity',
            'equal_superposition': 'Equal sup.', 'reflection': 'Reflection',
            'random': 'Random'}[config['target']]


def cmd_synth(config: RunConfig) -> RunRecord:
    """Synthesize a pulse sequence and write it as a one-operation pulse table."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    try:
        convention = PulseConvention.from_name(config['convention'])
    except ValueError as exc:
        raise ConfigurationError('synth.convention', str(exc)) from exc
    cfg = SynthesisConfig(n_pulses=config['n_pulses'], restarts=config['restarts'],
                          max_iters=config['max_iters'], step=config['step'], tol=config['tol'],
                          seed=config.seed, workers=config.threads,
                          early_stop=config['early_stop'], convention=convention)
    result = synthesize(synthesis_target(config), cfg)
    name = _operation_name(config)
    write_text_atomic(config.out_dir / 'synth_pulses.csv', format_pulse_table({name: result.sequence}))
    record.outputs.append('synth_pulses.csv')
    summary = dict(result.to_record(), operation=name, d=config.d, target=config['target'],
                   convention=convention.name)
    _emit_json(config, record, 'synth_result.json', summary)
    record.results = plain(summary)
    record.metrics = {'infidelity': result.infidelity, 'converged': result.converged}
    return record


def _verify_one(path: str):
    resolved = resolve_input(path)
    try:
        table = read_pulse_table(resolved)
    except (FileNotFoundError, PulseTableError) as exc:
        return resolved, None, str(exc)
    return resolved, verify_pulse_table(table), None


def cmd_verify_tables(config: RunConfig) -> RunRecord:
    """Verify every pulse table and report the convention that fits them all."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        outcomes = list(pool.map(_verify_one, config['tables']))
    verified = []
    for path, report, error in outcomes:
        if error is not None:
            logger.error('%s', error)
            record.failures.append(error)
            continue
        record.add_fixture(path)
        verified.append((path, report))
    winner = combined_winner([report for _, report in verified])
    tables = []
    for path, report in verified:
        entry = report.to_dict(winner)
        entry['path'] = Path(path).name
        if winner is not None:
            circuit = circuit_from_table(read_pulse_table(path), PulseConvention.from_name(winner),
                                         n_iterations=PUBLISHED_ROUNDS)
            entry['success_probabilities'] = [o.asp_measured for o in mark_sweep_outcomes(circuit)]
            entry['ideal_success_probability'] = asp(report.d, circuit.n_iterations)
        tables.append(entry)
    summary = {'winner': winner, 'tables': tables, 'failures': list(record.failures)}
    _emit_json(config, record, 'verification.json', summary)
    record.results = plain(summary)
    record.metrics = {'n_tables': len(verified), 'n_failed': len(record.failures)}
    return record


def cmd_grover(config: RunConfig) -> RunRecord:
    """Mark sweep and optional iteration sweep for an analytic or table circuit."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    d = config.d
    noise = noise_model(config['noise'], d) if config['noise'] is not None else None
    if config['source'] == 'analytic':
        duration = to_canonical(config['pulse_duration_us'] * ureg.microsecond, 'time')
        circuit = analytic_circuit(d, duration, config['n_iterations'])
        convention = None
    else:
        if config['table'] is None:
            raise ConfigurationError('grover.table', "is required when source is 'table'")
        path = resolve_input(config['table'])
        table = read_pulse_table(path)
        record.add_fixture(path)
        if table.d != d:
            raise ConfigurationError('grover.d', f'is {d} but {path.name} is for d={table.d}')
        if config['convention'] == 'winner':
            convention = PulseConvention.from_name(verify_pulse_table(table).winner
                                                   or PulseConvention().name)
        else:
            try:
                convention = PulseConvention.from_name(config['convention'])
            except ValueError as exc:
                raise ConfigurationError('grover.convention', str(exc)) from exc
        rounds = PUBLISHED_ROUNDS if config['n_iterations'] is None else config['n_iterations']
        circuit = circuit_from_table(table, convention, drive_tones(d, config['omega_khz']), rounds)
    outcomes = mark_sweep_outcomes(circuit, noise, config.threads)
    header = ('marked', *(f'p_{k}' for k in range(d)))
    _emit_csv(config, record, 'grover_marks.csv', header,
              [(o.marked, *o.distribution.tolist()) for o in outcomes])
    summary = {
        'd': d,
        'n_iterations': circuit.n_iterations,
        'provenance': circuit.provenance,
        'convention': convention.name if convention is not None else None,
        'asp_ideal': asp(d, circuit.n_iterations),
        'asp_measured': [o.asp_measured for o in outcomes],
        'sso': [o.sso_vs_ideal for o in outcomes],
        'average_sso': average_sso(outcomes),
    }
    if config['n_max']:
        if config['sweep_mark'] >= d:
            raise ConfigurationError('grover.sweep_mark', f'must be below d={d}')
        sweep = iteration_sweep(circuit, config['sweep_mark'], config['n_max'], noise, config['fit'])
        _emit_csv(config, record, 'grover_iterations.csv', ('N', 'p_measured', 'p_ideal'), sweep.rows())
        summary['iteration_fidelity'] = sweep.fidelity
        summary['iteration_fit'] = sweep.fit
    _emit_json(config, record, 'grover.json', summary)
    record.results = plain(summary)
    record.metrics = {'average_sso': summary['average_sso']}
    return record


def cmd_rb(config: RunConfig) -> RunRecord:
    """Randomized benchmarking survival curve and decay fit."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    d = config.d
    cfg = RBConfig(lengths=config['lengths'], n_sequences=config['n_sequences'], seed=config.seed,
                   include_inverse=config['include_inverse'])
    result = rb_run(cfg, d, drive_tones(d, config['omega_khz']), noise_model(config['noise'], d),
                    workers=config.threads)
    _emit_csv(config, record, 'rb.csv', ('m', 'mean_survival', 'stderr'), result.rows())
    summary = dict(result.to_record(), lengths=list(cfg.lengths), survival=result.survival)
    _emit_json(config, record, 'rb.json', summary)
    record.results = plain(summary)
    record.metrics = {'pulse_fidelity': result.pulse_fidelity}
    return record


def cmd_ramsey(config: RunConfig) -> RunRecord:
    """Ramsey <Jz> scan and its decaying-cosine fit."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    d = config.d
    tones = drive_tones(d, config['omega_khz'], config['detunings_khz'])
    result = ramsey(d, tones, noise_model(config['noise'], d), config['delays_ms'])
    _emit_csv(config, record, 'ramsey.csv', ('delay_ms', 'jz'), result.rows())
    summary = {'fit_ok': result.fit_ok, 't2_ms': result.t2, 'frequency': result.frequency,
               'amplitude': result.amplitude, 'offset': result.offset, 'message': result.message}
    _emit_json(config, record, 'ramsey.json', summary)
    record.results = plain(summary)
    record.metrics = {'t2_ms': result.t2}
    return record


def cmd_calibrate(config: RunConfig) -> RunRecord:
    """Nelder-Mead amplitude recovery and an optional averaged landscape."""
    record = RunRecord(command=config.command, version=__version__, config=config.snapshot())
    d = config.d
    landscape_cfg = config['landscape']
    if landscape_cfg is not None and max(landscape_cfg['axes']) >= d - 1:
        raise ConfigurationError('calibrate.landscape.axes', f'indices must be below {d - 1}')
    omega = to_angular_khz(config['omega_khz'] * ureg.kHz)
    problem = CalibrationProblem.from_rb(d, omega, config['n_sequences'], config['length'],
                                         config.seed, config['perturbation'])
    result = nelder_mead_calibrate(problem, config['max_iters'])
    summary = result.to_record()
    if landscape_cfg is not None:
        axes = tuple(landscape_cfg['axes'])
        grid = np.linspace(landscape_cfg['low'], landscape_cfg['high'], landscape_cfg['points'])
        landscape = calibration_landscape(problem, axes, grid, grid)
        header = (f'a{axes[0]}\\a{axes[1]}', *(format_number(y) for y in landscape.y))
        _emit_csv(config, record, 'calibration_landscape.csv', header, landscape.rows())
        summary['landscape_argmax'] = landscape.argmax()
    _emit_json(config, record, 'calibration.json', summary)
    record.results = plain(summary)
    record.metrics = {'max_rel_error': float(np.max(result.rel_error))}
    return record


HANDLERS: Dict[str, Callable[[RunConfig], RunRecord]] = {
    'levels': cmd_levels,
    'synth': cmd_synth,
    'verify-tables': cmd_verify_tables,
    'grover': cmd_grover,
    'rb': cmd_rb,
    'ramsey': cmd_ramsey,
    'calibrate': cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with one section per command')
    common.add_argument('--seed', type=int, help='64-bit root seed (overrides the config)')
    common.add_argument('--out', default='.', help='Output directory (default: current directory)')
    common.add_argument('--threads', type=int, help='Worker threads (overrides the config)')
    common.add_argument('--log-level', default='INFO', choices=LOG_LEVELS, help='Logging level')
    parser = argparse.ArgumentParser(prog=PROGRAM, description='Multi-tone qudit control toolkit')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=HANDLERS[command].__doc__.splitlines()[0])
    return parser


def _one_line(exc: BaseException) -> str:
    return ' '.join(str(exc).split()) or type(exc).__name__


def run_command(config: RunConfig) -> RunRecord:
    """Run one command and save its record, failed sub-tasks included.

    Raises:
        CommandFailed: After saving, if any sub-task failed.
    """
    record = HANDLERS[config.command](config)
    record.finish()
    record.save(config.out_dir)
    if record.failures:
        raise CommandFailed(f'{len(record.failures)} sub-task(s) failed: ' + '; '.join(record.failures))
    return record


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = load_run_config(args.command, args.config, seed=args.seed, out_dir=args.out,
                                 threads=args.threads)
        run_command(config)
    except ConfigurationError as exc:
        print(f'{PROGRAM} {args.command}: configuration error: {_one_line(exc)}', file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f'{PROGRAM} {args.command}: error: {_one_line(exc)}', file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
