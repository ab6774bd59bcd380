import contextlib
import csv
import hashlib
import io
import json
import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from cli.config import build_run_config, load_run_config, read_config_file
from cli.main import main
from cli.records import RunRecord, csv_text, sha256_file, write_text_atomic
from numerics.errors import ConfigurationError
from units_config import BOHR_MAGNETON_MHZ_PER_GAUSS

FIXTURES = Path(__file__).resolve().parents[1] / 'fixtures'

ZEEMAN_TOY = {'name': 'toy', 'nuclear_spin': 0.0, 'electronic_j': 0.5, 'a_mhz': 0.0,
              'b_mhz': 0.0, 'g_j': 2.0, 'g_i': 0.0}


def read_rows(path):
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


class CliTestCase(unittest.TestCase):
    """Shared temporary directory and command runner."""

    def setUp(self):
        """Set up a scratch directory for configs and outputs."""
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.out = self.tmp / 'out'

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, sections, name='config.json'):
        path = self.tmp / name
        path.write_text(json.dumps(sections), encoding='utf-8')
        return path

    def run_cli(self, command, sections=None, out=None, extra=()):
        argv = [command, '--out', str(out or self.out), '--log-level', 'WARNING', *extra]
        if sections is not None:
            argv += ['--config', str(self.write_config(sections))]
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = main(argv)
        return code, stderr.getvalue()


class TestConfig(unittest.TestCase):
    """Test suite for schema checking and flag overrides."""

    def setUp(self):
        """Set up a minimal RB section."""
        self.section = {'d': 3, 'lengths': [1, 2, 4], 'n_sequences': 2}

    def test_defaults_filled(self):
        """Test absent optional keys take their defaults."""
        config = build_run_config('rb', self.section)
        self.assertEqual(config.d, 3)
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.threads, 1)
        self.assertEqual(config['lengths'], (1, 2, 4))
        self.assertTrue(config['include_inverse'])
        self.assertIsNone(config['noise'])

    def test_flags_override_file(self):
        """Test --seed and --threads replace file values."""
        config = build_run_config('rb', dict(self.section, seed=5), seed=11, threads=3)
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.threads, 3)

    def test_unknown_key_rejected(self):
        """Test an unknown key is reported by its dotted name."""
        with self.assertRaises(ConfigurationError) as ctx:
            build_run_config('rb', dict(self.section, bogus=1))
        self.assertEqual(ctx.exception.key, 'rb.bogus')

    def test_missing_required_key(self):
        """Test a missing required key is named."""
        with self.assertRaises(ConfigurationError) as ctx:
            build_run_config('rb', {'lengths': [1, 2, 3]})
        self.assertEqual(ctx.exception.key, 'rb.d')

    def test_type_and_range_checks(self):
        """Test booleans, wrong types and out-of-range values are rejected."""
        for bad in ({'d': True}, {'d': 2.5}, {'d': 9}, {'d': 3, 'lengths': [1, 0, 2]},
                    {'d': 3, 'seed': -1}, {'d': 3, 'include_inverse': 1}):
            with self.assertRaises(ConfigurationError):
                build_run_config('rb', bad)

    def test_nested_section(self):
        """Test nested sections are checked with dotted keys."""
        with self.assertRaises(ConfigurationError) as ctx:
            build_run_config('rb', dict(self.section, noise={'t2': 3.0}))
        self.assertEqual(ctx.exception.key, 'rb.noise.t2')
        levels = {'d': 2, 'bz_gauss': 1.0, 'constants': {k: v for k, v in ZEEMAN_TOY.items() if k != 'a_mhz'}}
        with self.assertRaises(ConfigurationError) as ctx:
            build_run_config('levels', levels)
        self.assertEqual(ctx.exception.key, 'levels.constants.a_mhz')

    def test_config_file_sections(self):
        """Test file parsing rejects unknown sections and invalid JSON."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'c.json'
            path.write_text(json.dumps({'rb': self.section}), encoding='utf-8')
            self.assertEqual(load_run_config('rb', path).d, 3)
            with self.assertRaises(ConfigurationError):
                load_run_config('grover', path)
            path.write_text(json.dumps({'bench': {}}), encoding='utf-8')
            with self.assertRaises(ConfigurationError):
                read_config_file(path)
            path.write_text('{"rb": ', encoding='utf-8')
            with self.assertRaises(ConfigurationError):
                read_config_file(path)
            with self.assertRaises(FileNotFoundError):
                read_config_file(Path(tmp) / 'missing.json')


class TestRecords(unittest.TestCase):
    """Test suite for run records and result files."""

    def setUp(self):
        """Set up a record holding numpy values."""
        self.record = RunRecord(command='rb', version='0.1.0', config={'d': 3, 'seed': 0},
                                results={'survival': np.array([[1.0, 0.5], [0.25, 1 / 3]]),
                                         'p': np.float64(0.1 + 0.2), 'n': np.int64(4)},
                                metrics={'converged': np.bool_(True)})
        self.record.finish()

    def test_json_round_trip_byte_identical(self):
        """Test a saved record reloads and re-serializes to the same text."""
        text = self.record.to_json()
        self.assertEqual(RunRecord.from_json(text).to_json(), text)
        self.assertEqual(json.loads(text)['results']['p'], 0.1 + 0.2)

    def test_save_and_load(self):
        """Test records written to disk load back unchanged."""
        with tempfile.TemporaryDirectory() as tmp:
            path = self.record.save(tmp)
            self.assertEqual(path.name, 'rb_run.json')
            self.assertEqual(RunRecord.load(path).to_json(), self.record.to_json())

    def test_atomic_write_leaves_no_temp_files(self):
        """Test an atomic write replaces the target and cleans up."""
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / 'sub' / 'x.csv'
            write_text_atomic(target, 'old\n')
            write_text_atomic(target, 'new\n')
            self.assertEqual(target.read_text(), 'new\n')
            self.assertEqual(os.listdir(target.parent), ['x.csv'])

    def test_csv_precision(self):
        """Test CSV floats carry 9 significant digits."""
        text = csv_text(('m', 'p', 'ok'), [(1, 1 / 3, True), (2, 0.968000000001, False)])
        self.assertEqual(text, 'm,p,ok\n1,0.333333333,true\n2,0.968,false\n')

    def test_fixture_hash(self):
        """Test fixture digests match hashlib over the file bytes."""
        path = FIXTURES / 'table1_d5.csv'
        self.assertEqual(sha256_file(path), hashlib.sha256(path.read_bytes()).hexdigest())


class TestLevelsCommand(CliTestCase):
    """Test suite for the levels command."""

    def test_zeeman_toy(self):
        """Test a J=1/2 Zeeman-only manifold gives the g_J muB B line."""
        code, _ = self.run_cli('levels', {'levels': {'d': 2, 'bz_gauss': 1.5, 'constants': ZEEMAN_TOY,
                                                     'bz_scan_gauss': [0.5, 1.0]}})
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'levels_transitions.csv')
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(float(rows[0]['freq_mhz']), 2.0 * BOHR_MAGNETON_MHZ_PER_GAUSS * 1.5,
                               delta=1e-6)
        assignments = read_rows(self.out / 'levels_assignments.csv')
        self.assertEqual(assignments[0]['states'], '0;1')
        scan = read_rows(self.out / 'levels_scan.csv')
        self.assertEqual([float(r['bz_gauss']) for r in scan], [0.5, 1.0])
        record = RunRecord.load(self.out / 'levels_run.json')
        self.assertIn('levels_scan.csv', record.outputs)

    def test_dimension_larger_than_manifold(self):
        """Test an impossible dimension writes an empty ranking and succeeds."""
        code, _ = self.run_cli('levels', {'levels': {'d': 3, 'bz_gauss': 1.0, 'constants': ZEEMAN_TOY}})
        self.assertEqual(code, 0)
        self.assertEqual(read_rows(self.out / 'levels_assignments.csv'), [])

    def test_missing_constant(self):
        """Test a missing hyperfine constant exits non-zero naming the key."""
        constants = {k: v for k, v in ZEEMAN_TOY.items() if k != 'g_j'}
        code, err = self.run_cli('levels', {'levels': {'d': 2, 'bz_gauss': 1.0, 'constants': constants}})
        self.assertEqual(code, 2)
        self.assertIn('levels.constants.g_j', err)
        self.assertEqual(len(err.strip().splitlines()), 1)

    def test_missing_section(self):
        """Test a config without the command's section is a configuration error."""
        code, err = self.run_cli('levels', {'rb': {'d': 3}})
        self.assertEqual(code, 2)
        self.assertIn('levels', err)


class TestSynthCommand(CliTestCase):
    """Test suite for the synth command."""

    def test_identity_rerun_identical(self):
        """Test a fixed seed reproduces the pulse table byte for byte."""
        sections = {'synth': {'d': 3, 'target': 'identity', 'restarts': 4}}
        self.assertEqual(self.run_cli('synth', sections)[0], 0)
        self.assertEqual(self.run_cli('synth', sections, out=self.tmp / 'again', extra=('--threads', '2'))[0], 0)
        for name in ('synth_pulses.csv', 'synth_result.json'):
            self.assertEqual((self.out / name).read_bytes(), (self.tmp / 'again' / name).read_bytes())
        result = json.loads((self.out / 'synth_result.json').read_text())
        self.assertEqual(result['operation'], 'Identity')
        self.assertLess(result['infidelity'], 1e-3)

    def test_oracle(self):
        """Test a d=5 two-pulse oracle reaches infidelity below 1e-3."""
        sections = {'synth': {'d': 5, 'target': 'oracle', 'mark': 2, 'n_pulses': 2, 'restarts': 20,
                              'convention': 'theta1-forward-frame-plus', 'early_stop': True}}
        code, _ = self.run_cli('synth', sections)
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'synth_pulses.csv')
        self.assertEqual([r['operation'] for r in rows], ['Mark 2', 'Mark 2'])
        result = json.loads((self.out / 'synth_result.json').read_text())
        self.assertLess(result['infidelity'], 1e-3)

    def test_bad_mark_and_convention(self):
        """Test invalid marks and convention names are configuration errors."""
        code, err = self.run_cli('synth', {'synth': {'d': 3, 'target': 'oracle', 'mark': 3}})
        self.assertEqual(code, 2)
        self.assertIn('synth.mark', err)
        code, err = self.run_cli('synth', {'synth': {'d': 3, 'convention': 'sideways'}})
        self.assertEqual(code, 2)
        self.assertIn('synth.convention', err)


class TestVerifyTablesCommand(CliTestCase):
    """Test suite for the verify-tables command."""

    def test_shipped_fixtures(self):
        """Test both fixtures verify under one winning convention."""
        code, _ = self.run_cli('verify-tables', extra=('--threads', '2'))
        self.assertEqual(code, 0)
        report = json.loads((self.out / 'verification.json').read_text())
        self.assertIsNotNone(report['winner'])
        self.assertEqual([t['d'] for t in report['tables']], [5, 8])
        self.assertEqual(len(report['tables'][1]['success_probabilities']), 8)
        self.assertEqual(report['winner'], 'theta1-forward-tone-plus')
        d5, d8 = report['tables']
        self.assertTrue(all(p >= 0.95 for p in d5['success_probabilities']))
        self.assertTrue(all(p >= 0.70 for p in d8['success_probabilities']))
        self.assertEqual(d8['convention'], report['winner'])
        self.assertIn('Mark 7', [o['operation'] for o in d8['outliers']])
        self.assertIn('action_fidelity', d5['operations'][0])
        record = RunRecord.load(self.out / 'verify-tables_run.json')
        digests = {Path(k).name: v for k, v in record.fixtures.items()}
        self.assertEqual(digests['table2_d8.csv'], sha256_file(FIXTURES / 'table2_d8.csv'))

    def test_missing_fixture(self):
        """Test a missing table fails the run, names the file and keeps the rest."""
        tables = [str(FIXTURES / 'table1_d5.csv'), str(self.tmp / 'table9_d3.csv')]
        code, err = self.run_cli('verify-tables', {'verify-tables': {'tables': tables}})
        self.assertEqual(code, 1)
        self.assertIn('table9_d3.csv', err)
        report = json.loads((self.out / 'verification.json').read_text())
        self.assertEqual(len(report['tables']), 1)
        self.assertEqual(len(report['failures']), 1)

    def test_truncated_row(self):
        """Test a truncated CSV row is reported with its line number."""
        lines = (FIXTURES / 'table1_d5.csv').read_text().splitlines()
        broken = self.tmp / 'broken.csv'
        broken.write_text('\n'.join(lines[:2] + [','.join(lines[2].split(',')[:4])]) + '\n')
        code, err = self.run_cli('verify-tables', {'verify-tables': {'tables': [str(broken)]}})
        self.assertEqual(code, 1)
        self.assertIn('broken.csv:3', err)


class TestGroverCommand(CliTestCase):
    """Test suite for the grover command."""

    def test_ideal_mark_sweep(self):
        """Test the ideal d=5 sweep has 0.968 on the diagonal."""
        code, _ = self.run_cli('grover', {'grover': {'d': 5}})
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'grover_marks.csv')
        self.assertEqual(len(rows), 5)
        for m, row in enumerate(rows):
            self.assertAlmostEqual(float(row[f'p_{m}']), 0.968, delta=1e-8)
        summary = json.loads((self.out / 'grover.json').read_text())
        self.assertAlmostEqual(summary['average_sso'], 1.0, delta=1e-9)

    def test_noisy_iteration_sweep_deterministic(self):
        """Test a dephased iteration sweep is written identically on rerun."""
        sections = {'grover': {'d': 3, 'n_max': 3, 'sweep_mark': 1,
                               'noise': {'sensitivities': [0.0, 1.0, 0.0], 't2_ms': 3.0}}}
        self.assertEqual(self.run_cli('grover', sections)[0], 0)
        self.assertEqual(self.run_cli('grover', sections, out=self.tmp / 'again')[0], 0)
        rows = read_rows(self.out / 'grover_iterations.csv')
        self.assertEqual([r['N'] for r in rows], ['1', '2', '3'])
        for name in ('grover_marks.csv', 'grover_iterations.csv', 'grover.json'):
            self.assertEqual((self.out / name).read_bytes(), (self.tmp / 'again' / name).read_bytes())

    def test_table_source(self):
        """Test the d=8 table circuit runs under the verified convention."""
        sections = {'grover': {'d': 8, 'source': 'table', 'table': 'fixtures/table2_d8.csv'}}
        code, _ = self.run_cli('grover', sections)
        self.assertEqual(code, 0)
        summary = json.loads((self.out / 'grover.json').read_text())
        self.assertEqual(len(summary['asp_measured']), 8)
        self.assertIsNotNone(summary['convention'])

    def test_table_source_single_round(self):
        """Test a table run defaults to the one round the tables were built for."""
        sections = {'grover': {'d': 8, 'source': 'table', 'table': 'fixtures/table2_d8.csv',
                               'convention': 'theta1-forward-tone-plus'}}
        self.assertEqual(self.run_cli('grover', sections)[0], 0)
        summary = json.loads((self.out / 'grover.json').read_text())
        self.assertEqual(summary['n_iterations'], 1)
        self.assertAlmostEqual(summary['asp_ideal'], 0.78125)
        self.assertTrue(all(p >= 0.70 for p in summary['asp_measured']))

    def test_table_dimension_mismatch(self):
        """Test a table of the wrong dimension is rejected."""
        sections = {'grover': {'d': 5, 'source': 'table', 'table': str(FIXTURES / 'table2_d8.csv')}}
        code, err = self.run_cli('grover', sections)
        self.assertEqual(code, 2)
        self.assertIn('grover.d', err)


class TestNoiseCommands(CliTestCase):
    """Test suite for the rb, ramsey and calibrate commands."""

    def test_rb_noiseless_flat(self):
        """Test noiseless RB survival is flat at one."""
        code, _ = self.run_cli('rb', {'rb': {'d': 3, 'lengths': [1, 4, 8], 'n_sequences': 2}})
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'rb.csv')
        self.assertEqual([r['m'] for r in rows], ['1', '4', '8'])
        for row in rows:
            self.assertAlmostEqual(float(row['mean_survival']), 1.0, delta=1e-8)
        summary = json.loads((self.out / 'rb.json').read_text())
        self.assertAlmostEqual(summary['pulse_fidelity'], 1.0, delta=1e-6)

    def test_rb_too_few_lengths(self):
        """Test fewer than three lengths fail with a one-line error."""
        code, err = self.run_cli('rb', {'rb': {'d': 2, 'lengths': [1, 2]}})
        self.assertEqual(code, 1)
        self.assertEqual(len(err.strip().splitlines()), 1)

    def test_ramsey(self):
        """Test a detuned, dephased two-level Ramsey scan fits its T2."""
        sections = {'ramsey': {'d': 2, 'detunings_khz': [1.0],
                               'delays_ms': [0.05 * k for k in range(61)],
                               'noise': {'sensitivities': [0.0, 1.0], 't2_ms': 1.0}}}
        code, _ = self.run_cli('ramsey', sections)
        self.assertEqual(code, 0)
        self.assertEqual(len(read_rows(self.out / 'ramsey.csv')), 61)
        summary = json.loads((self.out / 'ramsey.json').read_text())
        self.assertTrue(summary['fit_ok'])
        self.assertAlmostEqual(summary['t2_ms'], 1.0, delta=0.05)

    def test_calibrate_with_landscape(self):
        """Test calibration recovers d=3 amplitudes and writes the landscape grid."""
        sections = {'calibrate': {'d': 3, 'landscape': {'low': 0.9, 'high': 1.1, 'points': 5}}}
        code, _ = self.run_cli('calibrate', sections)
        self.assertEqual(code, 0)
        summary = json.loads((self.out / 'calibration.json').read_text())
        self.assertLess(max(summary['rel_error']), 0.01)
        np.testing.assert_allclose(summary['landscape_argmax'], [1.0, 1.0], atol=1e-9)
        rows = read_rows(self.out / 'calibration_landscape.csv')
        self.assertEqual(len(rows), 5)

    def test_bad_landscape_axes(self):
        """Test landscape axes beyond d-2 are rejected."""
        sections = {'calibrate': {'d': 3, 'max_iters': 5, 'landscape': {'axes': [0, 2]}}}
        code, err = self.run_cli('calibrate', sections)
        self.assertEqual(code, 2)
        self.assertIn('landscape.axes', err)


class TestArguments(unittest.TestCase):
    """Test suite for the argument parser."""

    def test_bad_log_level(self):
        """Test an unknown log level is rejected by argparse."""
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(['rb', '--log-level', 'LOUD'])
        self.assertEqual(ctx.exception.code, 2)

    def test_unknown_command(self):
        """Test an unknown command is rejected by argparse."""
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                main(['bench'])


if __name__ == '__main__':
    unittest.main()
