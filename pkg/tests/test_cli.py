# Copyright 2024 The cbam_ge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Author: cbam_ge contributors

import json
import tempfile
import unittest
from pathlib import Path

import logbook

from cbam_ge.calibration import Calibrator
from cbam_ge.cli import build_parser, main
from cbam_ge.functional import full_cbam
from cbam_ge.interchange import read_csv, read_json, write_json, write_scenario
from cbam_ge.solver import PolicySolver
from cbam_ge.suite import INVALID_MARKER, LAYOUT, ScenarioSuite


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def run_command(self, *argv) -> int:
        return main(['--log-level', 'error'] + [str(a) for a in argv])

    def write_fixture(self) -> Path:
        target = self.path / 'fixture'
        self.assertEqual(0, self.run_command('fixture', '--kind', 'two', '-o', target))
        return target

    def test_handlers_are_not_stacked(self):
        before = list(logbook.Handler.stack_manager.iter_context_objects())
        PolicySolver()
        Calibrator(log_level=logbook.DEBUG)
        ScenarioSuite(self.path / 'inputs', self.path / 'run')
        self.write_fixture()
        self.assertEqual(before, list(logbook.Handler.stack_manager.iter_context_objects()))

    def test_parser(self):
        args = build_parser().parse_args(['suite', '--manifest', 'm.json', '-o', 'out'])
        self.assertEqual('info', args.log_level)
        self.assertIsNone(args.threads)

        with self.assertRaises(SystemExit):
            build_parser().parse_args(['--log-level', 'loud', 'fixture', '-o', 'out'])

    def test_fixture(self):
        target = self.write_fixture()
        manifest = read_json(target / 'manifest.json')
        self.assertEqual(['EU', 'ROW'], manifest['countries'])
        self.assertIn('baseline_shock', manifest)

    def test_solve(self):
        target = self.write_fixture()
        write_scenario(self.path / 'scenario.json', full_cbam(tolerance=1e-10))
        self.assertEqual(0, self.run_command('solve', '--economy', target, '--scenario', self.path / 'scenario.json',
                                             '-o', self.path / 'solve'))
        self.assertTrue(read_json(self.path / 'solve' / 'manifest.json')['converged'])
        self.assertEqual(2, len(read_csv(self.path / 'solve' / 'w_hat.csv')))

    def test_linearize(self):
        target = self.write_fixture()
        output = self.path / 'response.csv'
        self.assertEqual(0, self.run_command('linearize', '--economy', target, '--flow', '2,1,1,1', '--partial',
                                             '-o', output))
        frame = read_csv(output)
        self.assertEqual(4, int((frame['variable'] == 'dlogp').sum()))

        self.assertEqual(1, self.run_command('linearize', '--economy', target, '--flow', '2,1', '-o', output))

    def test_sweep(self):
        target = self.write_fixture()
        write_json(self.path / 'sweep.json', {'axis': 'carbon_intensity', 'grid': [0.5, 1.0]})
        self.assertEqual(0, self.run_command('sweep', '--economy', target, '--spec', self.path / 'sweep.json',
                                             '-o', self.path / 'sweep.csv'))
        self.assertEqual([0.5, 1.0], read_csv(self.path / 'sweep.csv')['value'].tolist())

    def test_suite_then_report(self):
        target = self.write_fixture()
        self.assertEqual(0, self.run_command('suite', '--manifest', target, '--threads', 2, '-o', self.path / 'run'))
        self.assertEqual(0, self.run_command('report', '--run', self.path / 'run', '--format', 'json',
                                             '-o', self.path / 'report.json'))
        with (self.path / 'report.json').open(encoding='utf-8') as f:
            tables = json.load(f)
        self.assertEqual(['table1_trade', 'table2_emissions', 'table3_gne', 'table4_origins', 'table5_domar'],
                         sorted(tables))

        self.assertEqual(0, self.run_command('report', '--run', self.path / 'run' / LAYOUT,
                                             '-o', self.path / 'report.csv'))
        self.assertEqual({'table1_trade', 'table2_emissions', 'table3_gne', 'table4_origins', 'table5_domar'},
                         set(read_csv(self.path / 'report.csv')['table']))

    def test_report_failures(self):
        self.assertEqual(1, self.run_command('report', '--run', self.path / 'missing'))

        root = self.path / 'run' / LAYOUT
        (root / 'tables').mkdir(parents=True)
        (root / INVALID_MARKER).write_text('scenarios: no convergence\n', encoding='utf-8')
        self.assertEqual(1, self.run_command('report', '--run', self.path / 'run'))

    def test_suite_failure(self):
        target = self.write_fixture()
        (target / 'io_flows.csv').unlink()
        self.assertEqual(1, self.run_command('suite', '--manifest', target, '-o', self.path / 'run'))
        self.assertTrue((self.path / 'run' / LAYOUT / INVALID_MARKER).exists())


if __name__ == '__main__':
    unittest.main()
