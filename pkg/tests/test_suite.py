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

import math
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import logbook
import numpy as np

from cbam_ge.errors import StageError
from cbam_ge.fixtures import two_country_fixture, write_fixture
from cbam_ge.functional import no_policy
from cbam_ge.interchange import read_csv, read_json
from cbam_ge.suite import HEADLINE_TARGETS, INVALID_MARKER, LAYOUT, THREADS_VARIABLE, ScenarioSuite, \
    compare_with_targets, file_digest, run_scenario_suite, threads_from_environment


class TestScenarioSuite(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)
        self.inputs = self.path / 'inputs'
        write_fixture(self.inputs, two_country_fixture(), targets={'eei_direct': -8.84})

    def tearDown(self):
        self.directory.cleanup()

    def run_suite(self, name: str, threads: int = 1):
        return ScenarioSuite(self.inputs, self.path / name, threads=threads, log_level=logbook.ERROR).run()

    def test_layout(self):
        result = self.run_suite('run')
        root = self.path / 'run' / LAYOUT
        self.assertEqual(root, result.root)
        self.assertEqual(['full_endogenous', 'full_exogenous', 'reduced_endogenous', 'reduced_exogenous'],
                         sorted(result.solutions))
        self.assertTrue(all(s.converged for s in result.solutions.values()))

        for name in ('economy/manifest.json', 'baseline/manifest.json', 'scenarios/full_endogenous/p_hat.csv',
                     'scenarios/reduced_exogenous/manifest.json', 'tables/table1_trade.csv',
                     'tables/table2_emissions.csv', 'tables/table3_gne.csv', 'tables/table4_origins.csv',
                     'tables/table5_domar.csv', 'report.json', 'comparison.csv'):
            self.assertIn(name, result.artifacts)
        self.assertFalse((root / INVALID_MARKER).exists())

        manifest = read_json(root / 'run_manifest.json')
        self.assertEqual(result.artifacts, manifest['artifacts'])
        self.assertEqual(file_digest(root / 'report.json'), manifest['artifacts']['report.json'])

        report = read_json(root / 'report.json')
        self.assertEqual(LAYOUT, report['layout'])
        headline = report['scenarios']['full_endogenous']
        self.assertEqual(result.scenarios['full_endogenous'].content_hash(), headline['hash'])
        self.assertIn('gap_eei_direct', headline['metrics'])
        self.assertNotIn('gap_eei_direct', report['scenarios']['full_exogenous']['metrics'])

        comparison = read_csv(root / 'comparison.csv')
        self.assertEqual(['eei_direct'], comparison['metric'].tolist())

    def test_threads_do_not_change_artifacts(self):
        single = self.run_suite('single', threads=1)
        pooled = self.run_suite('pooled', threads=2)
        self.assertEqual(single.artifacts, pooled.artifacts)

    def test_failed_stage(self):
        (self.inputs / 'emissions.csv').unlink()
        with self.assertRaises(StageError) as context:
            self.run_suite('broken')
        self.assertEqual('calibrate', context.exception.stage)
        marker = self.path / 'broken' / LAYOUT / INVALID_MARKER
        self.assertEqual('calibrate: emissions.csv not found', marker.read_text(encoding='utf-8').strip())

    def test_run_scenario_suite(self):
        status, root = run_scenario_suite(self.inputs, self.path / 'run', log_level=logbook.ERROR)
        self.assertEqual(0, status)
        self.assertTrue((root / 'run_manifest.json').exists())

        (self.inputs / 'emissions.csv').unlink()
        status, root = run_scenario_suite(self.inputs, self.path / 'run', log_level=logbook.ERROR)
        self.assertEqual(1, status)
        self.assertTrue((root / INVALID_MARKER).exists())

    def test_off_scenario_changes_nothing(self):
        inputs = self.path / 'off_inputs'
        write_fixture(inputs, two_country_fixture(), scenarios=[no_policy()])
        result = ScenarioSuite(inputs, self.path / 'off', log_level=logbook.ERROR).run()
        self.assertEqual(['off'], list(result.solutions))
        for name, table in result.tables.items():
            values = table.select_dtypes('number').to_numpy()
            self.assertLess(np.abs(np.nan_to_num(values)).max(), 1e-6, name)

    def test_invalid_threads(self):
        with self.assertRaises(ValueError):
            ScenarioSuite(self.inputs, self.path / 'run', threads=0, log_level=logbook.ERROR)


class TestSuiteHelpers(unittest.TestCase):

    def test_threads_from_environment(self):
        with mock.patch.dict(os.environ, {THREADS_VARIABLE: ''}):
            self.assertEqual(1, threads_from_environment())

        with mock.patch.dict(os.environ, {THREADS_VARIABLE: '4'}):
            self.assertEqual(4, threads_from_environment())

        for value in ('zero', '0'):
            with mock.patch.dict(os.environ, {THREADS_VARIABLE: value}):
                with self.assertRaises(ValueError):
                    threads_from_environment()

    def test_compare_with_targets(self):
        metrics = {'full_endogenous': {'eei_direct': -8.5, 'eei_total': -6.0}}
        frame = compare_with_targets(metrics, {'eei_direct': -8.84, 'eei_total': -5.19, 'leakage': -0.19})
        rows = frame.set_index('metric')
        self.assertTrue(rows.loc['eei_direct', 'within_tolerance'])
        self.assertFalse(rows.loc['eei_total', 'within_tolerance'])
        self.assertTrue(math.isnan(rows.loc['leakage', 'value']))
        self.assertAlmostEqual(0.34, rows.loc['eei_direct', 'gap_pp'])

        self.assertEqual(sorted(HEADLINE_TARGETS), compare_with_targets(metrics)['metric'].tolist())


if __name__ == '__main__':
    unittest.main()
