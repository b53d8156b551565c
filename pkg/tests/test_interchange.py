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

import tempfile
import unittest
from pathlib import Path

import logbook
import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from cbam_ge.calibration import BaselineShock, Calibrator
from cbam_ge.errors import CalibrationError
from cbam_ge.fixtures import default_shock, four_country_fixture, three_country_fixture, write_fixture
from cbam_ge.functional import full_cbam, tariff
from cbam_ge.interchange import CalibrationManifest, export_economy, load_economy, read_csv, read_json, \
    read_manifest, read_scenario, read_shock, read_tariffs, read_taxonomy, write_csv, write_scenario, write_shock, \
    write_solution
from cbam_ge.solver import PolicySolver


class TestEconomyRoundTrip(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)
        self.calibrator = Calibrator(log_level=logbook.ERROR)

    def tearDown(self):
        self.directory.cleanup()

    def test_export_then_load(self):
        for economy in (three_country_fixture(seed=2), four_country_fixture()):
            target = self.path / economy.country_names[-1]
            export_economy(economy, target)
            loaded = load_economy(target, self.calibrator)
            assert_allclose(economy.iota, loaded.iota, atol=1e-12)
            assert_allclose(economy.beta, loaded.beta, rtol=1e-12)
            assert_allclose(economy.rho, loaded.rho, rtol=1e-12)
            assert_allclose(economy.chi, loaded.chi, atol=1e-12)
            assert_allclose(economy.sales, loaded.sales, rtol=1e-10)
            assert_allclose(economy.deficits, loaded.deficits, atol=1e-10)
            assert_allclose(economy.free_alloc, loaded.free_alloc)
            self.assertEqual(economy.country_names, loaded.country_names)
            self.assertEqual([r.kind for r in economy.carbon_regime], [r.kind for r in loaded.carbon_regime])
            self.assertEqual(economy.eu_mask.tolist(), loaded.eu_mask.tolist())
            self.assertLess(self.calibrator.diagnostics.output_gap, 1e-10)

    def test_manifest(self):
        economy = four_country_fixture()
        path = write_fixture(self.path, economy, scenarios=[full_cbam()], targets={'eei_direct': -8.84})
        manifest = read_manifest(self.path)
        self.assertEqual(path.name, 'manifest.json')
        self.assertEqual(['EU', 'CLN', 'DRT', 'RoW'], manifest.countries)
        self.assertEqual(['EU'], manifest.importer_set)
        self.assertEqual(default_shock(economy), manifest.shock())
        self.assertEqual('full_endogenous', manifest.scenarios[0]['name'])
        self.assertEqual({'eei_direct': -8.84}, manifest.targets)
        self.assertEqual(manifest.to_dict(), read_json(path))

    def test_missing_file(self):
        export_economy(four_country_fixture(), self.path)
        (self.path / 'emissions.csv').unlink()
        with self.assertRaises(CalibrationError) as context:
            load_economy(self.path, self.calibrator)
        self.assertEqual('emissions.csv not found', str(context.exception))

    def test_invalid_manifest(self):
        with self.assertRaises(CalibrationError):
            CalibrationManifest.from_dict({'layout': 'manifest_v0', 'countries': [], 'sectors': [],
                                           'importer_set': []}, self.path)

        with self.assertRaises(CalibrationError):
            CalibrationManifest.from_dict({'countries': ['A', 'B'], 'sectors': ['x']}, self.path)

        manifest = CalibrationManifest.from_dict({'countries': ['A', 'B'], 'sectors': ['x'], 'importer_set': ['C']},
                                                 self.path)
        with self.assertRaises(CalibrationError):
            manifest.eu_mask()

    def test_taxonomy(self):
        frame = pd.DataFrame({'sector': ['services', 'metals'], 'ets': ['no', 'yes'], 'cbam_reduced': ['0', '1']})
        taxonomy = read_taxonomy(frame, ['metals', 'services'])
        self.assertEqual([True, False], taxonomy.ets_flag.tolist())
        self.assertEqual([True, False], taxonomy.cbam_reduced_flag.tolist())

        with self.assertRaises(CalibrationError):
            read_taxonomy(frame, ['metals', 'chemicals'])

    def test_tariffs(self):
        export_economy(four_country_fixture(), self.path)
        write_csv(self.path / 'tariffs.csv', pd.DataFrame({
            'origin_country': ['DRT'], 'origin_sector': ['metals'], 'dest_country': ['EU'], 'dest_sector': ['services'],
            'value': [0.05]}))
        manifest = read_manifest(self.path)
        self.assertEqual({}, read_tariffs(manifest))

        manifest.files['tariffs'] = 'tariffs.csv'
        self.assertEqual({((3, 1), (1, 3)): 0.05}, read_tariffs(manifest))

    def test_csv_precision(self):
        values = np.array([1.0 / 3.0, np.pi * 1e-9, 2.0 ** 0.5 * 1e12])
        write_csv(self.path / 'values.csv', pd.DataFrame({'country': ['001', 'B', 'C'], 'value': values}))
        frame = read_csv(self.path / 'values.csv')
        self.assertEqual(values.tolist(), frame['value'].tolist())
        self.assertEqual('001', frame['country'][0])


class TestDocuments(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_scenario(self):
        scenario = tariff((3, 1), (1, 1), 0.1, base=full_cbam(cbam_scale=0.5))
        write_scenario(self.path / 'scenario.json', scenario)
        restored = read_scenario(self.path / 'scenario.json')
        self.assertEqual(scenario.to_dict(), restored.to_dict())
        self.assertEqual(scenario.content_hash(), restored.content_hash())

    def test_shock(self):
        shock = BaselineShock((0.02, 0.0, 0.01, 0.0), free_allowance_cut=0.4, exogenous_price_overrides=(2,))
        write_shock(self.path / 'shock.json', shock)
        self.assertEqual(shock, read_shock(self.path / 'shock.json'))

    def test_write_solution(self):
        economy = four_country_fixture()
        scenario = full_cbam(tolerance=1e-10)
        solution = PolicySolver(log_level=logbook.ERROR).solve(economy, scenario)
        paths = write_solution(self.path / 'solve', solution, economy, scenario)
        names = [p.name for p in paths]
        self.assertIn('manifest.json', names)
        self.assertIn('p_hat.csv', names)
        self.assertIn('tau_tilde_prime.csv', names)

        manifest = read_json(self.path / 'solve' / 'manifest.json')
        self.assertTrue(manifest['converged'])
        self.assertEqual(scenario.content_hash(), manifest['scenario_hash'])
        prices = read_csv(self.path / 'solve' / 'p_hat.csv')
        self.assertEqual(solution.p_hat.tolist(), prices['value'].tolist())


if __name__ == '__main__':
    unittest.main()
