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

import dataclasses
import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from cbam_ge.errors import InvalidStateError, ModelIllPosedError
from cbam_ge.fixtures import four_country_fixture, three_country_fixture, two_country_fixture
from cbam_ge.model import CarbonRegime, Dimensions, RegimeKind, SectorTaxonomy, WorldEconomy, demean, domar_weights, \
    flat_index, leontief_inverse, share_matrices, spectral_radius, steady_state_check, unflat_index


class TestIndexing(unittest.TestCase):

    def test_flat_index(self):
        self.assertEqual(0, flat_index(1, 1, 3))
        self.assertEqual(2, flat_index(1, 3, 3))
        self.assertEqual(3, flat_index(2, 1, 3))
        self.assertEqual(11, flat_index(4, 3, 3, n_countries=4))

    def test_unflat_index(self):
        self.assertEqual((1, 1), unflat_index(0, 3))
        self.assertEqual((2, 1), unflat_index(3, 3))
        self.assertEqual((4, 3), unflat_index(11, 3, n_countries=4))

        dims = Dimensions(4, 3)
        for flat in range(dims.size):
            self.assertEqual(flat, dims.flat_index(*dims.unflat_index(flat)))

    def test_invalid_range(self):
        with self.assertRaises(ValueError):
            flat_index(1, 4, 3)

        with self.assertRaises(ValueError):
            flat_index(0, 1, 3)

        with self.assertRaises(ValueError):
            flat_index(5, 1, 3, n_countries=4)

        with self.assertRaises(ValueError):
            unflat_index(12, 3, n_countries=4)

        with self.assertRaises(ValueError):
            Dimensions(1, 3)

    def test_country_and_sector_of(self):
        dims = Dimensions(2, 3)
        self.assertEqual([0, 0, 0, 1, 1, 1], dims.country_of().tolist())
        self.assertEqual([0, 1, 2, 0, 1, 2], dims.sector_of().tolist())


class TestPrimitives(unittest.TestCase):

    def test_demean(self):
        values = demean([0.1, 0.2, 0.3 + 1e-12])
        self.assertAlmostEqual(0.0, math.fsum(values), places=15)
        self.assertEqual(0, demean([]).size)

    def test_carbon_regime(self):
        regime = CarbonRegime.capped(2.0)
        self.assertTrue(regime.is_capped)
        self.assertFalse(CarbonRegime.priced(30.0).is_capped)
        self.assertEqual(RegimeKind.priced, CarbonRegime('priced', 1.0).kind)

        with self.assertRaises(ValueError):
            CarbonRegime.capped(-1.0)

    def test_taxonomy(self):
        taxonomy = SectorTaxonomy([True, True, False], [True, False, False])
        self.assertEqual(3, taxonomy.n_sectors)

        # reduced sectors must be ETS sectors
        with self.assertRaises(ModelIllPosedError):
            SectorTaxonomy([True, False], [False, True])

    def test_leontief_inverse(self):
        omega = np.array([[0.2, 0.1],
                          [0.3, 0.4]])
        neumann = sum(np.linalg.matrix_power(omega, m) for m in range(61))
        assert_allclose(neumann, leontief_inverse(omega), atol=1e-9)

    def test_leontief_inverse_explosive(self):
        with self.assertRaises(ModelIllPosedError):
            leontief_inverse(np.array([[0.6, 0.5],
                                       [0.5, 0.6]]))

        with self.assertRaises(ValueError):
            leontief_inverse(np.ones((2, 3)))

    def test_spectral_radius(self):
        self.assertAlmostEqual(0.5, spectral_radius(np.array([[0.2, 0.1],
                                                              [0.3, 0.4]])), places=6)
        self.assertEqual(0.0, spectral_radius(np.zeros((3, 3))))

    def test_domar_weights(self):
        assert_allclose([0.25, 0.75], domar_weights(np.array([1.0, 3.0]), 4.0))

        with self.assertRaises(InvalidStateError):
            domar_weights(np.array([1.0, 3.0]), 0.0)

        with self.assertRaises(ValueError):
            domar_weights(np.array([-1.0, 3.0]), 2.0)


class TestWorldEconomy(unittest.TestCase):

    def test_fixtures_are_steady_states(self):
        for economy in (two_country_fixture(), three_country_fixture(seed=3), four_country_fixture()):
            report = steady_state_check(economy)
            self.assertTrue(report.passed, report.failures())
            self.assertLess(report.max_residual, 1e-10)

    def test_accounting(self):
        economy = four_country_fixture()
        self.assertAlmostEqual(100.0, economy.world_gne, places=9)
        assert_allclose(economy.labor, economy.labor_income, rtol=1e-12)
        assert_allclose(economy.iota.sum(axis=0), np.ones(economy.size), atol=1e-12)
        assert_allclose(economy.chi.sum(axis=1), np.ones(4), atol=1e-12)
        self.assertAlmostEqual(0.0, math.fsum(economy.deficits), places=12)

        # capped supplies are the steady-state emissions gross of free allowances
        supply = [r.value for r in economy.carbon_regime if r.is_capped]
        assert_allclose(supply, economy.emission_base[economy.capped_mask])

    def test_domar_weights_follow_final_demand(self):
        economy = three_country_fixture()
        psi = leontief_inverse(share_matrices(economy))
        expected = psi @ economy.final_demand / economy.world_gne
        assert_allclose(expected, domar_weights(economy.sales, economy.world_gne), atol=1e-10)

    def test_share_matrices(self):
        economy = two_country_fixture()
        shares = share_matrices(economy)
        assert_allclose(economy.gamma, shares.omega.sum(axis=0), atol=1e-12)

        tau = np.full_like(economy.iota, 1.25)
        taxed = share_matrices(economy, tau_tilde=tau)
        assert_allclose(shares.omega / 1.25, taxed.omega)

        with self.assertRaises(ModelIllPosedError):
            share_matrices(economy, omega_tilde=economy.iota * 0.9)

    def test_nu_and_emissions(self):
        economy = four_country_fixture()
        self.assertAlmostEqual(5.0, economy.nu[0, 2])
        self.assertAlmostEqual(0.8, economy.nu[0, 1])
        self.assertAlmostEqual(1.0, economy.nu[2, 2])

        expected = economy.rho * economy.sales / ((1.0 - economy.free_alloc)
                                                  * economy.observed_carbon_price[economy.country_index])
        assert_allclose(expected, economy.emissions)

    def test_nu_without_observed_price(self):
        economy = dataclasses.replace(two_country_fixture(), observed_carbon_price=np.array([80.0, 0.0]))
        self.assertEqual(1.0, economy.nu[0, 1])
        self.assertEqual(0.0, economy.nu[1, 0])
        self.assertTrue(np.all(economy.emission_intensity[2:] == 0))

    def test_immutable(self):
        economy = two_country_fixture()
        with self.assertRaises(ValueError):
            economy.iota[0, 0] = 1.0

        with self.assertRaises(dataclasses.FrozenInstanceError):
            economy.theta = 2.0

    def test_from_sales(self):
        economy = three_country_fixture()
        rebuilt = WorldEconomy.from_sales(economy.dims, economy.iota, economy.beta, economy.rho, economy.sales,
                                          [r.kind for r in economy.carbon_regime], economy.free_alloc,
                                          economy.observed_carbon_price, economy.theta, economy.sigma,
                                          economy.taxonomy, economy.eu_mask)
        assert_allclose(economy.chi, rebuilt.chi, atol=1e-12)
        assert_allclose(economy.deficits, rebuilt.deficits, atol=1e-12)
        assert_allclose(economy.labor, rebuilt.labor, rtol=1e-12)
        self.assertTrue(steady_state_check(rebuilt).passed)

    def test_invalid_economy(self):
        economy = two_country_fixture()

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, iota=economy.iota * 1.1)

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, beta=np.ones(4))

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, rho=np.full(4, 1.0))

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, chi=np.array([[0.5, 0.6], [0.5, 0.5]]))

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, deficits=np.array([0.5, 0.0]))

        with self.assertRaises(ModelIllPosedError):
            dataclasses.replace(economy, theta=1.0)

        with self.assertRaises(InvalidStateError):
            WorldEconomy.from_shares(economy.dims, economy.iota, economy.beta, economy.rho, economy.chi,
                                     economy.deficits, ['capped', 'priced'], economy.free_alloc,
                                     economy.observed_carbon_price, 4.0, 4.0, economy.taxonomy, economy.eu_mask,
                                     world_gne=0.0)

    def test_steady_state_violation(self):
        economy = two_country_fixture()
        shifted = dataclasses.replace(economy, sales=economy.sales * 1.01)
        report = steady_state_check(shifted)
        self.assertFalse(report.passed)
        self.assertIn('labor', report.failures())
        self.assertIn('sales', report.failures())


if __name__ == '__main__':
    unittest.main()
