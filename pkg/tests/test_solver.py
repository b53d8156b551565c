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
import unittest

import logbook
import numpy as np
from numpy.testing import assert_allclose

from cbam_ge.builders import cbam_matrix
from cbam_ge.errors import InvalidStateError, ModelIllPosedError, SolverConvergenceError
from cbam_ge.fixtures import four_country_fixture, three_country_fixture, two_country_fixture
from cbam_ge.functional import full_cbam, no_policy, reduced_cbam, tariff, with_supply_shock
from cbam_ge.metrics import eei_total_change
from cbam_ge.scenarios import IncomeClosure
from cbam_ge.solver import PolicySolver, steady_state_solution, verify_solution
from levels_oracle import solve_levels


class TestSteadyState(unittest.TestCase):

    def setUp(self):
        self.solver = PolicySolver(log_level=logbook.ERROR)

    def test_no_policy_is_identity(self):
        for economy in (two_country_fixture(), three_country_fixture(seed=1), four_country_fixture()):
            solution = self.solver.solve(economy, no_policy())
            self.assertTrue(solution.converged)
            self.assertLessEqual(solution.iterations, 2)
            for hat in (solution.w_hat, solution.t_hat, solution.p_hat, solution.P_hat,
                        solution.consumption_price_hat):
                assert_allclose(hat, 1.0, atol=1e-10)
            assert_allclose(solution.sales_prime, economy.sales, rtol=1e-10)
            assert_allclose(solution.omega_tilde_prime, economy.iota, atol=1e-10)
            self.assertLess(max(solution.residuals.values()), 1e-9)

    def test_steady_state_solution(self):
        economy = four_country_fixture()
        solution = steady_state_solution(economy)
        self.assertTrue(solution.converged)
        self.assertEqual([True, False, False, False], solution.importer_set.tolist())
        assert_allclose(economy.emissions, solution.emissions_prime)


class TestLevelsOracle(unittest.TestCase):

    def setUp(self):
        self.solver = PolicySolver(log_level=logbook.ERROR)

    def assert_matches(self, solution, levels):
        assert_allclose(levels['p'], solution.p_hat, rtol=1e-6)
        assert_allclose(levels['w'], solution.w_hat, rtol=1e-6)
        assert_allclose(levels['t'], solution.t_hat, rtol=1e-6)
        assert_allclose(levels['sales'], solution.sales_prime, rtol=1e-6)
        assert_allclose(levels['income'], solution.income_prime, rtol=1e-6)
        assert_allclose(levels['emissions'], solution.emissions_prime, rtol=1e-6, atol=1e-12)
        assert_allclose(levels['consumption_price'], solution.consumption_price_hat, rtol=1e-6)

    def test_tariff(self):
        economy = two_country_fixture()
        scenario = tariff((2, 1), (1, 1), 0.1, tolerance=1e-12)
        solution = self.solver.solve(economy, scenario)
        self.assert_matches(solution, solve_levels(economy, scenario.tariff_matrix(economy)))

        # a tariff on an import raises the buyer's unit cost
        self.assertGreater(solution.P_hat[0], solution.P_hat[1])

    def test_carbon_market_shock(self):
        economy = four_country_fixture()
        scenario = with_supply_shock(no_policy(tolerance=1e-12), multipliers=(0.9, 1.0, 1.0, 1.0),
                                     free_alloc_scale=(0.5, 1.0, 1.0, 1.0))
        solution = self.solver.solve(economy, scenario)
        levels = solve_levels(economy, np.zeros((economy.size, economy.size)),
                              free_alloc_prime=scenario.free_alloc_prime(economy),
                              supply_multipliers=scenario.supply_multipliers(economy))
        self.assert_matches(solution, levels)

    def test_frozen_cbam(self):
        economy = four_country_fixture()
        scenario = full_cbam(endogenous=False, tolerance=1e-12)
        solution = self.solver.solve(economy, scenario)
        levels = solve_levels(economy, solution.tau_tilde_prime - 1.0)
        self.assert_matches(solution, levels)


class TestEquilibriumConditions(unittest.TestCase):

    def setUp(self):
        self.solver = PolicySolver(log_level=logbook.ERROR)
        self.economy = four_country_fixture()

    def test_walras_and_budget(self):
        scenarios = [tariff((3, 1), (1, 1), 0.2, tolerance=1e-10), full_cbam(tolerance=1e-10),
                     reduced_cbam(endogenous=False, tolerance=1e-10),
                     with_supply_shock(full_cbam(tolerance=1e-10), multipliers=(0.85, 0.95, 1.0, 1.0))]
        for scenario in scenarios:
            solution = self.solver.solve(self.economy, scenario)
            self.assertTrue(solution.converged, scenario.name)
            self.assertLess(solution.residuals['walras'], 1e-8, scenario.name)
            self.assertLess(solution.residuals['budget'], 1e-9, scenario.name)
            self.assertLess(max(solution.residuals.values()), 1e-8, scenario.name)

    def test_verify_solution(self):
        scenario = full_cbam(tolerance=1e-10)
        solution = self.solver.solve(self.economy, scenario)
        self.assertEqual(solution.residuals, verify_solution(self.economy, scenario, solution))

        # a perturbed wage breaks the labour market and the unit costs
        broken = dataclasses.replace(solution, w_hat=solution.w_hat * 1.01)
        residuals = verify_solution(self.economy, scenario, broken)
        self.assertGreater(residuals['labor'], 1e-3)
        self.assertGreater(residuals['cost'], 1e-4)

    def test_verify_solution_without_labour(self):
        # a country that produces nothing has no labour endowment
        sales = self.economy.sales.copy()
        sales[6:9] = 0.0
        labor = self.economy.labor.copy()
        labor[2] = 0.0
        economy = dataclasses.replace(self.economy, sales=sales, labor=labor)
        residuals = verify_solution(economy, no_policy(), steady_state_solution(economy))
        self.assertLess(residuals['labor'], 1e-12)

    def test_capped_emissions_follow_supply(self):
        scenario = with_supply_shock(no_policy(tolerance=1e-11), multipliers=(0.9, 1.0, 1.0, 1.0))
        solution = self.solver.solve(self.economy, scenario)
        eu = self.economy.country_index == 0
        self.assertAlmostEqual(0.9, solution.emissions_prime[eu].sum() / self.economy.emissions[eu].sum(), places=8)
        self.assertEqual(0.9, solution.E_hat[0])
        self.assertGreater(solution.t_hat[0], 1.0)

        # priced countries keep their carbon price
        assert_allclose([1.0, 1.0], solution.t_hat[2:])

    def test_baseline_income_closure(self):
        economy = two_country_fixture()
        scenario = dataclasses.replace(tariff((2, 1), (1, 1), 0.1, tolerance=1e-11),
                                       income_share_closure=IncomeClosure.baseline)
        solution = self.solver.solve(economy, scenario)
        reference = self.solver.solve(economy, tariff((2, 1), (1, 1), 0.1, tolerance=1e-11))
        self.assertTrue(solution.converged)
        self.assertLess(solution.residuals['walras'], 1e-8)
        self.assertGreater(solution.residuals['labor'], 1e-9)
        assert_allclose(reference.p_hat, solution.p_hat, rtol=1e-2)


class TestCbamWedges(unittest.TestCase):

    def setUp(self):
        self.solver = PolicySolver(log_level=logbook.ERROR)
        self.economy = four_country_fixture()

    def test_exogenous_wedge_is_frozen(self):
        scenario = full_cbam(endogenous=False, tolerance=1e-10)
        solution = self.solver.solve(self.economy, scenario)
        expected = 1.0 + cbam_matrix(self.economy, np.ones(4), scenario.importer_mask(self.economy),
                                     scenario.sector_mask(self.economy))
        assert_allclose(expected, solution.tau_tilde_prime, rtol=0, atol=1e-14)

    def test_endogenous_wedge_follows_carbon_prices(self):
        scenario = full_cbam(tolerance=1e-10)
        solution = self.solver.solve(self.economy, scenario)
        expected = 1.0 + cbam_matrix(self.economy, solution.t_hat, scenario.importer_mask(self.economy),
                                     scenario.sector_mask(self.economy))
        assert_allclose(expected, solution.tau_tilde_prime, rtol=0, atol=1e-14)
        self.assertNotEqual(1.0, solution.t_hat[0])

    def test_exogenous_wedge_with_other_shocks(self):
        shock = dict(multipliers=(0.9, 1.0, 1.0, 1.0))
        scenario = with_supply_shock(full_cbam(endogenous=False, tolerance=1e-10), **shock)
        solution = self.solver.solve(self.economy, scenario)
        pre = self.solver.solve(self.economy, scenario.without_cbam())
        expected = 1.0 + cbam_matrix(self.economy, pre.t_hat, scenario.importer_mask(self.economy),
                                     scenario.sector_mask(self.economy))
        assert_allclose(expected, solution.tau_tilde_prime, atol=1e-12)

    def test_cbam_cuts_direct_embodied_imports(self):
        solution = self.solver.solve(self.economy, full_cbam(tolerance=1e-10))
        self.assertLess(eei_total_change(self.economy, solution, direct_only=True), 0.0)


class TestSolverBehaviour(unittest.TestCase):

    def setUp(self):
        self.solver = PolicySolver(log_level=logbook.ERROR)
        self.economy = four_country_fixture()

    def test_damping_does_not_change_the_solution(self):
        fast = self.solver.solve(self.economy, full_cbam(damping=0.1, tolerance=1e-11))
        slow = self.solver.solve(self.economy, full_cbam(damping=0.05, tolerance=1e-11))
        self.assertGreater(slow.iterations, fast.iterations)
        assert_allclose(fast.w_hat, slow.w_hat, atol=1e-8)
        assert_allclose(fast.t_hat, slow.t_hat, atol=1e-8)
        assert_allclose(fast.p_hat, slow.p_hat, atol=1e-8)

    def test_warm_start(self):
        scenario = full_cbam(tolerance=1e-10)
        cold = self.solver.solve(self.economy, scenario)
        warm = self.solver.solve(self.economy, scenario, warm_start=cold)
        self.assertLess(warm.iterations, cold.iterations)
        self.assertLessEqual(warm.iterations, 3)
        assert_allclose(cold.p_hat, warm.p_hat, atol=1e-9)

    def test_start_in_any_numeraire(self):
        scenario = full_cbam(tolerance=1e-11)
        cold = self.solver.solve(self.economy, scenario)
        n, size = self.economy.dims.n_countries, self.economy.size
        for level in (0.5, 3.0):
            start = dataclasses.replace(cold, w_hat=np.full(n, level), t_hat=np.full(n, level),
                                        mc_hat=np.full(size, level))
            warm = self.solver.solve(self.economy, scenario, warm_start=start)
            self.assertTrue(warm.converged, level)
            assert_allclose(cold.p_hat, warm.p_hat, atol=1e-9)
            assert_allclose(cold.w_hat, warm.w_hat, atol=1e-9)
            assert_allclose(cold.t_hat, warm.t_hat, atol=1e-9)

    def test_iteration_cap(self):
        scenario = full_cbam(max_iterations=3)
        with self.assertRaises(SolverConvergenceError) as context:
            self.solver.solve(self.economy, scenario)
        self.assertEqual(3, context.exception.history_length)
        self.assertIn('labor', context.exception.residuals)

        solution = self.solver.solve(self.economy, scenario, raise_on_failure=False)
        self.assertFalse(solution.converged)
        self.assertEqual(3, solution.iterations)
        with self.assertRaises(InvalidStateError):
            eei_total_change(self.economy, solution)

    def test_rejects_economy_off_steady_state(self):
        economy = two_country_fixture()
        shifted = dataclasses.replace(economy, sales=economy.sales * 1.01)
        with self.assertRaises(ModelIllPosedError):
            self.solver.solve(shifted, no_policy())

    def test_invalid_price_tolerance(self):
        with self.assertRaises(ValueError):
            PolicySolver(price_tolerance=0.0)

    def test_manifest_and_frames(self):
        scenario = full_cbam(tolerance=1e-10)
        solution = self.solver.solve(self.economy, scenario)
        manifest = solution.manifest()
        self.assertTrue(manifest['converged'])
        self.assertEqual('full_endogenous', manifest['scenario'])
        self.assertEqual(scenario.content_hash(), manifest['input_hash'])
        self.assertEqual(sorted(solution.residuals), list(manifest['residuals']))

        frames = solution.to_frames(self.economy)
        self.assertEqual(12, len(frames['p_hat']))
        self.assertEqual(['flat_index', 'country', 'sector', 'value'], list(frames['p_hat'].columns))
        self.assertEqual(['EU', 'CLN', 'DRT', 'RoW'], frames['t_hat']['country'].tolist())
        self.assertTrue((frames['tau_tilde_prime']['value'] > 1.0).all())


if __name__ == '__main__':
    unittest.main()
