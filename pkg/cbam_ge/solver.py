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

""" Counterfactual equilibria in relative changes.

Each outer iteration builds the wedges, solves the unit-cost and price-index fixed point, updates cost and
consumption shares, solves the linear sales system, and moves wages and capped carbon prices towards the values that
clear the labour and emission markets. World nominal GNE is the numeraire. """

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import logbook
import numpy as np
import pandas as pd
import scipy.linalg
from logbook import Logger

from cbam_ge.builders import CbamWedgeBuilder, WedgeListBuilder, scenario_wedges
from cbam_ge.errors import ModelIllPosedError, NegativePriceError, SolverConvergenceError
from cbam_ge.model import WorldEconomy, steady_state_check
from cbam_ge.scenarios import IncomeClosure, PolicyScenario

PRICE_TOLERANCE = 1e-12
MAX_PRICE_ITERATIONS = 10000


@dataclass(frozen=True, eq=False)
class HatSolution:
    """ A counterfactual equilibrium: hats x' / x of prices, wages and carbon prices, plus counterfactual levels.

    :var w_hat: wage hats per country.
    :var t_hat: carbon-price hats per country, one for priced countries.
    :var E_hat: emission hats per country, the supply multiplier for capped countries.
    :var p_hat: output price hats per node.
    :var mc_hat: unit-cost hats per node.
    :var P_hat: materials price index hats per node.
    :var omega_tilde_prime: counterfactual cost shares.
    :var alpha_prime: counterfactual consumption shares, N x J.
    :var sales_prime: counterfactual sales.
    :var income_prime: counterfactual income per country.
    :var tau_tilde_prime: gross wedges.
    :var free_alloc_prime: counterfactual free allowance shares.
    :var emissions_prime: counterfactual emissions per node in tons.
    :var consumption_price_hat: consumer price index hats per country.
    :var carbon_revenue_prime: carbon revenue per country.
    :var tariff_revenue_prime: tariff and CBAM revenue per country.
    :var importer_set: the CBAM importer set used for trade metrics.
    :var iterations: outer iterations run.
    :var converged: whether the update norm fell below the tolerance.
    :var residuals: max-abs residual per equilibrium condition.
    """

    w_hat: np.ndarray
    t_hat: np.ndarray
    E_hat: np.ndarray
    p_hat: np.ndarray
    mc_hat: np.ndarray
    P_hat: np.ndarray
    omega_tilde_prime: np.ndarray
    alpha_prime: np.ndarray
    sales_prime: np.ndarray
    income_prime: np.ndarray
    tau_tilde_prime: np.ndarray
    free_alloc_prime: np.ndarray
    emissions_prime: np.ndarray
    consumption_price_hat: np.ndarray
    carbon_revenue_prime: np.ndarray
    tariff_revenue_prime: np.ndarray
    importer_set: np.ndarray
    iterations: int
    converged: bool
    residuals: Dict[str, float] = field(default_factory=dict)
    scenario_name: str = ''
    tolerance: float = 1e-9
    damping: float = 0.1
    input_hash: str = ''

    def manifest(self) -> dict:
        """ Provenance of the solve: settings, iterations, residuals and the input hash. """

        return {'scenario': self.scenario_name, 'converged': bool(self.converged), 'iterations': int(self.iterations),
                'tolerance': self.tolerance, 'damping': self.damping,
                'residuals': {k: float(v) for k, v in sorted(self.residuals.items())}, 'input_hash': self.input_hash}

    def to_frames(self, economy: WorldEconomy) -> Dict[str, pd.DataFrame]:
        """ One DataFrame per variable, annotated with 1-based country/sector labels and flat indices.

        :param economy: the economy the solution belongs to.
        :return: variable name to DataFrame.
        """

        nodes = pd.DataFrame({'flat_index': np.arange(economy.size),
                              'country': [economy.country_names[c] for c in economy.country_index],
                              'sector': [economy.sector_names[k] for k in economy.sector_index]})
        countries = pd.DataFrame({'country': list(economy.country_names)})
        frames = {}
        node_values = {'p_hat': self.p_hat, 'mc_hat': self.mc_hat, 'P_hat': self.P_hat,
                       'sales_prime': self.sales_prime, 'emissions_prime': self.emissions_prime,
                       'alpha_prime': self.alpha_prime.reshape(economy.size),
                       'free_alloc_prime': self.free_alloc_prime}
        for name, values in node_values.items():
            frames[name] = nodes.assign(value=values)
        country_values = {'w_hat': self.w_hat, 't_hat': self.t_hat, 'E_hat': self.E_hat,
                          'income_prime': self.income_prime, 'consumption_price_hat': self.consumption_price_hat,
                          'carbon_revenue_prime': self.carbon_revenue_prime,
                          'tariff_revenue_prime': self.tariff_revenue_prime}
        for name, values in country_values.items():
            frames[name] = countries.assign(value=values)
        for name, matrix in (('omega_tilde_prime', self.omega_tilde_prime), ('tau_tilde_prime', self.tau_tilde_prime)):
            origin, dest = np.nonzero(matrix if name == 'omega_tilde_prime' else matrix != 1.0)
            frames[name] = pd.DataFrame({'origin_index': origin, 'dest_index': dest, 'value': matrix[origin, dest]})
        return frames


@dataclass
class _State:
    mc_hat: np.ndarray
    P_hat: np.ndarray
    omega_tilde: np.ndarray
    alpha_flat: np.ndarray
    tau: np.ndarray
    sales: np.ndarray
    income: np.ndarray
    carbon_revenue: np.ndarray
    tariff_revenue: np.ndarray
    w_target: np.ndarray
    t_target: np.ndarray
    E_hat: np.ndarray
    scale: float


def steady_state_solution(economy: WorldEconomy, importer_set: Optional[np.ndarray] = None) -> HatSolution:
    """ The trivial solution where every hat is one, used as the baseline in metric comparisons.

    :param economy: the world economy.
    :param importer_set: the CBAM importer set, defaults to the ETS area.
    :return: the steady-state solution.
    """

    n, nj = economy.dims.n_countries, economy.size
    ones_n, ones_nj = np.ones(n), np.ones(nj)
    return HatSolution(w_hat=ones_n, t_hat=ones_n.copy(), E_hat=ones_n.copy(), p_hat=ones_nj, mc_hat=ones_nj.copy(),
                       P_hat=ones_nj.copy(), omega_tilde_prime=economy.iota.copy(), alpha_prime=economy.chi.copy(),
                       sales_prime=economy.sales.copy(), income_prime=economy.income.copy(),
                       tau_tilde_prime=np.ones((nj, nj)), free_alloc_prime=economy.free_alloc.copy(),
                       emissions_prime=economy.emissions.copy(), consumption_price_hat=ones_n.copy(),
                       carbon_revenue_prime=economy.carbon_revenue.copy(), tariff_revenue_prime=np.zeros(n),
                       importer_set=economy.eu_mask.copy() if importer_set is None else np.asarray(importer_set),
                       iterations=0, converged=True, residuals={}, scenario_name='steady-state')


class PolicySolver:
    """ The dampened fixed-point solver for counterfactual equilibria in relative changes. """

    def __init__(self, price_tolerance: float = PRICE_TOLERANCE, max_price_iterations: int = MAX_PRICE_ITERATIONS,
                 log_every: int = 100, log_level=logbook.INFO):
        """ PolicySolver constructor.

        :param price_tolerance: tolerance of the inner unit-cost fixed point, in log points.
        :param max_price_iterations: cap on inner iterations.
        :param log_every: log the update norm every this many outer iterations.
        :param log_level: the level for displaying and logging information, e.g. debugging information.
        """

        if price_tolerance <= 0:
            raise ValueError("PolicySolver.__init__ expected 'price_tolerance' to be positive, however received '{}'"
                             .format(price_tolerance))
        self._log = Logger('PolicySolver')
        self._log.level = log_level
        self.price_tolerance = price_tolerance
        self.max_price_iterations = max_price_iterations
        self.log_every = log_every

    def solve(self, economy: WorldEconomy, scenario: PolicyScenario, warm_start: Optional[HatSolution] = None,
              raise_on_failure: bool = True) -> HatSolution:
        """ Solve the counterfactual equilibrium of a scenario.

        :param economy: a world economy at its steady state.
        :param scenario: the policy scenario.
        :param warm_start: a previous solution whose wages, carbon prices and unit costs seed the iteration.
        :param raise_on_failure: raise SolverConvergenceError when the iteration cap is reached; otherwise return
        the last iterate flagged as unconverged.
        :return: the solution.
        """

        report = steady_state_check(economy)
        if not report.passed:
            raise ModelIllPosedError("PolicySolver.solve expected an economy at its steady state, however these "
                                     "residuals exceed {}: {}".format(report.tolerance, report.failures()))

        n = economy.dims.n_countries
        ones = np.ones(n)
        wedges = scenario_wedges(economy, scenario)
        if scenario.cbam_mode.is_active and not scenario.cbam_mode.is_endogenous:
            reference = ones
            if scenario.has_other_shocks():
                self._log.info("PolicySolver.solve: solving the pre-CBAM equilibrium of '{}' to freeze the wedge"
                               .format(scenario.name))
                reference = self.solve(economy, scenario.without_cbam(), warm_start=warm_start).t_hat
            wedges = WedgeListBuilder([b.freeze(economy, reference) if isinstance(b, CbamWedgeBuilder) else b
                                       for b in wedges.builders])
        static_tau = None if wedges.is_endogenous() else wedges.gross(economy, ones)

        multipliers = scenario.supply_multipliers(economy)
        free_alloc_prime = scenario.free_alloc_prime(economy)
        active = economy.capped_mask & (economy.emission_base > 0)
        priced = ~economy.capped_mask

        if warm_start is not None:
            w = np.array(warm_start.w_hat, dtype=float)
            t = np.where(active, warm_start.t_hat, 1.0)
            mc = np.array(warm_start.mc_hat, dtype=float)
        else:
            w, t, mc = ones.copy(), ones.copy(), np.ones(economy.size)
        previous_E = np.ones(n)
        price_tolerance = min(self.price_tolerance, scenario.tolerance)

        self._log.info("PolicySolver.solve: '{}' started (mode {}, damping {}, tolerance {})"
                       .format(scenario.name, scenario.cbam_mode.value, scenario.damping, scenario.tolerance))
        state, norm = None, float('inf')
        for iteration in range(1, scenario.max_iterations + 1):
            tau = static_tau if static_tau is not None else wedges.gross(economy, t)
            state = self._evaluate(economy, scenario, w, t, tau, mc, free_alloc_prime, multipliers, active,
                                   price_tolerance)
            mc = state.mc_hat
            norm = max(float(np.abs(state.w_target - w).max()),
                       float(np.abs(state.t_target - t)[active].max(initial=0.0)),
                       float(np.abs(state.E_hat - previous_E)[priced].max(initial=0.0)),
                       abs(state.scale - 1.0))
            if norm < scenario.tolerance:
                solution = self._solution(economy, scenario, w, t, state, free_alloc_prime, multipliers, iteration,
                                          True)
                self._log.info("PolicySolver.solve: '{}' converged in {} iterations (update norm {:.3e})"
                               .format(scenario.name, iteration, norm))
                return solution
            if self.log_every and iteration % self.log_every == 0:
                self._log.debug("PolicySolver.solve: iteration {} update norm {:.3e}".format(iteration, norm))
            previous_E = state.E_hat
            w = (w + scenario.damping * (state.w_target - w)) * state.scale
            t = np.where(active, (t + scenario.damping * (state.t_target - t)) * state.scale, 1.0)

        solution = self._solution(economy, scenario, w, t, state, free_alloc_prime, multipliers,
                                  scenario.max_iterations, False)
        if raise_on_failure:
            raise SolverConvergenceError("PolicySolver.solve did not converge for '{}' after {} iterations, last "
                                         "update norm {:.3e}".format(scenario.name, scenario.max_iterations, norm),
                                         residuals=solution.residuals, history_length=scenario.max_iterations)
        self._log.warn("PolicySolver.solve: '{}' stopped unconverged after {} iterations"
                       .format(scenario.name, scenario.max_iterations))
        return solution

    def prices(self, economy: WorldEconomy, w: np.ndarray, t: np.ndarray, tau: np.ndarray, fa_hat: np.ndarray,
               mc_start: Optional[np.ndarray] = None, tolerance: Optional[float] = None):
        """ Solve the unit-cost and materials price index hats jointly.

        :param economy: the world economy.
        :param w: wage hats.
        :param t: carbon-price hats.
        :param tau: gross wedges.
        :param fa_hat: hats of (1 - free allowance share).
        :param mc_start: initial unit costs.
        :param tolerance: convergence threshold in log points.
        :return: (mc_hat, P_hat).
        """

        tolerance = self.price_tolerance if tolerance is None else tolerance
        country = economy.country_index
        fixed = w[country] ** (economy.beta * (1.0 - economy.rho)) * (t[country] * fa_hat) ** economy.rho
        exponent = 1.0 - economy.theta
        mc = np.ones(economy.size) if mc_start is None else np.array(mc_start, dtype=float)
        for _ in range(self.max_price_iterations):
            price_index = ((economy.iota * (mc[:, None] * tau) ** exponent).sum(axis=0)) ** (1.0 / exponent)
            updated = fixed * price_index ** economy.gamma
            if not np.all(np.isfinite(updated)) or np.any(updated <= 0):
                raise NegativePriceError("PolicySolver.prices produced a non-positive unit cost at nodes {}; check "
                                         "beta and rho".format(np.flatnonzero(~(updated > 0)).tolist()))
            gap = float(np.abs(np.log(updated) - np.log(mc)).max())
            mc = updated
            if gap < tolerance:
                price_index = ((economy.iota * (mc[:, None] * tau) ** exponent).sum(axis=0)) ** (1.0 / exponent)
                return fixed * price_index ** economy.gamma, price_index
        raise SolverConvergenceError("PolicySolver.prices did not converge after {} iterations"
                                     .format(self.max_price_iterations), history_length=self.max_price_iterations)

    def _evaluate(self, economy: WorldEconomy, scenario: PolicyScenario, w, t, tau, mc_start, free_alloc_prime,
                  multipliers, active, price_tolerance) -> _State:
        country = economy.country_index
        fa_hat = (1.0 - free_alloc_prime) / (1.0 - economy.free_alloc)
        mc, price_index = self.prices(economy, w, t, tau, fa_hat, mc_start, price_tolerance)

        exponent = 1.0 - economy.theta
        omega_tilde = economy.iota * (mc[:, None] * tau / price_index[None, :]) ** exponent
        omega_tilde = omega_tilde / omega_tilde.sum(axis=0)[None, :]
        weighted = economy.chi_flat * mc ** (1.0 - economy.sigma)
        alpha = weighted / economy.country_sum(weighted)[country]

        gamma = economy.gamma
        omega_prime = gamma[None, :] * omega_tilde / tau
        if scenario.income_share_closure is IncomeClosure.counterfactual:
            revenue = economy.rho + gamma * (omega_tilde * (1.0 - 1.0 / tau)).sum(axis=0)
        else:
            revenue = economy.rho + gamma * (economy.iota * (tau - 1.0)).sum(axis=0)
        system = np.eye(economy.size) - omega_prime - (alpha[:, None] * economy.same_country) * revenue[None, :]
        rhs = alpha * (w * economy.labor + economy.deficits)[country]
        factors = scipy.linalg.lu_factor(system)
        sales = scipy.linalg.lu_solve(factors, rhs)
        sales = sales + scipy.linalg.lu_solve(factors, rhs - system @ sales)

        carbon_revenue = economy.country_sum(economy.rho * sales)
        tariff_revenue = economy.country_sum((revenue - economy.rho) * sales)
        income = w * economy.labor + carbon_revenue + tariff_revenue + economy.deficits

        labor_value = economy.country_sum(economy.beta * (1.0 - economy.rho) * sales)
        if scenario.income_share_closure is IncomeClosure.baseline:
            # baseline shares leave the world budget open, so only relative labour demand is cleared
            labor_value = labor_value * math.fsum(w * economy.labor) / math.fsum(labor_value)
        w_target = np.where(economy.labor > 0, labor_value / np.where(economy.labor > 0, economy.labor, 1.0), w)
        emission_value = economy.country_sum(economy.rho * sales / (1.0 - free_alloc_prime))
        base = economy.emission_base
        safe_base = np.where(base > 0, base, 1.0)
        t_target = np.where(active, emission_value / (multipliers * safe_base), 1.0)
        E_hat = np.where(base > 0, emission_value / (t * safe_base), 1.0)
        E_hat = np.where(economy.capped_mask, multipliers, E_hat)
        scale = economy.world_gne / math.fsum(income)
        return _State(mc_hat=mc, P_hat=price_index, omega_tilde=omega_tilde, alpha_flat=alpha, tau=tau, sales=sales,
                      income=income, carbon_revenue=carbon_revenue, tariff_revenue=tariff_revenue,
                      w_target=w_target, t_target=t_target, E_hat=E_hat, scale=scale)

    def _solution(self, economy: WorldEconomy, scenario: PolicyScenario, w, t, state: _State, free_alloc_prime,
                  multipliers, iterations: int, converged: bool) -> HatSolution:
        country = economy.country_index
        price = economy.observed_carbon_price[country]
        safe_price = np.where(price > 0, price, 1.0)
        emissions = np.where(price > 0, economy.rho * state.sales / (t[country] * (1.0 - free_alloc_prime)
                                                                      * safe_price), 0.0)
        weighted = economy.chi_flat * state.mc_hat ** (1.0 - economy.sigma)
        consumption_price = economy.country_sum(weighted) ** (1.0 / (1.0 - economy.sigma))
        solution = HatSolution(w_hat=np.array(w), t_hat=np.array(t), E_hat=state.E_hat, p_hat=state.mc_hat.copy(),
                               mc_hat=state.mc_hat, P_hat=state.P_hat, omega_tilde_prime=state.omega_tilde,
                               alpha_prime=state.alpha_flat.reshape(economy.chi.shape), sales_prime=state.sales,
                               income_prime=state.income, tau_tilde_prime=np.array(state.tau),
                               free_alloc_prime=free_alloc_prime, emissions_prime=emissions,
                               consumption_price_hat=consumption_price, carbon_revenue_prime=state.carbon_revenue,
                               tariff_revenue_prime=state.tariff_revenue,
                               importer_set=scenario.importer_mask(economy) if scenario.cbam_mode.is_active
                               else economy.eu_mask.copy(),
                               iterations=iterations, converged=converged, scenario_name=scenario.name,
                               tolerance=scenario.tolerance, damping=scenario.damping,
                               input_hash=scenario.content_hash())
        return dataclasses.replace(solution, residuals=verify_solution(economy, scenario, solution,
                                                                       multipliers=multipliers))


def verify_solution(economy: WorldEconomy, scenario: PolicyScenario, solution: HatSolution,
                    multipliers: Optional[np.ndarray] = None) -> Dict[str, float]:
    """ Substitute a solution into every equilibrium condition, independently of how it was reached.

    Level conditions are scaled by world GNE; hat conditions are absolute.

    :param economy: the world economy.
    :param scenario: the scenario the solution belongs to.
    :param solution: the solution to check.
    :param multipliers: emission supply multipliers, read from the scenario by default.
    :return: the max-abs residual per condition.
    """

    multipliers = scenario.supply_multipliers(economy) if multipliers is None else multipliers
    country = economy.country_index
    gne = economy.world_gne
    w, t, mc, tau = solution.w_hat, solution.t_hat, solution.mc_hat, solution.tau_tilde_prime
    sales, income = solution.sales_prime, solution.income_prime
    free_alloc_prime = solution.free_alloc_prime
    fa_hat = (1.0 - free_alloc_prime) / (1.0 - economy.free_alloc)
    exponent = 1.0 - economy.theta
    gamma = economy.gamma

    price_index = ((economy.iota * (mc[:, None] * tau) ** exponent).sum(axis=0)) ** (1.0 / exponent)
    unit_cost = w[country] ** (economy.beta * (1.0 - economy.rho)) * (t[country] * fa_hat) ** economy.rho \
        * solution.P_hat ** gamma
    cost_shares = economy.iota * (mc[:, None] * tau / solution.P_hat[None, :]) ** exponent
    weighted = economy.chi_flat * mc ** (1.0 - economy.sigma)
    alpha = weighted / economy.country_sum(weighted)[country]
    alpha_prime = solution.alpha_prime.reshape(economy.size)
    omega_prime = gamma[None, :] * solution.omega_tilde_prime / tau
    final_use = sales - omega_prime @ sales

    if scenario.income_share_closure is IncomeClosure.counterfactual:
        tariff_share = gamma * (solution.omega_tilde_prime * (1.0 - 1.0 / tau)).sum(axis=0)
    else:
        tariff_share = gamma * (economy.iota * (tau - 1.0)).sum(axis=0)
    budget = w * economy.labor + economy.country_sum(economy.rho * sales) + economy.country_sum(tariff_share * sales) \
        + economy.deficits

    labor_value = economy.country_sum(economy.beta * (1.0 - economy.rho) * sales)
    labor_target = np.where(economy.labor > 0, labor_value / np.where(economy.labor > 0, economy.labor, 1.0), w)
    emission_value = economy.country_sum(economy.rho * sales / (1.0 - free_alloc_prime))
    base = economy.emission_base
    active = economy.capped_mask & (base > 0)
    safe_base = np.where(base > 0, base, 1.0)
    capped_gap = np.abs(t - emission_value / (multipliers * safe_base))[active]
    priced = ~economy.capped_mask & (base > 0)
    priced_gap = np.abs(solution.E_hat - emission_value / (t * safe_base))[priced]
    fixed_price_gap = np.abs(t[~economy.capped_mask] - 1.0)

    return {
        'cost': float(np.abs(unit_cost - mc).max()),
        'price_index': float(np.abs(price_index - solution.P_hat).max()),
        'cost_shares': float(max(np.abs(cost_shares - solution.omega_tilde_prime).max(),
                                 np.abs(solution.omega_tilde_prime.sum(axis=0) - 1.0).max())),
        'consumption_shares': float(np.abs(alpha - alpha_prime).max()),
        'sales': float(np.abs(final_use - alpha_prime * income[country]).max() / gne),
        'labor': float(np.abs(w - labor_target).max()),
        'emissions': float(max(capped_gap.max(initial=0.0), priced_gap.max(initial=0.0),
                               fixed_price_gap.max(initial=0.0))),
        'budget': float(np.abs(income - budget).max() / gne),
        'walras': abs(math.fsum(final_use) - math.fsum(income)) / gne,
        'numeraire': abs(math.fsum(income) / gne - 1.0),
    }


_default_solver = None


def solve(economy: WorldEconomy, scenario: PolicyScenario, warm_start: Optional[HatSolution] = None) -> HatSolution:
    """ Solve with a shared default PolicySolver.

    :param economy: a world economy at its steady state.
    :param scenario: the policy scenario.
    :param warm_start: optional previous solution.
    :return: the solution.
    """

    global _default_solver
    if _default_solver is None:
        _default_solver = PolicySolver()
    return _default_solver.solve(economy, scenario, warm_start=warm_start)
