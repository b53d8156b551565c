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

""" First-order responses at the steady state to a wedge on a single flow.

All derivatives are per unit of wedge on the flow from (origin country, origin sector) to (destination country,
destination sector). Wage and carbon-price responses are inputs: a central finite difference of the nonlinear solver
by default, or zero for partial-equilibrium responses. """

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
import scipy.linalg

from cbam_ge.errors import ModelIllPosedError
from cbam_ge.functional import tariff
from cbam_ge.metrics import importer_exports
from cbam_ge.model import WorldEconomy, flat_index, leontief_inverse, share_matrices, steady_state_check
from cbam_ge.solver import PolicySolver


@dataclass(frozen=True)
class ShockFlow:
    """ The flow carrying the wedge, 1-based, in the (l, s, q, r) order of the command line. """

    origin_country: int
    dest_country: int
    origin_sector: int
    dest_sector: int

    @classmethod
    def parse(cls, text: str) -> 'ShockFlow':
        """ Parse 'l,s,q,r'. """

        parts = [p.strip() for p in text.split(',')]
        if len(parts) != 4:
            raise ValueError("ShockFlow.parse expected 'l,s,q,r', however received '{}'".format(text))
        return cls(*(int(p) for p in parts))

    def origin_index(self, economy: WorldEconomy) -> int:
        return flat_index(self.origin_country, self.origin_sector, economy.dims.n_sectors, economy.dims.n_countries)

    def dest_index(self, economy: WorldEconomy) -> int:
        return flat_index(self.dest_country, self.dest_sector, economy.dims.n_sectors, economy.dims.n_countries)


@dataclass(frozen=True, eq=False)
class FactorDerivatives:
    """ Log responses of wages, carbon prices and emissions per country. """

    dlogw: np.ndarray
    dlogt: np.ndarray
    dlogE: np.ndarray

    @classmethod
    def zero(cls, n_countries: int) -> 'FactorDerivatives':
        return cls(np.zeros(n_countries), np.zeros(n_countries), np.zeros(n_countries))


def factor_derivatives_fd(economy: WorldEconomy, flow: ShockFlow, step: float = 1e-4,
                          solver: Optional[PolicySolver] = None, tolerance: float = 1e-12) -> FactorDerivatives:
    """ Central finite difference of the nonlinear solver with the flow's wedge set to +/- step.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param step: the wedge perturbation.
    :param solver: the solver, a default PolicySolver otherwise.
    :param tolerance: solver tolerance used for both solves.
    :return: the factor derivatives.
    """

    if not step > 0:
        raise ValueError("factor_derivatives_fd expected 'step' to be positive, however received '{}'".format(step))
    solver = solver if solver is not None else PolicySolver()
    origin = (flow.origin_country, flow.origin_sector)
    dest = (flow.dest_country, flow.dest_sector)
    up = solver.solve(economy, tariff(origin, dest, step, tolerance=tolerance))
    down = solver.solve(economy, tariff(origin, dest, -step, tolerance=tolerance))

    def slope(plus, minus):
        return (np.log(plus) - np.log(minus)) / (2.0 * step)

    return FactorDerivatives(dlogw=slope(up.w_hat, down.w_hat), dlogt=slope(up.t_hat, down.t_hat),
                             dlogE=slope(up.E_hat, down.E_hat))


def _require_steady_state(economy: WorldEconomy) -> None:
    report = steady_state_check(economy)
    if not report.passed:
        raise ModelIllPosedError("linearization expected an economy at its steady state, however these residuals "
                                 "exceed {}: {}".format(report.tolerance, report.failures()))


def _selector(economy: WorldEconomy, flow: ShockFlow) -> np.ndarray:
    selector = np.zeros(economy.size)
    selector[flow.dest_index(economy)] = economy.iota[flow.origin_index(economy), flow.dest_index(economy)]
    return selector


def dlog_prices(economy: WorldEconomy, flow: ShockFlow, dlogw: np.ndarray, dlogt: np.ndarray) -> np.ndarray:
    """ Price responses (I - gamma Pi')^-1 [beta (1 - rho) dlogw + rho dlogt + gamma * selector].

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param dlogw: wage responses per country.
    :param dlogt: carbon-price responses per country.
    :return: dlog p per node.
    """

    _require_steady_state(economy)
    country = economy.country_index
    rhs = economy.beta * (1.0 - economy.rho) * np.asarray(dlogw)[country] \
        + economy.rho * np.asarray(dlogt)[country] + economy.gamma * _selector(economy, flow)
    psi = leontief_inverse(share_matrices(economy))
    return psi.T @ rhs


def dcbam(rho_l_q: float, dlogt_s: float, dlogt_l: float) -> float:
    """ First-order change of a CBAM wedge of size rho_l_q through the carbon prices of importer s and exporter l. """

    return rho_l_q ** 2 * (dlogt_s - dlogt_l)


def _materials_index(economy: WorldEconomy, flow: ShockFlow, prices: np.ndarray) -> np.ndarray:
    return economy.iota.T @ prices + _selector(economy, flow)


def dlog_cost_shares(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives,
                     theta: Optional[float] = None) -> np.ndarray:
    """ Cost-share responses (1 - theta)(dlog p_a + 1[(a, b) shocked] - dlog P_b) on flows with positive weight.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param factors: factor responses.
    :param theta: the elasticity, the economy's by default.
    :return: NJ x NJ dlog omega_tilde.
    """

    theta = economy.theta if theta is None else theta
    prices = dlog_prices(economy, flow, factors.dlogw, factors.dlogt)
    response = prices[:, None] - _materials_index(economy, flow, prices)[None, :]
    response[flow.origin_index(economy), flow.dest_index(economy)] += 1.0
    return np.where(economy.iota > 0, (1.0 - theta) * response, 0.0)


def dlog_welfare(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives) -> np.ndarray:
    """ Real GNE responses: income-share weighted factor responses plus wedge revenue of the buying country, less
    the consumer price response chi . dlog p.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param factors: factor responses.
    :return: dlog real GNE per country.
    """

    prices = dlog_prices(economy, flow, factors.dlogw, factors.dlogt)
    revenue = np.zeros(economy.dims.n_countries)
    b0 = flow.dest_index(economy)
    revenue[flow.dest_country - 1] = economy.gamma[b0] * economy.iota[flow.origin_index(economy), b0] \
        * economy.sales[b0]
    income_change = economy.labor * factors.dlogw + economy.carbon_revenue * (factors.dlogt + factors.dlogE) + revenue
    return income_change / economy.income - economy.country_sum(economy.chi_flat * prices)


def _network_change(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives):
    prices = dlog_prices(economy, flow, factors.dlogw, factors.dlogt)
    cost_shares = dlog_cost_shares(economy, flow, factors)
    wedge = np.zeros_like(economy.iota)
    wedge[flow.origin_index(economy), flow.dest_index(economy)] = 1.0
    d_omega = economy.gamma[None, :] * economy.iota * (cost_shares - wedge)
    return prices, d_omega


def _sales_change(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives, prices: np.ndarray,
                  d_omega: np.ndarray) -> np.ndarray:
    country = economy.country_index
    chi = economy.chi_flat
    block = economy.same_country.astype(float)
    d_alpha = chi * (1.0 - economy.sigma) * (prices - economy.country_sum(chi * prices)[country])
    d_revenue = np.zeros(economy.size)
    b0 = flow.dest_index(economy)
    d_revenue[b0] = economy.gamma[b0] * economy.iota[flow.origin_index(economy), b0]

    system = economy.iota * economy.gamma[None, :] + (chi[:, None] * block) * economy.rho[None, :]
    d_system = d_omega + (d_alpha[:, None] * block) * economy.rho[None, :] + (chi[:, None] * block) * d_revenue[None, :]
    endowment = (economy.labor + economy.deficits)[country]
    d_rhs = d_alpha * endowment + chi * (economy.labor * factors.dlogw)[country]
    return scipy.linalg.solve(np.eye(economy.size) - system, d_system @ economy.sales + d_rhs)


def dlog_sales(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives) -> np.ndarray:
    """ Sales responses from the linearised sales system, zero where baseline sales are zero.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param factors: factor responses.
    :return: dlog sales per node.
    """

    prices, d_omega = _network_change(economy, flow, factors)
    change = _sales_change(economy, flow, factors, prices, d_omega)
    safe = np.where(economy.sales > 0, economy.sales, 1.0)
    return np.where(economy.sales > 0, change / safe, 0.0)


def dlog_eei(economy: WorldEconomy, flow: ShockFlow, factors: FactorDerivatives, direct_only: bool = False) -> float:
    """ Response of emissions embodied in imports into the ETS area: an intensity term, a network term through the
    Leontief inverse and an import term, weighted by v = intensity * Psi.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param factors: factor responses.
    :param direct_only: drop upstream linkages.
    :return: dlog EEI, zero without trade into the ETS area.
    """

    prices, d_omega = _network_change(economy, flow, factors)
    d_sales = _sales_change(economy, flow, factors, prices, d_omega)
    importer = economy.eu_mask
    omega = economy.iota * economy.gamma[None, :]
    rho_tilde = economy.emission_intensity
    d_rho_tilde = -rho_tilde * np.asarray(factors.dlogt)[economy.country_index]
    exports = importer_exports(economy, omega, economy.sales, importer)
    d_exports = importer_exports(economy, d_omega, economy.sales, importer) \
        + importer_exports(economy, omega, d_sales, importer)

    if direct_only:
        level = rho_tilde @ exports
        change = d_rho_tilde @ exports + rho_tilde @ d_exports
    else:
        psi = leontief_inverse(omega)
        v = rho_tilde @ psi
        upstream = psi @ exports
        level = rho_tilde @ upstream
        change = d_rho_tilde @ upstream + v @ (d_omega @ upstream) + v @ d_exports
    if level == 0:
        return 0.
    return float(change / level)


@dataclass(frozen=True, eq=False)
class LinearizedResponse:
    """ Every first-order response to a unit wedge on one flow.

    :var flow: the shocked flow.
    :var magnitude: the shock size the derivatives are scaled to.
    :var factors: the factor responses used.
    :var dCBAM: first-order change of a CBAM of size rho_l_q on the flow through carbon prices.
    """

    flow: ShockFlow
    magnitude: float
    factors: FactorDerivatives
    dlogp: np.ndarray
    dlog_omega_tilde: np.ndarray
    dlogW: np.ndarray
    dlogEEI: float
    dlogEEI_direct: float
    dlog_sales: np.ndarray
    dCBAM: float
    rho_l_q: float

    def cbam_effect(self, derivative):
        """ First-order effect of introducing a CBAM of size rho_l_q on the flow, including its endogenous change.

        :param derivative: any per-unit derivative of this response.
        :return: the derivative scaled by rho_l_q + dCBAM.
        """

        return derivative * (self.rho_l_q + self.dCBAM)

    def to_frame(self, economy: WorldEconomy) -> pd.DataFrame:
        """ Long table of (variable, index, value) rows. """

        rows = [('dlogp', i, v) for i, v in enumerate(self.dlogp)]
        rows += [('dlog_sales', i, v) for i, v in enumerate(self.dlog_sales)]
        rows += [('dlogW', economy.country_names[i], v) for i, v in enumerate(self.dlogW)]
        origin, dest = np.nonzero(self.dlog_omega_tilde)
        rows += [('dlog_omega_tilde', '{}->{}'.format(a, b), self.dlog_omega_tilde[a, b]) for a, b in zip(origin, dest)]
        rows += [('dlogEEI', 'total', self.dlogEEI), ('dlogEEI', 'direct', self.dlogEEI_direct),
                 ('dCBAM', 'flow', self.dCBAM)]
        return pd.DataFrame(rows, columns=['variable', 'index', 'value'])


def linearize(economy: WorldEconomy, flow: ShockFlow, factors: Optional[FactorDerivatives] = None,
              solver: Optional[PolicySolver] = None, magnitude: float = 1.0) -> LinearizedResponse:
    """ Collect every first-order response to a wedge on one flow.

    :param economy: a steady-state economy.
    :param flow: the shocked flow.
    :param factors: factor responses, estimated by finite differences when omitted.
    :param solver: the solver used for the finite differences.
    :param magnitude: reported shock size.
    :return: the linearized response.
    """

    _require_steady_state(economy)
    if factors is None:
        factors = factor_derivatives_fd(economy, flow, solver=solver)
    rho_l_q = float(economy.rho[flow.origin_index(economy)])
    return LinearizedResponse(flow=flow, magnitude=magnitude, factors=factors,
                              dlogp=dlog_prices(economy, flow, factors.dlogw, factors.dlogt),
                              dlog_omega_tilde=dlog_cost_shares(economy, flow, factors),
                              dlogW=dlog_welfare(economy, flow, factors),
                              dlogEEI=dlog_eei(economy, flow, factors),
                              dlogEEI_direct=dlog_eei(economy, flow, factors, direct_only=True),
                              dlog_sales=dlog_sales(economy, flow, factors),
                              dCBAM=dcbam(rho_l_q, factors.dlogt[flow.dest_country - 1],
                                          factors.dlogt[flow.origin_country - 1]),
                              rho_l_q=rho_l_q)
