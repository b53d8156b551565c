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

""" A levels solver that root-finds prices, wages, capped carbon prices and sales jointly from the first-order
conditions and market clearing, without the fixed point of cbam_ge.solver. Steady-state prices are one, so the
levels it returns are directly comparable to hats. """

from typing import Dict, Optional

import numpy as np
from scipy.optimize import root

from cbam_ge.model import WorldEconomy


def solve_levels(economy: WorldEconomy, kappa: np.ndarray, free_alloc_prime: Optional[np.ndarray] = None,
                 supply_multipliers: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """ Solve the counterfactual equilibrium under ad valorem wedges kappa.

    :param economy: a steady-state economy.
    :param kappa: NJ x NJ wedges on [origin, destination] flows.
    :param free_alloc_prime: counterfactual free allowance shares, unchanged by default.
    :param supply_multipliers: per-country scaling of capped emission supplies, one by default.
    :return: p, w, t, sales, income, emissions and consumption_price.
    """

    n, nj = economy.dims.n_countries, economy.size
    country = economy.country_index
    tau = 1.0 + np.asarray(kappa, dtype=float)
    free_alloc_prime = economy.free_alloc if free_alloc_prime is None else np.asarray(free_alloc_prime)
    supply_multipliers = np.ones(n) if supply_multipliers is None else np.asarray(supply_multipliers)
    allowance = (1.0 - free_alloc_prime) / (1.0 - economy.free_alloc)
    capped = economy.capped_mask & (economy.emission_base > 0)
    n_capped = int(capped.sum())
    gne = economy.world_gne
    theta, sigma = economy.theta, economy.sigma
    beta, rho, gamma = economy.beta, economy.rho, economy.gamma

    def by_country(values):
        return np.bincount(country, weights=values, minlength=n)

    def unpack(x):
        p = np.exp(x[:nj])
        w = np.exp(x[nj:nj + n])
        t = np.ones(n)
        t[capped] = np.exp(x[nj + n:nj + n + n_capped])
        sales = x[nj + n + n_capped:] * gne
        return p, w, t, sales

    def levels(x):
        p, w, t, sales = unpack(x)
        bundle = (economy.iota * (p[:, None] * tau) ** (1.0 - theta)).sum(axis=0) ** (1.0 / (1.0 - theta))
        shares = economy.iota * (p[:, None] * tau / bundle[None, :]) ** (1.0 - theta)
        weights = economy.chi_flat * p ** (1.0 - sigma)
        consumption = weights / by_country(weights)[country]
        income = w * economy.labor + by_country(rho * sales) \
            + by_country(gamma * (shares * (1.0 - 1.0 / tau)).sum(axis=0) * sales) + economy.deficits
        return p, w, t, sales, bundle, shares, consumption, income

    def equations(x):
        p, w, t, sales, bundle, shares, consumption, income = levels(x)
        cost = np.log(p) - beta * (1.0 - rho) * np.log(w[country]) \
            - rho * np.log(t[country] * allowance) - gamma * np.log(bundle)
        goods = sales - (gamma[None, :] * shares / tau) @ sales - consumption * income[country]
        labor = w * economy.labor - by_country(beta * (1.0 - rho) * sales)
        emissions = by_country(rho * sales / (1.0 - free_alloc_prime)) \
            - t * supply_multipliers * economy.emission_base
        numeraire = income.sum() - gne
        return np.concatenate([cost, goods / gne, labor[:-1] / gne, [numeraire / gne], emissions[capped] / gne])

    start = np.concatenate([np.zeros(nj + n + n_capped), economy.sales / gne])
    result = root(equations, start, method='hybr', tol=1e-13)
    residual = float(np.abs(equations(result.x)).max())
    if residual > 1e-10:
        raise RuntimeError("solve_levels did not converge, max residual {:.3e}: {}".format(residual, result.message))

    p, w, t, sales, bundle, shares, consumption, income = levels(result.x)
    price = economy.observed_carbon_price[country]
    safe = np.where(price > 0, price, 1.0)
    emissions = np.where(price > 0, rho * sales / (t[country] * (1.0 - free_alloc_prime) * safe), 0.0)
    consumption_price = by_country(economy.chi_flat * p ** (1.0 - sigma)) ** (1.0 / (1.0 - sigma))
    return {'p': p, 'w': w, 't': t, 'sales': sales, 'income': income, 'emissions': emissions,
            'consumption_price': consumption_price, 'max_residual': residual}
