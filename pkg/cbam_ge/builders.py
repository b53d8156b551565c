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

from abc import ABC, abstractmethod
from typing import Dict, List

import numpy as np

from cbam_ge.model import WorldEconomy
from cbam_ge.scenarios import FlowKey, PolicyScenario


def cbam_wedge(rho_n_k: float, t_i_prime: float, t_n_prime: float, nu_in: float, in_scope: bool) -> float:
    """ The CBAM wedge on a single flow from exporter n to importer i.

    :param rho_n_k: emission elasticity of the exporting sector.
    :param t_i_prime: the importer's carbon price.
    :param t_n_prime: the exporter's carbon price, zero when it has none.
    :param nu_in: the ratio of observed carbon prices, importer over exporter.
    :param in_scope: whether the importer applies the CBAM, the exporter does not and the sector is covered.
    :return: the ad valorem CBAM wedge.
    """

    if rho_n_k < 0 or t_i_prime < 0 or t_n_prime < 0:
        raise ValueError("cbam_wedge expected non-negative inputs, however received rho={}, t_i={}, t_n={}"
                         .format(rho_n_k, t_i_prime, t_n_prime))
    if not nu_in > 0:
        raise ValueError("cbam_wedge expected 'nu_in' to be positive, however received '{}'".format(nu_in))
    if not in_scope:
        return 0.
    if t_n_prime == 0:
        return rho_n_k * t_i_prime * nu_in
    if t_i_prime * nu_in > t_n_prime:
        return rho_n_k * (t_i_prime / t_n_prime) * nu_in
    return 0.


def cbam_matrix(economy: WorldEconomy, t_hat: np.ndarray, importer_mask: np.ndarray,
                sector_mask: np.ndarray) -> np.ndarray:
    """ Vectorised cbam_wedge over every flow [origin a, destination b].

    Carbon prices are in hats; an exporter without an observed price has a zero effective price.

    :param economy: the world economy.
    :param t_hat: carbon-price hats per country.
    :param importer_mask: countries applying the CBAM.
    :param sector_mask: sectors covered.
    :return: the NJ x NJ wedge.
    """

    country = economy.country_index
    importer = np.asarray(importer_mask, dtype=bool)[country]
    covered = np.asarray(sector_mask, dtype=bool)[economy.sector_index]
    scope = importer[None, :] & ~importer[:, None] & covered[:, None]

    t_hat = np.asarray(t_hat, dtype=float)
    priced_origin = economy.observed_carbon_price[country] > 0
    t_origin = np.where(priced_origin, t_hat[country], 0.0)[:, None]
    effective_dest = t_hat[country][None, :] * economy.nu[country[None, :], country[:, None]]
    rho = economy.rho[:, None]

    safe_origin = np.where(t_origin > 0, t_origin, 1.0)
    ratio_branch = np.where(effective_dest > t_origin, rho * effective_dest / safe_origin, 0.0)
    wedge = np.where(t_origin == 0, rho * effective_dest, ratio_branch)
    return np.where(scope, wedge, 0.0)


class WedgeBuilder(ABC):
    """ Abstract WedgeBuilder interface. WedgeBuilders generate additive components of the gross wedge
    tau_tilde = 1 + kappa + CBAM. """

    @abstractmethod
    def is_endogenous(self) -> bool:
        """ Implement, whether the component depends on counterfactual carbon prices.

        :return: True when build must be re-evaluated each outer iteration.
        """

        raise NotImplementedError("Please implement the `is_endogenous` method")

    @abstractmethod
    def build(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        """ Implement, builds the NJ x NJ additive wedge at the given carbon-price hats.

        :param economy: the world economy.
        :param t_hat: carbon-price hats per country.
        :return: the additive wedge.
        """

        raise NotImplementedError("Please implement the `build` method")


class TariffWedgeBuilder(WedgeBuilder):
    """ Builds ad valorem tariffs from sparse overrides. """

    def __init__(self, overrides: Dict[FlowKey, float]):
        """ Constructor for TariffWedgeBuilder.

        :param overrides: ((origin country, origin sector), (destination country, destination sector)) to rate.
        """

        WedgeBuilder.__init__(self)
        self.overrides = dict(overrides)

    def is_endogenous(self) -> bool:
        return False

    def build(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        kappa = np.zeros((economy.size, economy.size))
        for (origin, dest), rate in self.overrides.items():
            kappa[economy.dims.flat_index(*origin), economy.dims.flat_index(*dest)] = rate
        return kappa


class CbamWedgeBuilder(WedgeBuilder):
    """ Builds the CBAM wedge, re-evaluated at the current carbon prices. """

    def __init__(self, importer_mask: np.ndarray, sector_mask: np.ndarray, scale: float = 1.0):
        """ Constructor for CbamWedgeBuilder.

        :param importer_mask: countries applying the CBAM.
        :param sector_mask: sectors covered.
        :param scale: multiplier on the wedge.
        """

        WedgeBuilder.__init__(self)
        if scale < 0:
            raise ValueError("CbamWedgeBuilder.__init__ expected 'scale' to be non-negative, however received '{}'"
                             .format(scale))
        self.importer_mask = np.asarray(importer_mask, dtype=bool)
        self.sector_mask = np.asarray(sector_mask, dtype=bool)
        self.scale = scale

    def is_endogenous(self) -> bool:
        return True

    def build(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        return self.scale * cbam_matrix(economy, t_hat, self.importer_mask, self.sector_mask)

    def freeze(self, economy: WorldEconomy, t_hat: np.ndarray) -> 'FrozenWedgeBuilder':
        """ Evaluate once and keep the result, as the exogenous mode does.

        :param economy: the world economy.
        :param t_hat: the carbon prices to evaluate at.
        :return: a builder returning the frozen wedge.
        """

        return FrozenWedgeBuilder(self.build(economy, t_hat))


class FrozenWedgeBuilder(WedgeBuilder):
    """ Returns a wedge fixed at construction. """

    def __init__(self, wedge: np.ndarray):
        WedgeBuilder.__init__(self)
        self.wedge = np.array(wedge, dtype=float)
        self.wedge.setflags(write=False)

    def is_endogenous(self) -> bool:
        return False

    def build(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        return self.wedge


class WedgeListBuilder(WedgeBuilder):
    """ Sums a list of wedge components. """

    def __init__(self, builders: List[WedgeBuilder]):
        """ Constructor for WedgeListBuilder.

        :param builders: the components to add up.
        """

        WedgeBuilder.__init__(self)
        self.builders = list(builders)

    def is_endogenous(self) -> bool:
        return any(builder.is_endogenous() for builder in self.builders)

    def build(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        wedge = np.zeros((economy.size, economy.size))
        for builder in self.builders:
            wedge = wedge + builder.build(economy, t_hat)
        return wedge

    def gross(self, economy: WorldEconomy, t_hat: np.ndarray) -> np.ndarray:
        """ The gross wedge tau_tilde = 1 + sum of components. """

        return 1.0 + self.build(economy, t_hat)


def scenario_wedges(economy: WorldEconomy, scenario: PolicyScenario) -> WedgeListBuilder:
    """ The tariff and (live) CBAM components a scenario asks for.

    :param economy: the world economy.
    :param scenario: the policy scenario.
    :return: the wedge list; exogenous CBAM is frozen by the solver.
    """

    builders = []
    if scenario.tariff_overrides:
        builders.append(TariffWedgeBuilder(scenario.tariff_overrides))
    if scenario.cbam_mode.is_active:
        builders.append(CbamWedgeBuilder(scenario.importer_mask(economy), scenario.sector_mask(economy),
                                         scale=scenario.cbam_scale))
    return WedgeListBuilder(builders)
