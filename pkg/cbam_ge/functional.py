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
from typing import Dict, Optional, Sequence, Tuple

from cbam_ge.scenarios import CbamMode, PolicyScenario

""" The following functions build the policy scenarios the solver runs: no policy, the reduced and full CBAM in
both modes, tariffs on single flows, and carbon-market shocks. """


def no_policy(name: str = 'off', **settings) -> PolicyScenario:
    """ The steady state: no CBAM, no tariffs.

    :param name: the scenario label.
    :param settings: solver settings forwarded to PolicyScenario.
    :return: the scenario.
    """

    return PolicyScenario(cbam_mode=CbamMode.off, name=name, **settings)


def reduced_cbam(endogenous: bool = True, importer_set: Optional[Sequence[int]] = None,
                 **settings) -> PolicyScenario:
    """ CBAM on the reduced sector list.

    :param endogenous: follow counterfactual carbon prices when True, freeze them otherwise.
    :param importer_set: 1-based importer countries, defaults to the ETS area.
    :param settings: other PolicyScenario fields.
    :return: the scenario.
    """

    mode = CbamMode.reduced_endogenous if endogenous else CbamMode.reduced_exogenous
    return PolicyScenario(cbam_mode=mode, importer_set=importer_set, **settings)


def full_cbam(endogenous: bool = True, importer_set: Optional[Sequence[int]] = None, **settings) -> PolicyScenario:
    """ CBAM on every ETS sector.

    :param endogenous: follow counterfactual carbon prices when True, freeze them otherwise.
    :param importer_set: 1-based importer countries, defaults to the ETS area.
    :param settings: other PolicyScenario fields.
    :return: the scenario.
    """

    mode = CbamMode.full_endogenous if endogenous else CbamMode.full_exogenous
    return PolicyScenario(cbam_mode=mode, importer_set=importer_set, **settings)


def tariff(origin: Tuple[int, int], destination: Tuple[int, int], rate: float,
           base: Optional[PolicyScenario] = None, **settings) -> PolicyScenario:
    """ Put an ad valorem tariff on one flow.

    :param origin: 1-based (country, sector) of the exporter.
    :param destination: 1-based (country, sector) of the buyer.
    :param rate: the tariff rate kappa.
    :param base: a scenario to add the tariff to, defaults to no policy.
    :param settings: solver settings used when no base is given.
    :return: the scenario.
    """

    base = base if base is not None else no_policy(name='tariff', **settings)
    overrides: Dict = dict(base.tariff_overrides)
    overrides[(tuple(origin), tuple(destination))] = rate
    return dataclasses.replace(base, tariff_overrides=overrides)


def with_supply_shock(scenario: PolicyScenario, multipliers: Optional[Sequence[float]] = None,
                      free_alloc_scale: Optional[Sequence[float]] = None) -> PolicyScenario:
    """ Scale capped emission supplies and free allowances.

    :param scenario: the scenario to extend.
    :param multipliers: per-country emission supply multipliers.
    :param free_alloc_scale: per-country free allowance scaling.
    :return: the scenario.
    """

    changes = {}
    if multipliers is not None:
        changes['emission_supply_multipliers'] = tuple(multipliers)
    if free_alloc_scale is not None:
        changes['free_alloc_scale'] = tuple(free_alloc_scale)
    return dataclasses.replace(scenario, **changes)


def cbam_grid(**settings) -> Tuple[PolicyScenario, ...]:
    """ The four CBAM scenarios: reduced and full coverage, endogenous and exogenous prices.

    :param settings: PolicyScenario fields shared by all four.
    :return: the scenarios.
    """

    return tuple(PolicyScenario(cbam_mode=mode, **settings)
                 for mode in (CbamMode.reduced_endogenous, CbamMode.reduced_exogenous,
                              CbamMode.full_endogenous, CbamMode.full_exogenous))


def scenario_by_name(name: str, **settings) -> PolicyScenario:
    """ A preset scenario by its mode name, e.g. 'full_endogenous'; 'off' gives no policy.

    :param name: the preset.
    :param settings: other PolicyScenario fields.
    :return: the scenario.
    """

    try:
        mode = CbamMode(name.replace('-', '_'))
    except ValueError:
        raise ValueError("scenario_by_name expected one of {}, however received '{}'"
                         .format([m.value for m in CbamMode], name))
    return PolicyScenario(cbam_mode=mode, **settings)
