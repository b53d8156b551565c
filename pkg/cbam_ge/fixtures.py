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

""" Small shipped economies for tests, examples and the command line. """

from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from cbam_ge.calibration import BaselineShock
from cbam_ge.functional import cbam_grid
from cbam_ge.interchange import export_economy
from cbam_ge.model import Dimensions, SectorTaxonomy, WorldEconomy, demean
from cbam_ge.scenarios import PolicyScenario


def two_country_fixture(theta: float = 4.0, sigma: float = 4.0) -> WorldEconomy:
    """ Two countries, two sectors: a capped ETS country and a priced partner. """

    iota = np.array([[0.5, 0.2, 0.2, 0.1],
                     [0.2, 0.5, 0.1, 0.2],
                     [0.2, 0.1, 0.5, 0.2],
                     [0.1, 0.2, 0.2, 0.5]])
    return WorldEconomy.from_shares(Dimensions(2, 2), iota=iota, beta=[0.5, 0.4, 0.55, 0.45],
                                    rho=[0.05, 0.02, 0.06, 0.03], chi=[[0.4, 0.6], [0.5, 0.5]], deficits=[0., 0.],
                                    carbon_kinds=['capped', 'priced'], free_alloc=np.zeros(4),
                                    observed_carbon_price=[80., 20.], theta=theta, sigma=sigma,
                                    taxonomy=SectorTaxonomy([True, False], [True, False]), eu_mask=[True, False],
                                    world_gne=10.0, country_names=('EU', 'ROW'), sector_names=('dirty', 'clean'))


def three_country_fixture(seed: int = 0, theta: float = 4.0, sigma: float = 4.0) -> WorldEconomy:
    """ Three countries, two sectors, random shares with home bias: the ETS area, a capped partner and a priced
    exporter.

    :param seed: the random seed.
    :param theta: intermediate elasticity.
    :param sigma: final-good elasticity.
    :return: the economy.
    """

    rng = np.random.default_rng(seed)
    dims = Dimensions(3, 2)
    nj = dims.size
    country = dims.country_of()
    beta = rng.uniform(0.4, 0.6, nj)
    rho = rng.uniform(0.01, 0.08, nj)
    weights = rng.uniform(0.5, 1.5, (nj, nj)) + 2.0 * (country[:, None] == country[None, :])
    iota = weights / weights.sum(axis=0, keepdims=True)
    chi = rng.uniform(0.3, 0.7, (3, 2))
    chi = chi / chi.sum(axis=1, keepdims=True)
    deficits = demean(rng.normal(0.0, 0.02, 3))
    return WorldEconomy.from_shares(dims, iota=iota, beta=beta, rho=rho, chi=chi, deficits=deficits,
                                    carbon_kinds=['capped', 'capped', 'priced'], free_alloc=np.zeros(nj),
                                    observed_carbon_price=[80., 60., 10.], theta=theta, sigma=sigma,
                                    taxonomy=SectorTaxonomy([True, False], [True, False]),
                                    eu_mask=[True, False, False], world_gne=3.0,
                                    country_names=('EU', 'PTN', 'EXP'), sector_names=('dirty', 'clean'))


def four_country_fixture(theta: float = 4.0, sigma: float = 4.0) -> WorldEconomy:
    """ The ETS area, a clean capped partner, a dirty priced exporter and the rest of the world, over metals
    (reduced CBAM list), chemicals (ETS) and services.

    :param theta: intermediate elasticity.
    :param sigma: final-good elasticity.
    :return: the economy.
    """

    dims = Dimensions(4, 3)
    requirements = np.array([[0.5, 0.2, 0.1],
                             [0.3, 0.5, 0.2],
                             [0.2, 0.3, 0.7]])
    home_bias = np.array([0.7, 0.7, 0.8, 0.75])
    origin_share = np.tile(((1.0 - home_bias) / 3.0)[None, :], (4, 1))
    np.fill_diagonal(origin_share, home_bias)
    # [origin country, destination country] x [origin sector, destination sector]
    iota = np.einsum('ni,kj->nkij', origin_share, requirements).reshape(dims.size, dims.size)

    rho = np.array([[0.05, 0.04, 0.005],
                    [0.04, 0.03, 0.004],
                    [0.06, 0.05, 0.01],
                    [0.05, 0.04, 0.008]]).reshape(dims.size)
    beta = np.tile([0.35, 0.4, 0.6], 4)
    free_alloc = np.zeros(dims.size)
    free_alloc[:2] = 0.3
    return WorldEconomy.from_shares(dims, iota=iota, beta=beta, rho=rho, chi=np.tile([0.2, 0.2, 0.6], (4, 1)),
                                    deficits=np.zeros(4), carbon_kinds=['capped', 'capped', 'priced', 'priced'],
                                    free_alloc=free_alloc, observed_carbon_price=[80., 100., 16., 30.],
                                    theta=theta, sigma=sigma,
                                    taxonomy=SectorTaxonomy([True, True, False], [True, False, False]),
                                    eu_mask=[True, False, False, False], world_gne=100.0,
                                    country_names=('EU', 'CLN', 'DRT', 'RoW'),
                                    sector_names=('metals', 'chemicals', 'services'))


FIXTURES = {'two': two_country_fixture, 'three': three_country_fixture, 'four': four_country_fixture}


def fixture(kind: str = 'four', seed: int = 0) -> WorldEconomy:
    """ A shipped fixture by name; the seed only matters for the random three-country economy. """

    if kind not in FIXTURES:
        raise ValueError("fixture expected 'kind' to be one of {}, however received '{}'"
                         .format(sorted(FIXTURES), kind))
    if kind == 'three':
        return three_country_fixture(seed)
    return FIXTURES[kind]()


def default_shock(economy: WorldEconomy) -> BaselineShock:
    """ A mild baseline shock: 2% a year off capped supplies and a 40% cut of ETS free allowances. """

    return BaselineShock(reduction_rates=tuple(0.02 if capped else 0.0 for capped in economy.capped_mask),
                         free_allowance_cut=0.4)


def write_fixture(directory: Union[str, Path], economy: WorldEconomy,
                  scenarios: Optional[Sequence[PolicyScenario]] = None, with_shock: bool = True,
                  targets: Optional[dict] = None) -> Path:
    """ Write a fixture as calibration inputs plus a suite manifest.

    :param directory: the output directory.
    :param economy: the fixture.
    :param scenarios: suite scenarios, the four CBAM scenarios by default.
    :param with_shock: record the default baseline shock.
    :param targets: optional headline targets.
    :return: the manifest path.
    """

    scenarios = cbam_grid() if scenarios is None else scenarios
    return export_economy(economy, directory, baseline_shock=default_shock(economy) if with_shock else None,
                          scenarios=scenarios, targets=targets)
