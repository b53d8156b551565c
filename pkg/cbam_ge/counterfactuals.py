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

""" Alternative economies (cleaner technology, more or less trade integration, other elasticities) and sweeps of a
CBAM scenario across them. """

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from logbook import Logger

from cbam_ge.functional import full_cbam
from cbam_ge.metrics import eei
from cbam_ge.model import WorldEconomy
from cbam_ge.scenarios import PolicyScenario
from cbam_ge.solver import PolicySolver, steady_state_solution

_log = Logger('cbam_ge')


def _rebuild(economy: WorldEconomy, iota: np.ndarray, beta: np.ndarray, rho: np.ndarray) -> WorldEconomy:
    # same preferences, deficits and world GNE; sales re-solved for the new technology
    return WorldEconomy.from_shares(economy.dims, iota, beta, rho, economy.chi, economy.deficits,
                                    [r.kind for r in economy.carbon_regime], economy.free_alloc,
                                    economy.observed_carbon_price, economy.theta, economy.sigma, economy.taxonomy,
                                    economy.eu_mask, world_gne=economy.world_gne,
                                    country_names=economy.country_names, sector_names=economy.sector_names)


def scale_carbon_intensity(economy: WorldEconomy, factor: float, redistribute: str = 'proportional') -> WorldEconomy:
    """ Multiply every emission elasticity by a factor and hand the freed exponent mass to the other inputs.

    :param economy: the economy.
    :param factor: the scaling of rho.
    :param redistribute: 'proportional' keeps beta, splitting the mass between labour and materials; 'labor' gives
    it all to labour and keeps the materials exponent.
    :return: the economy at its new steady state.
    """

    if not factor > 0:
        raise ValueError("scale_carbon_intensity expected 'factor' to be positive, however received '{}'"
                         .format(factor))
    if factor * economy.rho.max() >= 1:
        raise ValueError("scale_carbon_intensity expected 'factor' to keep rho below 1, however received '{}' with "
                         "max rho {}".format(factor, economy.rho.max()))
    rho = factor * economy.rho
    if redistribute == 'proportional':
        beta = np.array(economy.beta)
    elif redistribute == 'labor':
        beta = 1.0 - economy.gamma / (1.0 - rho)
    else:
        raise ValueError("scale_carbon_intensity expected 'redistribute' to be 'proportional' or 'labor', however "
                         "received '{}'".format(redistribute))
    return _rebuild(economy, economy.iota, beta, rho)


def scale_integration(economy: WorldEconomy, factor: float) -> WorldEconomy:
    """ Scale the foreign-origin input weights of importer-set buyers and renormalise each column.

    :param economy: the economy.
    :param factor: the scaling of foreign weights.
    :return: the economy at its new steady state.
    """

    if not factor > 0:
        raise ValueError("scale_integration expected 'factor' to be positive, however received '{}'".format(factor))
    country = economy.country_index
    buyers = economy.eu_mask[country]
    foreign = (country[:, None] != country[None, :]) & buyers[None, :]
    iota = np.where(foreign, factor * economy.iota, economy.iota)
    iota = iota / iota.sum(axis=0, keepdims=True)

    no_domestic = buyers & (np.where(foreign, 0.0, economy.iota).sum(axis=0) == 0)
    if no_domestic.any():
        _log.warn("scale_integration: {} buyers have no domestic inputs, their foreign weights are unchanged"
                  .format([economy.node_label(b) for b in np.flatnonzero(no_domestic)]))
    return _rebuild(economy, iota, economy.beta, economy.rho)


def with_theta(economy: WorldEconomy, theta: float) -> WorldEconomy:
    return dataclasses.replace(economy, theta=theta)


class SweepAxis(Enum):
    carbon_intensity = 'carbon_intensity'
    integration = 'integration'
    theta = 'theta'


_TRANSFORMS = {SweepAxis.carbon_intensity: scale_carbon_intensity, SweepAxis.integration: scale_integration,
               SweepAxis.theta: with_theta}
_REFERENCE = {SweepAxis.carbon_intensity: 1.0, SweepAxis.integration: 1.0}


def default_integration_grid(points: int = 11) -> Tuple[float, ...]:
    """ Evenly spaced integration factors over [0.5, 1.5]. """

    if points < 2:
        raise ValueError("default_integration_grid expected at least 2 points, however received '{}'".format(points))
    return tuple(float(v) for v in np.linspace(0.5, 1.5, points))


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """ A scenario solved across a grid of alternative economies.

    :var axis: what the grid varies.
    :var grid: the grid values.
    :var scenario: the policy solved at every grid point.
    """

    axis: SweepAxis
    grid: Tuple[float, ...] = field(default_factory=default_integration_grid)
    scenario: PolicyScenario = field(default_factory=full_cbam)

    def __post_init__(self):
        object.__setattr__(self, 'axis', SweepAxis(self.axis))
        object.__setattr__(self, 'grid', tuple(float(v) for v in self.grid))
        if not self.grid:
            raise ValueError("SweepSpec expected a non-empty 'grid'")
        if self.axis is SweepAxis.theta and min(self.grid) <= 1:
            raise ValueError("SweepSpec expected theta values above 1, however received '{}'".format(self.grid))
        if min(self.grid) <= 0:
            raise ValueError("SweepSpec expected positive grid values, however received '{}'".format(self.grid))

    def to_dict(self) -> dict:
        return {'axis': self.axis.value, 'grid': list(self.grid), 'scenario': self.scenario.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> 'SweepSpec':
        values = dict(data)
        if 'scenario' in values:
            values['scenario'] = PolicyScenario.from_dict(values['scenario'])
        return cls(**values)


def _embodied(economy: WorldEconomy, solution) -> Tuple[float, float]:
    return float(eei(economy, solution, direct_only=True).sum()), float(eei(economy, solution).sum())


def run_sweep(economy: WorldEconomy, spec: SweepSpec, solver: Optional[PolicySolver] = None) -> pd.DataFrame:
    """ Solve the scenario at every grid point and report the embodied emission changes.

    Changes are in % of the same grid point's no-CBAM embodied emissions (`*_vs_own`) and of the reference
    economy's (factor 1, or the economy's own theta) no-CBAM embodied emissions (`*_vs_reference`).

    :param economy: the reference economy.
    :param spec: the sweep.
    :param solver: the solver, a default PolicySolver otherwise.
    :return: one row per grid value.
    """

    solver = solver or PolicySolver()
    transform = _TRANSFORMS[spec.axis]
    reference_value = _REFERENCE.get(spec.axis, economy.theta)
    reference = transform(economy, reference_value)
    ref_direct, ref_total = _embodied(reference, steady_state_solution(reference))

    rows = []
    for value in spec.grid:
        point = transform(economy, value)
        base_direct, base_total = _embodied(point, steady_state_solution(point))
        solution = solver.solve(point, spec.scenario)
        direct, total = _embodied(point, solution)
        rows.append({
            'axis': spec.axis.value, 'value': value,
            'eei_direct_change': direct - base_direct, 'eei_total_change': total - base_total,
            'eei_direct_vs_own': _share(direct - base_direct, base_direct),
            'eei_total_vs_own': _share(total - base_total, base_total),
            'eei_direct_vs_reference': _share(direct - base_direct, ref_direct),
            'eei_total_vs_reference': _share(total - base_total, ref_total),
            'iterations': solution.iterations, 'converged': solution.converged})
        _log.info("run_sweep: {} = {:.4g}, direct EEI {:+.4f}% of own baseline"
                  .format(spec.axis.value, value, rows[-1]['eei_direct_vs_own']))
    return pd.DataFrame(rows)


def _share(change: float, level: float) -> float:
    return change / level * 100.0 if level else 0.


def sweep_values(frame: pd.DataFrame, column: str) -> Sequence[float]:
    """ A sweep column ordered by grid value. """

    return frame.sort_values('value')[column].tolist()
