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
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from cbam_ge.model import WorldEconomy

FlowKey = Tuple[Tuple[int, int], Tuple[int, int]]


class CbamMode(Enum):
    """ CBAM coverage and whether the wedge follows counterfactual carbon prices (endogenous) or is frozen at the
    pre-CBAM prices (exogenous). """

    off = 'off'
    reduced_endogenous = 'reduced_endogenous'
    reduced_exogenous = 'reduced_exogenous'
    full_endogenous = 'full_endogenous'
    full_exogenous = 'full_exogenous'

    @property
    def is_active(self) -> bool:
        return self is not CbamMode.off

    @property
    def is_endogenous(self) -> bool:
        return self in (CbamMode.reduced_endogenous, CbamMode.full_endogenous)

    @property
    def is_reduced(self) -> bool:
        return self in (CbamMode.reduced_endogenous, CbamMode.reduced_exogenous)

    def counterpart(self) -> 'CbamMode':
        """ The same coverage with the other pricing mode. """

        pairs = {CbamMode.reduced_endogenous: CbamMode.reduced_exogenous,
                 CbamMode.reduced_exogenous: CbamMode.reduced_endogenous,
                 CbamMode.full_endogenous: CbamMode.full_exogenous,
                 CbamMode.full_exogenous: CbamMode.full_endogenous}
        return pairs.get(self, self)


class IncomeClosure(Enum):
    """ Which revenue shares enter the tariff revenue of counterfactual income.

    Counterfactual shares rebate exactly what is collected and close the world budget. Baseline shares are a
    sensitivity switch: the gap between collected and rebated revenue is left in the 'labor' residual.
    """

    counterfactual = 'counterfactual'
    baseline = 'baseline'


@dataclass(frozen=True, eq=False)
class PolicyScenario:
    """ A counterfactual policy: CBAM coverage and mode, tariff overrides and carbon-market shocks, plus the solver
    settings used to reach its equilibrium.

    Countries and sectors are 1-based. Tariff overrides map ((origin country, origin sector), (destination country,
    destination sector)) to an ad valorem rate kappa.

    :var cbam_mode: the CBAM coverage and mode.
    :var importer_set: countries applying the CBAM, defaults to the ETS area of the economy.
    :var sector_set: sectors covered, defaults to the reduced list or every ETS sector depending on the mode.
    :var tariff_overrides: sparse tariff rates.
    :var emission_supply_multipliers: per-country scaling of capped emission supplies.
    :var free_alloc_scale: per-country scaling of free allowance shares.
    :var cbam_scale: multiplier on the CBAM wedge.
    :var income_share_closure: revenue shares used for tariff income.
    :var damping: weight of the new iterate in each outer update, in (0, 1].
    :var tolerance: convergence threshold on the max-abs update.
    :var max_iterations: outer iteration cap.
    :var name: a label for reports.
    """

    cbam_mode: CbamMode = CbamMode.off
    importer_set: Optional[Tuple[int, ...]] = None
    sector_set: Optional[Tuple[int, ...]] = None
    tariff_overrides: Dict[FlowKey, float] = field(default_factory=dict)
    emission_supply_multipliers: Optional[Tuple[float, ...]] = None
    free_alloc_scale: Optional[Tuple[float, ...]] = None
    cbam_scale: float = 1.0
    income_share_closure: IncomeClosure = IncomeClosure.counterfactual
    damping: float = 0.1
    tolerance: float = 1e-9
    max_iterations: int = 50000
    name: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'cbam_mode', CbamMode(self.cbam_mode))
        object.__setattr__(self, 'income_share_closure', IncomeClosure(self.income_share_closure))
        if self.importer_set is not None:
            object.__setattr__(self, 'importer_set', tuple(sorted(int(i) for i in self.importer_set)))
        if self.sector_set is not None:
            object.__setattr__(self, 'sector_set', tuple(sorted(int(k) for k in self.sector_set)))
        if self.emission_supply_multipliers is not None:
            object.__setattr__(self, 'emission_supply_multipliers',
                               tuple(float(m) for m in self.emission_supply_multipliers))
        if self.free_alloc_scale is not None:
            object.__setattr__(self, 'free_alloc_scale', tuple(float(s) for s in self.free_alloc_scale))
        overrides = {(tuple(int(x) for x in origin), tuple(int(x) for x in dest)): float(rate)
                     for (origin, dest), rate in dict(self.tariff_overrides).items()}
        object.__setattr__(self, 'tariff_overrides', overrides)
        if not self.name:
            object.__setattr__(self, 'name', self.cbam_mode.value)

        if not 0 < self.damping <= 1:
            raise ValueError("PolicyScenario expected 'damping' to be in (0, 1], however received '{}'"
                             .format(self.damping))
        if not self.tolerance > 0:
            raise ValueError("PolicyScenario expected 'tolerance' to be positive, however received '{}'"
                             .format(self.tolerance))
        if self.max_iterations < 1:
            raise ValueError("PolicyScenario expected 'max_iterations' to be at least 1, however received '{}'"
                             .format(self.max_iterations))
        if not self.cbam_scale >= 0:
            raise ValueError("PolicyScenario expected 'cbam_scale' to be non-negative, however received '{}'"
                             .format(self.cbam_scale))
        for key, rate in self.tariff_overrides.items():
            if not rate > -1:
                raise ValueError("PolicyScenario expected tariff rates above -1, however received '{}' on {}"
                                 .format(rate, key))
        if self.emission_supply_multipliers is not None and min(self.emission_supply_multipliers) <= 0:
            raise ValueError("PolicyScenario expected positive 'emission_supply_multipliers', however received '{}'"
                             .format(self.emission_supply_multipliers))
        if self.free_alloc_scale is not None and min(self.free_alloc_scale) < 0:
            raise ValueError("PolicyScenario expected non-negative 'free_alloc_scale', however received '{}'"
                             .format(self.free_alloc_scale))
        if self.cbam_mode.is_active and self.importer_set is not None and not self.importer_set:
            raise ValueError("PolicyScenario expected a non-empty 'importer_set' when CBAM is active")

    def importer_mask(self, economy: WorldEconomy) -> np.ndarray:
        """ The CBAM importer set as an N boolean vector. """

        n = economy.dims.n_countries
        if self.importer_set is None:
            mask = economy.eu_mask.copy()
        else:
            if any(not 1 <= i <= n for i in self.importer_set):
                raise ValueError("PolicyScenario.importer_mask expected countries between 1 and {}, however received "
                                 "'{}'".format(n, self.importer_set))
            mask = np.zeros(n, dtype=bool)
            mask[[i - 1 for i in self.importer_set]] = True
        if self.cbam_mode.is_active and not mask.any():
            raise ValueError("PolicyScenario.importer_mask expected a non-empty importer set when CBAM is active")
        return mask

    def sector_mask(self, economy: WorldEconomy) -> np.ndarray:
        """ The CBAM sector set as a J boolean vector. """

        taxonomy = economy.taxonomy
        j = economy.dims.n_sectors
        if self.sector_set is None:
            mask = taxonomy.cbam_reduced_flag.copy() if self.cbam_mode.is_reduced else taxonomy.ets_flag.copy()
        else:
            if any(not 1 <= k <= j for k in self.sector_set):
                raise ValueError("PolicyScenario.sector_mask expected sectors between 1 and {}, however received '{}'"
                                 .format(j, self.sector_set))
            mask = np.zeros(j, dtype=bool)
            mask[[k - 1 for k in self.sector_set]] = True
        if self.cbam_mode.is_reduced and np.any(mask & ~taxonomy.ets_flag):
            raise ValueError("PolicyScenario.sector_mask expected reduced coverage within the ETS sectors, however "
                             "received sectors {}".format((np.flatnonzero(mask & ~taxonomy.ets_flag) + 1).tolist()))
        if not self.cbam_mode.is_active:
            mask[:] = False
        return mask

    def supply_multipliers(self, economy: WorldEconomy) -> np.ndarray:
        n = economy.dims.n_countries
        if self.emission_supply_multipliers is None:
            return np.ones(n)
        if len(self.emission_supply_multipliers) != n:
            raise ValueError("PolicyScenario.supply_multipliers expected {} multipliers, however received {}"
                             .format(n, len(self.emission_supply_multipliers)))
        return np.array(self.emission_supply_multipliers)

    def free_alloc_prime(self, economy: WorldEconomy) -> np.ndarray:
        """ Counterfactual free allowance shares per node. """

        n = economy.dims.n_countries
        if self.free_alloc_scale is None:
            return economy.free_alloc.copy()
        if len(self.free_alloc_scale) != n:
            raise ValueError("PolicyScenario.free_alloc_prime expected {} scales, however received {}"
                             .format(n, len(self.free_alloc_scale)))
        prime = economy.free_alloc * np.array(self.free_alloc_scale)[economy.country_index]
        if np.any(prime >= 1):
            raise ValueError("PolicyScenario.free_alloc_prime expected scaled free allowances below 1")
        return prime

    def tariff_matrix(self, economy: WorldEconomy) -> np.ndarray:
        """ Dense NJ x NJ tariff rates. """

        kappa = np.zeros((economy.size, economy.size))
        for (origin, dest), rate in self.tariff_overrides.items():
            kappa[economy.dims.flat_index(*origin), economy.dims.flat_index(*dest)] = rate
        return kappa

    def has_other_shocks(self) -> bool:
        """ Whether anything besides the CBAM moves the equilibrium. """

        tariffs = any(rate != 0 for rate in self.tariff_overrides.values())
        supply = self.emission_supply_multipliers is not None and any(m != 1 for m in self.emission_supply_multipliers)
        allowances = self.free_alloc_scale is not None and any(s != 1 for s in self.free_alloc_scale)
        return tariffs or supply or allowances

    def without_cbam(self) -> 'PolicyScenario':
        return dataclasses.replace(self, cbam_mode=CbamMode.off, name='{}-pre-cbam'.format(self.name))

    def with_mode(self, mode: CbamMode, name: str = '') -> 'PolicyScenario':
        return dataclasses.replace(self, cbam_mode=mode, name=name or CbamMode(mode).value)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'cbam_mode': self.cbam_mode.value,
            'importer_set': list(self.importer_set) if self.importer_set is not None else None,
            'sector_set': list(self.sector_set) if self.sector_set is not None else None,
            'tariff_overrides': [{'origin': list(origin), 'destination': list(dest), 'rate': rate}
                                 for (origin, dest), rate in sorted(self.tariff_overrides.items())],
            'emission_supply_multipliers': list(self.emission_supply_multipliers)
            if self.emission_supply_multipliers is not None else None,
            'free_alloc_scale': list(self.free_alloc_scale) if self.free_alloc_scale is not None else None,
            'cbam_scale': self.cbam_scale,
            'income_share_closure': self.income_share_closure.value,
            'damping': self.damping,
            'tolerance': self.tolerance,
            'max_iterations': self.max_iterations,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'PolicyScenario':
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError("PolicyScenario.from_dict received unknown fields {}".format(sorted(unknown)))
        values = dict(data)
        overrides = values.pop('tariff_overrides', None) or []
        values['tariff_overrides'] = {(tuple(item['origin']), tuple(item['destination'])): item['rate']
                                      for item in overrides}
        return cls(**{k: v for k, v in values.items() if v is not None})

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()
