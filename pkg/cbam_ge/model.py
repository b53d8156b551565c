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

""" The world-economy data model: index conventions, the calibrated N x J network, steady-state accounting and the
input-output primitives (share matrices, Leontief inverse, Domar weights) used by every other module.

Vectors of length NJ and NJ x NJ matrices are laid out country-major, sector-minor. Matrix entry [a, b] always
reads "from origin node a to destination node b". """

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from cbam_ge.errors import InvalidStateError, ModelIllPosedError

SHARE_TOLERANCE = 1e-10
STEADY_STATE_TOLERANCE = 1e-10
SPECTRAL_TOLERANCE = 1e-9
COST_SHARE_TOLERANCE = 1e-12


def flat_index(country: int, sector: int, n_sectors: int, n_countries: Optional[int] = None) -> int:
    """ Map a 1-based (country, sector) pair onto its 0-based position in NJ-length vectors.

    :param country: the country, between 1 and N.
    :param sector: the sector, between 1 and J.
    :param n_sectors: the number of sectors J.
    :param n_countries: the number of countries N, checked when given.
    :return: the flat index (country - 1) * J + sector - 1.
    """

    if n_sectors < 1:
        raise ValueError("flat_index expected 'n_sectors' to be at least 1, however received '{}'".format(n_sectors))
    if not 1 <= sector <= n_sectors:
        raise ValueError("flat_index expected 'sector' to be between 1 and {}, however received '{}'"
                         .format(n_sectors, sector))
    if country < 1 or (n_countries is not None and country > n_countries):
        raise ValueError("flat_index expected 'country' to be between 1 and {}, however received '{}'"
                         .format(n_countries if n_countries is not None else 'N', country))
    return (country - 1) * n_sectors + sector - 1


def unflat_index(flat: int, n_sectors: int, n_countries: Optional[int] = None) -> Tuple[int, int]:
    """ Inverse of flat_index.

    :param flat: the 0-based flat index.
    :param n_sectors: the number of sectors J.
    :param n_countries: the number of countries N, checked when given.
    :return: the 1-based (country, sector) pair.
    """

    if n_sectors < 1:
        raise ValueError("unflat_index expected 'n_sectors' to be at least 1, however received '{}'"
                         .format(n_sectors))
    upper = n_countries * n_sectors if n_countries is not None else None
    if flat < 0 or (upper is not None and flat >= upper):
        raise ValueError("unflat_index expected 'flat' to be between 0 and {}, however received '{}'"
                         .format(upper - 1 if upper is not None else 'NJ - 1', flat))
    country, sector = divmod(int(flat), n_sectors)
    return country + 1, sector + 1


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def demean(values: Sequence[float]) -> np.ndarray:
    """ Subtract the mean using compensated summation so the result sums to zero.

    :param values: the vector to de-mean.
    :return: the de-meaned vector.
    """

    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy()
    return values - math.fsum(values) / values.size


@dataclass(frozen=True)
class Dimensions:
    """ The number of countries N and sectors J of the world economy. """

    n_countries: int
    n_sectors: int

    def __post_init__(self):
        if self.n_countries < 2:
            raise ValueError("Dimensions expected 'n_countries' to be at least 2, however received '{}'"
                             .format(self.n_countries))
        if self.n_sectors < 1:
            raise ValueError("Dimensions expected 'n_sectors' to be at least 1, however received '{}'"
                             .format(self.n_sectors))

    @property
    def size(self) -> int:
        return self.n_countries * self.n_sectors

    def flat_index(self, country: int, sector: int) -> int:
        return flat_index(country, sector, self.n_sectors, self.n_countries)

    def unflat_index(self, flat: int) -> Tuple[int, int]:
        return unflat_index(flat, self.n_sectors, self.n_countries)

    def country_of(self) -> np.ndarray:
        """ The 0-based country of every flat index. """

        return np.repeat(np.arange(self.n_countries), self.n_sectors)

    def sector_of(self) -> np.ndarray:
        """ The 0-based sector of every flat index. """

        return np.tile(np.arange(self.n_sectors), self.n_countries)


class RegimeKind(Enum):
    """ How a country's carbon market clears. """

    capped = 'capped'
    priced = 'priced'


@dataclass(frozen=True)
class CarbonRegime:
    """ A country's carbon regime: a fixed emission supply that the permit price clears (capped), or an exogenous
    carbon price with endogenous emissions (priced).

    :var kind: the regime kind.
    :var value: the emission supply (model units) for capped, the carbon price per ton for priced.
    """

    kind: RegimeKind
    value: float

    def __post_init__(self):
        if not isinstance(self.kind, RegimeKind):
            object.__setattr__(self, 'kind', RegimeKind(self.kind))
        if self.value < 0 or not math.isfinite(self.value):
            raise ValueError("CarbonRegime expected 'value' to be finite and non-negative, however received '{}'"
                             .format(self.value))

    @classmethod
    def capped(cls, supply: float) -> 'CarbonRegime':
        return cls(RegimeKind.capped, float(supply))

    @classmethod
    def priced(cls, price: float) -> 'CarbonRegime':
        return cls(RegimeKind.priced, float(price))

    @property
    def is_capped(self) -> bool:
        return self.kind is RegimeKind.capped


@dataclass(frozen=True, eq=False)
class SectorTaxonomy:
    """ Sector flags: ETS coverage, and membership of the reduced CBAM sector list. """

    ets_flag: np.ndarray
    cbam_reduced_flag: np.ndarray

    def __post_init__(self):
        ets = _frozen(self.ets_flag, dtype=bool)
        reduced = _frozen(self.cbam_reduced_flag, dtype=bool)
        if ets.ndim != 1 or ets.shape != reduced.shape:
            raise ValueError("SectorTaxonomy expected flags of equal length, however received {} and {}"
                             .format(ets.shape, reduced.shape))
        if np.any(reduced & ~ets):
            raise ModelIllPosedError("SectorTaxonomy expected every reduced-CBAM sector to be an ETS sector, "
                                     "however sectors {} are not".format((np.flatnonzero(reduced & ~ets) + 1)
                                                                          .tolist()))
        object.__setattr__(self, 'ets_flag', ets)
        object.__setattr__(self, 'cbam_reduced_flag', reduced)

    @property
    def n_sectors(self) -> int:
        return self.ets_flag.size


@dataclass(frozen=True, eq=False)
class WorldEconomy:
    """ The calibrated parameters of the N x J production network at its steady state.

    The steady state is normalised so that every price, wage and carbon price equals one. Sales, labour endowments,
    deficits and capped emission supplies are expressed in the world currency unit at that normalisation and must
    satisfy every accounting condition; use `from_shares` or `from_sales` to build a consistent economy.

    :var iota: NJ x NJ steady-state input weights, columns sum to one.
    :var beta: labour share of value added per node.
    :var rho: emission elasticity per node.
    :var chi: N x J consumption weights, rows sum to one.
    :var labor: labour endowment per country (labour income at unit wage).
    :var deficits: exogenous deficits per country, summing to zero.
    :var carbon_regime: the carbon regime of each country.
    :var free_alloc: share of freely allocated permits per node.
    :var observed_carbon_price: effective carbon rate per ton, per country.
    :var theta: intermediate-input elasticity of substitution.
    :var sigma: final-good elasticity of substitution.
    :var taxonomy: the sector flags.
    :var eu_mask: members of the ETS area, the default CBAM importer set.
    :var sales: steady-state sales p q per node.
    """

    dims: Dimensions
    iota: np.ndarray
    beta: np.ndarray
    rho: np.ndarray
    chi: np.ndarray
    labor: np.ndarray
    deficits: np.ndarray
    carbon_regime: Tuple[CarbonRegime, ...]
    free_alloc: np.ndarray
    observed_carbon_price: np.ndarray
    theta: float
    sigma: float
    taxonomy: SectorTaxonomy
    eu_mask: np.ndarray
    sales: np.ndarray
    country_names: Tuple[str, ...] = field(default=())
    sector_names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        n, j = self.dims.n_countries, self.dims.n_sectors
        nj = n * j
        convert = {'iota': float, 'beta': float, 'rho': float, 'chi': float, 'labor': float, 'deficits': float,
                   'free_alloc': float, 'observed_carbon_price': float, 'eu_mask': bool, 'sales': float}
        for name, dtype in convert.items():
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype=dtype))
        object.__setattr__(self, 'carbon_regime', tuple(self.carbon_regime))
        object.__setattr__(self, 'theta', float(self.theta))
        object.__setattr__(self, 'sigma', float(self.sigma))
        if not self.country_names:
            object.__setattr__(self, 'country_names', tuple('C{}'.format(i + 1) for i in range(n)))
        if not self.sector_names:
            object.__setattr__(self, 'sector_names', tuple('S{}'.format(k + 1) for k in range(j)))
        object.__setattr__(self, 'country_names', tuple(str(c) for c in self.country_names))
        object.__setattr__(self, 'sector_names', tuple(str(s) for s in self.sector_names))

        shapes = {'iota': (nj, nj), 'beta': (nj,), 'rho': (nj,), 'chi': (n, j), 'labor': (n,), 'deficits': (n,),
                  'free_alloc': (nj,), 'observed_carbon_price': (n,), 'eu_mask': (n,), 'sales': (nj,)}
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ModelIllPosedError("WorldEconomy expected '{}' to have shape {}, however received {}"
                                         .format(name, shape, getattr(self, name).shape))
        if len(self.carbon_regime) != n or not all(isinstance(r, CarbonRegime) for r in self.carbon_regime):
            raise ModelIllPosedError("WorldEconomy expected {} CarbonRegime values, however received '{}'"
                                     .format(n, self.carbon_regime))
        if self.taxonomy.n_sectors != j:
            raise ModelIllPosedError("WorldEconomy expected a taxonomy over {} sectors, however received {}"
                                     .format(j, self.taxonomy.n_sectors))
        if len(self.country_names) != n or len(self.sector_names) != j:
            raise ModelIllPosedError("WorldEconomy expected {} country and {} sector names, however received {} and {}"
                                     .format(n, j, len(self.country_names), len(self.sector_names)))

        for name in convert:
            if name != 'eu_mask' and not np.all(np.isfinite(getattr(self, name))):
                raise ModelIllPosedError("WorldEconomy expected '{}' to be finite".format(name))
        if np.any(self.iota < 0):
            raise ModelIllPosedError("WorldEconomy expected 'iota' to be non-negative")
        column_gap = np.abs(self.iota.sum(axis=0) - 1.0)
        if column_gap.max() > SHARE_TOLERANCE:
            bad = [self.node_label(b) for b in np.flatnonzero(column_gap > SHARE_TOLERANCE)]
            raise ModelIllPosedError("WorldEconomy expected every 'iota' column to sum to 1, however columns {} do not"
                                     .format(bad))
        if np.any(self.beta <= 0) or np.any(self.beta >= 1):
            raise ModelIllPosedError("WorldEconomy expected 'beta' to be in (0, 1), however received range [{}, {}]"
                                     .format(self.beta.min(), self.beta.max()))
        if np.any(self.rho < 0) or np.any(self.rho >= 1):
            raise ModelIllPosedError("WorldEconomy expected 'rho' to be in [0, 1), however received range [{}, {}]"
                                     .format(self.rho.min(), self.rho.max()))
        if np.any(self.free_alloc < 0) or np.any(self.free_alloc >= 1):
            raise ModelIllPosedError("WorldEconomy expected 'free_alloc' to be in [0, 1)")
        if np.any(self.chi < 0):
            raise ModelIllPosedError("WorldEconomy expected 'chi' to be non-negative")
        row_gap = np.abs(self.chi.sum(axis=1) - 1.0)
        if row_gap.max() > SHARE_TOLERANCE:
            bad = [self.country_names[i] for i in np.flatnonzero(row_gap > SHARE_TOLERANCE)]
            raise ModelIllPosedError("WorldEconomy expected every 'chi' row to sum to 1, however rows {} sum to {}"
                                     .format(bad, self.chi.sum(axis=1)[row_gap > SHARE_TOLERANCE].tolist()))
        deficit_gap = abs(math.fsum(self.deficits))
        if deficit_gap > 1e-9 * max(float(np.abs(self.deficits).sum()), np.finfo(float).tiny):
            raise ModelIllPosedError("WorldEconomy expected 'deficits' to sum to 0, however they sum to {}"
                                     .format(deficit_gap))
        if not (self.theta > 1 and self.sigma > 1):
            raise ModelIllPosedError("WorldEconomy expected 'theta' and 'sigma' to be greater than 1, however "
                                     "received '{}' and '{}'".format(self.theta, self.sigma))
        if np.any(self.observed_carbon_price < 0):
            raise ModelIllPosedError("WorldEconomy expected 'observed_carbon_price' to be non-negative")
        if np.any(self.sales < 0):
            raise ModelIllPosedError("WorldEconomy expected 'sales' to be non-negative")
        active = self.country_sum(self.sales) > 0
        if np.any(self.labor[active] <= 0):
            raise ModelIllPosedError("WorldEconomy expected a positive labour endowment in every producing country")
        for i, regime in enumerate(self.carbon_regime):
            if regime.is_capped and regime.value <= 0 and self.emission_base[i] > 0:
                raise ModelIllPosedError("WorldEconomy expected a positive emission supply for capped country {}"
                                         .format(self.country_names[i]))

    @classmethod
    def from_shares(cls, dims: Dimensions, iota, beta, rho, chi, deficits,
                    carbon_kinds: Sequence[Union[RegimeKind, str]], free_alloc, observed_carbon_price,
                    theta: float, sigma: float, taxonomy: SectorTaxonomy, eu_mask, world_gne: float = 1.0,
                    country_names: Sequence[str] = (), sector_names: Sequence[str] = ()) -> 'WorldEconomy':
        """ Build the steady state implied by shares and deficits.

        Sales solve S = Omega S + chi (x) I with I = labour + carbon income + deficits. The system is singular
        because the columns of Omega plus the consumption block sum to one, so one equation is replaced by the
        world GNE normalisation.

        :param dims: the dimensions.
        :param iota: NJ x NJ input weights.
        :param beta: labour shares.
        :param rho: emission elasticities.
        :param chi: N x J consumption weights.
        :param deficits: deficits per country, de-meaned before solving.
        :param carbon_kinds: the regime kind of each country.
        :param free_alloc: free allowance shares.
        :param observed_carbon_price: effective carbon rates per ton.
        :param theta: intermediate elasticity.
        :param sigma: final-good elasticity.
        :param taxonomy: sector flags.
        :param eu_mask: ETS-area members.
        :param world_gne: world nominal GNE at the steady state.
        :param country_names: optional country labels.
        :param sector_names: optional sector labels.
        :return: a steady-state WorldEconomy.
        """

        if world_gne <= 0:
            raise InvalidStateError("WorldEconomy.from_shares expected 'world_gne' to be positive, however received '{}'"
                                    .format(world_gne))
        nj = dims.size
        country = dims.country_of()
        iota = np.asarray(iota, dtype=float)
        beta = np.asarray(beta, dtype=float)
        rho = np.asarray(rho, dtype=float)
        chi = np.asarray(chi, dtype=float)
        deficits = demean(deficits)
        gamma = (1.0 - beta) * (1.0 - rho)
        chi_flat = chi.reshape(nj)
        same_country = country[:, None] == country[None, :]

        system = np.eye(nj) - iota * gamma[None, :] - chi_flat[:, None] * (1.0 - gamma)[None, :] * same_country
        rhs = chi_flat * deficits[country]
        system[-1, :] = 1.0 - gamma
        rhs[-1] = world_gne
        try:
            sales = scipy.linalg.solve(system, rhs)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise ModelIllPosedError("WorldEconomy.from_shares could not solve the steady-state sales system: {}"
                                     .format(e))
        if sales.min() < -1e-9 * world_gne:
            raise ModelIllPosedError("WorldEconomy.from_shares expected non-negative steady-state sales, however "
                                     "node {} has sales {}; the deficits are too large for these shares"
                                     .format(int(np.argmin(sales)), sales.min()))
        sales = np.maximum(sales, 0.0)
        return cls._assemble(dims, iota, beta, rho, chi, deficits, sales, carbon_kinds, free_alloc,
                             observed_carbon_price, theta, sigma, taxonomy, eu_mask, country_names, sector_names)

    @classmethod
    def from_sales(cls, dims: Dimensions, iota, beta, rho, sales, carbon_kinds: Sequence[Union[RegimeKind, str]],
                   free_alloc, observed_carbon_price, theta: float, sigma: float, taxonomy: SectorTaxonomy, eu_mask,
                   country_names: Sequence[str] = (), sector_names: Sequence[str] = ()) -> 'WorldEconomy':
        """ Build the steady state that supports the given sales: consumption weights are the final use S - Omega S
        normalised within each country and deficits close each country's budget.

        :return: a steady-state WorldEconomy.
        """

        nj = dims.size
        country = dims.country_of()
        iota = np.asarray(iota, dtype=float)
        beta = np.asarray(beta, dtype=float)
        rho = np.asarray(rho, dtype=float)
        sales = np.asarray(sales, dtype=float)
        gamma = (1.0 - beta) * (1.0 - rho)
        final_use = sales - (iota * gamma[None, :]) @ sales
        scale = max(float(sales.sum()), np.finfo(float).tiny)
        if final_use.min() < -1e-9 * scale:
            raise ModelIllPosedError("WorldEconomy.from_sales expected non-negative final use, however node {} has {}"
                                     .format(int(np.argmin(final_use)), final_use.min()))
        final_use = np.maximum(final_use, 0.0)
        absorption = np.bincount(country, weights=final_use, minlength=dims.n_countries)
        if np.any(absorption <= 0):
            raise ModelIllPosedError("WorldEconomy.from_sales expected positive absorption in every country, however "
                                     "received {}".format(absorption.tolist()))
        chi = (final_use / absorption[country]).reshape(dims.n_countries, dims.n_sectors)
        labor = np.bincount(country, weights=beta * (1.0 - rho) * sales, minlength=dims.n_countries)
        carbon = np.bincount(country, weights=rho * sales, minlength=dims.n_countries)
        deficits = demean(absorption - labor - carbon)
        return cls._assemble(dims, iota, beta, rho, chi, deficits, sales, carbon_kinds, free_alloc,
                             observed_carbon_price, theta, sigma, taxonomy, eu_mask, country_names, sector_names)

    @classmethod
    def _assemble(cls, dims, iota, beta, rho, chi, deficits, sales, carbon_kinds, free_alloc, observed_carbon_price,
                  theta, sigma, taxonomy, eu_mask, country_names, sector_names) -> 'WorldEconomy':
        country = dims.country_of()
        free_alloc = np.asarray(free_alloc, dtype=float)
        observed_carbon_price = np.asarray(observed_carbon_price, dtype=float)
        labor = np.bincount(country, weights=beta * (1.0 - rho) * sales, minlength=dims.n_countries)
        base = np.bincount(country, weights=rho * sales / (1.0 - free_alloc), minlength=dims.n_countries)
        kinds = [k if isinstance(k, RegimeKind) else RegimeKind(k) for k in carbon_kinds]
        if len(kinds) != dims.n_countries:
            raise ModelIllPosedError("WorldEconomy expected {} carbon regimes, however received {}"
                                     .format(dims.n_countries, len(kinds)))
        regimes = tuple(CarbonRegime.capped(base[i]) if kind is RegimeKind.capped
                        else CarbonRegime.priced(observed_carbon_price[i]) for i, kind in enumerate(kinds))
        return cls(dims=dims, iota=iota, beta=beta, rho=rho, chi=chi, labor=labor, deficits=deficits,
                   carbon_regime=regimes, free_alloc=free_alloc, observed_carbon_price=observed_carbon_price,
                   theta=theta, sigma=sigma, taxonomy=taxonomy, eu_mask=eu_mask, sales=sales,
                   country_names=tuple(country_names), sector_names=tuple(sector_names))

    def node_label(self, flat: int) -> str:
        country, sector = self.dims.unflat_index(flat)
        names_ready = len(self.country_names) >= country and len(self.sector_names) >= sector
        if names_ready:
            return "({}, {})".format(self.country_names[country - 1], self.sector_names[sector - 1])
        return "({}, {})".format(country, sector)

    def country_sum(self, values: np.ndarray) -> np.ndarray:
        """ Sum an NJ vector within each country. """

        return np.bincount(self.country_index, weights=values, minlength=self.dims.n_countries)

    @property
    def size(self) -> int:
        return self.dims.size

    @cached_property
    def country_index(self) -> np.ndarray:
        return self.dims.country_of()

    @cached_property
    def sector_index(self) -> np.ndarray:
        return self.dims.sector_of()

    @cached_property
    def gamma(self) -> np.ndarray:
        return (1.0 - self.beta) * (1.0 - self.rho)

    @cached_property
    def chi_flat(self) -> np.ndarray:
        return self.chi.reshape(self.size)

    @cached_property
    def capped_mask(self) -> np.ndarray:
        return np.array([r.is_capped for r in self.carbon_regime], dtype=bool)

    @property
    def importer_set(self) -> np.ndarray:
        return self.eu_mask

    @cached_property
    def same_country(self) -> np.ndarray:
        return self.country_index[:, None] == self.country_index[None, :]

    @cached_property
    def labor_income(self) -> np.ndarray:
        """ Labour income per country implied by sales, equal to `labor` at the steady state. """

        return self.country_sum(self.beta * (1.0 - self.rho) * self.sales)

    @cached_property
    def carbon_revenue(self) -> np.ndarray:
        return self.country_sum(self.rho * self.sales)

    @cached_property
    def emission_base(self) -> np.ndarray:
        """ Emissions per country in model units (unit carbon price), gross of free allowances. """

        return self.country_sum(self.rho * self.sales / (1.0 - self.free_alloc))

    @cached_property
    def income(self) -> np.ndarray:
        return self.labor + self.carbon_revenue + self.deficits

    @cached_property
    def world_gne(self) -> float:
        return math.fsum(self.income)

    @cached_property
    def final_demand(self) -> np.ndarray:
        return self.chi_flat * self.income[self.country_index]

    @cached_property
    def emission_intensity(self) -> np.ndarray:
        """ Tons per currency unit of sales, rho / ((1 - eps) * observed price); zero where no price is observed. """

        price = self.observed_carbon_price[self.country_index]
        safe = np.where(price > 0, price, 1.0)
        return np.where(price > 0, self.rho / ((1.0 - self.free_alloc) * safe), 0.0)

    @cached_property
    def emissions(self) -> np.ndarray:
        """ Steady-state emissions per node in tons. """

        return self.emission_intensity * self.sales

    @cached_property
    def nu(self) -> np.ndarray:
        """ N x N ratios of observed carbon prices, nu[i, n] = price_i / price_n, one where price_n is zero. """

        price = self.observed_carbon_price
        safe = np.where(price > 0, price, 1.0)
        return np.where(price[None, :] > 0, price[:, None] / safe[None, :], 1.0)

    @cached_property
    def ets_nodes(self) -> np.ndarray:
        return self.taxonomy.ets_flag[self.sector_index]


@dataclass(frozen=True, eq=False)
class ShareMatrices:
    """ Cost shares, revenue shares and material shares of the network. """

    omega_tilde: np.ndarray
    omega: np.ndarray
    gamma: np.ndarray


def share_matrices(economy: WorldEconomy, omega_tilde: Optional[np.ndarray] = None,
                   tau_tilde: Optional[np.ndarray] = None) -> ShareMatrices:
    """ Build revenue shares omega[a, b] = gamma_b * omega_tilde[a, b] / tau_tilde[a, b].

    :param economy: the world economy.
    :param omega_tilde: cost shares, defaults to the steady-state weights iota.
    :param tau_tilde: gross wedges 1 + kappa + CBAM, defaults to one.
    :return: the share matrices.
    """

    cost = economy.iota if omega_tilde is None else np.asarray(omega_tilde, dtype=float)
    if cost.shape != economy.iota.shape:
        raise ValueError("share_matrices expected 'omega_tilde' to have shape {}, however received {}"
                         .format(economy.iota.shape, cost.shape))
    gap = np.abs(cost.sum(axis=0) - 1.0).max()
    if gap > COST_SHARE_TOLERANCE:
        raise ModelIllPosedError("share_matrices expected cost-share columns to sum to 1, however the largest gap is {}"
                                 .format(gap))
    gamma = economy.gamma
    omega = cost * gamma[None, :]
    if tau_tilde is not None:
        tau = np.asarray(tau_tilde, dtype=float)
        if np.any(tau <= 0):
            raise ValueError("share_matrices expected 'tau_tilde' to be positive")
        omega = omega / tau
    return ShareMatrices(omega_tilde=_frozen(cost), omega=_frozen(omega), gamma=_frozen(gamma))


def spectral_radius(matrix: np.ndarray, max_iterations: int = 200, tolerance: float = SPECTRAL_TOLERANCE) -> float:
    """ Estimate the spectral radius of |matrix| by power iteration.

    :param matrix: a square matrix.
    :param max_iterations: power iterations to run.
    :param tolerance: stop once successive estimates differ by less than this.
    :return: the estimated spectral radius.
    """

    magnitude = np.abs(np.asarray(matrix, dtype=float))
    n = magnitude.shape[0]
    vector = np.full(n, 1.0 / n)
    estimate = 0.0
    for _ in range(max_iterations):
        image = magnitude @ vector
        norm = image.sum()
        if norm == 0.0:
            return 0.0
        converged = abs(norm - estimate) < tolerance
        estimate = norm
        vector = image / norm
        if converged:
            break
    return float(estimate)


def leontief_inverse(omega: Union[ShareMatrices, np.ndarray]) -> np.ndarray:
    """ The Leontief inverse Psi = (I - Omega)^-1 summing every direct and indirect supply-chain linkage.

    :param omega: share matrices, or a square revenue-share matrix.
    :return: Psi.
    """

    matrix = omega.omega if isinstance(omega, ShareMatrices) else np.atleast_2d(np.asarray(omega, dtype=float))
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("leontief_inverse expected a square matrix, however received shape {}".format(matrix.shape))
    n = matrix.shape[0]
    column_sums = np.abs(matrix).sum(axis=0)
    if column_sums.max() >= 1.0 - SPECTRAL_TOLERANCE:
        radius = spectral_radius(matrix)
        if radius >= 1.0 - SPECTRAL_TOLERANCE:
            offending = {int(k): float(column_sums[k]) for k in np.flatnonzero(column_sums >= 1.0 - SPECTRAL_TOLERANCE)}
            raise ModelIllPosedError("leontief_inverse expected a spectral radius below 1, however received {:.12g}; "
                                     "offending column sums: {}".format(radius, offending))
    identity = np.eye(n)
    try:
        psi = scipy.linalg.solve(identity - matrix, identity)
    except scipy.linalg.LinAlgError as e:
        raise ModelIllPosedError("leontief_inverse could not invert I - Omega: {}; column sums: {}"
                                 .format(e, column_sums.tolist()))
    return psi


def domar_weights(sales: np.ndarray, world_gne: float) -> np.ndarray:
    """ Sales as a share of world nominal GNE.

    :param sales: sales per node.
    :param world_gne: world nominal GNE.
    :return: the Domar weights.
    """

    if not world_gne > 0:
        raise InvalidStateError("domar_weights expected 'world_gne' to be positive, however received '{}'"
                                .format(world_gne))
    sales = np.asarray(sales, dtype=float)
    if np.any(sales < 0):
        raise ValueError("domar_weights expected 'sales' to be non-negative")
    return sales / world_gne


@dataclass(frozen=True)
class SteadyStateReport:
    """ Max-abs residual of every equilibrium condition at unit prices, wages and carbon prices. Level conditions
    are scaled by world GNE. """

    residuals: Dict[str, float]
    tolerance: float = STEADY_STATE_TOLERANCE

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return all(value < self.tolerance for value in self.residuals.values())

    def failures(self) -> Dict[str, float]:
        return {name: value for name, value in self.residuals.items() if not value < self.tolerance}


def steady_state_check(economy: WorldEconomy) -> SteadyStateReport:
    """ Evaluate every equilibrium condition at the steady-state normalisation (all prices one, zero wedges).

    :param economy: the world economy.
    :return: the residual report.
    """

    scale = economy.world_gne if economy.world_gne > 0 else 1.0
    column_sums = economy.iota.sum(axis=0)
    price_index = column_sums ** (1.0 / (1.0 - economy.theta))
    unit_cost = price_index ** economy.gamma
    omega = economy.iota * economy.gamma[None, :]
    sales_gap = economy.sales - economy.final_demand - omega @ economy.sales
    final_use = economy.sales - omega @ economy.sales

    emissions_gap = 0.0
    for i, regime in enumerate(economy.carbon_regime):
        if regime.is_capped:
            emissions_gap = max(emissions_gap, abs(regime.value - economy.emission_base[i]))

    residuals = {
        'cost': float(np.abs(unit_cost - 1.0).max()),
        'price_index': float(np.abs(price_index - 1.0).max()),
        'cost_shares': float(np.abs(column_sums - 1.0).max()),
        'consumption_shares': float(np.abs(economy.chi.sum(axis=1) - 1.0).max()),
        'sales': float(np.abs(sales_gap).max() / scale),
        'labor': float(np.abs(economy.labor - economy.labor_income).max() / scale),
        'emissions': float(emissions_gap / scale),
        'budget': abs(math.fsum(final_use) - economy.world_gne) / scale,
        'deficits': abs(math.fsum(economy.deficits)) / scale,
    }
    return SteadyStateReport(residuals=residuals)
