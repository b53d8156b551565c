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

""" From input-output, emissions and carbon-price data to a calibrated WorldEconomy, and from a calibrated economy
to a policy-adjusted baseline. """

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import logbook
import numpy as np
import pandas as pd
from logbook import Logger

from cbam_ge.errors import CalibrationError
from cbam_ge.functional import no_policy, with_supply_shock
from cbam_ge.model import Dimensions, RegimeKind, SectorTaxonomy, WorldEconomy, _frozen, demean
from cbam_ge.solver import PolicySolver

RHO_CEILING = 1.0 - 1e-6
BETA_FLOOR = 1e-6
BETA_CEILING = 1.0 - 1e-6
IMPUTED_OUTPUT = 1.0


def _positions(frame: pd.DataFrame, column: str, labels: Sequence[str], source: str) -> np.ndarray:
    lookup = {str(label): i for i, label in enumerate(labels)}
    mapped = frame[column].astype(str).map(lookup)
    if mapped.isna().any():
        unknown = sorted(set(frame.loc[mapped.isna(), column].astype(str)))
        raise CalibrationError("{} refers to unknown {} labels {}".format(source, column.split('_')[-1], unknown))
    return mapped.to_numpy(dtype=int)


def _node_positions(frame: pd.DataFrame, country_column: str, sector_column: str, countries: Sequence[str],
                    sectors: Sequence[str], source: str) -> np.ndarray:
    country = _positions(frame, country_column, countries, source)
    sector = _positions(frame, sector_column, sectors, source)
    return country * len(sectors) + sector


def _require_columns(frame: pd.DataFrame, columns: Sequence[str], source: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise CalibrationError("{} is missing columns {}".format(source, missing))


@dataclass(frozen=True, eq=False)
class RawIoTable:
    """ A multi-region input-output table in currency units.

    :var intermediate_flows: NJ x NJ purchases, [origin node, destination node].
    :var final_flows: NJ x N final purchases, [origin node, destination country].
    :var gross_output: NJ gross output.
    :var value_added: NJ value added.
    """

    intermediate_flows: np.ndarray
    final_flows: np.ndarray
    gross_output: np.ndarray
    value_added: np.ndarray

    def __post_init__(self):
        for name in ('intermediate_flows', 'final_flows', 'gross_output', 'value_added'):
            values = _frozen(getattr(self, name))
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise CalibrationError("RawIoTable expected '{}' to be finite and non-negative".format(name))
            object.__setattr__(self, name, values)
        nj = self.gross_output.size
        if self.intermediate_flows.shape != (nj, nj) or self.value_added.shape != (nj,) \
                or self.final_flows.ndim != 2 or self.final_flows.shape[0] != nj \
                or self.final_flows.shape[1] < 1 or nj % self.final_flows.shape[1]:
            raise CalibrationError("RawIoTable received inconsistent shapes: X {}, F {}, GO {}, VA {}"
                                   .format(self.intermediate_flows.shape, self.final_flows.shape,
                                           self.gross_output.shape, self.value_added.shape))

    @property
    def dims(self) -> Dimensions:
        n = self.final_flows.shape[1]
        return Dimensions(n, self.gross_output.size // n)

    @classmethod
    def from_frames(cls, io_flows: pd.DataFrame, final_demand: pd.DataFrame, output_va: pd.DataFrame,
                    countries: Sequence[str], sectors: Sequence[str]) -> 'RawIoTable':
        """ Build the table from long-format frames; repeated keys are summed and absent keys are zero.

        :param io_flows: origin_country, origin_sector, dest_country, dest_sector, value.
        :param final_demand: origin_country, origin_sector, dest_country, value.
        :param output_va: country, sector, gross_output, value_added.
        :param countries: country labels in model order.
        :param sectors: sector labels in model order.
        :return: the table.
        """

        _require_columns(io_flows, ['origin_country', 'origin_sector', 'dest_country', 'dest_sector', 'value'],
                         'io_flows')
        _require_columns(final_demand, ['origin_country', 'origin_sector', 'dest_country', 'value'], 'final_demand')
        _require_columns(output_va, ['country', 'sector', 'gross_output', 'value_added'], 'output_va')
        n, j = len(countries), len(sectors)

        x = np.zeros((n * j, n * j))
        np.add.at(x, (_node_positions(io_flows, 'origin_country', 'origin_sector', countries, sectors, 'io_flows'),
                      _node_positions(io_flows, 'dest_country', 'dest_sector', countries, sectors, 'io_flows')),
                  io_flows['value'].to_numpy(dtype=float))
        f = np.zeros((n * j, n))
        np.add.at(f, (_node_positions(final_demand, 'origin_country', 'origin_sector', countries, sectors,
                                      'final_demand'),
                      _positions(final_demand, 'dest_country', countries, 'final_demand')),
                  final_demand['value'].to_numpy(dtype=float))
        nodes = _node_positions(output_va, 'country', 'sector', countries, sectors, 'output_va')
        go, va = np.zeros(n * j), np.zeros(n * j)
        np.add.at(go, nodes, output_va['gross_output'].to_numpy(dtype=float))
        np.add.at(va, nodes, output_va['value_added'].to_numpy(dtype=float))
        return cls(x, f, go, va)


@dataclass(frozen=True, eq=False)
class EmissionsInputs:
    """ Scope 1 emissions, carbon rates and carbon regimes.

    :var scope1_emissions: NJ emissions in tons.
    :var effective_carbon_rate: N effective carbon rates per ton.
    :var free_allowance_share: NJ share of freely allocated permits.
    :var regimes: the carbon regime kind of each country.
    """

    scope1_emissions: np.ndarray
    effective_carbon_rate: np.ndarray
    free_allowance_share: np.ndarray
    regimes: Tuple[RegimeKind, ...]

    def __post_init__(self):
        for name in ('scope1_emissions', 'effective_carbon_rate', 'free_allowance_share'):
            values = _frozen(getattr(self, name))
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise CalibrationError("EmissionsInputs expected '{}' to be finite and non-negative".format(name))
            object.__setattr__(self, name, values)
        if np.any(self.free_allowance_share >= 1):
            raise CalibrationError("EmissionsInputs expected 'free_allowance_share' to be below 1")
        object.__setattr__(self, 'regimes', tuple(RegimeKind(r) for r in self.regimes))
        if len(self.regimes) != self.effective_carbon_rate.size \
                or self.scope1_emissions.shape != self.free_allowance_share.shape:
            raise CalibrationError("EmissionsInputs received inconsistent sizes: {} regimes, {} rates, {} emissions, "
                                   "{} free allowance shares".format(len(self.regimes), self.effective_carbon_rate.size,
                                                                     self.scope1_emissions.size,
                                                                     self.free_allowance_share.size))

    @classmethod
    def from_frames(cls, emissions: pd.DataFrame, carbon_prices: pd.DataFrame, countries: Sequence[str],
                    sectors: Sequence[str]) -> 'EmissionsInputs':
        """ Build the inputs from long-format frames.

        :param emissions: country, sector, emissions, free_allowance_share.
        :param carbon_prices: country, effective_carbon_rate, regime.
        :param countries: country labels in model order.
        :param sectors: sector labels in model order.
        :return: the inputs.
        """

        _require_columns(emissions, ['country', 'sector', 'emissions', 'free_allowance_share'], 'emissions')
        _require_columns(carbon_prices, ['country', 'effective_carbon_rate', 'regime'], 'carbon_prices')
        n, j = len(countries), len(sectors)
        nodes = _node_positions(emissions, 'country', 'sector', countries, sectors, 'emissions')
        tons, free = np.zeros(n * j), np.zeros(n * j)
        np.add.at(tons, nodes, emissions['emissions'].to_numpy(dtype=float))
        free[nodes] = emissions['free_allowance_share'].to_numpy(dtype=float)

        position = _positions(carbon_prices, 'country', countries, 'carbon_prices')
        if sorted(position.tolist()) != list(range(n)):
            raise CalibrationError("carbon_prices expected exactly one row per country")
        rates = np.zeros(n)
        rates[position] = carbon_prices['effective_carbon_rate'].to_numpy(dtype=float)
        kinds = [None] * n
        for i, regime in zip(position, carbon_prices['regime'].astype(str).str.strip().str.lower()):
            try:
                kinds[i] = RegimeKind(regime)
            except ValueError:
                raise CalibrationError("carbon_prices expected regime 'capped' or 'priced', however received '{}'"
                                       .format(regime))
        return cls(tons, rates, free, tuple(kinds))


@dataclass(frozen=True)
class BaselineShock:
    """ Carbon-market policies between the calibration year and the baseline year.

    :var reduction_rates: annual emission-supply reduction per country, applied to capped countries.
    :var base_year: the calibration year.
    :var target_year: the baseline year.
    :var free_allowance_cut: cut of free allowance shares in the ETS area.
    :var exogenous_price_overrides: countries (1-based or by name) treated as priced regardless of their regime.
    """

    reduction_rates: Tuple[float, ...]
    base_year: int = 2018
    target_year: int = 2024
    free_allowance_cut: float = 0.0
    exogenous_price_overrides: Tuple[Union[int, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'reduction_rates', tuple(float(r) for r in self.reduction_rates))
        object.__setattr__(self, 'exogenous_price_overrides', tuple(self.exogenous_price_overrides))
        if any(not 0 <= r < 1 for r in self.reduction_rates):
            raise ValueError("BaselineShock expected 'reduction_rates' to be in [0, 1), however received '{}'"
                             .format(self.reduction_rates))
        if not self.base_year < self.target_year:
            raise ValueError("BaselineShock expected 'base_year' before 'target_year', however received {} and {}"
                             .format(self.base_year, self.target_year))
        if not 0 <= self.free_allowance_cut < 1:
            raise ValueError("BaselineShock expected 'free_allowance_cut' to be in [0, 1), however received '{}'"
                             .format(self.free_allowance_cut))

    @property
    def years(self) -> int:
        return self.target_year - self.base_year

    def override_indices(self, economy: WorldEconomy) -> Tuple[int, ...]:
        """ The 0-based countries switched to the priced regime. """

        indices = []
        for country in self.exogenous_price_overrides:
            if isinstance(country, str) and not country.isdigit():
                if country not in economy.country_names:
                    raise ValueError("BaselineShock expected override countries among {}, however received '{}'"
                                     .format(economy.country_names, country))
                indices.append(economy.country_names.index(country))
            else:
                index = int(country)
                if not 1 <= index <= economy.dims.n_countries:
                    raise ValueError("BaselineShock expected override countries between 1 and {}, however received "
                                     "'{}'".format(economy.dims.n_countries, country))
                indices.append(index - 1)
        return tuple(sorted(set(indices)))

    def multipliers(self, economy: WorldEconomy) -> Tuple[np.ndarray, np.ndarray]:
        """ Emission-supply multipliers (1 - rate)^years for capped countries and free-allowance scales (1 - cut)
        for ETS members.

        :param economy: the economy the shock applies to, after regime overrides.
        :return: (supply multipliers, free allowance scales) per country.
        """

        if len(self.reduction_rates) != economy.dims.n_countries:
            raise ValueError("BaselineShock.multipliers expected {} reduction rates, however received {}"
                             .format(economy.dims.n_countries, len(self.reduction_rates)))
        rates = np.array(self.reduction_rates)
        supply = np.where(economy.capped_mask, (1.0 - rates) ** self.years, 1.0)
        free_alloc = np.where(economy.eu_mask, 1.0 - self.free_allowance_cut, 1.0)
        return supply, free_alloc

    def to_dict(self) -> dict:
        return {'reduction_rates': list(self.reduction_rates), 'base_year': self.base_year,
                'target_year': self.target_year, 'free_allowance_cut': self.free_allowance_cut,
                'exogenous_price_overrides': list(self.exogenous_price_overrides)}

    @classmethod
    def from_dict(cls, data: dict) -> 'BaselineShock':
        if 'reduction_rates' not in data:
            raise ValueError("BaselineShock.from_dict expected a 'reduction_rates' entry")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class CalibrationDiagnostics:
    """ What the data map had to repair, and how far the model steady state is from the data.

    :var imputed_output: nodes whose zero gross output was set to one.
    :var clipped_rho: nodes whose emission elasticity reached one before clipping.
    :var clipped_beta: nodes whose labour share was clipped into (0, 1).
    :var data_chi: consumption weights straight from final demand.
    :var data_deficits: absorption minus model income per country, de-meaned.
    :var output_gap: max relative gap between model sales and data gross output.
    :var rho_stats: mean, population standard deviation, min and max of the emission elasticities per country,
        with a final row over all nodes.
    """

    imputed_output: int
    clipped_rho: int
    clipped_beta: int
    data_chi: np.ndarray
    data_deficits: np.ndarray
    output_gap: float
    rho_stats: pd.DataFrame = field(default_factory=pd.DataFrame)

    def to_dict(self) -> dict:
        return {'imputed_output': self.imputed_output, 'clipped_rho': self.clipped_rho,
                'clipped_beta': self.clipped_beta, 'output_gap': self.output_gap,
                'data_deficits': self.data_deficits.tolist(), 'rho_stats': self.rho_stats.to_dict(orient='index')}


def rho_statistics(economy: WorldEconomy) -> pd.DataFrame:
    """ Descriptive statistics of the emission elasticities, one row per country and an 'all' row.

    :param economy: the world economy.
    :return: a frame with columns mean, sd, min and max.
    """

    frame = pd.DataFrame({'country': np.array(economy.country_names)[economy.country_index], 'rho': economy.rho})
    stats = frame.groupby('country', sort=False)['rho'].agg(mean='mean', sd=lambda x: x.std(ddof=0), min='min',
                                                            max='max')
    stats.loc['all'] = [economy.rho.mean(), economy.rho.std(), economy.rho.min(), economy.rho.max()]
    return stats


class Calibrator:
    """ Maps data to a calibrated WorldEconomy and builds policy-adjusted baselines. """

    def __init__(self, solver: Optional[PolicySolver] = None, log_level=logbook.INFO):
        """ Calibrator constructor.

        :param solver: the solver used to build baselines, a default PolicySolver otherwise.
        :param log_level: the level for displaying and logging information, e.g. debugging information.
        """

        self._log = Logger('Calibrator')
        self._log.level = log_level
        self.solver = solver
        self.diagnostics = None

    def ingest(self, io: RawIoTable, em: EmissionsInputs, taxonomy: SectorTaxonomy, eu_mask, theta: float,
               sigma: float, country_names: Sequence[str] = (), sector_names: Sequence[str] = ()) -> WorldEconomy:
        """ Calibrate the steady state: cost shares from intermediate purchases, consumption shares from final
        demand, labour shares from value added, emission elasticities from carbon costs over gross output.

        :param io: the input-output table.
        :param em: emissions, carbon rates and regimes.
        :param taxonomy: sector flags.
        :param eu_mask: ETS-area members.
        :param theta: intermediate elasticity.
        :param sigma: final-good elasticity.
        :param country_names: optional country labels.
        :param sector_names: optional sector labels.
        :return: a WorldEconomy at its steady state.
        """

        dims = io.dims
        n, nj = dims.n_countries, dims.size
        if em.effective_carbon_rate.size != n or em.scope1_emissions.size != nj:
            raise CalibrationError("Calibrator.ingest expected emissions inputs for {} countries and {} nodes, "
                                   "however received {} and {}".format(n, nj, em.effective_carbon_rate.size,
                                                                       em.scope1_emissions.size))
        if taxonomy.n_sectors != dims.n_sectors:
            raise CalibrationError("Calibrator.ingest expected a taxonomy over {} sectors, however received {}"
                                   .format(dims.n_sectors, taxonomy.n_sectors))
        country = dims.country_of()
        self._log.info("Calibrator.ingest: calibrating {} countries x {} sectors".format(n, dims.n_sectors))

        gross_output = np.array(io.gross_output)
        imputed = gross_output == 0
        if imputed.any():
            self._log.warn("Calibrator.ingest: imputed a gross output of {} for {} nodes with zero output"
                           .format(IMPUTED_OUTPUT, int(imputed.sum())))
        gross_output[imputed] = IMPUTED_OUTPUT

        column_sums = io.intermediate_flows.sum(axis=0)
        if np.any(column_sums <= 0):
            labels = [dims.unflat_index(b) for b in np.flatnonzero(column_sums <= 0)]
            raise CalibrationError("Calibrator.ingest expected intermediate purchases by every node, however "
                                   "(country, sector) {} buy nothing".format(labels))
        iota = io.intermediate_flows / column_sums[None, :]

        beta = io.value_added / gross_output
        beta_clipped = (beta < BETA_FLOOR) | (beta > BETA_CEILING)
        if beta_clipped.any():
            self._log.warn("Calibrator.ingest: clipped the labour share of {} nodes into [{}, {}]"
                           .format(int(beta_clipped.sum()), BETA_FLOOR, BETA_CEILING))
        beta = np.clip(beta, BETA_FLOOR, BETA_CEILING)

        # carbon cost actually paid: permits beyond the free allocation
        rho = em.effective_carbon_rate[country] * (1.0 - em.free_allowance_share) * em.scope1_emissions / gross_output
        rho_clipped = rho >= 1
        if rho_clipped.any():
            self._log.warn("Calibrator.ingest: {} nodes have carbon costs at or above gross output; clipped to {}"
                           .format(int(rho_clipped.sum()), RHO_CEILING))
        rho = np.clip(rho, 0.0, RHO_CEILING)

        absorption = io.final_flows.sum(axis=0)
        if np.any(absorption <= 0):
            raise CalibrationError("Calibrator.ingest expected positive final demand in every country, however "
                                   "received {}".format(absorption.tolist()))
        chi = io.final_flows.T.reshape(n, n, dims.n_sectors).sum(axis=1) / absorption[:, None]

        income = np.bincount(country, weights=(beta * (1.0 - rho) + rho) * gross_output, minlength=n)
        deficits = demean(absorption - income)
        economy = WorldEconomy.from_shares(dims, iota, beta, rho, chi, deficits, em.regimes, em.free_allowance_share,
                                           em.effective_carbon_rate, theta, sigma, taxonomy, eu_mask,
                                           world_gne=float(absorption.sum()), country_names=country_names,
                                           sector_names=sector_names)

        output_gap = float(np.max(np.abs(economy.sales - gross_output) / gross_output))
        self.diagnostics = CalibrationDiagnostics(imputed_output=int(imputed.sum()),
                                                  clipped_rho=int(rho_clipped.sum()),
                                                  clipped_beta=int(beta_clipped.sum()), data_chi=chi,
                                                  data_deficits=deficits, output_gap=output_gap,
                                                  rho_stats=rho_statistics(economy))
        self._log.info("Calibrator.ingest: world GNE {:.6g}, model sales within {:.3%} of gross output"
                       .format(economy.world_gne, output_gap))
        return economy

    def build_baseline(self, economy: WorldEconomy, shock: BaselineShock,
                       solver: Optional[PolicySolver] = None) -> WorldEconomy:
        """ Move the calibrated economy to the baseline year: cut capped emission supplies and ETS free
        allowances, solve the equilibrium, and recalibrate shares, emission elasticities and sales from it. Labour
        shares absorb the change in emission elasticities so the materials share of every node is unchanged.

        :param economy: the calibrated economy.
        :param shock: the baseline policies.
        :param solver: overrides the calibrator's solver.
        :return: the baseline WorldEconomy at its own steady state.
        """

        solver = solver or self.solver or PolicySolver()
        overrides = shock.override_indices(economy)
        kinds = [r.kind for r in economy.carbon_regime]
        for i in overrides:
            if kinds[i] is not RegimeKind.priced:
                self._log.info("Calibrator.build_baseline: treating the carbon price of {} as exogenous"
                               .format(economy.country_names[i]))
                kinds[i] = RegimeKind.priced
        if overrides:
            economy = self._rebuild(economy, economy.iota, economy.beta, economy.rho, economy.sales,
                                    economy.free_alloc, kinds)

        supply, free_alloc_scale = shock.multipliers(economy)
        scenario = with_supply_shock(no_policy(name='baseline'), multipliers=supply, free_alloc_scale=free_alloc_scale)
        self._log.info("Calibrator.build_baseline: {} -> {}, supply multipliers {}"
                       .format(shock.base_year, shock.target_year, np.round(supply, 6).tolist()))
        solution = solver.solve(economy, scenario)

        rho = economy.rho / solution.t_hat[economy.country_index]
        if np.any(rho >= 1):
            raise CalibrationError("Calibrator.build_baseline: recalibrated emission elasticities reach one in "
                                   "{}".format([economy.node_label(a) for a in np.flatnonzero(rho >= 1)]))
        # the materials share is held, so final use and income stay at the solved equilibrium
        beta = 1.0 - economy.gamma / (1.0 - rho)
        invalid = (beta <= 0) | (beta >= 1)
        if invalid.any():
            raise CalibrationError("Calibrator.build_baseline: recalibrated labour shares leave (0, 1) in "
                                   "{}".format([economy.node_label(a) for a in np.flatnonzero(invalid)]))
        baseline = self._rebuild(economy, solution.omega_tilde_prime, beta, rho, solution.sales_prime,
                                 solution.free_alloc_prime, kinds)
        self._log.info("Calibrator.build_baseline: carbon price hats {}".format(np.round(solution.t_hat, 6).tolist()))
        return baseline

    @staticmethod
    def _rebuild(economy: WorldEconomy, iota, beta, rho, sales, free_alloc, kinds) -> WorldEconomy:
        return WorldEconomy.from_sales(economy.dims, iota, beta, rho, sales, kinds, free_alloc,
                                       economy.observed_carbon_price, economy.theta, economy.sigma, economy.taxonomy,
                                       economy.eu_mask, country_names=economy.country_names,
                                       sector_names=economy.sector_names)


_default_calibrator = None


def _calibrator() -> Calibrator:
    global _default_calibrator
    if _default_calibrator is None:
        _default_calibrator = Calibrator()
    return _default_calibrator


def ingest(io: RawIoTable, em: EmissionsInputs, taxonomy: SectorTaxonomy, eu_mask, theta: float, sigma: float,
           country_names: Sequence[str] = (), sector_names: Sequence[str] = ()) -> WorldEconomy:
    """ Calibrate with a shared default Calibrator, see Calibrator.ingest. """

    return _calibrator().ingest(io, em, taxonomy, eu_mask, theta, sigma, country_names, sector_names)


def build_baseline(economy: WorldEconomy, shock: BaselineShock, solver: Optional[PolicySolver] = None) -> WorldEconomy:
    """ Build a baseline with a shared default Calibrator, see Calibrator.build_baseline. """

    return _calibrator().build_baseline(economy, shock, solver)
