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

""" Reported outcomes of a solved scenario: purchase shares, Domar weights, emissions embodied in imports into the
importer set, leakage, GNE and real wages, and the technology / reallocation split of embodied emissions.

Embodied emissions are computed as intensity * (I - Omega)^-1 * x, where x holds each origin's sales into the
importer set (intra-set trade excluded) and intensity is tons per currency unit of sales. """

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from cbam_ge.errors import InvalidStateError
from cbam_ge.model import WorldEconomy, domar_weights, leontief_inverse
from cbam_ge.scenarios import PolicyScenario
from cbam_ge.solver import HatSolution, steady_state_solution


class OriginFilter(Enum):
    """ Origin of purchases relative to the importer set. """

    foreign = 'foreign'
    domestic = 'domestic'
    all = 'all'


class TaxonomyFilter(Enum):
    """ Sector split: dirty sectors are ETS sectors. """

    clean = 'clean'
    dirty = 'dirty'
    all = 'all'


class LeakageNormalization(Enum):
    priced = 'priced'
    world = 'world'


@dataclass(frozen=True, eq=False)
class ShareChange:
    """ Mean and population standard deviation of % changes across country-industry observations. """

    mean: float
    stdev: float
    count: int
    changes: np.ndarray


@dataclass(frozen=True, eq=False)
class LeakageResult:
    """ Emission change of priced countries, % of the normalising baseline total.

    :var value: the aggregate change.
    :var defined: False when there is no priced country (or no baseline emissions to normalise by).
    :var normalization: which baseline total the change is expressed against.
    :var components: each country's contribution, zero for capped countries.
    """

    value: float
    defined: bool
    normalization: LeakageNormalization
    components: np.ndarray


@dataclass(frozen=True)
class EEIDecomposition:
    technology: float
    reallocation: float
    cross_residual: float
    total: float


@dataclass(frozen=True, eq=False)
class EmissionsReport:
    """ Embodied emissions (tons, by origin node) at the baseline and the counterfactual, their % changes by
    taxonomy split, leakage and the decomposition of the change. """

    eei_direct: np.ndarray
    eei_total: np.ndarray
    eei_direct_base: np.ndarray
    eei_total_base: np.ndarray
    leakage_change: float
    leakage: LeakageResult
    splits: Dict[str, Dict[str, float]]
    decomposition: Dict[str, EEIDecomposition]


@dataclass(frozen=True, eq=False)
class WelfareReport:
    """ GNE and real wage changes per country, in %. """

    gne_nominal_change: np.ndarray
    gne_real_change: np.ndarray
    real_wage_change: np.ndarray
    consumption_price_index_hat: np.ndarray


def _require_converged(solution: HatSolution) -> None:
    if not solution.converged:
        raise InvalidStateError("metrics expected a converged solution, however '{}' stopped after {} iterations"
                                .format(solution.scenario_name, solution.iterations))


def _percent(new: float, old: float) -> float:
    if old == 0:
        return 0.
    return (new / old - 1.0) * 100.0


def _sector_mask(economy: WorldEconomy, taxonomy_filter: TaxonomyFilter) -> np.ndarray:
    ets = economy.ets_nodes
    if taxonomy_filter is TaxonomyFilter.dirty:
        return ets.copy()
    if taxonomy_filter is TaxonomyFilter.clean:
        return ~ets
    return np.ones(economy.size, dtype=bool)


def intensity(economy: WorldEconomy, solution: HatSolution) -> np.ndarray:
    """ Emissions per currency unit of sales, rho / (t (1 - eps) observed price), in tons.

    :param economy: the world economy.
    :param solution: the solution.
    :return: the intensity per node.
    """

    country = economy.country_index
    price = economy.observed_carbon_price[country]
    safe = np.where(price > 0, price, 1.0)
    return np.where(price > 0, economy.rho / (solution.t_hat[country] * (1.0 - solution.free_alloc_prime) * safe),
                    0.0)


def revenue_shares(economy: WorldEconomy, solution: HatSolution) -> np.ndarray:
    return economy.gamma[None, :] * solution.omega_tilde_prime / solution.tau_tilde_prime


def importer_exports(economy: WorldEconomy, omega: np.ndarray, sales: np.ndarray,
                     importer_set: np.ndarray) -> np.ndarray:
    """ Each origin's sales into the importer set, zero for origins inside it.

    :param economy: the world economy.
    :param omega: revenue shares.
    :param sales: sales per node.
    :param importer_set: N boolean importer mask.
    :return: x per origin node.
    """

    inside = np.asarray(importer_set, dtype=bool)[economy.country_index]
    flows = omega[:, inside] @ sales[inside]
    return np.where(inside, 0.0, flows)


def _eei_parts(economy: WorldEconomy, rho_tilde: np.ndarray, omega: np.ndarray, sales: np.ndarray,
               importer_set: np.ndarray, direct_only: bool) -> Tuple[np.ndarray, np.ndarray]:
    exports = importer_exports(economy, omega, sales, importer_set)
    if direct_only:
        direct = rho_tilde * exports
        return direct, direct.copy()
    psi = leontief_inverse(omega)
    return rho_tilde * (psi @ exports), (rho_tilde @ psi) * exports


def eei(economy: WorldEconomy, solution: HatSolution, direct_only: bool = False) -> np.ndarray:
    """ Emissions embodied in imports into the importer set, attributed to the emitting node.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param direct_only: drop upstream linkages (Omega = 0).
    :return: tons per origin node.
    """

    _require_converged(solution)
    return _eei_parts(economy, intensity(economy, solution), revenue_shares(economy, solution),
                      solution.sales_prime, solution.importer_set, direct_only)[0]


def eei_by_product(economy: WorldEconomy, solution: HatSolution, direct_only: bool = False) -> np.ndarray:
    """ Emissions embodied in imports attributed to the imported product instead of the emitting node.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param direct_only: drop upstream linkages.
    :return: tons per imported product node.
    """

    _require_converged(solution)
    return _eei_parts(economy, intensity(economy, solution), revenue_shares(economy, solution),
                      solution.sales_prime, solution.importer_set, direct_only)[1]


def eei_total_change(economy: WorldEconomy, solution: HatSolution, base_solution: Optional[HatSolution] = None,
                     direct_only: bool = False, taxonomy_filter: TaxonomyFilter = TaxonomyFilter.all) -> float:
    """ % change in embodied emissions of imported products in a taxonomy split.

    :param economy: the world economy.
    :param solution: the counterfactual solution.
    :param base_solution: the reference solution, the steady state by default.
    :param direct_only: drop upstream linkages.
    :param taxonomy_filter: which imported products to aggregate.
    :return: the % change.
    """

    base = base_solution if base_solution is not None else steady_state_solution(economy, solution.importer_set)
    mask = _sector_mask(economy, taxonomy_filter)
    new = eei_by_product(economy, solution, direct_only)[mask].sum()
    old = eei_by_product(economy, base, direct_only)[mask].sum()
    return _percent(new, old)


def purchase_shares(economy: WorldEconomy, solution: HatSolution, origin_filter: OriginFilter = OriginFilter.foreign,
                    taxonomy_filter: TaxonomyFilter = TaxonomyFilter.all, weighted: bool = False) -> ShareChange:
    """ % change of the share of purchases of importer-set buyers that comes from the filtered origins.

    Observations are the importer-set destination nodes with a positive baseline share.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param origin_filter: foreign (outside the importer set), domestic (inside) or all origins.
    :param taxonomy_filter: clean, dirty or all origin sectors.
    :param weighted: weight observations by baseline materials spending instead of equally.
    :return: mean and population standard deviation of the changes.
    """

    _require_converged(solution)
    inside = solution.importer_set[economy.country_index]
    if origin_filter is OriginFilter.foreign:
        origins = ~inside
    elif origin_filter is OriginFilter.domestic:
        origins = inside.copy()
    else:
        origins = np.ones(economy.size, dtype=bool)
    origins &= _sector_mask(economy, taxonomy_filter)
    return _share_change(economy, solution, origins, inside, weighted,
                         '{} / {}'.format(origin_filter.value, taxonomy_filter.value))


def origin_share_changes(economy: WorldEconomy, solution: HatSolution,
                         taxonomy_filter: TaxonomyFilter = TaxonomyFilter.dirty) -> Dict[str, ShareChange]:
    """ Purchase share changes of importer-set buyers split by foreign origin country.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param taxonomy_filter: origin sectors, dirty by default.
    :return: country name to share change, for every country outside the importer set that sells the filtered
        sectors to it in the baseline.
    """

    _require_converged(solution)
    country = economy.country_index
    inside = solution.importer_set[country]
    sectors = _sector_mask(economy, taxonomy_filter)
    changes = {}
    for i in np.flatnonzero(~solution.importer_set):
        origins = (country == i) & sectors
        if not origins.any() or not np.any(economy.iota[origins][:, inside] > 0):
            continue
        name = economy.country_names[i]
        changes[name] = _share_change(economy, solution, origins, inside, False,
                                      '{} / {}'.format(name, taxonomy_filter.value))
    return changes


def _share_change(economy: WorldEconomy, solution: HatSolution, origins: np.ndarray, inside: np.ndarray,
                  weighted: bool, label: str) -> ShareChange:
    if not origins.any() or not inside.any():
        raise ValueError("purchase_shares expected a non-empty filter, however no origins match {}".format(label))

    base = economy.iota[origins][:, inside].sum(axis=0)
    new = solution.omega_tilde_prime[origins][:, inside].sum(axis=0)
    observed = base > 0
    if not observed.any():
        raise ValueError("purchase_shares expected at least one buyer with a positive baseline share for {}"
                         .format(label))
    changes = (new[observed] / base[observed] - 1.0) * 100.0
    if weighted:
        weights = (economy.gamma * economy.sales)[inside][observed]
        if weights.sum() <= 0:
            weights = np.ones_like(changes)
    else:
        weights = np.ones_like(changes)
    mean = float(np.average(changes, weights=weights))
    stdev = float(math.sqrt(np.average((changes - mean) ** 2, weights=weights)))
    return ShareChange(mean=mean, stdev=stdev, count=int(changes.size), changes=changes)


def domar_changes(economy: WorldEconomy, solution: HatSolution,
                  taxonomy_filter: TaxonomyFilter = TaxonomyFilter.all) -> ShareChange:
    """ % changes of the Domar weights of importer-set nodes.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param taxonomy_filter: sector split.
    :return: mean and population standard deviation.
    """

    _require_converged(solution)
    nodes = solution.importer_set[economy.country_index] & _sector_mask(economy, taxonomy_filter)
    base = domar_weights(economy.sales, economy.world_gne)[nodes]
    new = domar_weights(solution.sales_prime, math.fsum(solution.income_prime))[nodes]
    observed = base > 0
    if not observed.any():
        raise ValueError("domar_changes expected a non-empty filter, however no nodes match {}"
                         .format(taxonomy_filter.value))
    changes = (new[observed] / base[observed] - 1.0) * 100.0
    return ShareChange(mean=float(changes.mean()), stdev=float(changes.std()), count=int(changes.size),
                       changes=changes)


def sector_domar_changes(economy: WorldEconomy, solution: HatSolution) -> pd.Series:
    """ % change of the Domar weight of each sector, summed over the importer set.

    :param economy: the world economy.
    :param solution: a converged solution.
    :return: sector name to % change, NaN for sectors without importer-set sales.
    """

    _require_converged(solution)
    j = economy.dims.n_sectors
    inside = solution.importer_set[economy.country_index]
    sector = np.arange(economy.size) % j
    base = np.bincount(sector[inside], weights=domar_weights(economy.sales, economy.world_gne)[inside], minlength=j)
    new = np.bincount(sector[inside], minlength=j,
                      weights=domar_weights(solution.sales_prime, math.fsum(solution.income_prime))[inside])
    changes = np.full(j, np.nan)
    changes[base > 0] = (new[base > 0] / base[base > 0] - 1.0) * 100.0
    return pd.Series(changes, index=list(economy.sector_names), name='domar_change')


def leakage(economy: WorldEconomy, solution: HatSolution,
            normalization: LeakageNormalization = LeakageNormalization.priced) -> LeakageResult:
    """ Emission change of countries with an exogenous carbon price.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param normalization: express the change against priced-country (default) or world baseline emissions.
    :return: the leakage result.
    """

    _require_converged(solution)
    normalization = LeakageNormalization(normalization)
    priced = ~economy.capped_mask
    components = np.zeros(economy.dims.n_countries)
    if not priced.any():
        return LeakageResult(value=0., defined=False, normalization=normalization, components=components)
    old = economy.country_sum(economy.emissions)
    new = economy.country_sum(solution.emissions_prime)
    denominator = old[priced].sum() if normalization is LeakageNormalization.priced else old.sum()
    if denominator <= 0:
        return LeakageResult(value=0., defined=False, normalization=normalization, components=components)
    components[priced] = (new[priced] - old[priced]) / denominator * 100.0
    return LeakageResult(value=float(components.sum()), defined=True, normalization=normalization,
                         components=components)


def welfare(economy: WorldEconomy, solution: HatSolution) -> WelfareReport:
    """ Nominal and real GNE and real wage changes, deflated by the CES consumer price index.

    :param economy: the world economy.
    :param solution: a converged solution.
    :return: the welfare report.
    """

    _require_converged(solution)
    income = economy.income
    if np.any(income <= 0):
        raise InvalidStateError("welfare expected positive baseline income in every country")
    income_hat = solution.income_prime / income
    price_hat = solution.consumption_price_hat
    return WelfareReport(gne_nominal_change=(income_hat - 1.0) * 100.0,
                         gne_real_change=(income_hat / price_hat - 1.0) * 100.0,
                         real_wage_change=(solution.w_hat / price_hat - 1.0) * 100.0,
                         consumption_price_index_hat=price_hat.copy())


def aggregate_welfare(economy: WorldEconomy, solution: HatSolution, mask: np.ndarray) -> Dict[str, float]:
    """ Income-weighted GNE changes and labour-weighted real wage change over a group of countries.

    :param economy: the world economy.
    :param solution: a converged solution.
    :param mask: N boolean group membership.
    :return: 'gne_nominal', 'gne_real' and 'real_wage' changes in %.
    """

    report = welfare(economy, solution)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("aggregate_welfare expected a non-empty country group")
    income = economy.income[mask]
    labor = economy.labor[mask]
    return {'gne_nominal': float(np.average(report.gne_nominal_change[mask], weights=income)),
            'gne_real': float(np.average(report.gne_real_change[mask], weights=income)),
            'real_wage': float(np.average(report.real_wage_change[mask], weights=labor))}


def _check_pair(economy: WorldEconomy, base_solution: HatSolution, cf_solution: HatSolution) -> None:
    for solution in (base_solution, cf_solution):
        _require_converged(solution)
        if solution.sales_prime.shape != (economy.size,):
            raise ValueError("decompose_eei expected solutions of an economy with {} nodes, however received {}"
                             .format(economy.size, solution.sales_prime.shape))
    if not np.array_equal(base_solution.importer_set, cf_solution.importer_set):
        raise ValueError("decompose_eei expected both solutions to share the importer set")


def decompose_eei(economy: WorldEconomy, base_solution: HatSolution, cf_solution: HatSolution,
                  direct_only: bool = False) -> Dict[str, EEIDecomposition]:
    """ Split the change in embodied emissions into a technology effect (intensities change, network fixed), a
    reallocation effect (network changes, intensities fixed) and their cross term.

    :param economy: the world economy.
    :param base_solution: the reference solution.
    :param cf_solution: the counterfactual solution.
    :param direct_only: decompose direct instead of total embodied emissions.
    :return: the decomposition in tons for the 'total', 'clean' and 'dirty' aggregates.
    """

    _check_pair(economy, base_solution, cf_solution)
    importer = base_solution.importer_set
    base_rho, cf_rho = intensity(economy, base_solution), intensity(economy, cf_solution)
    base_net = (revenue_shares(economy, base_solution), base_solution.sales_prime)
    cf_net = (revenue_shares(economy, cf_solution), cf_solution.sales_prime)

    def embodied(rho_tilde, network):
        return _eei_parts(economy, rho_tilde, network[0], network[1], importer, direct_only)[1]

    reference = embodied(base_rho, base_net)
    technology = embodied(cf_rho, base_net)
    reallocation = embodied(base_rho, cf_net)
    counterfactual = embodied(cf_rho, cf_net)

    result = {}
    for aggregate in (TaxonomyFilter.all, TaxonomyFilter.clean, TaxonomyFilter.dirty):
        mask = _sector_mask(economy, aggregate)
        ref = reference[mask].sum()
        tech = technology[mask].sum() - ref
        realloc = reallocation[mask].sum() - ref
        total = counterfactual[mask].sum() - ref
        name = 'total' if aggregate is TaxonomyFilter.all else aggregate.value
        result[name] = EEIDecomposition(technology=float(tech), reallocation=float(realloc),
                                        cross_residual=float(total - tech - realloc), total=float(total))
    return result


def emissions_report(economy: WorldEconomy, solution: HatSolution,
                     base_solution: Optional[HatSolution] = None) -> EmissionsReport:
    """ Embodied emissions, their taxonomy splits, leakage and decomposition for one scenario.

    :param economy: the world economy.
    :param solution: the counterfactual solution.
    :param base_solution: the reference solution, the steady state by default.
    :return: the emissions report.
    """

    base = base_solution if base_solution is not None else steady_state_solution(economy, solution.importer_set)
    splits = {}
    for label, direct_only in (('direct', True), ('total', False)):
        splits[label] = {f.value: eei_total_change(economy, solution, base, direct_only, f)
                         for f in (TaxonomyFilter.all, TaxonomyFilter.clean, TaxonomyFilter.dirty)}
    leak = leakage(economy, solution)
    return EmissionsReport(eei_direct=eei(economy, solution, direct_only=True), eei_total=eei(economy, solution),
                           eei_direct_base=eei(economy, base, direct_only=True), eei_total_base=eei(economy, base),
                           leakage_change=leak.value, leakage=leak, splits=splits,
                           decomposition=decompose_eei(economy, base, solution))


def _share_metric(origin_filter: OriginFilter, taxonomy_filter: TaxonomyFilter) -> Callable:
    return lambda economy, solution: purchase_shares(economy, solution, origin_filter, taxonomy_filter).mean


METRICS: Dict[str, Callable[[WorldEconomy, HatSolution], float]] = {
    'eei_direct': lambda economy, solution: eei_total_change(economy, solution, direct_only=True),
    'eei_total': lambda economy, solution: eei_total_change(economy, solution),
    'foreign_share': _share_metric(OriginFilter.foreign, TaxonomyFilter.all),
    'foreign_dirty_share': _share_metric(OriginFilter.foreign, TaxonomyFilter.dirty),
    'foreign_clean_share': _share_metric(OriginFilter.foreign, TaxonomyFilter.clean),
    'domestic_share': _share_metric(OriginFilter.domestic, TaxonomyFilter.all),
    'leakage': lambda economy, solution: leakage(economy, solution).value,
    'importer_gne_real': lambda economy, solution: aggregate_welfare(economy, solution,
                                                                     solution.importer_set)['gne_real'],
}


def endogenous_gap(economy: WorldEconomy, pair_a: Tuple[PolicyScenario, HatSolution],
                   pair_b: Tuple[PolicyScenario, HatSolution],
                   metrics: Optional[Mapping[str, Callable]] = None) -> Dict[str, float]:
    """ Relative difference (x_endogenous - x_exogenous) / |x_exogenous| of every registered metric.

    :param economy: the world economy.
    :param pair_a: a scenario and its solution.
    :param pair_b: the same scenario in the other CBAM mode, and its solution.
    :param metrics: metric name to function, defaults to METRICS.
    :return: metric name to relative gap.
    """

    (scenario_a, solution_a), (scenario_b, solution_b) = pair_a, pair_b
    mode_a, mode_b = scenario_a.cbam_mode, scenario_b.cbam_mode
    if not mode_a.is_active or mode_a.counterpart() is not mode_b:
        raise ValueError("endogenous_gap expected an endogenous / exogenous pair of the same coverage, however "
                         "received '{}' and '{}'".format(mode_a.value, mode_b.value))
    settings_a = {k: v for k, v in scenario_a.to_dict().items() if k not in ('name', 'cbam_mode')}
    settings_b = {k: v for k, v in scenario_b.to_dict().items() if k not in ('name', 'cbam_mode')}
    if settings_a != settings_b:
        raise ValueError("endogenous_gap expected scenarios differing only in mode, however they differ in {}"
                         .format(sorted(k for k in settings_a if settings_a[k] != settings_b[k])))
    endogenous, exogenous = (solution_a, solution_b) if mode_a.is_endogenous else (solution_b, solution_a)

    gaps = {}
    for name, metric in (metrics or METRICS).items():
        x_endogenous, x_exogenous = metric(economy, endogenous), metric(economy, exogenous)
        if x_exogenous == 0:
            gaps[name] = 0. if x_endogenous == 0 else math.copysign(math.inf, x_endogenous)
        else:
            gaps[name] = (x_endogenous - x_exogenous) / abs(x_exogenous)
    return gaps


def summary_tables(economy: WorldEconomy, solutions: Mapping[str, HatSolution],
                   base_solution: Optional[HatSolution] = None) -> Dict[str, pd.DataFrame]:
    """ Tables of trade patterns, embodied emissions, GNE, foreign dirty purchases by origin and importer-set
    Domar weights by sector, one column (or mean/sd pair) per scenario.

    :param economy: the world economy.
    :param solutions: scenario name to converged solution.
    :param base_solution: the reference solution, the steady state by default.
    :return: 'table1_trade', 'table2_emissions', 'table3_gne', 'table4_origins' and 'table5_domar'.
    """

    trade_rows = [('foreign purchases', f, OriginFilter.foreign) for f in TaxonomyFilter] \
        + [('domestic purchases', f, OriginFilter.domestic) for f in TaxonomyFilter] \
        + [('domar weights', f, None) for f in TaxonomyFilter]
    trade = pd.DataFrame({'panel': [r[0] for r in trade_rows], 'variable': [r[1].value for r in trade_rows]})
    emissions = pd.DataFrame({'panel': ['direct'] * 3 + ['total'] * 3 + ['leakage'],
                              'variable': ['all', 'clean', 'dirty'] * 2 + ['priced countries']})
    gne = pd.DataFrame({'panel': ['importer set', 'importer set', 'rest of world', 'rest of world'],
                        'variable': ['real GNE', 'real wages', 'real GNE', 'real wages']})
    countries = list(economy.country_names)
    origins = pd.DataFrame({'panel': ['foreign dirty purchases'] * len(countries), 'variable': countries})
    sectors = pd.DataFrame({'panel': ['domar weights'] * economy.dims.n_sectors,
                            'variable': list(economy.sector_names)})

    for name, solution in solutions.items():
        base = base_solution if base_solution is not None else steady_state_solution(economy, solution.importer_set)
        means, sds = [], []
        for panel, taxonomy_filter, origin_filter in trade_rows:
            try:
                change = domar_changes(economy, solution, taxonomy_filter) if origin_filter is None \
                    else purchase_shares(economy, solution, origin_filter, taxonomy_filter)
                means.append(change.mean)
                sds.append(change.stdev)
            except ValueError:
                means.append(float('nan'))
                sds.append(float('nan'))
        trade['{}_mean'.format(name)] = means
        trade['{}_sd'.format(name)] = sds

        report = emissions_report(economy, solution, base)
        values = [report.splits[label][f] for label in ('direct', 'total') for f in ('all', 'clean', 'dirty')]
        emissions[name] = values + [report.leakage_change]

        inside = solution.importer_set
        outside = ~inside
        inner, outer = aggregate_welfare(economy, solution, inside), aggregate_welfare(economy, solution, outside)
        gne[name] = [inner['gne_real'], inner['real_wage'], outer['gne_real'], outer['real_wage']]

        by_origin = origin_share_changes(economy, solution)
        origins['{}_mean'.format(name)] = [by_origin[c].mean if c in by_origin else float('nan') for c in countries]
        origins['{}_sd'.format(name)] = [by_origin[c].stdev if c in by_origin else float('nan') for c in countries]
        sectors[name] = sector_domar_changes(economy, solution).to_numpy()

    return {'table1_trade': trade, 'table2_emissions': emissions, 'table3_gne': gne, 'table4_origins': origins,
            'table5_domar': sectors}
