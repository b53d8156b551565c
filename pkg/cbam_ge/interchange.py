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

""" The on-disk interchange format: a JSON manifest binding long-format CSV files, plus JSON documents for
scenarios and baseline shocks and CSV dumps of solutions. Floats are written with 17 significant digits so that
re-reading reproduces them exactly. """

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from cbam_ge.calibration import BaselineShock, Calibrator, EmissionsInputs, RawIoTable
from cbam_ge.errors import CalibrationError
from cbam_ge.model import SectorTaxonomy, WorldEconomy
from cbam_ge.scenarios import FlowKey, PolicyScenario
from cbam_ge.solver import HatSolution

MANIFEST_LAYOUT = 'manifest_v1'
MANIFEST_NAME = 'manifest.json'
FLOAT_FORMAT = '%.17g'
INPUT_FILES = ('io_flows', 'final_demand', 'output_va', 'emissions', 'carbon_prices', 'taxonomy')
LABEL_COLUMNS = ('country', 'sector', 'origin_country', 'origin_sector', 'dest_country', 'dest_sector', 'regime')
TRUE_STRINGS = ('1', 'true', 'yes', 'y', 't')

PathLike = Union[str, Path]


def write_json(path: PathLike, payload) -> Path:
    """ Write JSON with sorted keys so equal payloads give equal bytes. """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def read_json(path: PathLike) -> dict:
    path = Path(path)
    if not path.is_file():
        raise CalibrationError("{} not found".format(path.name))
    with path.open(encoding='utf-8') as f:
        return json.load(f)


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    """ Read one interchange CSV, labels kept as strings.

    :param path: the file.
    :return: the frame.
    """

    path = Path(path)
    if not path.is_file():
        raise CalibrationError("{} not found".format(path.name))
    header = pd.read_csv(path, nrows=0, encoding='utf-8').columns
    return pd.read_csv(path, dtype={c: str for c in header if c in LABEL_COLUMNS}, float_precision='round_trip',
                       encoding='utf-8')


@dataclass
class CalibrationManifest:
    """ A calibration manifest: labels, file bindings, elasticities and optional suite settings.

    :var directory: where relative file names are resolved.
    :var countries: country labels in model order.
    :var sectors: sector labels in model order.
    :var files: input key to file name.
    :var importer_set: labels of the ETS-area countries.
    :var baseline_shock: optional baseline shock document.
    :var scenarios: optional scenario documents for the suite.
    :var targets: optional headline numbers to compare against.
    """

    directory: Path
    countries: List[str]
    sectors: List[str]
    files: Dict[str, str]
    importer_set: List[str]
    theta: float = 4.0
    sigma: float = 4.0
    base_year: int = 2018
    baseline_shock: Optional[dict] = None
    scenarios: List[dict] = field(default_factory=list)
    targets: Optional[dict] = None

    @classmethod
    def from_dict(cls, data: dict, directory: PathLike) -> 'CalibrationManifest':
        layout = data.get('layout', MANIFEST_LAYOUT)
        if layout != MANIFEST_LAYOUT:
            raise CalibrationError("CalibrationManifest expected layout '{}', however received '{}'"
                                   .format(MANIFEST_LAYOUT, layout))
        for key in ('countries', 'sectors', 'importer_set'):
            if key not in data:
                raise CalibrationError("CalibrationManifest expected a '{}' entry".format(key))
        files = {key: '{}.csv'.format(key) for key in INPUT_FILES}
        files.update(data.get('files', {}))
        return cls(directory=Path(directory), countries=[str(c) for c in data['countries']],
                   sectors=[str(s) for s in data['sectors']], files=files,
                   importer_set=[str(c) for c in data['importer_set']], theta=float(data.get('theta', 4.0)),
                   sigma=float(data.get('sigma', 4.0)), base_year=int(data.get('base_year', 2018)),
                   baseline_shock=data.get('baseline_shock'), scenarios=list(data.get('scenarios', [])),
                   targets=data.get('targets'))

    def to_dict(self) -> dict:
        payload = {'layout': MANIFEST_LAYOUT, 'countries': self.countries, 'sectors': self.sectors,
                   'files': self.files, 'importer_set': self.importer_set, 'theta': self.theta,
                   'sigma': self.sigma, 'base_year': self.base_year}
        if self.baseline_shock is not None:
            payload['baseline_shock'] = self.baseline_shock
        if self.scenarios:
            payload['scenarios'] = self.scenarios
        if self.targets is not None:
            payload['targets'] = self.targets
        return payload

    def path(self, key: str) -> Path:
        return self.directory / self.files[key]

    def eu_mask(self) -> np.ndarray:
        unknown = sorted(set(self.importer_set) - set(self.countries))
        if unknown:
            raise CalibrationError("CalibrationManifest lists unknown importer countries {}".format(unknown))
        return np.array([c in self.importer_set for c in self.countries])

    def shock(self) -> Optional[BaselineShock]:
        return BaselineShock.from_dict(self.baseline_shock) if self.baseline_shock else None


def read_manifest(path: PathLike) -> CalibrationManifest:
    """ Read a manifest, given the JSON file or the directory holding manifest.json. """

    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return CalibrationManifest.from_dict(read_json(path), path.parent)


def read_taxonomy(frame: pd.DataFrame, sectors: Sequence[str]) -> SectorTaxonomy:
    missing = [c for c in ('sector', 'ets', 'cbam_reduced') if c not in frame.columns]
    if missing:
        raise CalibrationError("taxonomy is missing columns {}".format(missing))
    by_sector = frame.set_index(frame['sector'].astype(str))
    absent = [s for s in sectors if s not in by_sector.index]
    if absent:
        raise CalibrationError("taxonomy has no row for sectors {}".format(absent))

    def flag(column):
        return by_sector.loc[list(sectors), column].astype(str).str.strip().str.lower().isin(TRUE_STRINGS).to_numpy()

    return SectorTaxonomy(flag('ets'), flag('cbam_reduced'))


def load_inputs(manifest: CalibrationManifest) -> Tuple[RawIoTable, EmissionsInputs, SectorTaxonomy]:
    """ Read the six input files of a manifest.

    :param manifest: the manifest.
    :return: the IO table, emissions inputs and sector taxonomy.
    """

    frames = {key: read_csv(manifest.path(key)) for key in INPUT_FILES}
    io = RawIoTable.from_frames(frames['io_flows'], frames['final_demand'], frames['output_va'], manifest.countries,
                                manifest.sectors)
    em = EmissionsInputs.from_frames(frames['emissions'], frames['carbon_prices'], manifest.countries,
                                     manifest.sectors)
    return io, em, read_taxonomy(frames['taxonomy'], manifest.sectors)


def calibrate_manifest(manifest: CalibrationManifest, calibrator: Optional[Calibrator] = None) -> WorldEconomy:
    """ Ingest the inputs a manifest binds. """

    calibrator = calibrator or Calibrator()
    io, em, taxonomy = load_inputs(manifest)
    return calibrator.ingest(io, em, taxonomy, manifest.eu_mask(), manifest.theta, manifest.sigma,
                             country_names=manifest.countries, sector_names=manifest.sectors)


def load_economy(path: PathLike, calibrator: Optional[Calibrator] = None) -> WorldEconomy:
    return calibrate_manifest(read_manifest(path), calibrator)


def read_tariffs(manifest: CalibrationManifest) -> Dict[FlowKey, float]:
    """ Optional tariffs.csv as scenario tariff overrides; empty when the manifest binds none. """

    name = manifest.files.get('tariffs')
    if not name:
        return {}
    frame = read_csv(manifest.directory / name)
    country = {c: i + 1 for i, c in enumerate(manifest.countries)}
    sector = {s: k + 1 for k, s in enumerate(manifest.sectors)}
    overrides = {}
    for row in frame.itertuples(index=False):
        try:
            key = ((country[row.origin_country], sector[row.origin_sector]),
                   (country[row.dest_country], sector[row.dest_sector]))
        except KeyError as e:
            raise CalibrationError("tariffs refers to an unknown label {}".format(e))
        overrides[key] = float(row.value)
    return overrides


def _node_frame(economy: WorldEconomy) -> pd.DataFrame:
    return pd.DataFrame({'country': [economy.country_names[c] for c in economy.country_index],
                         'sector': [economy.sector_names[k] for k in economy.sector_index]})


def export_economy(economy: WorldEconomy, directory: PathLike, baseline_shock: Optional[BaselineShock] = None,
                   scenarios: Sequence[PolicyScenario] = (), targets: Optional[dict] = None) -> Path:
    """ Write data that ingests back into this economy: gross output equal to sales, value added beta S,
    intermediate purchases iota (1 - beta) S, domestic final demand chi I and emissions in tons.

    :param economy: the economy.
    :param directory: the output directory.
    :param baseline_shock: optional shock recorded in the manifest.
    :param scenarios: optional scenarios recorded in the manifest.
    :param targets: optional headline targets recorded in the manifest.
    :return: the manifest path.
    """

    missing_price = (economy.observed_carbon_price[economy.country_index] == 0) & (economy.rho > 0)
    if missing_price.any():
        raise ValueError("export_economy expected an observed carbon price wherever rho is positive, however "
                         "nodes {} have none".format([economy.node_label(a) for a in np.flatnonzero(missing_price)]))
    directory = Path(directory)
    nodes = _node_frame(economy)
    names = economy.country_names

    spend = np.where(economy.sales > 0, (1.0 - economy.beta) * economy.sales, 1.0)
    flows = economy.iota * spend[None, :]
    origin, dest = np.nonzero(flows)
    write_csv(directory / 'io_flows.csv', pd.DataFrame({
        'origin_country': nodes['country'].to_numpy()[origin], 'origin_sector': nodes['sector'].to_numpy()[origin],
        'dest_country': nodes['country'].to_numpy()[dest], 'dest_sector': nodes['sector'].to_numpy()[dest],
        'value': flows[origin, dest]}))
    write_csv(directory / 'final_demand.csv', nodes.rename(columns={'country': 'origin_country',
                                                                    'sector': 'origin_sector'})
              .assign(dest_country=nodes['country'], value=economy.final_demand))
    write_csv(directory / 'output_va.csv', nodes.assign(gross_output=economy.sales,
                                                        value_added=economy.beta * economy.sales))
    write_csv(directory / 'emissions.csv', nodes.assign(emissions=economy.emissions,
                                                        free_allowance_share=economy.free_alloc))
    write_csv(directory / 'carbon_prices.csv', pd.DataFrame({
        'country': list(names), 'effective_carbon_rate': economy.observed_carbon_price,
        'regime': [r.kind.value for r in economy.carbon_regime]}))
    write_csv(directory / 'taxonomy.csv', pd.DataFrame({
        'sector': list(economy.sector_names), 'ets': economy.taxonomy.ets_flag.astype(int),
        'cbam_reduced': economy.taxonomy.cbam_reduced_flag.astype(int)}))

    manifest = CalibrationManifest(directory=directory, countries=list(names), sectors=list(economy.sector_names),
                                   files={key: '{}.csv'.format(key) for key in INPUT_FILES},
                                   importer_set=[names[i] for i in np.flatnonzero(economy.eu_mask)],
                                   theta=economy.theta, sigma=economy.sigma,
                                   baseline_shock=baseline_shock.to_dict() if baseline_shock else None,
                                   scenarios=[s.to_dict() for s in scenarios], targets=targets)
    return write_json(directory / MANIFEST_NAME, manifest.to_dict())


def write_solution(directory: PathLike, solution: HatSolution, economy: WorldEconomy,
                   scenario: Optional[PolicyScenario] = None) -> List[Path]:
    """ One CSV per solution variable plus manifest.json.

    :param directory: the output directory.
    :param solution: the solution.
    :param economy: the economy it belongs to.
    :param scenario: the scenario recorded in the manifest.
    :return: the written paths, sorted.
    """

    directory = Path(directory)
    paths = [write_csv(directory / '{}.csv'.format(name), frame)
             for name, frame in sorted(solution.to_frames(economy).items())]
    manifest = solution.manifest()
    if scenario is not None:
        manifest['scenario_definition'] = scenario.to_dict()
        manifest['scenario_hash'] = scenario.content_hash()
    paths.append(write_json(directory / MANIFEST_NAME, manifest))
    return sorted(paths)


def read_scenario(path: PathLike) -> PolicyScenario:
    return PolicyScenario.from_dict(read_json(path))


def write_scenario(path: PathLike, scenario: PolicyScenario) -> Path:
    return write_json(path, scenario.to_dict())


def read_shock(path: PathLike) -> BaselineShock:
    return BaselineShock.from_dict(read_json(path))


def write_shock(path: PathLike, shock: BaselineShock) -> Path:
    return write_json(path, shock.to_dict())
