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

""" End-to-end runs from a calibration manifest: calibrate, build the baseline, solve the CBAM scenarios, compute
metrics and write a deterministic artifact tree.

Layout (layout_v1)::

    <output>/layout_v1/
        economy/            calibrated inputs, re-ingestable
        baseline/           baseline inputs, re-ingestable
        scenarios/<name>/   one CSV per solution variable, manifest.json
        tables/             table1_trade.csv, table2_emissions.csv, table3_gne.csv, table4_origins.csv,
                            table5_domar.csv
        report.json
        comparison.csv      only when the manifest carries targets
        run_manifest.json   sha256 of every other artifact
"""

import hashlib
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

import logbook
import pandas as pd
from logbook import Logger

from cbam_ge.calibration import Calibrator
from cbam_ge.errors import CbamGeError, StageError
from cbam_ge.functional import cbam_grid
from cbam_ge.interchange import (calibrate_manifest, export_economy, read_manifest, read_tariffs, write_csv,
                                 write_json, write_solution)
from cbam_ge.metrics import METRICS, emissions_report, endogenous_gap, summary_tables
from cbam_ge.model import WorldEconomy
from cbam_ge.scenarios import CbamMode, PolicyScenario
from cbam_ge.solver import HatSolution, PolicySolver

LAYOUT = 'layout_v1'
THREADS_VARIABLE = 'CBAM_GE_THREADS'
INVALID_MARKER = 'INVALID'
HEADLINE_TARGETS = {'eei_direct': -8.84, 'eei_total': -5.19, 'foreign_dirty_share': -2.14, 'importer_gne_real': 0.04,
                    'leakage': -0.19}
HEADLINE_SCENARIO = CbamMode.full_endogenous.value


def threads_from_environment(default: int = 1) -> int:
    value = os.environ.get(THREADS_VARIABLE, '')
    if not value.strip():
        return default
    try:
        threads = int(value)
    except ValueError:
        raise ValueError("{} expected an integer, however received '{}'".format(THREADS_VARIABLE, value))
    if threads < 1:
        raise ValueError("{} expected at least 1 thread, however received '{}'".format(THREADS_VARIABLE, value))
    return threads


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open('rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def _finite(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


@dataclass
class SuiteResult:
    """ What a suite run produced. """

    root: Path
    economy: WorldEconomy
    baseline: WorldEconomy
    scenarios: Dict[str, PolicyScenario]
    solutions: Dict[str, HatSolution]
    tables: Dict[str, pd.DataFrame]
    metrics: Dict[str, Dict[str, float]] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)


class ScenarioSuite:
    """ Runs the calibrate, baseline, scenarios, metrics and reports stages of a manifest. """

    def __init__(self, manifest_path: Union[str, Path], output_dir: Union[str, Path], threads: Optional[int] = None,
                 solver: Optional[PolicySolver] = None, log_level=logbook.INFO):
        """ ScenarioSuite constructor.

        :param manifest_path: the calibration manifest, or its directory.
        :param output_dir: where the layout_v1 tree is written.
        :param threads: worker threads for independent scenario solves, CBAM_GE_THREADS by default.
        :param solver: the solver, a default PolicySolver otherwise.
        :param log_level: the level for displaying and logging information, e.g. debugging information.
        """

        self._log = Logger('ScenarioSuite')
        self._log.level = log_level
        self.manifest_path = Path(manifest_path)
        self.root = Path(output_dir) / LAYOUT
        self.threads = threads if threads is not None else threads_from_environment()
        if self.threads < 1:
            raise ValueError("ScenarioSuite.__init__ expected 'threads' to be at least 1, however received '{}'"
                             .format(self.threads))
        self.solver = solver or PolicySolver(log_level=log_level)
        self._write_lock = threading.Lock()

    def run(self) -> SuiteResult:
        """ Run every stage; a failing stage marks the tree invalid and raises StageError.

        :return: the suite result.
        """

        self.root.mkdir(parents=True, exist_ok=True)
        marker = self.root / INVALID_MARKER
        if marker.exists():
            marker.unlink()

        manifest = self._stage('calibrate', lambda: read_manifest(self.manifest_path))
        economy = self._stage('calibrate', lambda: self._calibrate(manifest))
        baseline = self._stage('baseline', lambda: self._baseline(manifest, economy))
        scenarios = self._stage('scenarios', lambda: self._scenarios(manifest))
        solutions = self._stage('scenarios', lambda: self._solve(baseline, scenarios))
        tables, metrics = self._stage('metrics', lambda: self._metrics(baseline, scenarios, solutions))
        result = SuiteResult(root=self.root, economy=economy, baseline=baseline, scenarios=scenarios,
                             solutions=solutions, tables=tables, metrics=metrics)
        self._stage('reports', lambda: self._reports(result, manifest.targets))
        self._log.info("ScenarioSuite.run: wrote {} artifacts under {}".format(len(result.artifacts), self.root))
        return result

    def _stage(self, name: str, action: Callable):
        try:
            return action()
        except (CbamGeError, ValueError, OSError) as e:
            residuals = getattr(e, 'residuals', None)
            self.root.mkdir(parents=True, exist_ok=True)
            (self.root / INVALID_MARKER).write_text('{}: {}\n'.format(name, e), encoding='utf-8')
            self._log.error("ScenarioSuite.run: stage '{}' failed: {}".format(name, e))
            raise StageError(name, str(e), residuals=residuals) from e

    def _calibrate(self, manifest) -> WorldEconomy:
        self._log.info("ScenarioSuite: calibrate")
        economy = calibrate_manifest(manifest, Calibrator(solver=self.solver, log_level=self._log.level))
        export_economy(economy, self.root / 'economy')
        return economy

    def _baseline(self, manifest, economy: WorldEconomy) -> WorldEconomy:
        shock = manifest.shock()
        if shock is None:
            self._log.info("ScenarioSuite: no baseline shock, the calibrated economy is the baseline")
            baseline = economy
        else:
            self._log.info("ScenarioSuite: baseline {} -> {}".format(shock.base_year, shock.target_year))
            baseline = Calibrator(solver=self.solver, log_level=self._log.level).build_baseline(economy, shock)
        export_economy(baseline, self.root / 'baseline')
        return baseline

    def _scenarios(self, manifest) -> Dict[str, PolicyScenario]:
        documents = manifest.scenarios
        if not documents:
            scenarios = list(cbam_grid())
        else:
            tariffs = None
            scenarios = []
            for document in documents:
                document = dict(document)
                apply_tariffs = bool(document.pop('apply_tariffs', False))
                scenario = PolicyScenario.from_dict(document)
                if apply_tariffs:
                    tariffs = read_tariffs(manifest) if tariffs is None else tariffs
                    scenario = PolicyScenario.from_dict(dict(scenario.to_dict(),
                                                             tariff_overrides=_tariff_documents(tariffs)))
                scenarios.append(scenario)
        names = [s.name for s in scenarios]
        if len(set(names)) != len(names):
            raise ValueError("ScenarioSuite expected unique scenario names, however received {}".format(names))
        return {s.name: s for s in scenarios}

    def _solve(self, baseline: WorldEconomy, scenarios: Mapping[str, PolicyScenario]) -> Dict[str, HatSolution]:
        def work(scenario: PolicyScenario) -> HatSolution:
            solution = self.solver.solve(baseline, scenario)
            with self._write_lock:
                write_solution(self.root / 'scenarios' / scenario.name, solution, baseline, scenario)
            return solution

        self._log.info("ScenarioSuite: solving {} scenarios on {} threads".format(len(scenarios), self.threads))
        ordered = list(scenarios.values())
        if self.threads == 1:
            solved = [work(s) for s in ordered]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                solved = list(pool.map(work, ordered))
        return {s.name: solution for s, solution in zip(ordered, solved)}

    def _metrics(self, baseline: WorldEconomy, scenarios: Mapping[str, PolicyScenario],
                 solutions: Mapping[str, HatSolution]):
        tables = summary_tables(baseline, solutions)
        metrics = {name: {key: float(metric(baseline, solution)) for key, metric in METRICS.items()}
                   for name, solution in solutions.items()}
        for name, solution in solutions.items():
            decomposition = emissions_report(baseline, solution).decomposition['total']
            metrics[name].update({'eei_technology': decomposition.technology,
                                  'eei_reallocation': decomposition.reallocation,
                                  'eei_cross_residual': decomposition.cross_residual})
        by_mode = {s.cbam_mode: (s, solutions[name]) for name, s in scenarios.items()}
        for mode in (CbamMode.reduced_endogenous, CbamMode.full_endogenous):
            if mode in by_mode and mode.counterpart() in by_mode:
                pair = by_mode[mode]
                gaps = endogenous_gap(baseline, pair, by_mode[mode.counterpart()])
                metrics[pair[0].name].update({'gap_{}'.format(k): v for k, v in gaps.items()})
        return tables, metrics

    def _reports(self, result: SuiteResult, targets: Optional[dict]) -> None:
        for name, table in sorted(result.tables.items()):
            write_csv(self.root / 'tables' / '{}.csv'.format(name), table)
        report = {'layout': LAYOUT,
                  'scenarios': {name: {'definition': result.scenarios[name].to_dict(),
                                       'hash': result.scenarios[name].content_hash(),
                                       'solve': result.solutions[name].manifest(),
                                       'metrics': {k: _finite(v) for k, v in sorted(values.items())}}
                                for name, values in sorted(result.metrics.items())}}
        write_json(self.root / 'report.json', report)
        if targets is not None:
            compare_with_targets(result.metrics, targets, self.root / 'comparison.csv')
        artifacts = sorted(p for p in self.root.rglob('*') if p.is_file() and p.name != 'run_manifest.json')
        result.artifacts = {p.relative_to(self.root).as_posix(): file_digest(p) for p in artifacts}
        write_json(self.root / 'run_manifest.json', {'layout': LAYOUT, 'artifacts': result.artifacts})


def run_scenario_suite(manifest_path: Union[str, Path], output_dir: Union[str, Path], threads: Optional[int] = None,
                       log_level=logbook.INFO) -> Tuple[int, Path]:
    """ Run a ScenarioSuite and report an exit status instead of raising on a failed stage.

    :param manifest_path: the calibration manifest, or its directory.
    :param output_dir: where the layout_v1 tree is written.
    :param threads: worker threads, CBAM_GE_THREADS by default.
    :param log_level: the level for displaying and logging information.
    :return: 0 and the artifact root on success, 1 and the (invalid) artifact root otherwise.
    """

    suite = ScenarioSuite(manifest_path, output_dir, threads=threads, log_level=log_level)
    try:
        suite.run()
    except StageError:
        return 1, suite.root
    return 0, suite.root


def _tariff_documents(tariffs) -> List[dict]:
    return [{'origin': list(origin), 'destination': list(dest), 'rate': rate}
            for (origin, dest), rate in sorted(tariffs.items())]


def compare_with_targets(metrics: Mapping[str, Mapping[str, float]], targets: Optional[Mapping[str, float]] = None,
                         path: Optional[Union[str, Path]] = None, tolerance_pp: float = 0.5,
                         scenario: str = HEADLINE_SCENARIO) -> pd.DataFrame:
    """ Headline metrics of one scenario side by side with target values; the tolerance flag is informational.

    :param metrics: scenario name to metric name to value, in %.
    :param targets: metric name to target, HEADLINE_TARGETS by default.
    :param path: where to write the comparison CSV.
    :param tolerance_pp: the tolerance in percentage points.
    :param scenario: the scenario compared.
    :return: the comparison table.
    """

    targets = HEADLINE_TARGETS if targets is None else targets
    values = metrics.get(scenario, {})
    rows = []
    for name, target in sorted(targets.items()):
        value = values.get(name, float('nan'))
        gap = value - float(target)
        rows.append({'scenario': scenario, 'metric': name, 'target': float(target), 'value': value, 'gap_pp': gap,
                     'within_tolerance': bool(abs(gap) <= tolerance_pp)})
    frame = pd.DataFrame(rows, columns=['scenario', 'metric', 'target', 'value', 'gap_pp', 'within_tolerance'])
    if path is not None:
        write_csv(path, frame)
    return frame
