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

""" The cbam_ge command line. """

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import logbook
import pandas as pd
from logbook import Logger, StreamHandler

from cbam_ge.calibration import Calibrator
from cbam_ge.counterfactuals import SweepSpec, run_sweep
from cbam_ge.errors import CbamGeError
from cbam_ge.fixtures import FIXTURES, fixture, write_fixture
from cbam_ge.interchange import (calibrate_manifest, export_economy, load_economy, read_csv, read_json,
                                 read_manifest, read_scenario, read_shock, write_csv, write_json, write_solution)
from cbam_ge.linearization import FactorDerivatives, ShockFlow, linearize
from cbam_ge.solver import PolicySolver, verify_solution
from cbam_ge.suite import INVALID_MARKER, LAYOUT, run_scenario_suite

LOG_LEVELS = {'debug': logbook.DEBUG, 'info': logbook.INFO, 'warning': logbook.WARNING, 'error': logbook.ERROR}

_log = Logger('cbam_ge')


def _fixture(args) -> None:
    path = write_fixture(args.output, fixture(args.kind, args.seed))
    _log.info("wrote the {} fixture to {}".format(args.kind, path))


def _calibrate(args) -> None:
    calibrator = Calibrator(log_level=args.level)
    economy = calibrate_manifest(read_manifest(args.manifest), calibrator)
    export_economy(economy, args.output)
    write_json(Path(args.output) / 'diagnostics.json', calibrator.diagnostics.to_dict())


def _baseline(args) -> None:
    economy = load_economy(args.economy, Calibrator(log_level=args.level))
    calibrator = Calibrator(solver=PolicySolver(log_level=args.level), log_level=args.level)
    export_economy(calibrator.build_baseline(economy, read_shock(args.shock)), args.output)


def _solve(args) -> None:
    economy = load_economy(args.economy, Calibrator(log_level=args.level))
    scenario = read_scenario(args.scenario)
    solution = PolicySolver(log_level=args.level).solve(economy, scenario)
    write_solution(args.output, solution, economy, scenario)
    residuals = verify_solution(economy, scenario, solution)
    _log.info("solve: max equation residual {:.3e}".format(max(residuals.values())))


def _sweep(args) -> None:
    economy = load_economy(args.economy, Calibrator(log_level=args.level))
    spec = SweepSpec.from_dict(read_json(args.spec))
    write_csv(args.output, run_sweep(economy, spec, PolicySolver(log_level=args.level)))


def _linearize(args) -> None:
    economy = load_economy(args.economy, Calibrator(log_level=args.level))
    flow = ShockFlow.parse(args.flow)
    factors = FactorDerivatives.zero(economy.dims.n_countries) if args.partial else None
    response = linearize(economy, flow, factors=factors, solver=PolicySolver(log_level=args.level))
    write_csv(args.output, response.to_frame(economy))


def _run_root(run: str) -> Path:
    root = Path(run)
    return root if root.name == LAYOUT else root / LAYOUT


def _report(args) -> None:
    root = _run_root(args.run)
    if (root / INVALID_MARKER).exists():
        raise CbamGeError("report: the run under {} is marked invalid: {}"
                          .format(root, (root / INVALID_MARKER).read_text(encoding='utf-8').strip()))
    tables = {path.stem: read_csv(path) for path in sorted((root / 'tables').glob('*.csv'))}
    if not tables:
        raise CbamGeError("report: no tables found under {}".format(root))
    if args.format == 'csv':
        frame = pd.concat([t.assign(table=name) for name, t in tables.items()], ignore_index=True)
        text = frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    else:
        payload = {name: json.loads(t.to_json(orient='records', double_precision=15)) for name, t in tables.items()}
        text = json.dumps(payload, indent=2, sort_keys=True) + '\n'
    if args.output:
        Path(args.output).write_text(text, encoding='utf-8')
    else:
        sys.stdout.write(text)


def _suite(args) -> None:
    status, root = run_scenario_suite(args.manifest, args.output, threads=args.threads, log_level=args.level)
    if status:
        raise CbamGeError("the run under {} is marked invalid: {}"
                          .format(root, (root / INVALID_MARKER).read_text(encoding='utf-8').strip()))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cbam_ge', description='Carbon border adjustments in a multi-country, '
                                                                 'multi-sector general equilibrium model.')
    parser.add_argument('--log-level', choices=sorted(LOG_LEVELS), default='info')
    commands = parser.add_subparsers(dest='command', required=True)

    command = commands.add_parser('fixture', help='write a shipped fixture as calibration inputs')
    command.add_argument('--kind', choices=sorted(FIXTURES), default='four')
    command.add_argument('--seed', type=int, default=0)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_fixture)

    command = commands.add_parser('calibrate', help='calibrate an economy from a manifest')
    command.add_argument('--manifest', required=True)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_calibrate)

    command = commands.add_parser('baseline', help='build a policy-adjusted baseline')
    command.add_argument('--economy', required=True)
    command.add_argument('--shock', required=True)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_baseline)

    command = commands.add_parser('solve', help='solve a policy scenario')
    command.add_argument('--economy', required=True)
    command.add_argument('--scenario', required=True)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_solve)

    command = commands.add_parser('sweep', help='solve a scenario across alternative economies')
    command.add_argument('--economy', required=True)
    command.add_argument('--spec', required=True)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_sweep)

    command = commands.add_parser('linearize', help='first-order responses to a wedge on one flow')
    command.add_argument('--economy', required=True)
    command.add_argument('--flow', required=True, help='l,s,q,r: origin country, destination country, origin '
                                                       'sector, destination sector')
    command.add_argument('--partial', action='store_true', help='hold wages and carbon prices fixed')
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_linearize)

    command = commands.add_parser('report', help='collect the tables of a suite run')
    command.add_argument('--run', required=True)
    command.add_argument('--format', choices=['csv', 'json'], default='csv')
    command.add_argument('-o', '--output')
    command.set_defaults(action=_report)

    command = commands.add_parser('suite', help='run calibrate, baseline, scenarios, metrics and reports')
    command.add_argument('--manifest', required=True)
    command.add_argument('--threads', type=int)
    command.add_argument('-o', '--output', required=True)
    command.set_defaults(action=_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.level = LOG_LEVELS[args.log_level]
    with StreamHandler(sys.stdout, level=args.level).applicationbound():
        try:
            args.action(args)
        except (CbamGeError, ValueError, OSError) as e:
            _log.error("{}: {}".format(args.command, e))
            return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
