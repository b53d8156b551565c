#!/usr/bin/python3

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

import sys

import pandas as pd
from logbook import StreamHandler

from cbam_ge.fixtures import four_country_fixture
from cbam_ge.functional import cbam_grid
from cbam_ge.metrics import summary_tables
from cbam_ge.solver import PolicySolver


def main():
    economy = four_country_fixture()
    solver = PolicySolver()

    solutions = {}
    for scenario in cbam_grid():
        print("Solving {}".format(scenario.name))
        solutions[scenario.name] = solver.solve(economy, scenario)

    with pd.option_context('display.width', 160, 'display.max_columns', 20, 'display.precision', 4):
        for name, table in summary_tables(economy, solutions).items():
            print()
            print(name)
            print(table.to_string(index=False))


if __name__ == "__main__":
    StreamHandler(sys.stdout).push_application()
    main()
