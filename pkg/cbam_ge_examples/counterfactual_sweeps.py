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

from logbook import StreamHandler

from cbam_ge.counterfactuals import SweepAxis, SweepSpec, default_integration_grid, run_sweep
from cbam_ge.fixtures import four_country_fixture
from cbam_ge.solver import PolicySolver


def main():
    economy = four_country_fixture()
    solver = PolicySolver()
    columns = ['value', 'eei_direct_vs_own', 'eei_total_vs_own', 'eei_direct_vs_reference']

    print("Cleaner and dirtier technology")
    sweep = run_sweep(economy, SweepSpec(SweepAxis.carbon_intensity, grid=(0.5, 1.0, 1.5)), solver)
    print(sweep[columns].to_string(index=False))

    print("Trade integration of the ETS area")
    sweep = run_sweep(economy, SweepSpec(SweepAxis.integration, grid=default_integration_grid(5)), solver)
    print(sweep[columns].to_string(index=False))

    print("Intermediate elasticity")
    sweep = run_sweep(economy, SweepSpec(SweepAxis.theta, grid=(2.0, 4.0, 8.0)), solver)
    print(sweep[columns].to_string(index=False))


if __name__ == "__main__":
    StreamHandler(sys.stdout).push_application()
    main()
