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

from cbam_ge.fixtures import four_country_fixture
from cbam_ge.functional import no_policy
from cbam_ge.model import leontief_inverse, share_matrices, spectral_radius, steady_state_check
from cbam_ge.solver import PolicySolver


def main():
    economy = four_country_fixture()

    print("Steady-state accounting")
    report = steady_state_check(economy)
    for name, residual in sorted(report.residuals.items()):
        print("  {:<20} {:.2e}".format(name, residual))

    print("Network")
    shares = share_matrices(economy)
    print("  spectral radius of Omega: {:.4f}".format(spectral_radius(shares.omega)))
    print("  largest Leontief multiplier: {:.4f}".format(leontief_inverse(shares).sum(axis=0).max()))

    print("Solving with no policy")
    solution = PolicySolver().solve(economy, no_policy())
    print("  iterations: {}, wage hats: {}".format(solution.iterations, solution.w_hat.round(12).tolist()))


if __name__ == "__main__":
    StreamHandler(sys.stdout).push_application()
    main()
