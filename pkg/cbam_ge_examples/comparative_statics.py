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

import numpy as np

from cbam_ge.fixtures import four_country_fixture
from cbam_ge.linearization import FactorDerivatives, ShockFlow, linearize


def main():
    economy = four_country_fixture()
    # metals from the dirty exporter into ETS-area metals
    flow = ShockFlow(origin_country=3, dest_country=1, origin_sector=1, dest_sector=1)

    print("Partial equilibrium (wages and carbon prices fixed)")
    partial = linearize(economy, flow, factors=FactorDerivatives.zero(economy.dims.n_countries))
    print("  dlog EEI: total {:.4f}, direct {:.4f}".format(partial.dlogEEI, partial.dlogEEI_direct))

    print("General equilibrium")
    general = linearize(economy, flow)
    print("  dlog wages: {}".format(np.round(general.factors.dlogw, 6).tolist()))
    print("  dlog carbon prices: {}".format(np.round(general.factors.dlogt, 6).tolist()))
    print("  dlog EEI: total {:.4f}, direct {:.4f}".format(general.dlogEEI, general.dlogEEI_direct))
    print("  dCBAM: {:.3e}".format(general.dCBAM))
    print("  first-order EEI effect of a CBAM on the flow: {:.3e}".format(general.cbam_effect(general.dlogEEI)))


if __name__ == "__main__":
    main()
