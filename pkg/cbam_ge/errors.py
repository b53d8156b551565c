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

from typing import Dict, Optional


class CbamGeError(Exception):
    """ Base class of every domain error raised by cbam_ge. """


class ModelIllPosedError(CbamGeError, ValueError):
    """ The world economy violates a model invariant, or its input-output network cannot be inverted. """


class CalibrationError(CbamGeError, ValueError):
    """ The raw data cannot be mapped onto a valid world economy. """


class InvalidStateError(CbamGeError, ValueError):
    """ A quantity was requested from a state that does not support it, e.g. an unconverged solution. """


class SolverConvergenceError(CbamGeError, RuntimeError):
    """ The outer fixed point did not converge.

    :var residuals: the max-abs residual per equation at the last iterate.
    :var history_length: the number of outer iterations that were run.
    """

    def __init__(self, message: str, residuals: Optional[Dict[str, float]] = None, history_length: int = 0):
        super().__init__(message)
        self.residuals = dict(residuals or {})
        self.history_length = history_length


class NegativePriceError(CbamGeError, RuntimeError):
    """ A price iterate became non-positive, which indicates invalid labor or emission shares. """


class StageError(CbamGeError, RuntimeError):
    """ A stage of the scenario suite failed.

    :var stage: the name of the failed stage.
    :var residuals: solver residuals when the failure came from a solve.
    """

    def __init__(self, stage: str, message: str, residuals: Optional[Dict[str, float]] = None):
        super().__init__("{}: {}".format(stage, message))
        self.stage = stage
        self.residuals = dict(residuals or {})
