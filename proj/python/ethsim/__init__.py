# Copyright 2026 The ethsim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the ethsim core.

Operators are complex numpy arrays; outcome clicks are +1 / -1 integers.
"""

from ethsim._core import (
    Algebra,
    DeFinettiModel,
    Frame,
    InadmissibleThresholdError,
    OutsideAlgebraError,
    ZeroProbabilityBranchError,
    admissible_threshold,
    born_probabilities,
    center,
    centralizer,
    collapse,
    commutant,
    conjugate,
    detect_event,
    expect_onto_center,
    expect_onto_centralizer,
    generate_algebra,
    incoherence_defect,
    intersection,
    is_maximal_abelian,
    minimal_projections,
    operator_norm,
    run_cli,
    spectral_decompose,
    unrecorded_update,
)

__all__ = [
    "Algebra",
    "DeFinettiModel",
    "Frame",
    "InadmissibleThresholdError",
    "OutsideAlgebraError",
    "ZeroProbabilityBranchError",
    "admissible_threshold",
    "born_probabilities",
    "center",
    "centralizer",
    "collapse",
    "commutant",
    "conjugate",
    "detect_event",
    "expect_onto_center",
    "expect_onto_centralizer",
    "generate_algebra",
    "incoherence_defect",
    "intersection",
    "is_maximal_abelian",
    "minimal_projections",
    "operator_norm",
    "run_cli",
    "spectral_decompose",
    "unrecorded_update",
]

__version__ = "0.1.0"
