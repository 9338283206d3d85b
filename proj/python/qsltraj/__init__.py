# Copyright 2026 The qsltraj Authors
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

"""Python bindings for the qsltraj simulator."""

import json

from ._qsltraj import (
    ConfigError,
    DomainError,
    Error,
    InvalidStateError,
    SimParams,
    bloch_diffusion,
    bloch_drift,
    bures_angle,
    ensemble_state,
    ensemble_velocity,
    fidelity,
    histogram,
    qsl_fidelity,
    qsl_report,
    qsl_velocity,
    run_cli,
    simulate_trajectory,
)
from ._qsltraj import _run_ensemble_json

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "InvalidStateError",
    "SimParams",
    "bloch_diffusion",
    "bloch_drift",
    "bures_angle",
    "ensemble_state",
    "ensemble_velocity",
    "fidelity",
    "histogram",
    "qsl_fidelity",
    "qsl_report",
    "qsl_velocity",
    "run_cli",
    "run_ensemble",
    "simulate_trajectory",
]


def run_ensemble(params, workers=0, n_bins=60):
    """Run an ensemble; returns the stats.json document plus per-trajectory ``v_c``."""
    return json.loads(_run_ensemble_json(params, workers, n_bins))
