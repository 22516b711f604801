# Copyright 2026 The Authors.
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

"""Fairness-constrained pricing for demand-response aggregation."""

from ._core import (  # noqa: F401
    DomainError,
    Market,
    ModelError,
    Population,
    Report,
    Solution,
    best_response,
    check_perfect_fairness,
    cluster_capacities,
    disparity,
    grid_oracle_profit,
    ols,
    report,
    solve_fair,
    solve_n,
    solve_two,
    sweep_regimes,
    validate_market,
)

__version__ = "0.1.0"
