// SPDX-License-Identifier: Apache-2.0
//
// cfbeam: joint analog beam selection and digital precoding for cell-free mm-wave networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFBEAM_CONFIG_HPP
#define CFBEAM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfbeam/rfadapt.hpp"

namespace cfbeam {

struct CellSpec {
  std::string name;
  SearchSettings search;
  RfPolicy rf;
};

struct ExperimentSpec {
  NetworkConfig network;
  std::vector<CellSpec> cells;
  int mc_runs = 500;
  std::int64_t first_run = 0;

  // Throws ConfigConflict / InvalidGeometry before any run starts.
  void validate() const;
};

/// Settings conflicts that only show once the network is known (B >= K under
/// BCC, RF chain counts, enumeration budgets).
void check_cell(const NetworkConfig& net, const CellSpec& cell);

/// JSON document with a "network" object (NetworkConfig field names; ranges
/// as a number or [lo, hi]) and an optional "experiment" object
/// {mc_runs, first_run, cells}. A cell is a label string such as
/// "linear-II-rate" or an object {label | algorithm, metric, bcc, init,
/// iter, precoder, mmse_fallback, budget, rf, name}; rf is "full", "smart", "smart-db" or
/// {"naive": m}. Unknown keys are rejected with ParseError.
ExperimentSpec parse_experiment(std::string_view text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

NetworkConfig parse_network(std::string_view json_object);
CellSpec parse_cell(std::string_view json_value);
RfPolicy parse_rf_policy(std::string_view s);

std::string network_to_json(const NetworkConfig& cfg);

}  // namespace cfbeam

#endif  // CFBEAM_CONFIG_HPP
