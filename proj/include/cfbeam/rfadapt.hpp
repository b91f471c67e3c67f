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

#ifndef CFBEAM_RFADAPT_HPP
#define CFBEAM_RFADAPT_HPP

#include <span>
#include <vector>

#include "cfbeam/search.hpp"

namespace cfbeam {

enum class RfMode { full, naive, smart };

// Domain in which the smart threshold statistics are taken.
enum class ThresholdDomain { linear, db };

struct RfPolicy {
  RfMode mode = RfMode::full;
  int naive_chains = 0;  // users served per AP in naive mode
  ThresholdDomain domain = ThresholdDomain::linear;

  static RfPolicy full() { return {}; }
  static RfPolicy naive(int m) { return {RfMode::naive, m, ThresholdDomain::linear}; }
  static RfPolicy smart(ThresholdDomain d = ThresholdDomain::linear) { return {RfMode::smart, 0, d}; }
};

std::string to_string(const RfPolicy& p);

/// Serves users whose path loss is strictly below mean - var^(1/4)
/// (population variance); falls back to the single lowest-loss user.
std::vector<bool> smart_mask(std::span<const double> path_loss_dB, ThresholdDomain domain = ThresholdDomain::linear);

/// Serves the m lowest-loss users (lower index on ties).
std::vector<bool> naive_mask(std::span<const double> path_loss_dB, int m);

/// L x K served links. `rf_chains` caps the users per AP. Throws
/// ConfigConflict when the policy needs more chains than are available.
ActiveMask policy_mask(const ChannelRealization& r, const RfPolicy& policy, int rf_chains);

/// 1 - active / (L K).
double chain_saving(const ActiveMask& mask);

struct PolicyOutcome {
  SearchResult full;
  SearchResult reduced;
  ActiveMask mask;
  double saving = 0.0;
  double loss = 0.0;  // 1 - reduced / full sum-rate
};

/// Runs the search with every chain on and again with the policy mask.
PolicyOutcome apply_policy(const ChannelRealization& r, const Codebook& cb, double p_T_W, int rf_chains,
                           const RfPolicy& policy, const SearchSettings& settings);

}  // namespace cfbeam

#endif  // CFBEAM_RFADAPT_HPP
