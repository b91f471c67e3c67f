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

#include "cfbeam/rfadapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfbeam {

std::string to_string(const RfPolicy& p) {
  switch (p.mode) {
    case RfMode::full: return "full";
    case RfMode::naive: return "naive(" + std::to_string(p.naive_chains) + ")";
    case RfMode::smart: return p.domain == ThresholdDomain::linear ? "smart" : "smart-db";
  }
  return "?";
}

std::vector<bool> smart_mask(std::span<const double> path_loss_dB, ThresholdDomain domain) {
  const auto K = path_loss_dB.size();
  std::vector<bool> mask(K, false);
  if (K == 0) return mask;
  std::vector<double> v(path_loss_dB.begin(), path_loss_dB.end());
  if (domain == ThresholdDomain::linear)
    for (auto& x : v) x = std::pow(10.0, x / 10.0);

  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(K);
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(K);
  const double tau = mean - std::pow(var, 0.25);

  bool any = false;
  for (std::size_t k = 0; k < K; ++k)
    if (v[k] < tau) mask[k] = any = true;
  if (!any) mask[static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin())] = true;
  return mask;
}

std::vector<bool> naive_mask(std::span<const double> path_loss_dB, int m) {
  const auto K = path_loss_dB.size();
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return path_loss_dB[a] < path_loss_dB[b]; });
  std::vector<bool> mask(K, false);
  const auto n = std::min(K, static_cast<std::size_t>(std::max(m, 0)));
  for (std::size_t i = 0; i < n; ++i) mask[order[i]] = true;
  return mask;
}

ActiveMask policy_mask(const ChannelRealization& r, const RfPolicy& policy, int rf_chains) {
  const int L = r.L(), K = r.K();
  if (policy.mode == RfMode::full && rf_chains < K)
    throw ConfigConflict("serving every user needs M_rf >= K");
  if (policy.mode == RfMode::naive && (policy.naive_chains < 1 || policy.naive_chains > rf_chains))
    throw ConfigConflict("naive policy needs 1 <= m <= M_rf");

  ActiveMask mask = ActiveMask::Constant(L, K, true);
  if (policy.mode == RfMode::full) return mask;
  std::vector<double> pl(static_cast<std::size_t>(K));
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) pl[static_cast<std::size_t>(k)] = r.link_loss_dB(k, l);
    auto row = policy.mode == RfMode::naive ? naive_mask(pl, policy.naive_chains) : smart_mask(pl, policy.domain);
    if (std::count(row.begin(), row.end(), true) > rf_chains) {
      // keep the strongest users that fit the available chains
      auto capped = naive_mask(pl, rf_chains);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = row[k] && capped[k];
    }
    for (int k = 0; k < K; ++k) mask(l, k) = row[static_cast<std::size_t>(k)];
  }
  return mask;
}

double chain_saving(const ActiveMask& mask) {
  if (mask.size() == 0) return 0.0;
  return 1.0 - static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

PolicyOutcome apply_policy(const ChannelRealization& r, const Codebook& cb, double p_T_W, int rf_chains,
                           const RfPolicy& policy, const SearchSettings& settings) {
  PolicyOutcome out;
  out.mask = policy_mask(r, policy, rf_chains);
  out.full = run_search(SearchInput{r, cb, p_T_W, {}}, settings);
  if (policy.mode == RfMode::full) {
    out.reduced = out.full;
    return out;
  }
  out.reduced = run_search(SearchInput{r, cb, p_T_W, out.mask}, settings);
  out.saving = chain_saving(out.mask);
  const double full = out.full.report.sum_rate;
  out.loss = full > 0.0 ? 1.0 - out.reduced.report.sum_rate / full : 0.0;
  return out;
}

}  // namespace cfbeam
