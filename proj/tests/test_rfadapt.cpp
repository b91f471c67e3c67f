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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfbeam/rfadapt.hpp"
#include "support.hpp"

using namespace cfbeam;
using cfbeam::testing::Gen;

namespace {

std::vector<bool> oracle_mask(const std::vector<double>& pl, bool linear) {
  std::vector<long double> x;
  for (double v : pl) x.push_back(linear ? std::pow(10.0L, static_cast<long double>(v) / 10) : v);
  const long double n = static_cast<long double>(x.size());
  long double mean = 0, var = 0;
  for (auto v : x) mean += v / n;
  for (auto v : x) var += (v - mean) * (v - mean) / n;
  const long double tau = mean - std::pow(var, 0.25L);
  std::vector<bool> out;
  for (auto v : x) out.push_back(v < tau);
  if (std::none_of(out.begin(), out.end(), [](bool b) { return b; }))
    out[static_cast<std::size_t>(std::min_element(pl.begin(), pl.end()) - pl.begin())] = true;
  return out;
}

SearchSettings linear_rate() {
  SearchSettings s;
  s.algorithm = Algorithm::linear;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("smart threshold worked example in dB") {
  const std::vector<double> pl{90, 100, 110, 120};
  const auto mask = smart_mask(pl, ThresholdDomain::db);
  CHECK(mask == std::vector<bool>{true, true, false, false});
  CHECK(mask == oracle_mask(pl, false));
  const double tau = 105.0 - std::pow(125.0, 0.25);
  CHECK(tau == doctest::Approx(101.656).epsilon(1e-4));
}

TEST_CASE("smart threshold in the linear domain") {
  // linear losses 1e9..1e12 are dominated by the largest value
  const std::vector<double> pl{90, 100, 110, 120};
  CHECK(smart_mask(pl) == oracle_mask(pl, true));
  Gen g(1);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> x(static_cast<std::size_t>(g.integer(1, 8)));
    for (auto& v : x) v = g.uniform(80.0, 150.0);
    const bool lin = t % 2 == 0;
    const auto mask = smart_mask(x, lin ? ThresholdDomain::linear : ThresholdDomain::db);
    CHECK(mask == oracle_mask(x, lin));
    CHECK(std::count(mask.begin(), mask.end(), true) >= 1);
  }
}

TEST_CASE("smart degenerate cases") {
  const std::vector<double> same{100, 100, 100};
  for (auto d : {ThresholdDomain::linear, ThresholdDomain::db})
    CHECK(smart_mask(same, d) == std::vector<bool>{true, false, false});
  const std::vector<double> one{123.0};
  CHECK(smart_mask(one) == std::vector<bool>{true});
}

TEST_CASE("naive mask keeps the lowest losses") {
  const std::vector<double> pl{110, 90, 100, 90};
  CHECK(naive_mask(pl, 2) == std::vector<bool>{false, true, false, true});
  CHECK(naive_mask(pl, 1) == std::vector<bool>{false, true, false, false});
  CHECK(naive_mask(pl, 4) == std::vector<bool>(4, true));
}

TEST_CASE("policy masks respect the chain budget") {
  NetworkConfig net = cfbeam::testing::small_network(3, 4, 8, 3);
  net.dist_m = {100.0, 200.0};
  const auto r = draw_realization(net, 0);
  CHECK_THROWS_AS(policy_mask(r, RfPolicy::full(), 3), ConfigConflict);
  CHECK_THROWS_AS(policy_mask(r, RfPolicy::naive(0), 4), ConfigConflict);
  CHECK_THROWS_AS(policy_mask(r, RfPolicy::naive(5), 4), ConfigConflict);
  CHECK(policy_mask(r, RfPolicy::full(), 4).all());
  const auto m = policy_mask(r, RfPolicy::naive(2), 4);
  for (int l = 0; l < 3; ++l) CHECK(m.row(l).count() == 2);
  CHECK(chain_saving(m) == 0.5);
  const auto s = policy_mask(r, RfPolicy::smart(), 2);
  for (int l = 0; l < 3; ++l) {
    CHECK(s.row(l).count() >= 1);
    CHECK(s.row(l).count() <= 2);
  }
  CHECK(to_string(RfPolicy::naive(2)) == "naive(2)");
  CHECK(to_string(RfPolicy::smart(ThresholdDomain::db)) == "smart-db");
}

TEST_CASE("policy outcomes") {
  NetworkConfig net = cfbeam::testing::small_network(4, 4, 4, 9);
  net.shadow_sigma_dB = {4.0, 6.0};
  net.dist_m = {100.0, 200.0};
  net.n_pl = {2.0, 4.0};
  const Codebook cb = make_codebook(net);
  for (int run = 0; run < 20; ++run) {
    const auto r = draw_realization(net, run);
    auto s = linear_rate();
    s.stream = static_cast<std::uint64_t>(run);
    const auto full = apply_policy(r, cb, net.p_T_W(), 4, RfPolicy::full(), s);
    CHECK(full.saving == 0.0);
    CHECK(full.loss == 0.0);

    const auto naive = apply_policy(r, cb, net.p_T_W(), 4, RfPolicy::naive(2), s);
    CHECK(naive.saving == 0.5);
    CHECK(naive.full.report.sum_rate == full.full.report.sum_rate);
    for (int l = 0; l < 4; ++l)
      for (int k = 0; k < 4; ++k)
        if (!naive.mask(l, k)) CHECK(naive.reduced.assignment(l, k) == -1);

    const auto all = apply_policy(r, cb, net.p_T_W(), 4, RfPolicy::naive(4), s);
    CHECK(all.reduced.assignment == full.full.assignment);
    CHECK(all.loss == 0.0);

    const auto smart = apply_policy(r, cb, net.p_T_W(), 4, RfPolicy::smart(), s);
    CHECK(smart.saving >= 0.0);
    CHECK(smart.saving < 1.0);
    for (int k = 0; k < 4; ++k)
      if (!smart.mask.col(k).any()) CHECK(smart.reduced.report.rate(k) == 0.0);
  }
}
