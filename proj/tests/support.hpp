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

#ifndef CFBEAM_TESTS_SUPPORT_HPP
#define CFBEAM_TESTS_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "cfbeam/precode.hpp"

namespace cfbeam::testing {

// Small hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Complex cgauss() { return {gauss() / std::sqrt(2.0), gauss() / std::sqrt(2.0)}; }

  CMatrix cmatrix(int rows, int cols) {
    CMatrix A(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) A(i, j) = cgauss();
    return A;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Realization from explicit path records, one path per link, indexed [k][l].
inline ChannelRealization single_path(int L, int K, int M, const std::vector<std::vector<PathRecord>>& rec,
                                      double noise_W = 1.0) {
  std::vector<PathRecord> paths;
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) paths.push_back(rec[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
  return ChannelRealization(L, K, M, 1, 0.5, std::move(paths), noise_W);
}

// Direct evaluation of the coherent SINR expression from explicit channel
// vectors and composed precoder columns (per AP: M x K).
inline std::vector<double> oracle_rates(const ChannelRealization& r, const std::vector<CMatrix>& composed,
                                        double p_T_W) {
  const int K = r.K(), L = r.L();
  const long double rho = static_cast<long double>(p_T_W) / K;
  std::vector<double> rates;
  for (int k = 0; k < K; ++k) {
    long double desired = 0, interference = 0;
    for (int j = 0; j < K; ++j) {
      std::complex<long double> acc = 0;
      for (int l = 0; l < L; ++l) {
        const auto& h = r.h(k, l);
        for (int m = 0; m < r.M(); ++m) {
          const auto hc = std::conj(std::complex<long double>(h(m)));
          const auto u = std::complex<long double>(composed[static_cast<std::size_t>(l)](m, j));
          acc += hc * u;
        }
      }
      (j == k ? desired : interference) += std::norm(acc);
    }
    const long double sinr = rho * desired / (rho * interference + static_cast<long double>(r.noise_W()));
    rates.push_back(static_cast<double>(std::log2(1.0L + sinr)));
  }
  return rates;
}

inline NetworkConfig small_network(int L, int K, int M, std::uint64_t seed) {
  NetworkConfig net;
  net.L = L;
  net.K = K;
  net.M = M;
  net.master_seed = seed;
  return net;
}

}  // namespace cfbeam::testing

#endif  // CFBEAM_TESTS_SUPPORT_HPP
