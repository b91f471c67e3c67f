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

#ifndef CFBEAM_SCENARIO_HPP
#define CFBEAM_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "cfbeam/types.hpp"

namespace cfbeam {

// Closed interval; lo == hi means the quantity is fixed.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  static Range fixed(double v) { return {v, v}; }
  bool is_fixed() const { return lo == hi; }
};

struct NetworkConfig {
  int L = 3;      // access points
  int K = 2;      // users
  int M = 8;      // antennas per AP
  int M_rf = 0;   // RF chains per AP, 0 selects K
  int B = 0;      // codebook size, 0 selects M
  double p_T_dBm = 43.0;
  double noise_psd_dBm_Hz = -174.0;
  double bandwidth_Hz = 850e6;
  double f_c_Hz = 28e9;
  double c_mps = 3e8;
  Range n_pl = Range::fixed(2.0);
  Range shadow_sigma_dB = Range::fixed(4.0);
  Range dist_m{95.0, 105.0};
  int P = 1;
  std::optional<double> k_factor_dB;
  double antenna_spacing_wavelengths = 0.5;
  std::uint64_t master_seed = 1;

  int rf_chains() const { return M_rf > 0 ? M_rf : K; }
  int codebook_size() const { return B > 0 ? B : M; }
  double p_T_W() const { return std::pow(10.0, (p_T_dBm - 30.0) / 10.0); }
  double noise_W() const;

  // Throws InvalidGeometry on non-physical values.
  void validate() const;
};

/// Free-space reference loss plus distance and shadowing terms, in dB.
double path_loss_dB(double f_c_Hz, double c_mps, double n_pl, double dist_m, double shadow_dB);

/// Thermal noise power over the band, in Watts.
double noise_power_W(double noise_psd_dBm_Hz, double bandwidth_Hz);

/// ULA steering vector with unit L2 norm. Element y (0-based) carries phase
/// 2*pi*y*spacing*sin(theta).
template <typename Real = double>
CVec<Real> array_response(Real theta_rad, int M, Real spacing_wavelengths) {
  if (M < 1) throw InvalidGeometry("array_response: M must be >= 1");
  const Real scale = Real(1) / std::sqrt(Real(M));
  const Real step = Real(2) * std::numbers::pi_v<Real> * spacing_wavelengths * std::sin(theta_rad);
  CVec<Real> a(M);
  for (int y = 0; y < M; ++y) a(y) = std::polar(scale, step * Real(y));
  return a;
}

/// M x B grid of DFT beams, element (x, y) = exp(-j 2 pi x y / B) / sqrt(M).
/// B == M gives the unitary DFT matrix.
template <typename Real = double>
CMat<Real> dft_matrix(int M, int B) {
  if (M < 1 || B < 1) throw InvalidGeometry("dft_matrix: M and B must be >= 1");
  const Real scale = Real(1) / std::sqrt(Real(M));
  CMat<Real> D(M, B);
  for (int y = 0; y < B; ++y) {
    for (int x = 0; x < M; ++x) {
      // exponent reduced mod B
      const auto e = static_cast<long long>(x) * y % B;
      D(x, y) = std::polar(scale, -Real(2) * std::numbers::pi_v<Real> * Real(e) / Real(B));
    }
  }
  return D;
}

struct Codebook {
  CMatrix beams;  // M x B, column b is codeword b

  int size() const { return static_cast<int>(beams.cols()); }
  int antennas() const { return static_cast<int>(beams.rows()); }
  auto beam(int b) const { return beams.col(b); }
};

Codebook dft_codebook(int M);
Codebook make_codebook(const NetworkConfig& cfg);

struct PathRecord {
  Complex beta;
  double theta_rad = 0.0;
  double alpha_dB = 0.0;
};

/// Channels of every (user, AP) link for one Monte Carlo run. Built from the
/// path records so a dump of the records reproduces h bit for bit.
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(int L, int K, int M, int P, double spacing_wavelengths, std::vector<PathRecord> paths,
                     double noise_W, std::int64_t run_index = 0);

  int L() const { return L_; }
  int K() const { return K_; }
  int M() const { return M_; }
  int P() const { return P_; }
  double spacing() const { return spacing_; }
  double noise_W() const { return noise_W_; }
  std::int64_t run_index() const { return run_index_; }

  const PathRecord& path(int k, int l, int p) const { return paths_[(static_cast<std::size_t>(k) * L_ + l) * P_ + p]; }
  const std::vector<PathRecord>& paths() const { return paths_; }
  const CVector& h(int k, int l) const { return h_[static_cast<std::size_t>(k) * L_ + l]; }

  /// Index of the path with the largest |beta|^2 / alpha.
  int strongest_path(int k, int l) const;
  double link_loss_dB(int k, int l) const { return path(k, l, strongest_path(k, l)).alpha_dB; }

 private:
  int L_ = 0, K_ = 0, M_ = 0, P_ = 0;
  double spacing_ = 0.5;
  double noise_W_ = 0.0;
  std::int64_t run_index_ = 0;
  std::vector<PathRecord> paths_;
  std::vector<CVector> h_;
};

/// sqrt(M/P) * sum_p beta_p / sqrt(alpha_p) * a(theta_p)
CVector assemble_channel(const PathRecord* paths, int P, int M, double spacing_wavelengths);

/// Engine for an independent substream of the master seed. `tag` separates
/// consumers that share a run (channel draw, search initialisation, ...) and
/// `sub` indexes draws within one consumer.
std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t run_index, std::uint64_t tag,
                          std::uint64_t sub = 0);

enum class StreamTag : std::uint64_t { channel = 1, search_init = 2 };

/// Deterministic in (master_seed, run_index). Draw order: beta for every
/// (k,l,p), then every theta, then per-link distance, exponent, shadowing
/// sigma (ranges only) and the shadowing sample.
ChannelRealization draw_realization(const NetworkConfig& cfg, std::int64_t run_index);

}  // namespace cfbeam

#endif  // CFBEAM_SCENARIO_HPP
