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

#include "cfbeam/scenario.hpp"

#include <limits>
#include <string>
#include <utility>

namespace cfbeam {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void check_range(const Range& r, const char* name, bool allow_zero) {
  const bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi && (allow_zero ? r.lo >= 0.0 : r.lo > 0.0);
  if (!ok) throw InvalidGeometry(std::string("invalid range for ") + name);
}

double uniform_in(std::mt19937_64& rng, const Range& r) {
  if (r.is_fixed()) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

double NetworkConfig::noise_W() const { return noise_power_W(noise_psd_dBm_Hz, bandwidth_Hz); }

void NetworkConfig::validate() const {
  if (L < 1 || K < 1 || M < 1) throw InvalidGeometry("L, K and M must be >= 1");
  if (P < 1) throw InvalidGeometry("P must be >= 1");
  if (codebook_size() < 1) throw InvalidGeometry("B must be >= 1");
  if (rf_chains() < 1 || rf_chains() > M) throw InvalidGeometry("RF chains must satisfy M >= M_rf >= 1");
  if (!positive_finite(bandwidth_Hz) || !positive_finite(f_c_Hz) || !positive_finite(c_mps))
    throw InvalidGeometry("bandwidth, carrier and speed of light must be positive");
  if (!std::isfinite(p_T_dBm) || !std::isfinite(noise_psd_dBm_Hz)) throw InvalidGeometry("powers must be finite");
  if (!positive_finite(antenna_spacing_wavelengths)) throw InvalidGeometry("antenna spacing must be positive");
  check_range(n_pl, "n_pl", false);
  check_range(shadow_sigma_dB, "shadow_sigma_dB", true);
  check_range(dist_m, "dist_m", false);
  if (k_factor_dB && std::isnan(*k_factor_dB)) throw InvalidGeometry("k_factor_dB is NaN");
}

double path_loss_dB(double f_c_Hz, double c_mps, double n_pl, double dist_m, double shadow_dB) {
  if (!(dist_m > 0.0) || !(f_c_Hz > 0.0) || !(c_mps > 0.0))
    throw InvalidGeometry("path_loss_dB: distance, frequency and speed must be positive");
  return 20.0 * std::log10(4.0 * std::numbers::pi * f_c_Hz / c_mps) + 10.0 * n_pl * std::log10(dist_m) + shadow_dB;
}

double noise_power_W(double noise_psd_dBm_Hz, double bandwidth_Hz) {
  if (!(bandwidth_Hz > 0.0)) throw InvalidGeometry("noise_power_W: bandwidth must be positive");
  return std::pow(10.0, (noise_psd_dBm_Hz + 10.0 * std::log10(bandwidth_Hz) - 30.0) / 10.0);
}

Codebook dft_codebook(int M) { return Codebook{dft_matrix<double>(M, M)}; }

Codebook make_codebook(const NetworkConfig& cfg) { return Codebook{dft_matrix<double>(cfg.M, cfg.codebook_size())}; }

CVector assemble_channel(const PathRecord* paths, int P, int M, double spacing_wavelengths) {
  CVector h = CVector::Zero(M);
  const double outer = std::sqrt(static_cast<double>(M) / P);
  for (int p = 0; p < P; ++p) {
    const double alpha_lin = std::pow(10.0, paths[p].alpha_dB / 10.0);
    const Complex coeff = outer * paths[p].beta / std::sqrt(alpha_lin);
    h.noalias() += coeff * array_response<double>(paths[p].theta_rad, M, spacing_wavelengths);
  }
  return h;
}

ChannelRealization::ChannelRealization(int L, int K, int M, int P, double spacing_wavelengths,
                                       std::vector<PathRecord> paths, double noise_W, std::int64_t run_index)
    : L_(L), K_(K), M_(M), P_(P), spacing_(spacing_wavelengths), noise_W_(noise_W), run_index_(run_index),
      paths_(std::move(paths)) {
  if (L < 1 || K < 1 || M < 1 || P < 1) throw InvalidGeometry("realization dimensions must be >= 1");
  if (paths_.size() != static_cast<std::size_t>(L) * K * P)
    throw InvalidGeometry("realization: path record count does not match L*K*P");
  h_.reserve(static_cast<std::size_t>(L) * K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) h_.push_back(assemble_channel(&path(k, l, 0), P, M, spacing_));
}

int ChannelRealization::strongest_path(int k, int l) const {
  int best = 0;
  double best_gain = -1.0;
  for (int p = 0; p < P_; ++p) {
    const auto& rec = path(k, l, p);
    const double g = std::norm(rec.beta) / std::pow(10.0, rec.alpha_dB / 10.0);
    if (g > best_gain) {
      best_gain = g;
      best = p;
    }
  }
  return best;
}

std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t run_index, std::uint64_t tag,
                          std::uint64_t sub) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(run_index),   static_cast<std::uint32_t>(run_index >> 32),
                    static_cast<std::uint32_t>(tag),         static_cast<std::uint32_t>(sub),
                    static_cast<std::uint32_t>(sub >> 32)};
  return std::mt19937_64(seq);
}

ChannelRealization draw_realization(const NetworkConfig& cfg, std::int64_t run_index) {
  cfg.validate();
  const int L = cfg.L, K = cfg.K, P = cfg.P;
  auto rng = substream(cfg.master_seed, static_cast<std::uint64_t>(run_index),
                       static_cast<std::uint64_t>(StreamTag::channel));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> aod(-std::numbers::pi, std::numbers::pi);

  const std::size_t n_paths = static_cast<std::size_t>(L) * K * P;
  const std::size_t n_links = static_cast<std::size_t>(L) * K;
  std::vector<PathRecord> paths(n_paths);

  // Per-path power weights: equal split, or LoS/NLoS split by the K-factor.
  std::vector<double> weight(P, 1.0);
  if (cfg.k_factor_dB && P > 1) {
    if (std::isinf(*cfg.k_factor_dB) && *cfg.k_factor_dB > 0) {
      weight.assign(P, 0.0);
      weight[0] = P;
    } else {
      const double kappa = std::pow(10.0, *cfg.k_factor_dB / 10.0);
      weight[0] = P * kappa / (kappa + 1.0);
      for (int p = 1; p < P; ++p) weight[p] = P / ((kappa + 1.0) * (P - 1));
    }
  }

  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const double re = gauss(rng) * inv_sqrt2;
    const double im = gauss(rng) * inv_sqrt2;
    paths[i].beta = std::sqrt(weight[i % P]) * Complex(re, im);
  }
  for (std::size_t i = 0; i < n_paths; ++i) paths[i].theta_rad = aod(rng);

  std::vector<double> dist(n_links), expo(n_links), sigma(n_links);
  for (auto& d : dist) d = uniform_in(rng, cfg.dist_m);
  for (auto& n : expo) n = uniform_in(rng, cfg.n_pl);
  for (auto& s : sigma) s = uniform_in(rng, cfg.shadow_sigma_dB);
  for (std::size_t link = 0; link < n_links; ++link) {
    const double shadow = gauss(rng) * sigma[link];
    const double alpha = path_loss_dB(cfg.f_c_Hz, cfg.c_mps, expo[link], dist[link], shadow);
    for (int p = 0; p < P; ++p) paths[link * P + p].alpha_dB = alpha;
  }

  return ChannelRealization(L, K, cfg.M, P, cfg.antenna_spacing_wavelengths, std::move(paths), cfg.noise_W(),
                            run_index);
}

}  // namespace cfbeam
