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

#include "cfbeam/precode.hpp"

#include <cmath>

namespace cfbeam {

namespace {

// Digital precoder for an n x n effective channel with the fallback rule.
CMatrix digital_precoder(const CMatrix& H, const PrecodeOptions& opts, int K, double noise_W, bool& fallback) {
  fallback = false;
  if (opts.kind == PrecoderKind::mmse) return mmse_precoder(H, opts.p_T_W, K, noise_W);
  CMatrix V;
  if (try_zf_precoder(H, V)) return V;
  if (!opts.mmse_fallback) throw SingularEffectiveChannel("ZF design failed: effective channel is rank deficient");
  fallback = true;
  return mmse_precoder(H, opts.p_T_W, K, noise_W);
}

std::vector<int> served_users(const IndexRow& row) {
  std::vector<int> users;
  for (int k = 0; k < row.size(); ++k)
    if (row(k) >= 0) users.push_back(k);
  return users;
}

void fill_rates(MetricsReport& rep, const CMatrix& S, double rho, double noise_W) {
  const auto K = S.rows();
  rep.sinr.resize(K);
  rep.rate.resize(K);
  rep.sum_rate = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < K; ++j)
      if (j != k) interference += std::norm(S(k, j));
    const double sinr = rho * std::norm(S(k, k)) / (rho * interference + noise_W);
    rep.sinr(k) = sinr;
    rep.rate(k) = std::log2(1.0 + sinr);
    rep.sum_rate += rep.rate(k);
  }
}

}  // namespace

HybridPrecoder design_hybrid(const ChannelRealization& r, const Codebook& cb, int l, const IndexRow& row,
                             const PrecodeOptions& opts) {
  HybridPrecoder ap;
  const int K = r.K();
  ap.users = served_users(row);
  ap.active.assign(static_cast<std::size_t>(K), false);
  ap.composed = CMatrix::Zero(r.M(), K);
  const auto n = static_cast<Eigen::Index>(ap.users.size());
  ap.U.resize(r.M(), n);
  for (Eigen::Index t = 0; t < n; ++t) ap.U.col(t) = cb.beam(row(ap.users[t]));
  if (n == 0) return ap;

  const CMatrix H_all = effective_channel(r, ap.U, l);
  CMatrix H(n, n);
  for (Eigen::Index t = 0; t < n; ++t) H.row(t) = H_all.row(ap.users[t]);
  ap.V = digital_precoder(H, opts, K, r.noise_W(), ap.fallback);

  const auto cols = normalize_hybrid(ap.U, ap.V);
  for (Eigen::Index t = 0; t < n; ++t) {
    ap.composed.col(ap.users[t]) = cols.composed.col(t);
    ap.active[static_cast<std::size_t>(ap.users[t])] = cols.active[static_cast<std::size_t>(t)];
  }
  return ap;
}

MetricsReport sinr_and_rates(const ChannelRealization& r, std::span<const HybridPrecoder> aps, double p_T_W) {
  const int K = r.K(), L = r.L();
  const double rho = p_T_W / K;
  MetricsReport rep;
  rep.dl = Eigen::MatrixXd::Zero(L, K);
  rep.active = ActiveMask::Constant(L, K, false);
  CMatrix S = CMatrix::Zero(K, K);
  for (int l = 0; l < L; ++l) {
    const auto& ap = aps[static_cast<std::size_t>(l)];
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) S(k, j) += r.h(k, l).dot(ap.composed.col(j));
      rep.dl(l, k) = dl_power(r.h(k, l), ap.composed.col(k), p_T_W, K);
      rep.active(l, k) = ap.active[static_cast<std::size_t>(k)];
    }
    if (ap.fallback) ++rep.fallback_count;
  }
  rep.dl_sum = rep.dl.sum();
  fill_rates(rep, S, rho, r.noise_W());
  return rep;
}

NetworkEvaluator::NetworkEvaluator(const ChannelRealization& r, const Codebook& cb, const PrecodeOptions& opts)
    : L_(r.L()), K_(r.K()), B_(cb.size()), opts_(opts), rho_(opts.p_T_W / r.K()), noise_W_(r.noise_W()) {
  if (cb.antennas() != r.M()) throw InvalidGeometry("codebook antenna count does not match the channel");
  proj_.reserve(static_cast<std::size_t>(L_));
  for (int l = 0; l < L_; ++l) {
    CMatrix P(K_, B_);
    for (int k = 0; k < K_; ++k) P.row(k).noalias() = r.h(k, l).adjoint() * cb.beams;
    proj_.push_back(std::move(P));
  }
  gram_ = cb.beams.adjoint() * cb.beams;
  idx_ = IndexMatrix::Constant(L_, K_, -1);
  aps_.assign(static_cast<std::size_t>(L_), ApDesign{CMatrix::Zero(K_, K_), std::vector<bool>(K_, false), false});
}

NetworkEvaluator::ApDesign NetworkEvaluator::design(int l, const IndexRow& row) const {
  ApDesign d{CMatrix::Zero(K_, K_), std::vector<bool>(static_cast<std::size_t>(K_), false), false};
  const auto users = served_users(row);
  const auto n = static_cast<Eigen::Index>(users.size());
  if (n == 0) return d;
  const auto& P = proj_[static_cast<std::size_t>(l)];

  CMatrix H_all(K_, n), H(n, n), G(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int b = row(users[t]);
    if (b >= B_) throw InvalidAssignment("beam index out of range");
    H_all.col(t) = P.col(b);
    for (Eigen::Index s = 0; s < n; ++s) G(s, t) = gram_(row(users[s]), b);
  }
  for (Eigen::Index t = 0; t < n; ++t) H.row(t) = H_all.row(users[t]);

  const CMatrix V = digital_precoder(H, opts_, K_, noise_W_, d.fallback);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double norm2 = (V.col(t).adjoint() * G * V.col(t)).value().real();
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) continue;
    d.gains.col(users[t]).noalias() = (H_all * V.col(t)) / std::sqrt(norm2);
    d.active[static_cast<std::size_t>(users[t])] = true;
  }
  return d;
}

void NetworkEvaluator::assign(const IndexMatrix& idx) {
  if (idx.rows() != L_ || idx.cols() != K_) throw InvalidAssignment("assignment shape must be L x K");
  for (int l = 0; l < L_; ++l) {
    const IndexRow row = idx.row(l);
    set_ap(l, row, design(l, row));
  }
}

void NetworkEvaluator::set_ap(int l, const IndexRow& row, ApDesign d) {
  idx_.row(l) = row;
  aps_[static_cast<std::size_t>(l)] = std::move(d);
}

CMatrix NetworkEvaluator::summed_gains(int replace_l, const ApDesign* candidate) const {
  CMatrix S = CMatrix::Zero(K_, K_);
  for (int l = 0; l < L_; ++l) S += (l == replace_l ? candidate->gains : aps_[static_cast<std::size_t>(l)].gains);
  return S;
}

double NetworkEvaluator::rate_metric(const CMatrix& S) const {
  double sum = 0.0;
  for (int k = 0; k < K_; ++k) {
    double interference = 0.0;
    for (int j = 0; j < K_; ++j)
      if (j != k) interference += std::norm(S(k, j));
    sum += std::log2(1.0 + rho_ * std::norm(S(k, k)) / (rho_ * interference + noise_W_));
  }
  return sum;
}

double NetworkEvaluator::metric(Metric m) const { return metric_impl(-1, nullptr, m); }

double NetworkEvaluator::metric_with(int l, const ApDesign& candidate, Metric m) const {
  return metric_impl(l, &candidate, m);
}

double NetworkEvaluator::metric_impl(int replace_l, const ApDesign* candidate, Metric m) const {
  if (m == Metric::rate) return rate_metric(summed_gains(replace_l, candidate));
  double dl = 0.0;
  for (int l = 0; l < L_; ++l) {
    const auto& g = (l == replace_l ? candidate->gains : aps_[static_cast<std::size_t>(l)].gains);
    for (int k = 0; k < K_; ++k) dl += rho_ * std::norm(g(k, k));
  }
  return dl;
}

double NetworkEvaluator::analog_dl_sum(const IndexMatrix& idx) const {
  double dl = 0.0;
  for (int l = 0; l < L_; ++l)
    for (int k = 0; k < K_; ++k)
      if (idx(l, k) >= 0) dl += rho_ * std::norm(projection(k, l, idx(l, k)));
  return dl;
}

MetricsReport NetworkEvaluator::report() const {
  MetricsReport rep;
  rep.dl = Eigen::MatrixXd::Zero(L_, K_);
  rep.active = ActiveMask::Constant(L_, K_, false);
  for (int l = 0; l < L_; ++l) {
    const auto& ap = aps_[static_cast<std::size_t>(l)];
    for (int k = 0; k < K_; ++k) {
      rep.dl(l, k) = rho_ * std::norm(ap.gains(k, k));
      rep.active(l, k) = ap.active[static_cast<std::size_t>(k)];
    }
    if (ap.fallback) ++rep.fallback_count;
  }
  rep.dl_sum = rep.dl.sum();
  fill_rates(rep, summed_gains(-1, nullptr), rho_, noise_W_);
  return rep;
}

}  // namespace cfbeam
