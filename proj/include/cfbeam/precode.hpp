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

#ifndef CFBEAM_PRECODE_HPP
#define CFBEAM_PRECODE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cfbeam/scenario.hpp"

namespace cfbeam {

enum class PrecoderKind { zf, mmse };
enum class Metric { rate, dl };

// Largest eigenvalue ratio of H H^H accepted before the zero-forcing inverse.
inline constexpr double kConditionLimit = 1e12;

/// True when the Hermitian Gram matrix is PSD to within 1e-12 of its trace and
/// its condition number does not exceed kConditionLimit.
template <typename Derived>
bool gram_invertible(const Eigen::MatrixBase<Derived>& gram) {
  using Scalar = typename Derived::Scalar;
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (gram.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Plain> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  const auto trace = ev.sum();
  if (ev(0) < -1e-12 * trace) return false;
  const auto hi = ev(ev.size() - 1), lo = ev(0);
  if (!(hi > 0) || !(lo > 0)) return false;
  return hi / lo <= kConditionLimit;
}

/// Row k is h_kl^H U_l.
template <typename Derived>
CMatrix effective_channel(const ChannelRealization& r, const Eigen::MatrixBase<Derived>& U_l, int l) {
  CMatrix H(r.K(), U_l.cols());
  for (int k = 0; k < r.K(); ++k) H.row(k).noalias() = r.h(k, l).adjoint() * U_l;
  return H;
}

/// Writes H^H (H H^H)^-1 into V; returns false if H H^H is singular.
template <typename Derived, typename Out>
bool try_zf_precoder(const Eigen::MatrixBase<Derived>& H, Eigen::PlainObjectBase<Out>& V) {
  using Plain = typename Derived::PlainObject;
  const Plain gram = H * H.adjoint();
  if (!gram_invertible(gram)) return false;
  V = H.adjoint() * gram.llt().solve(Plain::Identity(H.rows(), H.rows()));
  return true;
}

/// Zero-forcing precoder, H V = I. Throws SingularEffectiveChannel.
template <typename Derived>
typename Derived::PlainObject zf_precoder(const Eigen::MatrixBase<Derived>& H) {
  typename Derived::PlainObject V;
  if (!try_zf_precoder(H, V)) throw SingularEffectiveChannel("zf_precoder: H H^H is rank deficient or ill-conditioned");
  return V;
}

/// Regularised inverse H^H ((p_T/K) H H^H + noise I)^-1.
template <typename Derived>
typename Derived::PlainObject mmse_precoder(const Eigen::MatrixBase<Derived>& H, double p_T_W, int K, double noise_W) {
  using Plain = typename Derived::PlainObject;
  const Plain gram = H * H.adjoint();
  if (!(noise_W > 0.0) && !gram_invertible(gram))
    throw SingularEffectiveChannel("mmse_precoder: no noise regularisation and singular H H^H");
  Plain A = (p_T_W / K) * gram;
  A.diagonal().array() += noise_W;
  return H.adjoint() * A.ldlt().solve(Plain::Identity(H.rows(), H.rows()));
}

struct HybridColumns {
  CMatrix composed;          // M x n, unit-norm columns U V / ||U v||
  std::vector<bool> active;  // false where U v was zero; that column is zeroed
};

/// Per-user rescaling of the composed hybrid columns to unit norm.
template <typename DerivedU, typename DerivedV>
HybridColumns normalize_hybrid(const Eigen::MatrixBase<DerivedU>& U, const Eigen::MatrixBase<DerivedV>& V) {
  HybridColumns out{U * V, std::vector<bool>(static_cast<std::size_t>(V.cols()), true)};
  for (Eigen::Index j = 0; j < out.composed.cols(); ++j) {
    const double n = out.composed.col(j).norm();
    if (n > 0.0 && std::isfinite(n)) {
      out.composed.col(j) /= n;
    } else {
      out.composed.col(j).setZero();
      out.active[static_cast<std::size_t>(j)] = false;
    }
  }
  return out;
}

/// Direct-link received power (p_T/K) |h^H u|^2.
template <typename DerivedH, typename DerivedU>
double dl_power(const Eigen::MatrixBase<DerivedH>& h, const Eigen::MatrixBase<DerivedU>& u, double p_T_W, int K) {
  return p_T_W / K * std::norm(h.dot(u));
}

struct MetricsReport {
  Eigen::VectorXd sinr;  // linear, per user
  Eigen::VectorXd rate;  // bits/s/Hz, per user
  double sum_rate = 0.0;
  Eigen::MatrixXd dl;    // L x K direct-link powers in W
  double dl_sum = 0.0;
  ActiveMask active;     // L x K links that carry a stream
  std::uint64_t evaluation_count = 0;
  std::uint64_t fallback_count = 0;  // AP designs that fell back to MMSE
  double wall_time_s = 0.0;
};

/// Analog and digital precoders of one AP. Columns of U and V follow `users`,
/// the served users in increasing order; `composed` is M x K with zero
/// columns for users the AP does not serve.
struct HybridPrecoder {
  CMatrix U;
  CMatrix V;
  CMatrix composed;
  std::vector<int> users;
  std::vector<bool> active;  // per user k
  bool fallback = false;
};

struct PrecodeOptions {
  PrecoderKind kind = PrecoderKind::zf;
  bool mmse_fallback = false;
  double p_T_W = 1.0;  // noise power always comes from the realization
};

/// Builds the hybrid precoder of AP l for the beam row (negative = no chain),
/// using explicit M-dimensional products.
HybridPrecoder design_hybrid(const ChannelRealization& r, const Codebook& cb, int l, const IndexRow& row,
                             const PrecodeOptions& opts);

/// SINR, rates and direct-link powers with coherent summation across APs.
MetricsReport sinr_and_rates(const ChannelRealization& r, std::span<const HybridPrecoder> aps, double p_T_W);

/// Fast evaluator for beam search. Precomputes h_kl^H u_b for every beam and
/// the codebook Gram matrix so an AP redesign costs O(K^3) independent of M.
/// Per-AP results are cached; network metrics always sum APs in index order,
/// so a candidate's score equals the score after committing it, bit for bit.
class NetworkEvaluator {
 public:
  struct ApDesign {
    CMatrix gains;  // K x K, gains(k, j) = h_kl^H u~_jl
    std::vector<bool> active;
    bool fallback = false;
  };

  NetworkEvaluator(const ChannelRealization& r, const Codebook& cb, const PrecodeOptions& opts);

  int L() const { return L_; }
  int K() const { return K_; }
  int B() const { return B_; }
  const PrecodeOptions& options() const { return opts_; }

  Complex projection(int k, int l, int b) const { return proj_[static_cast<std::size_t>(l)](k, b); }

  /// Throws SingularEffectiveChannel when ZF fails and fallback is off.
  ApDesign design(int l, const IndexRow& row) const;

  void assign(const IndexMatrix& idx);
  void set_ap(int l, const IndexRow& row, ApDesign d);
  const IndexMatrix& assignment() const { return idx_; }

  double metric(Metric m) const;
  double metric_with(int l, const ApDesign& candidate, Metric m) const;

  /// Sum of direct-link powers of the raw analog beams, no digital precoder.
  double analog_dl_sum(const IndexMatrix& idx) const;

  MetricsReport report() const;

 private:
  double metric_impl(int replace_l, const ApDesign* candidate, Metric m) const;
  double rate_metric(const CMatrix& S) const;
  CMatrix summed_gains(int replace_l, const ApDesign* candidate) const;

  int L_, K_, B_;
  PrecodeOptions opts_;
  double rho_;  // p_T / K
  double noise_W_;
  std::vector<CMatrix> proj_;  // per AP: K x B
  CMatrix gram_;               // B x B
  IndexMatrix idx_;
  std::vector<ApDesign> aps_;
};

}  // namespace cfbeam

#endif  // CFBEAM_PRECODE_HPP
