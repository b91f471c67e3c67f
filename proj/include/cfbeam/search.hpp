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

#ifndef CFBEAM_SEARCH_HPP
#define CFBEAM_SEARCH_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cfbeam/precode.hpp"

namespace cfbeam {

enum class Algorithm { exhaustive, disjoint_linear_dl, linear, semilinear, linear_iis, semicentralized };

// full: conflict-free initialisation and pruning during the search.
// init_only: conflict-free initialisation, no pruning.
// off: unconstrained initialisation and search.
enum class BccMode { full, init_only, off };

struct SearchSettings {
  Algorithm algorithm = Algorithm::linear;
  Metric metric = Metric::rate;
  BccMode bcc = BccMode::full;
  int n_init = 1;
  int n_iter = 1;
  PrecoderKind precoder = PrecoderKind::zf;
  bool mmse_fallback = true;
  std::uint64_t seed = 0;    // initialisation draws use (seed, stream, init index)
  std::uint64_t stream = 0;
  std::uint64_t budget = 1'000'000;  // cap on exhaustive and semilinear enumeration

  // Throws ConfigConflict for combinations the algorithm family does not define.
  void validate() const;
};

std::string to_string(Algorithm a);
std::string to_string(BccMode m);
std::string to_string(Metric m);
std::string to_string(PrecoderKind p);
Algorithm parse_algorithm(std::string_view s);
BccMode parse_bcc(std::string_view s);
Metric parse_metric(std::string_view s);
PrecoderKind parse_precoder(std::string_view s);

/// Display name such as "linear-IIS-rate" or "disjoint-linear-DL".
std::string algorithm_label(const SearchSettings& s);
/// Inverse of algorithm_label (case-insensitive); other fields keep defaults.
SearchSettings settings_from_label(std::string_view label);
std::vector<std::string> algorithm_labels();

/// Per-user sets of beams still assignable under beam conflict control.
class CodebookLog {
 public:
  CodebookLog() = default;
  CodebookLog(int K, int B);

  void remove(int k, int b);
  bool contains(int k, int b) const { return allowed_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]; }
  int count(int k) const { return counts_[static_cast<std::size_t>(k)]; }
  std::vector<int> candidates(int k) const;

 private:
  std::vector<std::vector<bool>> allowed_;
  std::vector<int> counts_;
};

/// Ordered set of K-tuples of beam indices scored by the semilinear search.
class CombinationSet {
 public:
  using Tuple = std::vector<int>;

  /// All K-tuples with pairwise distinct entries, lexicographic order.
  static CombinationSet permutations(int B, int K);
  /// All B^K tuples, lexicographic order.
  static CombinationSet product(int B, int K);

  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  const Tuple& operator[](std::size_t c) const { return tuples_[c]; }
  const std::vector<Tuple>& tuples() const { return tuples_; }

  /// Drops every tuple that hands a committed user's beam to another user.
  void prune(const Tuple& committed);

 private:
  std::vector<Tuple> tuples_;
};

/// Number of beams used by more than one user anywhere in the network
/// (negative entries ignored). Zero means the assignment is conflict-free.
int count_bcc_conflicts(const IndexMatrix& idx);

/// Expected candidate-evaluation count of one sweep without the
/// initialisation/iteration/selection multipliers.
std::uint64_t complexity_formula(Algorithm a, int L, int K, int B, BccMode bcc);
/// Multiplies a base count by n_init * n_iter (and L for the selection loop).
std::uint64_t complexity_with_features(std::uint64_t base, int n_init, int n_iter, bool selection, int L);

struct SearchInput {
  const ChannelRealization& channel;
  const Codebook& codebook;
  double p_T_W;
  ActiveMask active;  // L x K served links; empty means every link

  bool served(int l, int k) const { return active.size() == 0 || active(l, k); }
  bool all_served() const { return active.size() == 0 || active.all(); }
};

struct SearchResult {
  IndexMatrix assignment;  // L x K, -1 on links without an RF chain
  MetricsReport report;
};

/// Mutable state of one search run: current assignment with its cached AP
/// designs, codebook logs and the combination set.
struct SearchState {
  SearchState(const SearchInput& in, const SearchSettings& s);

  /// Loads an initial assignment and rebuilds logs and combinations. Under
  /// full BCC the initial beams are recorded in the logs.
  void reset(const IndexMatrix& init);
  NetworkEvaluator::ApDesign design(int l, const IndexRow& row);

  const SearchInput& input;
  SearchSettings settings;
  NetworkEvaluator eval;
  CodebookLog logs;
  CombinationSet combos;
  CombinationSet initial_combos;
  std::uint64_t evaluations = 0;
  std::uint64_t fallbacks = 0;
};

/// Initialisation `init_index` of the run; conflict-free when bcc != off
/// (one distinct beam per user, reused at every AP).
IndexMatrix random_initialization(const SearchInput& in, const SearchSettings& s, int init_index);

void linear_search_pass(SearchState& st, int l);
void semilinear_search_pass(SearchState& st, int l);

SearchResult exhaustive_search(const SearchInput& in, const SearchSettings& s);
SearchResult run_ii(const SearchInput& in, const SearchSettings& s);
SearchResult run_iis(const SearchInput& in, const SearchSettings& s);
SearchResult disjoint_linear_dl(const SearchInput& in, const SearchSettings& s);

/// Dispatches on s.algorithm.
SearchResult run_search(const SearchInput& in, const SearchSettings& s);

}  // namespace cfbeam

#endif  // CFBEAM_SEARCH_HPP
