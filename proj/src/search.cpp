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

#include "cfbeam/search.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace cfbeam {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) out = sat_mul(out, base);
  return out;
}

std::uint64_t falling_factorial(int B, int K) {
  std::uint64_t out = 1;
  for (int i = 0; i < K; ++i) out = sat_mul(out, static_cast<std::uint64_t>(B - i));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

PrecodeOptions precode_options(const SearchInput& in, const SearchSettings& s) {
  return PrecodeOptions{s.precoder, s.mmse_fallback, in.p_T_W};
}

void check_input(const SearchInput& in, const SearchSettings& s) {
  s.validate();
  const int L = in.channel.L(), K = in.channel.K(), B = in.codebook.size();
  if (in.codebook.antennas() != in.channel.M()) throw InvalidGeometry("codebook antenna count does not match the channel");
  if (in.active.size() != 0 && (in.active.rows() != L || in.active.cols() != K))
    throw ConfigConflict("active mask must be L x K");
  if (s.bcc != BccMode::full && s.bcc != BccMode::init_only) return;
  if (B < K) throw ConfigConflict("beam conflict control needs B >= K");
}

void finish(SearchResult& res, SearchState& st, const IndexMatrix& best, Clock::time_point t0) {
  st.eval.assign(best);
  res.assignment = best;
  res.report = st.eval.report();
  res.report.evaluation_count = st.evaluations;
  res.report.fallback_count = st.fallbacks;
  res.report.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------- settings

void SearchSettings::validate() const {
  if (n_init < 1 || n_iter < 1) throw ConfigConflict("n_init and n_iter must be >= 1");
  switch (algorithm) {
    case Algorithm::disjoint_linear_dl:
      if (metric != Metric::dl) throw ConfigConflict("the disjoint baseline uses the DL metric");
      if (n_init != 1 || n_iter != 1) throw ConfigConflict("the disjoint baseline runs one initialisation and one pass");
      break;
    case Algorithm::linear_iis:
      if (metric != Metric::rate) throw ConfigConflict("the selection variant uses the rate metric");
      break;
    case Algorithm::exhaustive:
      if (metric != Metric::rate) throw ConfigConflict("the exhaustive oracle uses the rate metric");
      break;
    case Algorithm::semicentralized:
      throw ConfigConflict("semicentralized search is available as a complexity formula only");
    default:
      break;
  }
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::exhaustive: return "exhaustive";
    case Algorithm::disjoint_linear_dl: return "disjoint_linear_dl";
    case Algorithm::linear: return "linear";
    case Algorithm::semilinear: return "semilinear";
    case Algorithm::linear_iis: return "linear_iis";
    case Algorithm::semicentralized: return "semicentralized";
  }
  return "?";
}

std::string to_string(BccMode m) {
  switch (m) {
    case BccMode::full: return "full";
    case BccMode::init_only: return "init_only";
    case BccMode::off: return "off";
  }
  return "?";
}

std::string to_string(Metric m) { return m == Metric::rate ? "rate" : "dl"; }
std::string to_string(PrecoderKind p) { return p == PrecoderKind::zf ? "zf" : "mmse"; }

Algorithm parse_algorithm(std::string_view s) {
  const auto v = lower(s);
  for (auto a : {Algorithm::exhaustive, Algorithm::disjoint_linear_dl, Algorithm::linear, Algorithm::semilinear,
                 Algorithm::linear_iis, Algorithm::semicentralized})
    if (v == to_string(a)) return a;
  throw ConfigConflict("unknown algorithm: " + std::string(s));
}

BccMode parse_bcc(std::string_view s) {
  const auto v = lower(s);
  if (v == "full" || v == "on") return BccMode::full;
  if (v == "init_only" || v == "init-only" || v == "init") return BccMode::init_only;
  if (v == "off" || v == "none") return BccMode::off;
  throw ConfigConflict("unknown BCC mode: " + std::string(s));
}

Metric parse_metric(std::string_view s) {
  const auto v = lower(s);
  if (v == "rate") return Metric::rate;
  if (v == "dl") return Metric::dl;
  throw ConfigConflict("unknown metric: " + std::string(s));
}

PrecoderKind parse_precoder(std::string_view s) {
  const auto v = lower(s);
  if (v == "zf") return PrecoderKind::zf;
  if (v == "mmse") return PrecoderKind::mmse;
  throw ConfigConflict("unknown precoder: " + std::string(s));
}

std::string algorithm_label(const SearchSettings& s) {
  const std::string m = s.metric == Metric::rate ? "rate" : "DL";
  switch (s.algorithm) {
    case Algorithm::exhaustive: return "exhaustive";
    case Algorithm::disjoint_linear_dl: return "disjoint-linear-DL";
    case Algorithm::linear: return "linear-II-" + m;
    case Algorithm::semilinear: return "semilinear-II-" + m;
    case Algorithm::linear_iis: return "linear-IIS-rate";
    case Algorithm::semicentralized: return "semicentralized";
  }
  return "?";
}

std::vector<std::string> algorithm_labels() {
  return {"exhaustive",        "disjoint-linear-DL", "linear-II-rate", "linear-II-DL",
          "semilinear-II-rate", "semilinear-II-DL",  "linear-IIS-rate"};
}

SearchSettings settings_from_label(std::string_view label) {
  const auto v = lower(label);
  SearchSettings s;
  if (v == "exhaustive") {
    s.algorithm = Algorithm::exhaustive;
  } else if (v == "disjoint-linear-dl") {
    s.algorithm = Algorithm::disjoint_linear_dl;
    s.metric = Metric::dl;
  } else if (v == "linear-ii-rate" || v == "linear-ii-dl") {
    s.algorithm = Algorithm::linear;
    s.metric = v.ends_with("dl") ? Metric::dl : Metric::rate;
  } else if (v == "semilinear-ii-rate" || v == "semilinear-ii-dl") {
    s.algorithm = Algorithm::semilinear;
    s.metric = v.ends_with("dl") ? Metric::dl : Metric::rate;
  } else if (v == "linear-iis-rate") {
    s.algorithm = Algorithm::linear_iis;
  } else {
    throw ConfigConflict("unknown algorithm label: " + std::string(label));
  }
  return s;
}

// ---------------------------------------------------------------- logs and combinations

CodebookLog::CodebookLog(int K, int B)
    : allowed_(static_cast<std::size_t>(K), std::vector<bool>(static_cast<std::size_t>(B), true)),
      counts_(static_cast<std::size_t>(K), B) {}

void CodebookLog::remove(int k, int b) {
  auto ref = allowed_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
  if (!ref) return;
  ref = false;
  --counts_[static_cast<std::size_t>(k)];
}

std::vector<int> CodebookLog::candidates(int k) const {
  std::vector<int> out;
  const auto& row = allowed_[static_cast<std::size_t>(k)];
  for (std::size_t b = 0; b < row.size(); ++b)
    if (row[b]) out.push_back(static_cast<int>(b));
  return out;
}

CombinationSet CombinationSet::product(int B, int K) {
  CombinationSet set;
  if (B < 1 || K < 1) return set;
  Tuple t(static_cast<std::size_t>(K), 0);
  while (true) {
    set.tuples_.push_back(t);
    int pos = K - 1;
    while (pos >= 0 && ++t[static_cast<std::size_t>(pos)] == B) t[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return set;
}

CombinationSet CombinationSet::permutations(int B, int K) {
  CombinationSet set;
  if (K > B || K < 1) return set;
  Tuple t(static_cast<std::size_t>(K));
  std::vector<bool> used(static_cast<std::size_t>(B), false);
  // depth-first in lexicographic order
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == K) {
      set.tuples_.push_back(t);
      return;
    }
    for (int b = 0; b < B; ++b) {
      if (used[static_cast<std::size_t>(b)]) continue;
      used[static_cast<std::size_t>(b)] = true;
      t[static_cast<std::size_t>(depth)] = b;
      self(self, depth + 1);
      used[static_cast<std::size_t>(b)] = false;
    }
  };
  rec(rec, 0);
  return set;
}

void CombinationSet::prune(const Tuple& committed) {
  const auto K = committed.size();
  std::erase_if(tuples_, [&](const Tuple& c) {
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t kp = 0; kp < K; ++kp)
        if (k != kp && committed[k] == c[kp]) return true;
    return false;
  });
}

int count_bcc_conflicts(const IndexMatrix& idx) {
  std::unordered_map<int, int> owner;
  std::unordered_set<int> shared;
  for (Eigen::Index l = 0; l < idx.rows(); ++l) {
    for (Eigen::Index k = 0; k < idx.cols(); ++k) {
      const int b = idx(l, k);
      if (b < 0) continue;
      const auto [it, fresh] = owner.try_emplace(b, static_cast<int>(k));
      if (!fresh && it->second != k) shared.insert(b);
    }
  }
  return static_cast<int>(shared.size());
}

// ---------------------------------------------------------------- complexity

std::uint64_t complexity_formula(Algorithm a, int L, int K, int B, BccMode bcc) {
  if (L < 1 || K < 1 || B < 1) throw ConfigConflict("complexity needs L, K, B >= 1");
  const auto uL = static_cast<std::uint64_t>(L), uK = static_cast<std::uint64_t>(K),
             uB = static_cast<std::uint64_t>(B);
  switch (a) {
    case Algorithm::exhaustive:
      return sat_pow(uB, uK * uL);
    case Algorithm::semilinear:
      if (bcc == BccMode::full) {
        if (B < K) throw ConfigConflict("beam conflict control needs B >= K");
        return sat_mul(uL, falling_factorial(B, K));
      }
      return sat_mul(uL, sat_pow(uB, uK));
    case Algorithm::semicentralized:
      return sat_mul(uK, sat_pow(uB, uL));
    case Algorithm::linear:
    case Algorithm::linear_iis:
    case Algorithm::disjoint_linear_dl:
      return sat_mul(sat_mul(uL, uK), uB);
  }
  return 0;
}

std::uint64_t complexity_with_features(std::uint64_t base, int n_init, int n_iter, bool selection, int L) {
  std::uint64_t out = sat_mul(base, static_cast<std::uint64_t>(std::max(n_init, 1)));
  out = sat_mul(out, static_cast<std::uint64_t>(std::max(n_iter, 1)));
  if (selection) out = sat_mul(out, static_cast<std::uint64_t>(std::max(L, 1)));
  return out;
}

// ---------------------------------------------------------------- state

SearchState::SearchState(const SearchInput& in, const SearchSettings& s)
    : input(in), settings(s), eval(in.channel, in.codebook, precode_options(in, s)) {
  if (s.algorithm != Algorithm::semilinear) return;
  const int K = in.channel.K(), B = in.codebook.size();
  const std::uint64_t size = complexity_formula(Algorithm::semilinear, 1, K, B, s.bcc);
  if (size > s.budget) throw OracleBudgetExceeded("semilinear combination set exceeds the budget");
  initial_combos = s.bcc == BccMode::full ? CombinationSet::permutations(B, K) : CombinationSet::product(B, K);
}

void SearchState::reset(const IndexMatrix& init) {
  const int L = eval.L(), K = eval.K(), B = eval.B();
  for (int l = 0; l < L; ++l) {
    const IndexRow row = init.row(l);
    eval.set_ap(l, row, design(l, row));
  }
  logs = CodebookLog(K, B);
  if (settings.bcc == BccMode::full) {
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) {
        const int b = init(l, k);
        if (b < 0) continue;
        for (int kp = 0; kp < K; ++kp)
          if (kp != k) logs.remove(kp, b);
      }
  }
  combos = initial_combos;
}

NetworkEvaluator::ApDesign SearchState::design(int l, const IndexRow& row) {
  auto d = eval.design(l, row);
  if (d.fallback) ++fallbacks;
  return d;
}

IndexMatrix random_initialization(const SearchInput& in, const SearchSettings& s, int init_index) {
  const int L = in.channel.L(), K = in.channel.K(), B = in.codebook.size();
  auto rng = substream(s.seed, s.stream, static_cast<std::uint64_t>(StreamTag::search_init),
                       static_cast<std::uint64_t>(init_index));
  IndexMatrix idx(L, K);
  if (s.bcc == BccMode::off) {
    std::uniform_int_distribution<int> pick(0, B - 1);
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) idx(l, k) = pick(rng);
  } else {
    if (B < K) throw ConfigConflict("beam conflict control needs B >= K");
    std::vector<int> beams(static_cast<std::size_t>(B));
    std::iota(beams.begin(), beams.end(), 0);
    for (int k = 0; k < K; ++k) {
      const int j = std::uniform_int_distribution<int>(k, B - 1)(rng);
      std::swap(beams[static_cast<std::size_t>(k)], beams[static_cast<std::size_t>(j)]);
    }
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) idx(l, k) = beams[static_cast<std::size_t>(k)];
  }
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      if (!in.served(l, k)) idx(l, k) = -1;
  return idx;
}

// ---------------------------------------------------------------- passes

void linear_search_pass(SearchState& st, int l) {
  const bool bcc = st.settings.bcc == BccMode::full;
  const int K = st.eval.K(), B = st.eval.B();
  IndexRow row = st.eval.assignment().row(l);
  std::vector<int> all(static_cast<std::size_t>(B));
  std::iota(all.begin(), all.end(), 0);

  for (int k = 0; k < K; ++k) {
    if (row(k) < 0) continue;
    const auto cands = bcc ? st.logs.candidates(k) : all;
    if (cands.empty()) throw BCCExhausted("codebook log of a user is empty");
    double best = -std::numeric_limits<double>::infinity();
    int best_b = cands.front();
    NetworkEvaluator::ApDesign best_d;
    bool have = false;
    for (int b : cands) {
      row(k) = b;
      auto d = st.design(l, row);
      const double v = st.eval.metric_with(l, d, st.settings.metric);
      ++st.evaluations;
      if (!have || v > best) {
        best = v;
        best_b = b;
        best_d = std::move(d);
        have = true;
      }
    }
    row(k) = best_b;
    st.eval.set_ap(l, row, std::move(best_d));
    if (bcc)
      for (int kp = 0; kp < K; ++kp)
        if (kp != k) st.logs.remove(kp, best_b);
  }
}

void semilinear_search_pass(SearchState& st, int l) {
  if (!st.input.all_served()) throw ConfigConflict("semilinear search needs every link served");
  if (st.combos.empty()) throw BCCExhausted("combination set is empty");
  const int K = st.eval.K();
  IndexRow row(K);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_c = 0;
  NetworkEvaluator::ApDesign best_d;
  bool have = false;
  for (std::size_t c = 0; c < st.combos.size(); ++c) {
    const auto& t = st.combos[c];
    for (int k = 0; k < K; ++k) row(k) = t[static_cast<std::size_t>(k)];
    auto d = st.design(l, row);
    const double v = st.eval.metric_with(l, d, st.settings.metric);
    ++st.evaluations;
    if (!have || v > best) {
      best = v;
      best_c = c;
      best_d = std::move(d);
      have = true;
    }
  }
  const auto committed = st.combos[best_c];
  for (int k = 0; k < K; ++k) row(k) = committed[static_cast<std::size_t>(k)];
  st.eval.set_ap(l, row, std::move(best_d));
  if (st.settings.bcc == BccMode::full) st.combos.prune(committed);
}

// ---------------------------------------------------------------- drivers

SearchResult exhaustive_search(const SearchInput& in, const SearchSettings& s) {
  check_input(in, s);
  if (!in.all_served()) throw ConfigConflict("the exhaustive oracle needs every link served");
  const auto t0 = Clock::now();
  const int L = in.channel.L(), K = in.channel.K(), B = in.codebook.size();
  if (complexity_formula(Algorithm::exhaustive, L, K, B, s.bcc) > s.budget)
    throw OracleBudgetExceeded("B^(K L) exceeds the exhaustive budget");

  SearchState st(in, s);
  const bool bcc = s.bcc == BccMode::full;
  IndexMatrix idx = IndexMatrix::Zero(L, K);
  IndexMatrix best_idx = idx;
  double best = -std::numeric_limits<double>::infinity();
  bool have = false;
  std::vector<bool> designed(static_cast<std::size_t>(L), false);
  const int n = L * K;

  while (true) {
    if (!bcc || count_bcc_conflicts(idx) == 0) {
      for (int l = 0; l < L; ++l) {
        const IndexRow row = idx.row(l);
        if (designed[static_cast<std::size_t>(l)] && st.eval.assignment().row(l) == row) continue;
        st.eval.set_ap(l, row, st.design(l, row));
        designed[static_cast<std::size_t>(l)] = true;
      }
      const double v = st.eval.metric(Metric::rate);
      ++st.evaluations;
      if (!have || v > best) {
        best = v;
        best_idx = idx;
        have = true;
      }
    }
    // odometer, last link fastest: lexicographic over the row-major matrix
    int pos = n - 1;
    while (pos >= 0) {
      int& cell = idx(pos / K, pos % K);
      if (++cell < B) break;
      cell = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  if (!have) throw BCCExhausted("no conflict-free assignment exists");

  SearchResult res;
  finish(res, st, best_idx, t0);
  return res;
}

namespace {

SearchResult sweep_driver(const SearchInput& in, const SearchSettings& s, const std::vector<std::vector<int>>& orders) {
  const auto t0 = Clock::now();
  SearchState st(in, s);
  const bool semi = s.algorithm == Algorithm::semilinear;
  if (semi && !in.all_served()) throw ConfigConflict("semilinear search needs every link served");

  double best = -std::numeric_limits<double>::infinity();
  IndexMatrix best_idx;
  for (int i = 0; i < s.n_init; ++i) {
    const IndexMatrix init = random_initialization(in, s, i);
    for (const auto& order : orders) {
      st.reset(init);
      for (int it = 0; it < s.n_iter; ++it) {
        for (int l : order) semi ? semilinear_search_pass(st, l) : linear_search_pass(st, l);
        const double v = st.eval.metric(s.metric);
        if (v > best || best_idx.size() == 0) {
          best = v;
          best_idx = st.eval.assignment();
        }
      }
    }
  }
  SearchResult res;
  finish(res, st, best_idx, t0);
  return res;
}

std::vector<int> identity_order(int L) {
  std::vector<int> order(static_cast<std::size_t>(L));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

SearchResult run_ii(const SearchInput& in, const SearchSettings& s) {
  check_input(in, s);
  if (s.algorithm != Algorithm::linear && s.algorithm != Algorithm::semilinear)
    throw ConfigConflict("run_ii needs the linear or semilinear pass");
  return sweep_driver(in, s, {identity_order(in.channel.L())});
}

SearchResult run_iis(const SearchInput& in, const SearchSettings& s) {
  check_input(in, s);
  const int L = in.channel.L();
  std::vector<std::vector<int>> orders;
  for (int j = 0; j < L; ++j) {
    auto order = identity_order(L);
    std::rotate(order.begin(), order.begin() + j, order.end());
    orders.push_back(std::move(order));
  }
  SearchSettings pass = s;
  pass.algorithm = Algorithm::linear;
  return sweep_driver(in, pass, orders);
}

SearchResult disjoint_linear_dl(const SearchInput& in, const SearchSettings& s) {
  check_input(in, s);
  const auto t0 = Clock::now();
  const int L = in.channel.L(), K = in.channel.K(), B = in.codebook.size();
  const bool bcc = s.bcc == BccMode::full;
  SearchState st(in, s);
  IndexMatrix idx = random_initialization(in, s, 0);

  // initial beams are not logged
  CodebookLog logs(K, B);

  std::vector<int> all(static_cast<std::size_t>(B));
  std::iota(all.begin(), all.end(), 0);
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      if (idx(l, k) < 0) continue;
      const auto cands = bcc ? logs.candidates(k) : all;
      if (cands.empty()) throw BCCExhausted("codebook log of a user is empty");
      double best = -std::numeric_limits<double>::infinity();
      int best_b = cands.front();
      for (int b : cands) {
        idx(l, k) = b;
        const double v = st.eval.analog_dl_sum(idx);
        ++st.evaluations;
        if (v > best) {
          best = v;
          best_b = b;
        }
      }
      idx(l, k) = best_b;
      if (bcc)
        for (int kp = 0; kp < K; ++kp)
          if (kp != k) logs.remove(kp, best_b);
    }
  }

  for (int l = 0; l < L; ++l) {
    const IndexRow row = idx.row(l);
    st.eval.set_ap(l, row, st.design(l, row));
  }
  SearchResult res;
  finish(res, st, idx, t0);
  return res;
}

SearchResult run_search(const SearchInput& in, const SearchSettings& s) {
  switch (s.algorithm) {
    case Algorithm::exhaustive: return exhaustive_search(in, s);
    case Algorithm::disjoint_linear_dl: return disjoint_linear_dl(in, s);
    case Algorithm::linear:
    case Algorithm::semilinear: return run_ii(in, s);
    case Algorithm::linear_iis: return run_iis(in, s);
    case Algorithm::semicentralized: break;
  }
  throw ConfigConflict("semicentralized search is available as a complexity formula only");
}

}  // namespace cfbeam
