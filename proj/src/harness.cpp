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

#include "cfbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace cfbeam {

namespace {

int served_links(const IndexMatrix& idx) { return static_cast<int>((idx.array() >= 0).count()); }

RunRecord record_of(const std::string& cell, std::int64_t run, const SearchResult& res) {
  RunRecord rec;
  rec.cell = cell;
  rec.run_index = run;
  rec.sum_rate = res.report.sum_rate;
  rec.dl_sum = res.report.dl_sum;
  rec.evaluation_count = res.report.evaluation_count;
  rec.fallback_count = res.report.fallback_count;
  rec.wall_time_s = res.report.wall_time_s;
  rec.active_chains = served_links(res.assignment);
  rec.full_sum_rate = rec.sum_rate;
  rec.rates.assign(res.report.rate.data(), res.report.rate.data() + res.report.rate.size());
  rec.assignment = res.assignment;
  return rec;
}

std::vector<RunRecord> run_one(const ExperimentSpec& spec, const Codebook& cb, std::int64_t run) {
  const auto& net = spec.network;
  const ChannelRealization r = draw_realization(net, run);
  std::vector<RunRecord> out;
  out.reserve(spec.cells.size());
  for (const auto& cell : spec.cells) {
    const auto s = seeded(cell.search, net, run);
    if (cell.rf.mode == RfMode::full) {
      out.push_back(record_of(cell.name, run, run_search(SearchInput{r, cb, net.p_T_W(), {}}, s)));
      continue;
    }
    const auto pol = apply_policy(r, cb, net.p_T_W(), net.rf_chains(), cell.rf, s);
    auto rec = record_of(cell.name, run, pol.reduced);
    rec.full_sum_rate = pol.full.report.sum_rate;
    out.push_back(std::move(rec));
  }
  return out;
}

std::string name_lk(const char* prefix, int l, int k) {
  return std::string(prefix) + "_" + std::to_string(l + 1) + "_" + std::to_string(k + 1);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(std::string_view field, const char* what) {
  const auto t = trim(field);
  Int v{};
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ParseError(std::string("bad ") + what + " '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("CFBEAM_WORKERS")) {
    int n = 0;
    const std::string_view v(env);
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec == std::errc() && p == v.data() + v.size() && n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SearchSettings seeded(const SearchSettings& s, const NetworkConfig& net, std::int64_t run_index) {
  SearchSettings out = s;
  out.seed = net.master_seed;
  out.stream = static_cast<std::uint64_t>(run_index);
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int workers) {
  spec.validate();
  const Codebook cb = make_codebook(spec.network);
  const auto n = static_cast<std::size_t>(spec.mc_runs);
  std::vector<std::vector<RunRecord>> per_run(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const auto run = spec.first_run + static_cast<std::int64_t>(i);
      try {
        per_run[i] = run_one(spec, cb, run);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::make_exception_ptr(Error("run " + std::to_string(run) + ": " + e.what()));
        next = n;
      }
    }
  };

  const int w = std::clamp(workers > 0 ? workers : worker_count(), 1, static_cast<int>(n));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult res;
  for (auto& v : per_run)
    for (auto& rec : v) res.runs.push_back(std::move(rec));
  res.summary = summarize(res.runs, spec.cells);
  return res;
}

std::vector<CellSummary> summarize(const std::vector<RunRecord>& runs, const std::vector<CellSpec>& cells) {
  std::vector<CellSummary> out;
  for (const auto& cell : cells) {
    CellSummary s;
    s.cell = cell.name;
    double sum = 0.0, sum_sq = 0.0, full = 0.0, saving = 0.0;
    for (const auto& r : runs) {
      if (r.cell != cell.name) continue;
      ++s.runs;
      sum += r.sum_rate;
      sum_sq += r.sum_rate * r.sum_rate;
      full += r.full_sum_rate;
      s.mean_evaluations += static_cast<double>(r.evaluation_count);
      s.mean_wall_time_s += r.wall_time_s;
      if (r.fallback_count > 0) ++s.fallback_runs;
      if (s.mean_rates.size() < r.rates.size()) s.mean_rates.resize(r.rates.size(), 0.0);
      for (std::size_t k = 0; k < r.rates.size(); ++k) s.mean_rates[k] += r.rates[k];
      const auto links = static_cast<double>(r.assignment.size());
      if (links > 0) saving += 1.0 - r.active_chains / links;
    }
    if (s.runs > 0) {
      const double n = s.runs;
      s.mean_sum_rate = sum / n;
      if (s.runs > 1) {
        const double var = std::max(0.0, (sum_sq - n * s.mean_sum_rate * s.mean_sum_rate) / (n - 1.0));
        s.ci95 = 1.96 * std::sqrt(var / n);
      }
      for (auto& m : s.mean_rates) m /= n;
      s.mean_evaluations /= n;
      s.mean_wall_time_s /= n;
      s.saving = saving / n;
      s.loss = full > 0.0 ? 1.0 - sum / full : 0.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs, int K) {
  os << "cell,run_index,sum_rate,dl_sum,evaluation_count,fallback_count,wall_time_s,active_chains,full_sum_rate";
  for (int k = 0; k < K; ++k) os << ",rate_" << k + 1;
  os << '\n';
  for (const auto& r : runs) {
    os << r.cell << ',' << r.run_index << ',' << format_double(r.sum_rate) << ',' << format_double(r.dl_sum) << ','
       << r.evaluation_count << ',' << r.fallback_count << ',' << format_double(r.wall_time_s) << ','
       << r.active_chains << ',' << format_double(r.full_sum_rate);
    for (int k = 0; k < K; ++k)
      os << ',' << format_double(k < static_cast<int>(r.rates.size()) ? r.rates[static_cast<std::size_t>(k)] : 0.0);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<CellSummary>& summary, int K) {
  os << "cell,runs,mean_sum_rate,ci95,mean_evaluations,mean_wall_time_s,fallback_runs,saving,loss";
  for (int k = 0; k < K; ++k) os << ",mean_rate_" << k + 1;
  os << '\n';
  for (const auto& s : summary) {
    os << s.cell << ',' << s.runs << ',' << format_double(s.mean_sum_rate) << ',' << format_double(s.ci95) << ','
       << format_double(s.mean_evaluations) << ',' << format_double(s.mean_wall_time_s) << ',' << s.fallback_runs
       << ',' << format_double(s.saving) << ',' << format_double(s.loss);
    for (int k = 0; k < K; ++k)
      os << ','
         << format_double(k < static_cast<int>(s.mean_rates.size()) ? s.mean_rates[static_cast<std::size_t>(k)] : 0.0);
    os << '\n';
  }
}

std::vector<std::string> dataset_header(int L, int K, bool gains) {
  std::vector<std::string> h{"run_index"};
  for (const char* prefix : {"pl", "aod", "gain", "label"}) {
    if (std::string_view(prefix) == "gain" && !gains) continue;
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) h.push_back(name_lk(prefix, l, k));
  }
  h.emplace_back("sum_rate");
  return h;
}

void export_dataset(const NetworkConfig& net, const DatasetOptions& opts, std::ostream& csv, std::ostream* dump) {
  net.validate();
  check_cell(net, CellSpec{"teacher", opts.teacher, RfPolicy::full()});
  if (opts.n_rows < 1) throw ConfigConflict("dataset needs at least one row");
  const int L = net.L, K = net.K;
  const Codebook cb = make_codebook(net);

  const auto header = dataset_header(L, K, opts.gains);
  for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
  csv << '\n';
  if (dump) write_dump_header(*dump, DumpHeader::from(net));

  for (int row = 0; row < opts.n_rows; ++row) {
    const auto run = opts.first_run + row;
    const ChannelRealization r = draw_realization(net, run);
    SearchResult res;
    try {
      res = run_search(SearchInput{r, cb, net.p_T_W(), {}}, seeded(opts.teacher, net, run));
    } catch (const std::exception& e) {
      throw Error("dataset row " + std::to_string(row) + " (run " + std::to_string(run) + "): " + e.what());
    }
    csv << run;
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) csv << ',' << format_double(r.link_loss_dB(k, l));
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) csv << ',' << format_double(r.path(k, l, r.strongest_path(k, l)).theta_rad);
    if (opts.gains)
      for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k) csv << ',' << format_double(std::abs(r.path(k, l, r.strongest_path(k, l)).beta));
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) csv << ',' << res.assignment(l, k);
    csv << ',' << format_double(res.report.sum_rate) << '\n';
    if (dump) write_dump_records(*dump, r);
  }
}

ScoreRecord score_assignment(const ChannelRealization& r, const Codebook& cb, double p_T_W, const IndexMatrix& idx,
                             PrecoderKind precoder) {
  const int L = r.L(), K = r.K(), B = cb.size();
  if (idx.rows() != L || idx.cols() != K) throw InvalidAssignment("assignment shape does not match the channel");
  if (cb.antennas() != r.M()) throw InvalidGeometry("codebook antenna count does not match the channel");
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      if (idx(l, k) < 0 || idx(l, k) >= B)
        throw InvalidAssignment("beam index " + std::to_string(idx(l, k)) + " at (" + std::to_string(l) + ", " +
                                std::to_string(k) + ") outside [0, " + std::to_string(B) + ")");

  const PrecodeOptions opts{precoder, true, p_T_W};
  std::vector<HybridPrecoder> aps;
  aps.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) aps.push_back(design_hybrid(r, cb, l, idx.row(l), opts));
  const auto rep = sinr_and_rates(r, aps, p_T_W);

  ScoreRecord s;
  s.run_index = r.run_index();
  s.sum_rate = rep.sum_rate;
  s.rates.assign(rep.rate.data(), rep.rate.data() + rep.rate.size());
  s.conflict_warning = count_bcc_conflicts(idx) > 0;
  s.fallback_count = rep.fallback_count;
  return s;
}

std::string score_to_json(const ScoreRecord& s) {
  nlohmann::json j = {{"run_index", s.run_index},
                      {"sum_rate", s.sum_rate},
                      {"rates", s.rates},
                      {"conflict_warning", s.conflict_warning},
                      {"fallback_count", s.fallback_count}};
  return j.dump();
}

std::vector<AssignmentRow> read_assignments(std::istream& is, int L, int K) {
  std::vector<AssignmentRow> rows;
  std::string line;
  std::vector<int> label_col;  // CSV column of label (l, k), l-major
  int run_col = -1;
  bool csv = false, header_seen = false;
  std::size_t line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (t.find(',') != std::string::npos || t.rfind("run_index", 0) == 0) {
        csv = true;
        const auto cols = split(t, ',');
        std::map<std::string, int> pos;
        for (std::size_t c = 0; c < cols.size(); ++c) pos[trim(cols[c])] = static_cast<int>(c);
        if (!pos.contains("run_index")) throw ParseError("assignment CSV has no run_index column");
        run_col = pos["run_index"];
        for (int l = 0; l < L; ++l)
          for (int k = 0; k < K; ++k) {
            const auto it = pos.find(name_lk("label", l, k));
            if (it == pos.end()) throw ParseError("assignment CSV lacks column " + name_lk("label", l, k));
            label_col.push_back(it->second);
          }
        continue;
      }
    }
    AssignmentRow row;
    row.idx.resize(L, K);
    const auto where = " on line " + std::to_string(line_no);
    if (csv) {
      const auto cols = split(t, ',');
      auto field = [&](int c) -> const std::string& {
        if (c >= static_cast<int>(cols.size())) throw ParseError("short row" + where);
        return cols[static_cast<std::size_t>(c)];
      };
      row.run_index = parse_int<std::int64_t>(field(run_col), "run_index");
      for (int i = 0; i < L * K; ++i)
        row.idx(i / K, i % K) = parse_int<int>(field(label_col[static_cast<std::size_t>(i)]), "beam index");
    } else {
      std::istringstream ss(t);
      std::vector<std::string> tok;
      for (std::string w; ss >> w;) tok.push_back(w);
      if (tok.size() != static_cast<std::size_t>(L * K + 1))
        throw ParseError("expected run_index and " + std::to_string(L * K) + " beam indices" + where);
      row.run_index = parse_int<std::int64_t>(tok[0], "run_index");
      for (int i = 0; i < L * K; ++i) row.idx(i / K, i % K) = parse_int<int>(tok[static_cast<std::size_t>(i + 1)], "beam index");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScoreRecord> score_dump(const ChannelDump& dump, const std::vector<AssignmentRow>& rows,
                                    PrecoderKind precoder) {
  const auto& h = dump.header;
  const Codebook cb{dft_matrix<double>(h.M, h.B)};
  std::map<std::int64_t, const ChannelRealization*> by_run;
  for (const auto& r : dump.runs) by_run[r.run_index()] = &r;
  std::vector<ScoreRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto it = by_run.find(row.run_index);
    if (it == by_run.end()) throw InvalidAssignment("no channel records for run " + std::to_string(row.run_index));
    out.push_back(score_assignment(*it->second, cb, h.p_T_W, row.idx, precoder));
  }
  return out;
}

}  // namespace cfbeam
