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

#ifndef CFBEAM_HARNESS_HPP
#define CFBEAM_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfbeam/channel_io.hpp"
#include "cfbeam/config.hpp"

namespace cfbeam {

struct RunRecord {
  std::string cell;
  std::int64_t run_index = 0;
  double sum_rate = 0.0;
  double dl_sum = 0.0;
  std::uint64_t evaluation_count = 0;
  std::uint64_t fallback_count = 0;
  double wall_time_s = 0.0;
  int active_chains = 0;
  double full_sum_rate = 0.0;  // same cell with every chain on
  std::vector<double> rates;
  IndexMatrix assignment;
};

struct CellSummary {
  std::string cell;
  int runs = 0;
  double mean_sum_rate = 0.0;
  double ci95 = 0.0;  // half-width, normal approximation
  std::vector<double> mean_rates;
  double mean_evaluations = 0.0;
  double mean_wall_time_s = 0.0;
  std::uint64_t fallback_runs = 0;
  double saving = 0.0;  // mean fraction of chains switched off
  double loss = 0.0;    // 1 - mean(sum_rate) / mean(full_sum_rate)
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // sorted by run_index, then cell order
  std::vector<CellSummary> summary;
};

/// Worker threads for Monte Carlo runs: CFBEAM_WORKERS if set, else the
/// hardware concurrency.
int worker_count();

/// Search seed/stream for a run: the master seed and the run index, so every
/// cell of a run starts from the same initialisations.
SearchSettings seeded(const SearchSettings& s, const NetworkConfig& net, std::int64_t run_index);

/// Runs every cell on one shared realization per run index.
ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 0);

std::vector<CellSummary> summarize(const std::vector<RunRecord>& runs, const std::vector<CellSpec>& cells);

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs, int K);
void write_summary_csv(std::ostream& os, const std::vector<CellSummary>& summary, int K);

/// Column names of the dataset CSV: run_index, pl_l_k, aod_l_k, [gain_l_k,]
/// label_l_k (1-based, l-major) and the teacher's sum_rate.
std::vector<std::string> dataset_header(int L, int K, bool gains);

struct DatasetOptions {
  SearchSettings teacher;
  int n_rows = 1;
  std::int64_t first_run = 0;
  bool gains = false;
};

/// Writes n_rows dataset rows; if `dump` is set, also the channel records of
/// every row. Teacher failures are rethrown with the row index.
void export_dataset(const NetworkConfig& net, const DatasetOptions& opts, std::ostream& csv, std::ostream* dump = nullptr);

struct ScoreRecord {
  std::int64_t run_index = 0;
  double sum_rate = 0.0;
  std::vector<double> rates;
  bool conflict_warning = false;
  std::uint64_t fallback_count = 0;
};

/// Builds every AP's hybrid precoder from explicit M-dimensional products,
/// with MMSE fallback on singular ZF designs. Out-of-range indices throw
/// InvalidAssignment; beam conflicts only set the warning.
ScoreRecord score_assignment(const ChannelRealization& r, const Codebook& cb, double p_T_W, const IndexMatrix& idx,
                             PrecoderKind precoder = PrecoderKind::zf);

std::string score_to_json(const ScoreRecord& s);

struct AssignmentRow {
  std::int64_t run_index = 0;
  IndexMatrix idx;
};

/// Reads either whitespace records "run_index b_1_1 b_1_2 ... b_L_K" or a
/// dataset CSV with run_index and label_l_k columns.
std::vector<AssignmentRow> read_assignments(std::istream& is, int L, int K);

/// Scores each assignment against the dump run with the same run_index.
std::vector<ScoreRecord> score_dump(const ChannelDump& dump, const std::vector<AssignmentRow>& rows,
                                    PrecoderKind precoder = PrecoderKind::zf);

}  // namespace cfbeam

#endif  // CFBEAM_HARNESS_HPP
