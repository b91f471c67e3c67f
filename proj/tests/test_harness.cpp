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

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cfbeam/harness.hpp"
#include "support.hpp"

using namespace cfbeam;

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) rows.push_back(split_line(line));
  return rows;
}

ExperimentSpec small_spec(int runs) {
  return parse_experiment(R"({
    "network": {"L": 3, "K": 2, "M": 8, "master_seed": 4},
    "experiment": {"mc_runs": )" + std::to_string(runs) + R"(,
      "cells": ["linear-II-rate", {"label": "linear-II-rate", "name": "twin"},
                {"label": "linear-IIS-rate", "init": 2}, "disjoint-linear-DL",
                {"label": "linear-II-rate", "rf": {"naive": 1}}]}})");
}

}  // namespace

TEST_CASE("experiment config parsing") {
  const auto spec = parse_experiment(R"({
    "network": {"L": 4, "K": 4, "M": 4, "dist_m": [100, 200], "n_pl": [2, 4], "shadow_sigma_dB": 5,
                "k_factor_dB": "inf", "P": 2},
    "experiment": {"mc_runs": 7, "first_run": 3,
      "cells": ["semilinear-II-rate",
                {"label": "linear-II-rate", "init": 2, "iter": 3, "bcc": "init_only", "rf": "smart"},
                {"algorithm": "linear", "metric": "dl", "rf": "naive:2", "precoder": "mmse"}]}})");
  CHECK(spec.network.L == 4);
  CHECK(spec.network.dist_m.lo == 100.0);
  CHECK(spec.network.dist_m.hi == 200.0);
  CHECK(spec.network.shadow_sigma_dB.is_fixed());
  CHECK(std::isinf(*spec.network.k_factor_dB));
  CHECK(spec.mc_runs == 7);
  CHECK(spec.first_run == 3);
  REQUIRE(spec.cells.size() == 3);
  CHECK(spec.cells[0].name == "semilinear-II-rate");
  CHECK(spec.cells[1].search.n_init == 2);
  CHECK(spec.cells[1].search.bcc == BccMode::init_only);
  CHECK(spec.cells[1].rf.mode == RfMode::smart);
  CHECK(spec.cells[1].name == "linear-II-rate/i2x3/bcc-init_only/smart");
  CHECK(spec.cells[2].search.metric == Metric::dl);
  CHECK(spec.cells[2].rf.naive_chains == 2);
  CHECK(spec.cells[2].search.precoder == PrecoderKind::mmse);
  CHECK_NOTHROW(spec.validate());

  const auto back = parse_network(network_to_json(spec.network));
  CHECK(back.dist_m.hi == 200.0);
  CHECK(back.n_pl.lo == 2.0);
  CHECK(back.P == 2);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_experiment(R"({"network": {"L": 3, "antennas": 8}})"), ParseError);
  CHECK_THROWS_AS(parse_experiment(R"({"network": {"L": "three"}})"), ParseError);
  CHECK_THROWS_AS(parse_experiment("{not json"), ParseError);
  CHECK_THROWS_AS(parse_cell(R"({"label": "linear-II-rate", "speed": 3})"), ParseError);
  CHECK_THROWS(parse_rf_policy("sometimes"));

  auto spec = parse_experiment(R"({"network": {"L": 2, "K": 4, "M": 8, "B": 3},
    "experiment": {"cells": ["linear-II-rate"]}})");
  CHECK_THROWS_AS(spec.validate(), ConfigConflict);
  spec = parse_experiment(R"({"network": {"L": 2, "K": 2, "M": 8},
    "experiment": {"cells": [{"label": "semilinear-II-rate", "rf": "smart"}]}})");
  CHECK_THROWS_AS(spec.validate(), ConfigConflict);
  spec = parse_experiment(R"({"network": {"L": 2, "K": 2, "M": 8},
    "experiment": {"cells": [{"label": "disjoint-linear-DL", "init": 2}]}})");
  CHECK_THROWS_AS(spec.validate(), ConfigConflict);
  spec = parse_experiment(R"({"network": {"L": 3, "K": 3, "M": 8},
    "experiment": {"cells": ["exhaustive"]}})");
  CHECK_THROWS_AS(spec.validate(), ConfigConflict);
  spec = parse_experiment(R"({"network": {"L": 2, "K": 2, "M": 8, "dist_m": -5},
    "experiment": {"cells": ["linear-II-rate"]}})");
  CHECK_THROWS_AS(spec.validate(), InvalidGeometry);
}

TEST_CASE("channel dump round trip is bit exact") {
  NetworkConfig net = cfbeam::testing::small_network(3, 2, 8, 6);
  net.P = 3;
  net.k_factor_dB = 7.0;
  std::stringstream ss;
  write_dump_header(ss, DumpHeader::from(net));
  std::vector<ChannelRealization> runs;
  for (int run = 0; run < 5; ++run) {
    runs.push_back(draw_realization(net, 10 + run));
    write_dump_records(ss, runs.back());
  }
  const auto dump = read_channel_dump(ss);
  CHECK(dump.header.L == 3);
  CHECK(dump.header.P == 3);
  CHECK(dump.header.noise_W == net.noise_W());
  REQUIRE(dump.runs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(dump.runs[i].run_index() == runs[i].run_index());
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 3; ++l) {
        CHECK(dump.runs[i].h(k, l) == runs[i].h(k, l));
        for (int p = 0; p < 3; ++p) CHECK(dump.runs[i].path(k, l, p).alpha_dB == runs[i].path(k, l, p).alpha_dB);
      }
  }
}

TEST_CASE("malformed dumps are rejected") {
  NetworkConfig net = cfbeam::testing::small_network(2, 2, 4, 6);
  std::stringstream ok;
  write_dump_header(ok, DumpHeader::from(net));
  write_dump_records(ok, draw_realization(net, 0));
  const std::string text = ok.str();

  std::stringstream truncated(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
  CHECK_THROWS_AS(read_channel_dump(truncated), ParseError);
  std::stringstream no_header("0 0 0 0 1 0 0 60\n");
  CHECK_THROWS_AS(read_channel_dump(no_header), ParseError);
  std::string bad = text;
  bad.replace(bad.rfind(' ') + 1, std::string::npos, "oops\n");
  std::stringstream garbled(bad);
  CHECK_THROWS_AS(read_channel_dump(garbled), ParseError);
  CHECK_THROWS(read_channel_dump(std::string("/nonexistent/dump.txt")));
}

TEST_CASE("dataset header layout") {
  const auto h = dataset_header(3, 2, false);
  const std::vector<std::string> expected{
      "run_index", "pl_1_1",    "pl_1_2",    "pl_2_1",    "pl_2_2",    "pl_3_1",    "pl_3_2",
      "aod_1_1",   "aod_1_2",   "aod_2_1",   "aod_2_2",   "aod_3_1",   "aod_3_2",   "label_1_1",
      "label_1_2", "label_2_1", "label_2_2", "label_3_1", "label_3_2", "sum_rate"};
  CHECK(h == expected);
  CHECK(dataset_header(2, 2, true).size() == 1 + 3 * 4 + 4 + 1);
}

TEST_CASE("exported labels score back to the teacher sum-rate") {
  NetworkConfig net = cfbeam::testing::small_network(3, 2, 8, 8);
  DatasetOptions opts;
  opts.teacher = settings_from_label("linear-II-rate");
  opts.teacher.n_init = 2;
  opts.teacher.n_iter = 2;
  opts.n_rows = 40;
  opts.first_run = 5;
  std::stringstream csv, dump;
  export_dataset(net, opts, csv, &dump);

  const auto rows = read_csv(csv.str());
  REQUIRE(rows.size() == 41);
  const auto header = dataset_header(3, 2, false);
  CHECK(rows[0] == header);

  std::stringstream csv_in(csv.str());
  const auto assignments = read_assignments(csv_in, 3, 2);
  REQUIRE(assignments.size() == 40);
  const auto parsed = read_channel_dump(dump);
  const auto scores = score_dump(parsed, assignments);
  REQUIRE(scores.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) {
    const double teacher = std::stod(rows[i + 1].back());
    CHECK(scores[i].run_index == 5 + static_cast<std::int64_t>(i));
    CHECK(std::abs(scores[i].sum_rate - teacher) < 1e-9);
    CHECK_FALSE(scores[i].conflict_warning);
    for (int c = 13; c < 19; ++c) {
      const int b = std::stoi(rows[i + 1][static_cast<std::size_t>(c)]);
      CHECK(b >= 0);
      CHECK(b < 8);
    }
  }

  // the same realizations through a fresh search agree with the dataset
  const auto r = draw_realization(net, 5);
  const auto res = run_search(SearchInput{r, make_codebook(net), net.p_T_W(), {}}, seeded(opts.teacher, net, 5));
  CHECK(res.assignment == assignments[0].idx);
}

TEST_CASE("B equal to K teacher labels repeat across APs") {
  NetworkConfig net = cfbeam::testing::small_network(3, 2, 2, 8);
  DatasetOptions opts;
  opts.teacher = settings_from_label("linear-II-rate");
  opts.n_rows = 10;
  std::stringstream csv;
  export_dataset(net, opts, csv);
  std::stringstream in(csv.str());
  for (const auto& row : read_assignments(in, 3, 2))
    for (int l = 1; l < 3; ++l) CHECK(row.idx.row(l) == row.idx.row(0));
}

TEST_CASE("scoring edge cases") {
  NetworkConfig net = cfbeam::testing::small_network(2, 2, 4, 12);
  const Codebook cb = make_codebook(net);
  const auto r = draw_realization(net, 0);
  IndexMatrix zeros = IndexMatrix::Zero(2, 2);
  const auto s = score_assignment(r, cb, net.p_T_W(), zeros);
  CHECK(s.conflict_warning);
  CHECK(s.fallback_count == 2);
  IndexMatrix bad = zeros;
  bad(1, 1) = 4;
  CHECK_THROWS_AS(score_assignment(r, cb, net.p_T_W(), bad), InvalidAssignment);

  const auto json = nlohmann::json::parse(score_to_json(s));
  CHECK(json.at("conflict_warning").get<bool>());
  CHECK(json.at("rates").size() == 2);
  CHECK(json.at("sum_rate").get<double>() == s.sum_rate);

  std::stringstream plain("# comment\n7 0 1 2 3\n");
  const auto rows = read_assignments(plain, 2, 2);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].run_index == 7);
  CHECK(rows[0].idx(1, 0) == 2);
  std::stringstream short_row("7 0 1 2\n");
  CHECK_THROWS_AS(read_assignments(short_row, 2, 2), ParseError);
  std::stringstream missing("run_index,label_1_1\n0,1\n");
  CHECK_THROWS_AS(read_assignments(missing, 2, 2), ParseError);
}

TEST_CASE("exhaustive labels score at least as high as heuristic labels") {
  NetworkConfig net = cfbeam::testing::small_network(2, 2, 4, 14);
  const Codebook cb = make_codebook(net);
  for (int run = 0; run < 20; ++run) {
    const auto r = draw_realization(net, run);
    const SearchInput in{r, cb, net.p_T_W(), {}};
    const auto ex = run_search(in, settings_from_label("exhaustive"));
    const auto lin = run_search(in, seeded(settings_from_label("linear-II-rate"), net, run));
    CHECK(score_assignment(r, cb, net.p_T_W(), ex.assignment).sum_rate + 1e-9 >=
          score_assignment(r, cb, net.p_T_W(), lin.assignment).sum_rate);
  }
}

TEST_CASE("experiment cells share realizations and are reproducible") {
  const auto spec = small_spec(12);
  const auto a = run_experiment(spec, 1);
  const auto b = run_experiment(spec, 3);
  REQUIRE(a.runs.size() == 12 * 5);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].cell == b.runs[i].cell);
    CHECK(a.runs[i].run_index == b.runs[i].run_index);
    CHECK(a.runs[i].sum_rate == b.runs[i].sum_rate);
    CHECK(a.runs[i].assignment == b.runs[i].assignment);
  }
  for (std::size_t i = 0; i < a.runs.size(); i += 5) {
    CHECK(a.runs[i].run_index == a.runs[i + 4].run_index);
    CHECK(a.runs[i].cell == "linear-II-rate");
    CHECK(a.runs[i + 1].cell == "twin");
    CHECK(a.runs[i].sum_rate == a.runs[i + 1].sum_rate);
    CHECK(a.runs[i + 2].sum_rate >= a.runs[i].sum_rate);
    CHECK(a.runs[i + 4].active_chains == 3);
  }
  REQUIRE(a.summary.size() == 5);
  CHECK(a.summary[0].mean_sum_rate == a.summary[1].mean_sum_rate);
  CHECK(a.summary[4].saving == 0.5);
}

TEST_CASE("summary statistics against a direct computation") {
  const auto spec = small_spec(30);
  const auto res = run_experiment(spec, 2);
  std::vector<double> x;
  for (const auto& r : res.runs)
    if (r.cell == "disjoint-linear-DL") x.push_back(r.sum_rate);
  REQUIRE(x.size() == 30);
  long double mean = 0, ss = 0;
  for (double v : x) mean += v;
  mean /= 30;
  for (double v : x) ss += (v - mean) * (v - mean);
  const long double half = 1.96L * std::sqrt(ss / 29) / std::sqrt(30.0L);
  const auto& s = res.summary[3];
  CHECK(s.cell == "disjoint-linear-DL");
  CHECK(s.runs == 30);
  CHECK(s.mean_sum_rate == doctest::Approx(static_cast<double>(mean)).epsilon(1e-12));
  CHECK(s.ci95 == doctest::Approx(static_cast<double>(half)).epsilon(1e-9));
  CHECK(s.mean_rates.size() == 2);
  CHECK(s.mean_rates[0] + s.mean_rates[1] == doctest::Approx(s.mean_sum_rate).epsilon(1e-12));
}

TEST_CASE("CSV writers") {
  const auto spec = small_spec(2);
  const auto res = run_experiment(spec, 1);
  std::stringstream runs, summary;
  write_runs_csv(runs, res.runs, 2);
  write_summary_csv(summary, res.summary, 2);
  const auto r = read_csv(runs.str());
  CHECK(r[0] == split_line("cell,run_index,sum_rate,dl_sum,evaluation_count,fallback_count,wall_time_s,"
                           "active_chains,full_sum_rate,rate_1,rate_2"));
  CHECK(r.size() == 11);
  const auto s = read_csv(summary.str());
  CHECK(s[0] == split_line("cell,runs,mean_sum_rate,ci95,mean_evaluations,mean_wall_time_s,fallback_runs,saving,"
                           "loss,mean_rate_1,mean_rate_2"));
  CHECK(s.size() == 6);
  CHECK(std::stod(r[1][2]) == res.runs[0].sum_rate);
}

TEST_CASE("worker count honours the environment") {
  ::setenv("CFBEAM_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  ::unsetenv("CFBEAM_WORKERS");
  CHECK(worker_count() >= 1);
}
