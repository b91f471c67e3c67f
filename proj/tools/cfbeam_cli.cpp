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

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cfbeam/config.hpp"
#include "cfbeam/harness.hpp"

using namespace cfbeam;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  return os;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& summary_path,
            std::optional<std::uint64_t> seed, std::optional<int> runs, int workers) {
  auto spec = load_experiment(config);
  if (seed) spec.network.master_seed = *seed;
  if (runs) spec.mc_runs = *runs;
  const auto res = run_experiment(spec, workers);
  const int K = spec.network.K;
  if (!out.empty()) {
    auto os = open_out(out);
    write_runs_csv(os, res.runs, K);
  }
  if (!summary_path.empty()) {
    auto os = open_out(summary_path);
    write_summary_csv(os, res.summary, K);
  }
  write_summary_csv(std::cout, res.summary, K);
  return 0;
}

int cmd_export(const std::string& config, const std::string& teacher, int init, int iter, const std::string& bcc,
               int rows, std::int64_t first_run, bool gains, const std::string& out, const std::string& dump_path,
               std::optional<std::uint64_t> seed) {
  auto spec = load_experiment(config);
  if (seed) spec.network.master_seed = *seed;
  DatasetOptions opts;
  opts.teacher = settings_from_label(teacher);
  opts.teacher.n_init = init;
  opts.teacher.n_iter = iter;
  opts.teacher.bcc = parse_bcc(bcc);
  opts.n_rows = rows;
  opts.first_run = first_run;
  opts.gains = gains;
  auto csv = open_out(out);
  if (dump_path.empty()) {
    export_dataset(spec.network, opts, csv);
  } else {
    auto dump = open_out(dump_path);
    export_dataset(spec.network, opts, csv, &dump);
  }
  return 0;
}

int cmd_score(const std::string& dump_path, const std::string& assign_path, const std::string& precoder,
              const std::string& out) {
  const auto dump = read_channel_dump(dump_path);
  std::ifstream in(assign_path);
  if (!in) throw ParseError("cannot open " + assign_path);
  const auto rows = read_assignments(in, dump.header.L, dump.header.K);
  const auto scores = score_dump(dump, rows, parse_precoder(precoder));
  std::ofstream file;
  if (!out.empty()) file = open_out(out);
  std::ostream& os = out.empty() ? std::cout : file;
  for (const auto& s : scores) os << score_to_json(s) << '\n';
  return 0;
}

void print_count(std::uint64_t v) {
  if (v == std::numeric_limits<std::uint64_t>::max()) std::cout << "overflow";
  else std::cout << v;
}

int cmd_complexity(int L, int K, int B, const std::string& alg, const std::string& bcc, int init, int iter) {
  const auto mode = parse_bcc(bcc);
  if (!alg.empty()) {
    const auto a = parse_algorithm(alg);
    const auto base = complexity_formula(a, L, K, B, mode);
    print_count(complexity_with_features(base, init, iter, a == Algorithm::linear_iis, L));
    std::cout << '\n';
    return 0;
  }
  std::cout << "algorithm,per_sweep,with_features\n";
  for (auto a : {Algorithm::exhaustive, Algorithm::semicentralized, Algorithm::semilinear, Algorithm::linear,
                 Algorithm::linear_iis, Algorithm::disjoint_linear_dl}) {
    const auto base = complexity_formula(a, L, K, B, mode);
    const bool single = a == Algorithm::exhaustive || a == Algorithm::semicentralized ||
                        a == Algorithm::disjoint_linear_dl;
    std::cout << to_string(a) << ',';
    print_count(base);
    std::cout << ',';
    print_count(single ? base : complexity_with_features(base, init, iter, a == Algorithm::linear_iis, L));
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfbeam: beam selection and hybrid precoding for cell-free mm-wave networks"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Override the master seed");

  std::string config, out, summary, teacher = "linear-II-rate", bcc = "full", dump, assign, precoder = "zf", alg;
  std::optional<int> runs;
  int workers = 0, init = 1, iter = 1, rows = 100, L = 3, K = 2, B = 8;
  std::int64_t first_run = 0;
  bool gains = false;

  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment");
  run->add_option("--config", config, "JSON experiment file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Per-run CSV");
  run->add_option("--summary", summary, "Per-cell summary CSV");
  run->add_option("--runs", runs, "Override mc_runs");
  run->add_option("--workers", workers, "Worker threads (default: CFBEAM_WORKERS or hardware)");

  auto* exp = app.add_subcommand("export-dataset", "Write a supervised-learning dataset");
  exp->add_option("--config", config, "JSON file with a network object")->required()->check(CLI::ExistingFile);
  exp->add_option("--teacher", teacher, "Teacher algorithm label");
  exp->add_option("--init", init, "Teacher initialisations")->check(CLI::PositiveNumber);
  exp->add_option("--iter", iter, "Teacher iterations")->check(CLI::PositiveNumber);
  exp->add_option("--bcc", bcc, "full | init_only | off");
  exp->add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
  exp->add_option("--first-run", first_run, "Run index of the first row");
  exp->add_flag("--gains", gains, "Add |beta| of the strongest path as features");
  exp->add_option("--out", out, "Dataset CSV")->required();
  exp->add_option("--dump", dump, "Channel dump of every row");

  auto* score = app.add_subcommand("score", "Score beam assignments on dumped channels");
  score->add_option("--dump", dump, "Channel dump")->required()->check(CLI::ExistingFile);
  score->add_option("--assign", assign, "Assignment records or dataset CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--precoder", precoder, "zf | mmse");
  score->add_option("--out", out, "Output file (JSON lines); stdout if omitted");

  auto* cx = app.add_subcommand("complexity", "Print candidate-evaluation counts");
  cx->add_option("--L", L, "Access points")->check(CLI::PositiveNumber);
  cx->add_option("--K", K, "Users")->check(CLI::PositiveNumber);
  cx->add_option("--B", B, "Codebook size")->check(CLI::PositiveNumber);
  cx->add_option("--alg", alg, "Algorithm; all if omitted");
  cx->add_option("--bcc", bcc, "full | init_only | off");
  cx->add_option("--init", init, "Initialisations")->check(CLI::PositiveNumber);
  cx->add_option("--iter", iter, "Iterations")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-algorithms", "List algorithm labels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, out, summary, seed, runs, workers);
    if (exp->parsed())
      return cmd_export(config, teacher, init, iter, bcc, rows, first_run, gains, out, dump, seed);
    if (score->parsed()) return cmd_score(dump, assign, precoder, out);
    if (cx->parsed()) return cmd_complexity(L, K, B, alg, bcc, init, iter);
    if (list->parsed()) {
      for (const auto& name : algorithm_labels()) std::cout << name << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
