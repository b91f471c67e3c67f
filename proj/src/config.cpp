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

#include "cfbeam/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace cfbeam {

using nlohmann::json;

namespace {

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ParseError("field '" + key + "': " + e.what());
  }
}

Range get_range(const json& j, const std::string& key) {
  if (j.is_number()) return Range::fixed(j.get<double>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Range{j[0].get<double>(), j[1].get<double>()};
  throw ParseError("field '" + key + "' must be a number or [lo, hi]");
}

double get_extended(const json& j, const std::string& key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return get_as<double>(j, key);
}

NetworkConfig network_from(const json& j) {
  if (!j.is_object()) throw ParseError("network must be an object");
  NetworkConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "L") c.L = get_as<int>(v, key);
    else if (key == "K") c.K = get_as<int>(v, key);
    else if (key == "M") c.M = get_as<int>(v, key);
    else if (key == "M_rf") c.M_rf = get_as<int>(v, key);
    else if (key == "B") c.B = get_as<int>(v, key);
    else if (key == "p_T_dBm") c.p_T_dBm = get_as<double>(v, key);
    else if (key == "noise_psd_dBm_Hz") c.noise_psd_dBm_Hz = get_as<double>(v, key);
    else if (key == "bandwidth_Hz") c.bandwidth_Hz = get_as<double>(v, key);
    else if (key == "f_c_Hz") c.f_c_Hz = get_as<double>(v, key);
    else if (key == "c_mps") c.c_mps = get_as<double>(v, key);
    else if (key == "n_pl") c.n_pl = get_range(v, key);
    else if (key == "shadow_sigma_dB") c.shadow_sigma_dB = get_range(v, key);
    else if (key == "dist_m") c.dist_m = get_range(v, key);
    else if (key == "P") c.P = get_as<int>(v, key);
    else if (key == "k_factor_dB") {
      if (!v.is_null()) c.k_factor_dB = get_extended(v, key);
    } else if (key == "antenna_spacing_wavelengths") c.antenna_spacing_wavelengths = get_as<double>(v, key);
    else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(v, key);
    else throw ParseError("unknown network field '" + key + "'");
  }
  return c;
}

RfPolicy rf_from(const json& j) {
  if (j.is_string()) return parse_rf_policy(j.get<std::string>());
  if (j.is_object() && j.size() == 1 && j.contains("naive")) return RfPolicy::naive(get_as<int>(j["naive"], "naive"));
  throw ParseError("rf must be \"full\", \"smart\", \"smart-db\" or {\"naive\": m}");
}

CellSpec cell_from(const json& j) {
  CellSpec cell;
  if (j.is_string()) {
    cell.search = settings_from_label(j.get<std::string>());
    cell.name = algorithm_label(cell.search);
    return cell;
  }
  if (!j.is_object()) throw ParseError("a cell must be a label string or an object");
  if (j.contains("label")) cell.search = settings_from_label(get_as<std::string>(j["label"], "label"));
  bool named = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "label") continue;
    if (key == "name") {
      cell.name = get_as<std::string>(v, key);
      named = true;
    } else if (key == "algorithm") cell.search.algorithm = parse_algorithm(get_as<std::string>(v, key));
    else if (key == "metric") cell.search.metric = parse_metric(get_as<std::string>(v, key));
    else if (key == "bcc") cell.search.bcc = parse_bcc(get_as<std::string>(v, key));
    else if (key == "init") cell.search.n_init = get_as<int>(v, key);
    else if (key == "iter") cell.search.n_iter = get_as<int>(v, key);
    else if (key == "precoder") cell.search.precoder = parse_precoder(get_as<std::string>(v, key));
    else if (key == "mmse_fallback") cell.search.mmse_fallback = get_as<bool>(v, key);
    else if (key == "budget") cell.search.budget = get_as<std::uint64_t>(v, key);
    else if (key == "rf") cell.rf = rf_from(v);
    else throw ParseError("unknown cell field '" + key + "'");
  }
  if (!named) {
    cell.name = algorithm_label(cell.search);
    if (cell.search.n_init != 1 || cell.search.n_iter != 1)
      cell.name += "/i" + std::to_string(cell.search.n_init) + "x" + std::to_string(cell.search.n_iter);
    if (cell.search.bcc != BccMode::full) cell.name += "/bcc-" + to_string(cell.search.bcc);
    if (cell.rf.mode != RfMode::full) cell.name += "/" + to_string(cell.rf);
  }
  return cell;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

RfPolicy parse_rf_policy(std::string_view s) {
  if (s == "full") return RfPolicy::full();
  if (s == "smart") return RfPolicy::smart(ThresholdDomain::linear);
  if (s == "smart-db") return RfPolicy::smart(ThresholdDomain::db);
  if (s.starts_with("naive:")) {
    try {
      return RfPolicy::naive(std::stoi(std::string(s.substr(6))));
    } catch (const std::exception&) {
      throw ParseError("bad naive chain count in '" + std::string(s) + "'");
    }
  }
  throw ParseError("unknown RF policy '" + std::string(s) + "'");
}

void check_cell(const NetworkConfig& net, const CellSpec& cell) {
  const auto& s = cell.search;
  s.validate();
  const int B = net.codebook_size();
  if (s.bcc != BccMode::off && B < net.K)
    throw ConfigConflict("cell " + cell.name + ": beam conflict control needs B >= K");
  if (cell.rf.mode == RfMode::full && net.rf_chains() < net.K)
    throw ConfigConflict("cell " + cell.name + ": serving every user needs M_rf >= K");
  if (cell.rf.mode == RfMode::naive && (cell.rf.naive_chains < 1 || cell.rf.naive_chains > net.rf_chains()))
    throw ConfigConflict("cell " + cell.name + ": naive policy needs 1 <= m <= M_rf");
  if (cell.rf.mode != RfMode::full && (s.algorithm == Algorithm::semilinear || s.algorithm == Algorithm::exhaustive))
    throw ConfigConflict("cell " + cell.name + ": RF shutoff needs a per-link search (linear family)");
  if (s.algorithm == Algorithm::exhaustive &&
      complexity_formula(Algorithm::exhaustive, net.L, net.K, B, s.bcc) > s.budget)
    throw ConfigConflict("cell " + cell.name + ": exhaustive enumeration exceeds the budget");
  if (s.algorithm == Algorithm::semilinear && complexity_formula(Algorithm::semilinear, 1, net.K, B, s.bcc) > s.budget)
    throw ConfigConflict("cell " + cell.name + ": semilinear combination set exceeds the budget");
}

void ExperimentSpec::validate() const {
  network.validate();
  if (mc_runs < 1) throw ConfigConflict("mc_runs must be >= 1");
  if (first_run < 0) throw ConfigConflict("first_run must be >= 0");
  if (cells.empty()) throw ConfigConflict("experiment has no cells");
  for (const auto& c : cells) check_cell(network, c);
}

ExperimentSpec parse_experiment(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  ExperimentSpec spec;
  for (const auto& [key, v] : doc.items()) {
    if (key == "network") {
      spec.network = network_from(v);
    } else if (key == "experiment") {
      if (!v.is_object()) throw ParseError("experiment must be an object");
      for (const auto& [ek, ev] : v.items()) {
        if (ek == "mc_runs") spec.mc_runs = get_as<int>(ev, ek);
        else if (ek == "first_run") spec.first_run = get_as<std::int64_t>(ev, ek);
        else if (ek == "cells") {
          if (!ev.is_array()) throw ParseError("cells must be an array");
          for (const auto& c : ev) spec.cells.push_back(cell_from(c));
        } else throw ParseError("unknown experiment field '" + ek + "'");
      }
    } else {
      throw ParseError("unknown top-level field '" + key + "'");
    }
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

NetworkConfig parse_network(std::string_view json_object) { return network_from(parse_json(json_object)); }

CellSpec parse_cell(std::string_view json_value) { return cell_from(parse_json(json_value)); }

std::string network_to_json(const NetworkConfig& c) {
  auto range = [](const Range& r) { return r.is_fixed() ? json(r.lo) : json::array({r.lo, r.hi}); };
  json j = {{"L", c.L},
            {"K", c.K},
            {"M", c.M},
            {"M_rf", c.rf_chains()},
            {"B", c.codebook_size()},
            {"p_T_dBm", c.p_T_dBm},
            {"noise_psd_dBm_Hz", c.noise_psd_dBm_Hz},
            {"bandwidth_Hz", c.bandwidth_Hz},
            {"f_c_Hz", c.f_c_Hz},
            {"c_mps", c.c_mps},
            {"n_pl", range(c.n_pl)},
            {"shadow_sigma_dB", range(c.shadow_sigma_dB)},
            {"dist_m", range(c.dist_m)},
            {"P", c.P},
            {"antenna_spacing_wavelengths", c.antenna_spacing_wavelengths},
            {"master_seed", c.master_seed}};
  if (c.k_factor_dB) j["k_factor_dB"] = std::isinf(*c.k_factor_dB) ? json(*c.k_factor_dB > 0 ? "inf" : "-inf")
                                                                   : json(*c.k_factor_dB);
  return j.dump(2);
}

}  // namespace cfbeam
