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

#include "cfbeam/channel_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cfbeam {

namespace {

constexpr const char* kMagic = "# cfbeam-channel-dump v1";

double parse_double(const std::string& tok, int line_no) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("channel dump line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, int line_no) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("channel dump line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
  return v;
}

struct PendingRun {
  std::vector<PathRecord> paths;
  std::vector<bool> seen;
  std::size_t filled = 0;
};

}  // namespace

DumpHeader DumpHeader::from(const NetworkConfig& cfg) {
  DumpHeader h;
  h.L = cfg.L;
  h.K = cfg.K;
  h.M = cfg.M;
  h.B = cfg.codebook_size();
  h.P = cfg.P;
  h.spacing = cfg.antenna_spacing_wavelengths;
  h.p_T_W = cfg.p_T_W();
  h.noise_W = cfg.noise_W();
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dump_header(std::ostream& os, const DumpHeader& h) {
  os << kMagic << '\n';
  os << "# L=" << h.L << " K=" << h.K << " M=" << h.M << " B=" << h.B << " P=" << h.P
     << " spacing=" << format_double(h.spacing) << " p_T_W=" << format_double(h.p_T_W)
     << " noise_W=" << format_double(h.noise_W) << '\n';
  os << "# run_index k l p re_beta im_beta theta_rad alpha_dB\n";
}

void write_dump_records(std::ostream& os, const ChannelRealization& r) {
  for (int k = 0; k < r.K(); ++k)
    for (int l = 0; l < r.L(); ++l)
      for (int p = 0; p < r.P(); ++p) {
        const auto& rec = r.path(k, l, p);
        os << r.run_index() << ' ' << k << ' ' << l << ' ' << p << ' ' << format_double(rec.beta.real()) << ' '
           << format_double(rec.beta.imag()) << ' ' << format_double(rec.theta_rad) << ' '
           << format_double(rec.alpha_dB) << '\n';
      }
}

ChannelDump read_channel_dump(std::istream& is) {
  ChannelDump dump;
  std::string line;
  int line_no = 0;
  bool have_magic = false, have_dims = false;
  std::map<long long, PendingRun> pending;
  std::vector<long long> order;

  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(kMagic, 0) == 0) {
        have_magic = true;
      } else if (line.find("L=") != std::string::npos) {
        std::istringstream ss(line.substr(1));
        std::string kv;
        auto& h = dump.header;
        while (ss >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
          if (key == "L") h.L = static_cast<int>(parse_int(val, line_no));
          else if (key == "K") h.K = static_cast<int>(parse_int(val, line_no));
          else if (key == "M") h.M = static_cast<int>(parse_int(val, line_no));
          else if (key == "B") h.B = static_cast<int>(parse_int(val, line_no));
          else if (key == "P") h.P = static_cast<int>(parse_int(val, line_no));
          else if (key == "spacing") h.spacing = parse_double(val, line_no);
          else if (key == "p_T_W") h.p_T_W = parse_double(val, line_no);
          else if (key == "noise_W") h.noise_W = parse_double(val, line_no);
        }
        have_dims = true;
      }
      continue;
    }
    if (!have_magic || !have_dims) throw ParseError("channel dump: missing header before line " + std::to_string(line_no));
    const auto& h = dump.header;
    std::istringstream ss(line);
    std::string tok[8];
    for (auto& t : tok)
      if (!(ss >> t)) throw ParseError("channel dump line " + std::to_string(line_no) + ": expected 8 fields");
    const long long run = parse_int(tok[0], line_no);
    const long long k = parse_int(tok[1], line_no), l = parse_int(tok[2], line_no), p = parse_int(tok[3], line_no);
    if (k < 0 || k >= h.K || l < 0 || l >= h.L || p < 0 || p >= h.P)
      throw ParseError("channel dump line " + std::to_string(line_no) + ": index out of range");
    auto [it, inserted] = pending.try_emplace(run);
    if (inserted) {
      order.push_back(run);
      it->second.paths.resize(static_cast<std::size_t>(h.L) * h.K * h.P);
      it->second.seen.assign(it->second.paths.size(), false);
    }
    const std::size_t slot = (static_cast<std::size_t>(k) * h.L + l) * h.P + p;
    if (it->second.seen[slot]) throw ParseError("channel dump line " + std::to_string(line_no) + ": duplicate record");
    it->second.seen[slot] = true;
    ++it->second.filled;
    it->second.paths[slot] = PathRecord{Complex(parse_double(tok[4], line_no), parse_double(tok[5], line_no)),
                                        parse_double(tok[6], line_no), parse_double(tok[7], line_no)};
  }
  if (!have_magic || !have_dims) throw ParseError("channel dump: missing header");

  const auto& h = dump.header;
  for (long long run : order) {
    auto& pr = pending[run];
    if (pr.filled != pr.paths.size())
      throw ParseError("channel dump: run " + std::to_string(run) + " is missing records");
    dump.runs.emplace_back(h.L, h.K, h.M, h.P, h.spacing, std::move(pr.paths), h.noise_W, run);
  }
  return dump;
}

ChannelDump read_channel_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open channel dump '" + path + "'");
  return read_channel_dump(in);
}

}  // namespace cfbeam
