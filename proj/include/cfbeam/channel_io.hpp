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

#ifndef CFBEAM_CHANNEL_IO_HPP
#define CFBEAM_CHANNEL_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "cfbeam/scenario.hpp"

namespace cfbeam {

// Channel dump text format:
//
//   # cfbeam-channel-dump v1
//   # L=3 K=2 M=8 B=8 P=1 spacing=0.5 p_T_W=19.95 noise_W=3.38e-12
//   # run_index k l p re_beta im_beta theta_rad alpha_dB
//   0 0 0 0 <re> <im> <theta> <alpha>
//   ...
//
// One record per (run, user, AP, path), indices 0-based, doubles written in
// shortest round-trip form so parsing restores every bit.
struct DumpHeader {
  int L = 0, K = 0, M = 0, B = 0, P = 0;
  double spacing = 0.5;
  double p_T_W = 0.0;
  double noise_W = 0.0;

  static DumpHeader from(const NetworkConfig& cfg);
};

struct ChannelDump {
  DumpHeader header;
  std::vector<ChannelRealization> runs;
};

std::string format_double(double v);

void write_dump_header(std::ostream& os, const DumpHeader& header);
void write_dump_records(std::ostream& os, const ChannelRealization& realization);

/// Throws ParseError on malformed or incomplete input.
ChannelDump read_channel_dump(std::istream& is);
ChannelDump read_channel_dump(const std::string& path);

}  // namespace cfbeam

#endif  // CFBEAM_CHANNEL_IO_HPP
