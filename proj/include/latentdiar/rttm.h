// latentdiar/rttm.h
//
// Copyright 2026  The latentdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LATENTDIAR_RTTM_H_
#define LATENTDIAR_RTTM_H_

#include <istream>
#include <string>
#include <vector>

namespace latentdiar {

// One SPEAKER line:
//   SPEAKER <session> <chan> <tbeg> <tdur> <NA> <NA> <speaker> <NA> <NA>
struct RttmRecord {
  std::string session;
  std::string channel = "1";
  double start = 0;
  double duration = 0;
  std::string speaker;

  double end() const { return start + duration; }
  bool operator==(const RttmRecord&) const = default;
};

// Lines that are empty, start with ";;" or carry a type other than SPEAKER
// are skipped. Anything else malformed raises FormatError naming
// `source:line`.
std::vector<RttmRecord> parse_rttm(std::istream& in,
                                   const std::string& source = "<rttm>");
std::vector<RttmRecord> read_rttm(const std::string& path);

// Times are written with 3 decimals.
std::string format_rttm(const std::vector<RttmRecord>& records);
void write_rttm(const std::string& path, const std::vector<RttmRecord>& records);

// Records of one session, in input order.
std::vector<RttmRecord> filter_session(const std::vector<RttmRecord>& records,
                                       const std::string& session);
std::vector<std::string> list_sessions(const std::vector<RttmRecord>& records);

}  // namespace latentdiar

#endif  // LATENTDIAR_RTTM_H_
