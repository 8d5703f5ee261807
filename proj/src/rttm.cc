// latentdiar/rttm.cc
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

#include "latentdiar/rttm.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "latentdiar/errors.h"

namespace latentdiar {

namespace {

double parse_time(const std::string& token, const std::string& where) {
  double v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw FormatError(where + ": bad time value '" + token + "'");
  }
  return v;
}

}  // namespace

std::vector<RttmRecord> parse_rttm(std::istream& in, const std::string& source) {
  std::vector<RttmRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0].rfind(";;", 0) == 0) continue;
    if (tok[0] != "SPEAKER") continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (tok.size() < 9 || tok.size() > 10) {
      throw FormatError(where + ": expected 10 fields, got " +
                        std::to_string(tok.size()));
    }
    RttmRecord r;
    r.session = tok[1];
    r.channel = tok[2];
    r.start = parse_time(tok[3], where);
    r.duration = parse_time(tok[4], where);
    r.speaker = tok[7];
    if (r.start < 0) throw FormatError(where + ": negative start time");
    if (!(r.duration > 0)) throw FormatError(where + ": duration must be > 0");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RttmRecord> read_rttm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open RTTM file " + path);
  return parse_rttm(in, path);
}

std::string format_rttm(const std::vector<RttmRecord>& records) {
  std::string out;
  char buf[64];
  for (const auto& r : records) {
    out += "SPEAKER " + r.session + " " + r.channel + " ";
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", r.start, r.duration);
    out += buf;
    out += " <NA> <NA> " + r.speaker + " <NA> <NA>\n";
  }
  return out;
}

void write_rttm(const std::string& path, const std::vector<RttmRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << format_rttm(records);
}

std::vector<RttmRecord> filter_session(const std::vector<RttmRecord>& records,
                                       const std::string& session) {
  std::vector<RttmRecord> out;
  for (const auto& r : records) {
    if (r.session == session) out.push_back(r);
  }
  return out;
}

std::vector<std::string> list_sessions(const std::vector<RttmRecord>& records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.session).second) out.push_back(r.session);
  }
  return out;
}

}  // namespace latentdiar
