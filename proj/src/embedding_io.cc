// latentdiar/embedding_io.cc
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

#include "latentdiar/embedding_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "latentdiar/errors.h"

namespace latentdiar {

namespace {

template <typename T>
T parse_number(std::string_view token, const std::string& where) {
  T v{};
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(where + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

template <typename T>
std::string shortest(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ifstream open_for_read(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + what + " " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

// Value of `key=` in a header token, or FormatError.
std::string header_field(const std::string& token, const std::string& key,
                         const std::string& where) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw FormatError(where + ": expected '" + prefix + "...' in header, got '" +
                      token + "'");
  }
  return token.substr(prefix.size());
}

}  // namespace

std::string format_number(double v) { return shortest(v); }
std::string format_number(float v) { return shortest(v); }

std::string sidecar_path(const std::string& embedding_path) {
  return std::filesystem::path(embedding_path)
      .replace_extension(".segments")
      .string();
}

std::string format_embeddings(const std::string& session, const Tensor& values) {
  std::string out = "dim=" + std::to_string(values.cols()) +
                    " count=" + std::to_string(values.rows()) +
                    " session=" + session + "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out += ' ';
      out += shortest(values(i, j));
    }
    out += '\n';
  }
  return out;
}

void parse_embeddings(std::istream& in, const std::string& source,
                      std::string* session, Tensor* values) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": empty file");
  std::istringstream header(line);
  std::string t_dim, t_count, t_session, extra;
  if (!(header >> t_dim >> t_count >> t_session) || (header >> extra)) {
    throw FormatError(source + ":1: header must be 'dim=<d> count=<n> "
                      "session=<id>'");
  }
  const std::string where = source + ":1";
  const long dim = parse_number<long>(header_field(t_dim, "dim", where), where);
  const long count =
      parse_number<long>(header_field(t_count, "count", where), where);
  *session = header_field(t_session, "session", where);
  if (dim < 1 || count < 0 || session->empty()) {
    throw FormatError(where + ": need dim >= 1, count >= 0 and a session id");
  }
  values->resize(count, dim);
  long row = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at = source + ":" + std::to_string(lineno);
    if (row >= count) throw FormatError(at + ": more rows than count=" +
                                        std::to_string(count));
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (static_cast<long>(tok.size()) != dim) {
      throw FormatError(at + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(tok.size()));
    }
    for (long col = 0; col < dim; ++col) {
      const float v = parse_number<float>(tok[static_cast<std::size_t>(col)], at);
      if (!std::isfinite(v)) throw DataError(at + ": non-finite value");
      (*values)(row, col) = v;
    }
    ++row;
  }
  if (row != count) {
    throw FormatError(source + ": expected " + std::to_string(count) +
                      " rows, found " + std::to_string(row));
  }
}

std::string format_windows(const std::vector<Segment>& windows) {
  std::string out;
  for (const Segment& w : windows) {
    out += shortest(w.start) + " " + shortest(w.end) + "\n";
  }
  return out;
}

std::vector<Segment> parse_windows(std::istream& in, const std::string& source) {
  std::vector<Segment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string at = source + ":" + std::to_string(lineno);
    if (tok.size() != 2) throw FormatError(at + ": expected '<start> <end>'");
    const Segment w{parse_number<double>(tok[0], at),
                    parse_number<double>(tok[1], at)};
    if (!(w.start >= 0) || !(w.end > w.start) || !std::isfinite(w.end)) {
      throw FormatError(at + ": negative or inverted window");
    }
    out.push_back(w);
  }
  return out;
}

void write_embedding_set(const std::string& path, const EmbeddingSet& set) {
  if (set.windows.size() != static_cast<std::size_t>(set.values.rows())) {
    throw AlignmentError("embedding set has " +
                         std::to_string(set.values.rows()) + " rows but " +
                         std::to_string(set.windows.size()) + " windows");
  }
  open_for_write(path) << format_embeddings(set.session, set.values);
  open_for_write(sidecar_path(path)) << format_windows(set.windows);
}

EmbeddingSet read_embedding_set(const std::string& path) {
  EmbeddingSet set;
  auto in = open_for_read(path, "embedding file");
  parse_embeddings(in, path, &set.session, &set.values);
  const std::string side = sidecar_path(path);
  auto sin = open_for_read(side, "segments file");
  set.windows = parse_windows(sin, side);
  if (set.windows.size() != static_cast<std::size_t>(set.values.rows())) {
    throw AlignmentError(path + " has " + std::to_string(set.values.rows()) +
                         " rows but " + side + " lists " +
                         std::to_string(set.windows.size()) + " windows");
  }
  return set;
}

SadMap parse_sad(std::istream& in, const std::string& source) {
  SadMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string at = source + ":" + std::to_string(lineno);
    if (tok.size() != 3) {
      throw FormatError(at + ": expected '<session> <start> <end>'");
    }
    out[tok[0]].push_back(
        {parse_number<double>(tok[1], at), parse_number<double>(tok[2], at)});
  }
  for (auto& [session, segs] : out) {
    std::stable_sort(segs.begin(), segs.end(),
                     [](const Segment& a, const Segment& b) {
                       return a.start < b.start;
                     });
    validate_segments(segs, source + " (session " + session + ")");
  }
  return out;
}

SadMap read_sad(const std::string& path) {
  auto in = open_for_read(path, "SAD file");
  return parse_sad(in, path);
}

void write_sad(const std::string& path, const SadMap& sad) {
  auto out = open_for_write(path);
  for (const auto& [session, segs] : sad) {
    for (const Segment& s : segs) {
      out << session << ' ' << shortest(s.start) << ' ' << shortest(s.end)
          << '\n';
    }
  }
}

std::vector<std::string> read_labels(const std::string& path) {
  auto in = open_for_read(path, "label file");
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string label, extra;
    if (!(ss >> label)) continue;
    if (ss >> extra) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected one speaker id per line");
    }
    out.push_back(label);
  }
  return out;
}

void write_labels(const std::string& path,
                  const std::vector<std::string>& labels) {
  auto out = open_for_write(path);
  for (const auto& l : labels) out << l << '\n';
}

}  // namespace latentdiar
