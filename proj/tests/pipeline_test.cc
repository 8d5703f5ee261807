// latentdiar/pipeline_test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "latentdiar/clustering.h"
#include "latentdiar/embedding_io.h"
#include "latentdiar/errors.h"
#include "latentdiar/pipeline.h"
#include "latentdiar/scoring.h"
#include "latentdiar/synthetic.h"
#include "latentdiar/timeline.h"

namespace latentdiar {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("latentdiar_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void check_windows(const std::vector<Segment>& got,
                   const std::vector<Segment>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].start == doctest::Approx(want[i].start).epsilon(1e-12));
    CHECK(got[i].end == doctest::Approx(want[i].end).epsilon(1e-12));
  }
}

// Total length of the symmetric difference between two interval unions.
double mismatch(std::vector<Segment> a, std::vector<Segment> b) {
  a = segment_union(a);
  b = segment_union(b);
  std::vector<double> pts;
  for (const auto* v : {&a, &b})
    for (const auto& s : *v) {
      pts.push_back(s.start);
      pts.push_back(s.end);
    }
  std::sort(pts.begin(), pts.end());
  auto inside = [](const std::vector<Segment>& v, double t) {
    for (const auto& s : v)
      if (s.start <= t && t < s.end) return true;
    return false;
  };
  double total = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    if (inside(a, mid) != inside(b, mid)) total += pts[i + 1] - pts[i];
  }
  return total;
}

// Turns never overlap and cover exactly the speech segments.
void check_tiling(const std::vector<RttmRecord>& turns,
                  const std::vector<Segment>& sad) {
  std::vector<Segment> covered;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    CHECK(turns[i].duration > 0);
    if (i > 0) CHECK(turns[i].start >= turns[i - 1].end() - 1e-9);
    covered.push_back({turns[i].start, turns[i].end()});
  }
  CHECK(mismatch(covered, sad) < 1e-9);
}

SyntheticConfig small_corpus(std::uint64_t seed, int speakers = 4) {
  SyntheticConfig c;
  c.num_speakers = speakers;
  c.segments_per_speaker = 40;
  c.dim = 32;
  c.separation = 8.0;
  c.noise_sigma = 1.0;
  c.seed = seed;
  return c;
}

ClusterGanModel small_model(const SyntheticCorpus& corpus, int iterations) {
  ClusterGanConfig c;
  c.d_n = 4;
  c.embedding_dim = corpus.embeddings.dim();
  c.hidden_dim = 32;
  c.batch_size = 16;
  c.iterations = iterations;
  std::mt19937_64 rng(17);
  return train(c, corpus.embeddings.values, corpus.labels, corpus.speakers, rng)
      .model;
}

TEST_CASE("timeline: 3.5 s segment gives five 1.5 s windows") {
  const auto t = build_timeline("s", {{0.0, 3.5}});
  check_windows(t.subsegments,
                {{0, 1.5}, {0.5, 2.0}, {1.0, 2.5}, {1.5, 3.0}, {2.0, 3.5}});
}

TEST_CASE("timeline: short segment becomes a single window") {
  const auto t = build_timeline("s", {{0.0, 1.0}});
  check_windows(t.subsegments, {{0, 1.0}});
  check_windows(build_timeline("s", {{2.0, 3.5}}).subsegments, {{2.0, 3.5}});
}

TEST_CASE("timeline: a 3.6 s segment gets a 1.1 s tail window") {
  const auto t = build_timeline("s", {{0.0, 3.6}});
  check_windows(t.subsegments, {{0, 1.5},
                                {0.5, 2.0},
                                {1.0, 2.5},
                                {1.5, 3.0},
                                {2.0, 3.5},
                                {2.5, 3.6}});
}

TEST_CASE("timeline: a too-short tail stretches the last window") {
  // hop 1.0: windows [0,1.5], [1,2.5]; the tail [2, 2.7] is 0.7 s < 0.8 s.
  const auto t = build_timeline("s", {{0.0, 2.7}}, 1.5, 1.0, 0.8);
  check_windows(t.subsegments, {{0, 1.5}, {1.0, 2.7}});
  const auto kept = build_timeline("s", {{0.0, 2.7}}, 1.5, 1.0, 0.5);
  check_windows(kept.subsegments, {{0, 1.5}, {1.0, 2.5}, {2.0, 2.7}});
}

TEST_CASE("timeline rejects bad speech segments") {
  CHECK_THROWS_AS(build_timeline("s", {{-1.0, 2.0}}), FormatError);
  CHECK_THROWS_AS(build_timeline("s", {{3.0, 2.0}}), FormatError);
  CHECK_THROWS_AS(build_timeline("s", {{1.0, 1.0}}), FormatError);
  CHECK_THROWS_AS(build_timeline("s", {{0.0, 2.0}, {1.0, 3.0}}), FormatError);
  CHECK_NOTHROW(build_timeline("s", {{0.0, 2.0}, {2.0, 3.0}}));
}

TEST_CASE("timeline windows stay inside their segment") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> len(0.05, 9.0), gap(0.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<Segment> sad;
    double x = gap(rng);
    for (int i = 0; i < 10; ++i) {
      const double e = x + len(rng);
      sad.push_back({x, e});
      x = e + gap(rng);
    }
    const auto tl = build_timeline("s", sad);
    REQUIRE(tl.parent.size() == tl.subsegments.size());
    for (std::size_t i = 0; i < tl.subsegments.size(); ++i) {
      const Segment& w = tl.subsegments[i];
      const Segment& p = sad[static_cast<std::size_t>(tl.parent[i])];
      CHECK(w.start >= p.start);
      CHECK(w.end <= p.end);
      CHECK(w.duration() <= kWindowSeconds + 1e-9);
      CHECK(w.duration() >= std::min(p.duration(), kMinTailSeconds) - 1e-9);
      if (i > 0) CHECK(w.start > tl.subsegments[i - 1].start);
    }
    // Windows jointly cover every segment.
    CHECK(mismatch(tl.subsegments, sad) < 1e-9);
  }
}

TEST_CASE("attach_windows maps windows to segments") {
  const std::vector<Segment> sad = {{0, 2}, {3, 5}};
  const auto t = attach_windows("s", sad, {{0, 1.5}, {0.5, 2}, {3, 4.5}});
  CHECK(t.parent == std::vector<int>{0, 0, 1});
  CHECK_THROWS_AS(attach_windows("s", sad, {{1.5, 3.5}}), AlignmentError);
  CHECK_THROWS_AS(attach_windows("s", sad, {{5.5, 6.0}}), AlignmentError);
}

TEST_CASE("embedding files round-trip bit-exactly") {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> n(0.0f, 3.0f);
  EmbeddingSet set;
  set.session = "meeting_01";
  set.values.resize(20, 7);
  for (Eigen::Index i = 0; i < set.values.size(); ++i) {
    set.values.data()[i] = n(rng);
  }
  set.values(0, 0) = 1e-38f;
  set.values(0, 1) = -3.4e38f;
  set.values(0, 2) = 0.1f;
  for (int i = 0; i < 20; ++i) set.windows.push_back({0.5 * i + 0.1, 0.5 * i + 1.6});
  const auto dir = scratch_dir("emb");
  const std::string path = (dir / "meeting_01.emb").string();
  write_embedding_set(path, set);
  CHECK(fs::exists(dir / "meeting_01.segments"));
  const auto back = read_embedding_set(path);
  CHECK(back.session == set.session);
  CHECK(back.values == set.values);
  CHECK(back.windows == set.windows);
  fs::remove_all(dir);
}

TEST_CASE("malformed embedding files are rejected") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    std::string session;
    Tensor values;
    parse_embeddings(in, "x.emb", &session, &values);
    return values;
  };
  CHECK(parse("dim=2 count=1 session=a\n1 2\n").rows() == 1);
  CHECK_THROWS_AS(parse("dim=2 count=2 session=a\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("dim=2 count=1 session=a\n1 2 3\n"), FormatError);
  CHECK_THROWS_AS(parse("dim=2 count=1 session=a\n1 x\n"), FormatError);
  CHECK_THROWS_AS(parse("dims=2 count=1 session=a\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("dim=2 count=1 session=a\n1 nan\n"), DataError);
  CHECK_THROWS_AS(parse(""), FormatError);

  const auto dir = scratch_dir("emb_bad");
  const std::string path = (dir / "a.emb").string();
  { std::ofstream(path) << "dim=1 count=2 session=a\n1\n2\n"; }
  { std::ofstream(dir / "a.segments") << "0 1.5\n"; }
  CHECK_THROWS_AS(read_embedding_set(path), AlignmentError);
  CHECK_THROWS_AS(read_embedding_set((dir / "missing.emb").string()),
                  DataError);
  fs::remove_all(dir);
}

TEST_CASE("SAD files parse per session and reject inverted segments") {
  std::istringstream in("b 3 4\na 0 1.5\n# comment\na 2 3\n");
  const auto sad = parse_sad(in, "sad.txt");
  REQUIRE(sad.size() == 2);
  CHECK(sad.at("a").size() == 2);
  CHECK(sad.at("b")[0] == Segment{3, 4});
  std::istringstream bad("a 2 1\n");
  CHECK_THROWS_AS(parse_sad(bad, "sad.txt"), FormatError);
  std::istringstream fields("a 2\n");
  CHECK_THROWS_AS(parse_sad(fields, "sad.txt"), FormatError);
}

TEST_CASE("fusion: width and unit-norm halves") {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n;
  Tensor base(10, 12), latent(10, 5);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = 5 * n(rng);
  for (Eigen::Index i = 0; i < latent.size(); ++i) latent.data()[i] = n(rng);
  const Matrix<double> f = fuse(base, latent);
  CHECK(f.cols() == 17);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(f.row(i).head(12).norm() - 1.0) < 1e-6);
    CHECK(std::abs(f.row(i).tail(5).norm() - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(fuse(base, Tensor(latent.topRows(9))), AlignmentError);
  CHECK(fusion_from_name("concat") == FusionMode::kConcat);
  CHECK_THROWS_AS(fusion_from_name("sum"), ConfigError);
}

TEST_CASE("synthetic corpus structure") {
  const auto c = generate_synthetic_corpus(small_corpus(5));
  CHECK(c.embeddings.count() == 4 * 40);
  CHECK(c.embeddings.dim() == 32);
  CHECK(c.timeline.subsegments == c.embeddings.windows);
  std::vector<int> per(4, 0);
  for (int l : c.labels) ++per[l];
  for (int p : per) CHECK(p == 40);
  double closest = 1e300;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      closest = std::min(closest, (c.centroids.row(i) - c.centroids.row(j)).norm());
  CHECK(closest == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(c.reference.size() == c.timeline.segments.size());
  for (std::size_t i = 0; i < c.timeline.subsegments.size(); ++i) {
    const auto& ref = c.reference[static_cast<std::size_t>(c.timeline.parent[i])];
    CHECK(ref.speaker == c.speakers[static_cast<std::size_t>(c.labels[i])]);
  }
  CHECK_THROWS_AS(generate_synthetic_corpus([] {
                    SyntheticConfig s;
                    s.separation = 0;
                    return s;
                  }()),
                  ConfigError);
}

TEST_CASE("synthetic reference round-trips through RTTM bit-exactly") {
  const auto c = generate_synthetic_corpus(small_corpus(6));
  std::istringstream in(format_rttm(c.reference));
  CHECK(parse_rttm(in) == c.reference);
}

TEST_CASE("synthetic corpus is reproducible from its seed") {
  const auto a = generate_synthetic_corpus(small_corpus(7));
  const auto b = generate_synthetic_corpus(small_corpus(7));
  const auto other = generate_synthetic_corpus(small_corpus(8));
  CHECK(a.embeddings.values == b.embeddings.values);
  CHECK(a.reference == b.reference);
  CHECK_FALSE(a.embeddings.values == other.embeddings.values);
}

TEST_CASE("noiseless synthetic data clusters perfectly") {
  auto cfg = small_corpus(9, 5);
  cfg.noise_sigma = 0;
  const auto c = generate_synthetic_corpus(cfg);
  std::mt19937_64 rng(1);
  const auto a = kmeans(c.embeddings.values.cast<double>(), 5, {}, rng);
  CHECK(cluster_purity(a.labels, c.labels) == 1.0);
}

TEST_CASE("separation ten times the noise gives >= 99% raw purity") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cfg = small_corpus(seed);
    cfg.dim = 128;
    cfg.separation = 10.0;
    const auto c = generate_synthetic_corpus(cfg);
    std::mt19937_64 rng(seed);
    const auto a = kmeans(c.embeddings.values.cast<double>(), 4, {}, rng);
    CHECK(cluster_purity(a.labels, c.labels) >= 0.99);
  }
}

TEST_CASE("collapse_to_turns splits at window midpoints and merges runs") {
  const auto t = build_timeline("s", {{0.0, 3.5}, {5.0, 6.0}});
  // Windows: [0,1.5] [0.5,2] [1,2.5] [1.5,3] [2,3.5] | [5,6]
  const auto turns = collapse_to_turns(t, {0, 0, 1, 1, 0, 1});
  REQUIRE(turns.size() == 4);
  CHECK(turns[0].start == 0.0);
  CHECK(turns[0].end() == doctest::Approx(1.5));  // between mids 1.25, 1.75
  CHECK(turns[1].speaker == "spk1");
  CHECK(turns[1].end() == doctest::Approx(2.5));
  CHECK(turns[2].end() == doctest::Approx(3.5));
  CHECK(turns[3].start == 5.0);
  check_tiling(turns, t.segments);
  CHECK_THROWS_AS(collapse_to_turns(t, {0, 1}), AlignmentError);
}

TEST_CASE("canonical labels follow first appearance") {
  CHECK(canonicalize_labels({3, 3, 1, 0, 1}) == std::vector<int>{0, 0, 1, 2, 1});
}

TEST_CASE("clustering raw synthetic embeddings tiles speech and scores well") {
  const auto c = generate_synthetic_corpus(small_corpus(10));
  const Matrix<double> x = c.embeddings.values.cast<double>();
  DiarizeOptions opts;
  opts.num_speakers = 4;
  const auto d = cluster_session(c.timeline, x, x, opts);
  check_tiling(d.turns, c.timeline.segments);
  CHECK(cluster_purity(d.labels, c.labels) >= 0.99);
  const auto report = score(c.reference, d.turns);
  CHECK(report.der <= 1.0);
  CHECK(report.missed < 1e-9);
  CHECK(report.false_alarm < 1e-9);

  DiarizeOptions estimated;
  const auto e = cluster_session(c.timeline, x, x, estimated);
  REQUIRE(e.estimate.has_value());
  CHECK(e.num_speakers == 4);
}

TEST_CASE("one requested speaker labels all speech with one speaker") {
  const auto c = generate_synthetic_corpus(small_corpus(11));
  const Matrix<double> x = c.embeddings.values.cast<double>();
  DiarizeOptions opts;
  opts.num_speakers = 1;
  const auto d = cluster_session(c.timeline, x, x, opts);
  for (const auto& t : d.turns) CHECK(t.speaker == "spk0");
  CHECK(d.turns.size() == c.timeline.segments.size());
  check_tiling(d.turns, c.timeline.segments);
}

TEST_CASE("asking for more speakers than windows is a data error") {
  const auto t = build_timeline("s", {{0.0, 2.0}});  // 2 windows
  const Matrix<double> x = Matrix<double>::Identity(2, 3);
  DiarizeOptions opts;
  opts.num_speakers = 3;
  CHECK_THROWS_AS(cluster_session(t, x, x, opts), DataError);
  opts.num_speakers = 0;
  CHECK_THROWS_AS(cluster_session(t, x, x, opts), ConfigError);
}

TEST_CASE("diarize is deterministic and tiles speech") {
  const auto c = generate_synthetic_corpus(small_corpus(12));
  const auto model = small_model(c, 20);
  for (bool fused : {false, true}) {
    DiarizeOptions opts;
    opts.fuse = fused;
    opts.seed = 5;
    const auto a = diarize(model, c.timeline, c.embeddings.values, opts);
    const auto b = diarize(model, c.timeline, c.embeddings.values, opts);
    CHECK(a.labels == b.labels);
    CHECK(format_rttm(a.turns) == format_rttm(b.turns));
    check_tiling(a.turns, c.timeline.segments);
    REQUIRE(a.estimate.has_value());
    CHECK(a.estimate->num_speakers == 4);
  }
  CHECK_THROWS_AS(diarize(model, c.timeline,
                          Tensor(c.embeddings.values.topRows(3)), {}),
                  AlignmentError);
}

TEST_CASE("permuting synthetic speaker identities leaves DER, purity and k") {
  const auto c = generate_synthetic_corpus(small_corpus(13));
  const Matrix<double> x = c.embeddings.values.cast<double>();
  const auto d = cluster_session(c.timeline, x, x, DiarizeOptions{});
  const double der = score(c.reference, d.turns).der;
  const double purity = cluster_purity(d.labels, c.labels);

  // Same corpus with speaker k renamed to speaker perm[k].
  const std::vector<int> perm = {2, 0, 3, 1};
  std::vector<int> labels;
  for (int l : c.labels) labels.push_back(perm[static_cast<std::size_t>(l)]);
  auto ref = c.reference;
  for (auto& r : ref) {
    const int k = r.speaker.back() - '0';
    r.speaker = c.speakers[static_cast<std::size_t>(perm[k])];
  }
  const auto dp = cluster_session(c.timeline, x, x, DiarizeOptions{});
  CHECK(dp.num_speakers == d.num_speakers);
  CHECK(cluster_purity(dp.labels, labels) == purity);
  CHECK(score(ref, dp.turns).der == doctest::Approx(der).epsilon(1e-12));
}

}  // namespace
}  // namespace latentdiar
