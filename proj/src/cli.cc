// latentdiar/cli.cc
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


#include "latentdiar/cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentdiar/clustergan.h"
#include "latentdiar/embedding_io.h"
#include "latentdiar/errors.h"
#include "latentdiar/pipeline.h"
#include "latentdiar/rttm.h"
#include "latentdiar/scoring.h"
#include "latentdiar/synthetic.h"

namespace latentdiar {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flat key=value files carry no section headers; keys belong to whichever
// subcommand was selected on the command line.
class FlatConfig : public CLI::ConfigBase {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigBase::from_config(in);
    const auto selected = app_->get_subcommands();
    if (selected.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents.push_back(selected.front()->get_name());
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

class Log {
 public:
  Log(std::ostream& err, std::string command)
      : err_(err), command_(std::move(command)),
        t0_(std::chrono::steady_clock::now()) {}

  void operator()(const std::string& level, const std::string& event,
                  json fields = json::object()) {
    json line = {{"level", level}, {"cmd", command_}, {"event", event}};
    line["elapsed_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    line.update(fields);
    err_ << line.dump() << '\n';
  }

 private:
  std::ostream& err_;
  std::string command_;
  std::chrono::steady_clock::time_point t0_;
};

struct SynthArgs {
  SyntheticConfig corpus;
  std::string out_dir;
};

struct TrainArgs {
  ClusterGanConfig gan;
  std::vector<std::string> embeddings;
  std::vector<std::string> labels;
  std::string out_dir;
  int log_every = 100;
};

struct DiarizeArgs {
  std::string model;
  std::vector<std::string> embeddings;
  std::string sad;
  int num_speakers = 0;  // 0: estimate
  int max_speakers = 10;
  double p_binarize = 0.2;
  int restarts = 10;
  bool fuse = false;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct ScoreArgs {
  std::string ref;
  std::string hyp;
  double collar = kDefaultCollar;
  std::string out_dir;
};

struct ExportArgs {
  std::string model;
  std::vector<std::string> embeddings;
  std::string out_dir;
};

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir);
  }
}

// Provenance: the resolved options of the subcommand, loadable with --config.
void echo_config(const CLI::App& sub, const std::string& dir) {
  const std::string path = (fs::path(dir) / "run_config.ini").string();
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "# latentdiar " << kVersion << ' ' << sub.get_name() << '\n'
      << sub.config_to_str(true, false);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const SynthArgs& args, const CLI::App& sub, std::ostream& out,
              Log& log) {
  const auto corpus = generate_synthetic_corpus(args.corpus);
  prepare_out_dir(args.out_dir);
  const std::string session = args.corpus.session;
  write_embedding_set(join(args.out_dir, session + ".emb"), corpus.embeddings);
  write_sad(join(args.out_dir, "sad.txt"),
            {{session, corpus.timeline.segments}});
  write_rttm(join(args.out_dir, "reference.rttm"), corpus.reference);
  write_labels(join(args.out_dir, "labels.txt"), corpus.label_names());
  echo_config(sub, args.out_dir);
  log("info", "wrote corpus",
      {{"session", session}, {"windows", corpus.embeddings.count()},
       {"speakers", corpus.speakers.size()}, {"out_dir", args.out_dir}});
  out << session << ": " << corpus.embeddings.count() << " windows, "
      << corpus.speakers.size() << " speakers, dim " << corpus.embeddings.dim()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- train

int cmd_train(TrainArgs args, const CLI::App& sub, std::ostream& out, Log& log) {
  if (args.labels.size() != args.embeddings.size()) {
    throw ConfigError("need one --labels file per --embeddings file (got " +
                      std::to_string(args.labels.size()) + " and " +
                      std::to_string(args.embeddings.size()) + ")");
  }
  std::vector<EmbeddingSet> sets;
  std::vector<std::string> names;
  Eigen::Index rows = 0;
  for (std::size_t f = 0; f < args.embeddings.size(); ++f) {
    // Labels first: a missing label file should not cost a full parse.
    auto labels = read_labels(args.labels[f]);
    auto set = read_embedding_set(args.embeddings[f]);
    if (static_cast<int>(labels.size()) != set.count()) {
      throw AlignmentError(args.labels[f] + " has " +
                           std::to_string(labels.size()) + " labels but " +
                           args.embeddings[f] + " has " +
                           std::to_string(set.count()) + " rows");
    }
    if (!sets.empty() && set.dim() != sets.front().dim()) {
      throw DimensionError(args.embeddings[f] + " has dim " +
                           std::to_string(set.dim()) + ", expected " +
                           std::to_string(sets.front().dim()));
    }
    rows += set.count();
    names.insert(names.end(), labels.begin(), labels.end());
    sets.push_back(std::move(set));
  }
  Tensor x(rows, sets.front().dim());
  Eigen::Index r = 0;
  for (const auto& s : sets) {
    x.middleRows(r, s.count()) = s.values;
    r += s.count();
  }
  const std::set<std::string> unique(names.begin(), names.end());
  std::vector<std::string> table(unique.begin(), unique.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < table.size(); ++i) index[table[i]] = static_cast<int>(i);
  std::vector<int> labels;
  labels.reserve(names.size());
  for (const auto& n : names) labels.push_back(index.at(n));

  args.gan.embedding_dim = static_cast<int>(x.cols());
  {
    auto check = args.gan;
    check.d_c = static_cast<int>(table.size());
    check.validate();
  }
  prepare_out_dir(args.out_dir);
  echo_config(sub, args.out_dir);
  log("info", "start",
      {{"rows", rows}, {"dim", x.cols()}, {"speakers", table.size()},
       {"config", to_json(args.gan)}});

  std::ofstream trace(join(args.out_dir, "train_log.jsonl"));
  if (!trace) throw DataError("cannot open train_log.jsonl in " + args.out_dir);
  std::mt19937_64 rng(args.gan.seed);
  const auto every = std::max(1, args.log_every);
  TrainResult result;
  try {
    result = train(args.gan, x, labels, table, rng, [&](const IterationLog& e) {
      trace << to_json(e).dump() << '\n';
      if (e.iteration % every == 0 || e.iteration == args.gan.iterations) {
        log("info", "iteration", to_json(e));
      }
    });
  } catch (const TrainingDivergence& e) {
    const auto path = join(args.out_dir, "model.last_good.ckpt");
    save_model(path, e.last_good());
    log("error", "diverged", {{"message", e.what()}, {"last_good", path}});
    throw;
  }
  const auto path = join(args.out_dir, "model.ckpt");
  save_model(path, result.model);
  log("info", "saved",
      {{"checkpoint", path},
       {"discriminator_updates", result.log.discriminator_updates},
       {"generator_updates", result.log.generator_updates},
       {"ce_clamped", result.log.ce_clamped}});
  const auto argmax = encode_argmax(result.model, x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += argmax[i] == labels[i];
  out << "trained " << args.gan.iterations << " iterations on " << rows
      << " windows; encoder agrees with training labels on "
      << hits << "/" << labels.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- diarize

int cmd_diarize(const DiarizeArgs& args, const CLI::App& sub, std::ostream& out,
                Log& log) {
  if (args.num_speakers < 0) throw ConfigError("--num-speakers must be >= 0");
  const auto model = load_model(args.model);
  SadMap sad;
  if (!args.sad.empty()) sad = read_sad(args.sad);

  DiarizeOptions options;
  if (args.num_speakers > 0) options.num_speakers = args.num_speakers;
  options.fuse = args.fuse;
  options.kmeans.restarts = args.restarts;
  options.count.max_speakers = args.max_speakers;
  options.count.p_binarize = args.p_binarize;
  options.seed = args.seed;

  prepare_out_dir(args.out_dir);
  echo_config(sub, args.out_dir);
  std::vector<RttmRecord> all;
  std::set<std::string> seen;
  for (const auto& path : args.embeddings) {
    const auto set = read_embedding_set(path);
    if (!seen.insert(set.session).second) {
      throw DataError("session " + set.session + " given twice");
    }
    if (set.dim() != model.config.embedding_dim) {
      throw DimensionError(path + " has dim " + std::to_string(set.dim()) +
                           " but the model expects " +
                           std::to_string(model.config.embedding_dim));
    }
    std::vector<Segment> speech;
    if (sad.empty()) {
      speech = segment_union(set.windows);
    } else {
      const auto it = sad.find(set.session);
      if (it == sad.end()) {
        throw DataError(args.sad + " has no segments for session " + set.session);
      }
      speech = it->second;
    }
    const auto timeline = attach_windows(set.session, speech, set.windows);
    const auto result = diarize(model, timeline, set.values, options);

    json sidecar = {{"session", result.session},
                    {"num_speakers", result.num_speakers},
                    {"estimated", result.estimate.has_value()},
                    {"fuse", args.fuse},
                    {"windows", set.count()},
                    {"turns", result.turns.size()}};
    if (result.estimate) {
      const auto& e = *result.estimate;
      const auto shown = std::min<Eigen::Index>(e.eigenvalues.size(),
                                                options.count.max_speakers + 1);
      sidecar["eigenvalues"] = std::vector<double>(
          e.eigenvalues.data(), e.eigenvalues.data() + shown);
      sidecar["gaps"] = e.gaps;
      sidecar["components"] = e.components;
      sidecar["capped"] = e.capped;
    }
    write_rttm(join(args.out_dir, set.session + ".rttm"), result.turns);
    write_text(join(args.out_dir, set.session + ".json"), sidecar.dump(2) + "\n");
    all.insert(all.end(), result.turns.begin(), result.turns.end());
    log("info", "session", sidecar);
    out << set.session << ": k=" << result.num_speakers << " ("
        << (result.estimate ? "estimated" : "given") << "), "
        << result.turns.size() << " turns\n";
  }
  write_rttm(join(args.out_dir, "hypothesis.rttm"), all);
  return kExitOk;
}

// ---------------------------------------------------------------- score

std::string der_row(const std::string& name, const DerReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-20s %7.2f %9.3f %9.3f %9.3f %9.3f\n",
                name.c_str(), r.der, r.missed, r.false_alarm, r.confusion,
                r.scored);
  return buf;
}

int cmd_score(const ScoreArgs& args, const CLI::App* sub, std::ostream& out,
              Log& log) {
  const auto ref = read_rttm(args.ref);
  const auto hyp = read_rttm(args.hyp);
  if (ref.empty()) throw DataError(args.ref + " has no SPEAKER records");
  const auto sessions = list_sessions(ref);
  for (const auto& s : list_sessions(hyp)) {
    if (std::find(sessions.begin(), sessions.end(), s) == sessions.end()) {
      log("warning", "unscored session", {{"session", s}});
    }
  }
  std::vector<DerReport> reports;
  json per_session = json::object();
  std::string table = "session                  DER%    missed  false_al confusion    scored\n";
  for (const auto& s : sessions) {
    reports.push_back(
        score(filter_session(ref, s), filter_session(hyp, s), args.collar));
    per_session[s] = to_json(reports.back());
    table += der_row(s, reports.back());
  }
  const auto total = combine(reports);
  table += der_row("TOTAL", total);
  json j = to_json(total);
  j.erase("speaker_map");
  json report = {{"collar", args.collar}, {"total", j}, {"sessions", per_session}};
  out << table << report.dump() << '\n';
  if (!args.out_dir.empty()) {
    prepare_out_dir(args.out_dir);
    echo_config(*sub, args.out_dir);
    write_text(join(args.out_dir, "score.json"), report.dump(2) + "\n");
  }
  log("info", "scored", {{"der", total.der}, {"sessions", sessions.size()}});
  return kExitOk;
}

// ---------------------------------------------------------------- export

int cmd_export(const ExportArgs& args, const CLI::App& sub, std::ostream& out,
               Log& log) {
  const auto model = load_model(args.model);
  prepare_out_dir(args.out_dir);
  echo_config(sub, args.out_dir);
  for (const auto& path : args.embeddings) {
    auto set = read_embedding_set(path);
    set.values = encode(model, set.values);
    const auto target = join(args.out_dir, set.session + ".latent");
    write_embedding_set(target, set);
    log("info", "exported", {{"path", target}, {"rows", set.count()},
                             {"dim", set.dim()}});
    out << target << ": " << set.count() << " x " << set.dim() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Speaker diarization with ClusterGAN latent embeddings",
               "latentdiar"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // --config after the subcommand name
  app.set_config("--config", "", "flat key=value file; flags on the command line win");
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic diarization corpus");
  s->add_option("--out-dir", synth.out_dir, "output directory")->required();
  s->add_option("--seed", synth.corpus.seed, "random seed");
  s->add_option("--num-speakers", synth.corpus.num_speakers, "speakers in the session");
  s->add_option("--segments-per-speaker", synth.corpus.segments_per_speaker,
                "windows per speaker");
  s->add_option("--dim", synth.corpus.dim, "embedding dimension");
  s->add_option("--separation", synth.corpus.separation,
                "minimum distance between speaker centroids");
  s->add_option("--noise", synth.corpus.noise_sigma,
                "root-mean-square length of the per-window noise");
  s->add_option("--session", synth.corpus.session, "session name");
  s->add_option("--max-turn-windows", synth.corpus.max_turn_windows,
                "longest speaker turn, in windows");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train ClusterGAN on labelled embeddings");
  t->add_option("--embeddings", tr.embeddings, "embedding files")->required();
  t->add_option("--labels", tr.labels, "one speaker id per row, per embedding file")
      ->required();
  t->add_option("--out-dir", tr.out_dir, "output directory")->required();
  t->add_option("--seed", tr.gan.seed, "random seed");
  t->add_option("--iterations", tr.gan.iterations, "training iterations");
  t->add_option("--d-n", tr.gan.d_n, "continuous latent width");
  t->add_option("--sigma", tr.gan.sigma, "std of the continuous latent");
  t->add_option("--lambda-gp", tr.gan.lambda_gp, "gradient penalty weight");
  t->add_option("--a", tr.gan.weights.adversarial, "adversarial loss weight");
  t->add_option("--b", tr.gan.weights.cosine, "cosine recovery loss weight");
  t->add_option("--c", tr.gan.weights.cross_entropy, "cross-entropy loss weight");
  t->add_option("--hidden-dim", tr.gan.hidden_dim, "hidden layer width");
  t->add_option("--batch-size", tr.gan.batch_size, "minibatch size");
  t->add_option("--n-critic", tr.gan.n_critic, "critic steps per iteration");
  t->add_option("--learning-rate", tr.gan.adam.alpha, "Adam step size");
  t->add_option("--beta1", tr.gan.adam.beta1, "Adam beta1");
  t->add_option("--beta2", tr.gan.adam.beta2, "Adam beta2");
  t->add_option("--log-every", tr.log_every, "stderr progress interval");

  DiarizeArgs di;
  auto* d = app.add_subcommand("diarize", "label sessions with a trained model");
  d->add_option("--model", di.model, "checkpoint from train")->required();
  d->add_option("--embeddings", di.embeddings, "session embedding files")->required();
  d->add_option("--sad", di.sad, "speech segments per session (default: union of windows)");
  d->add_option("--out-dir", di.out_dir, "output directory")->required();
  d->add_option("--num-speakers", di.num_speakers, "speakers per session, 0 to estimate");
  d->add_option("--max-speakers", di.max_speakers, "upper bound for the estimate");
  d->add_option("--p-binarize", di.p_binarize, "affinity row fraction kept");
  d->add_option("--restarts", di.restarts, "k-means restarts");
  d->add_flag("--fuse", di.fuse, "cluster the input and latent embeddings together");
  d->add_option("--seed", di.seed, "random seed");

  ScoreArgs sc;
  auto* c = app.add_subcommand("score", "diarization error rate");
  c->add_option("--ref", sc.ref, "reference RTTM")->required();
  c->add_option("--hyp", sc.hyp, "hypothesis RTTM")->required();
  c->add_option("--collar", sc.collar, "no-score zone around reference boundaries, s");
  c->add_option("--out-dir", sc.out_dir, "also write score.json here");

  ExportArgs ex;
  auto* e = app.add_subcommand("export-embeddings", "write encoder latents");
  e->add_option("--model", ex.model, "checkpoint from train")->required();
  e->add_option("--embeddings", ex.embeddings, "embedding files")->required();
  e->add_option("--out-dir", ex.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  Log log(err, sub->get_name());
  try {
    if (sub == s) return cmd_synth(synth, *s, out, log);
    if (sub == t) return cmd_train(tr, *t, out, log);
    if (sub == d) return cmd_diarize(di, *d, out, log);
    if (sub == c) return cmd_score(sc, c, out, log);
    return cmd_export(ex, *e, out, log);
  } catch (const ConfigError& error) {
    log("error", "config", {{"message", error.what()}});
    return kExitUsage;
  } catch (const DivergenceError& error) {
    log("error", "divergence", {{"message", error.what()}});
    return kExitDivergence;
  } catch (const Error& error) {
    // Data, dimension, format and state errors.
    log("error", "data", {{"message", error.what()}});
    return kExitData;
  } catch (const std::exception& error) {
    log("error", "internal", {{"message", error.what()}});
    return kExitInternal;
  }
}

}  // namespace latentdiar
