// latentdiar/clustergan.cc
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

#include "latentdiar/clustergan.h"

#include <chrono>
#include <cmath>
#include <set>

namespace latentdiar {

void ClusterGanConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(d_n >= 1, "d_n must be >= 1");
  require(d_c >= 2, "d_c (number of training speakers) must be >= 2");
  require(embedding_dim >= 1, "embedding_dim must be positive");
  require(hidden_dim >= 1, "hidden_dim must be positive");
  require(sigma > 0, "sigma must be > 0");
  require(lambda_gp >= 0, "lambda_gp must be >= 0");
  require(batch_size >= 1, "batch size must be positive");
  require(n_critic >= 1, "n_critic must be positive");
  require(iterations >= 0, "iterations must be >= 0");
  require(weights.adversarial >= 0 && weights.cosine >= 0 &&
              weights.cross_entropy >= 0,
          "loss weights a, b, c must be >= 0");
  require(adam.alpha > 0 && adam.epsilon > 0, "Adam alpha/epsilon must be > 0");
  require(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 &&
              adam.beta2 < 1,
          "Adam betas must lie in [0, 1)");
}

nlohmann::json to_json(const ClusterGanConfig& c) {
  return {{"d_n", c.d_n},
          {"d_c", c.d_c},
          {"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"sigma", c.sigma},
          {"lambda_gp", c.lambda_gp},
          {"batch_size", c.batch_size},
          {"n_critic", c.n_critic},
          {"iterations", c.iterations},
          {"a", c.weights.adversarial},
          {"b", c.weights.cosine},
          {"c", c.weights.cross_entropy},
          {"adam_alpha", c.adam.alpha},
          {"adam_beta1", c.adam.beta1},
          {"adam_beta2", c.adam.beta2},
          {"adam_epsilon", c.adam.epsilon},
          {"seed", c.seed}};
}

ClusterGanConfig config_from_json(const nlohmann::json& j) {
  try {
    ClusterGanConfig c;
    c.d_n = j.at("d_n");
    c.d_c = j.at("d_c");
    c.embedding_dim = j.at("embedding_dim");
    c.hidden_dim = j.at("hidden_dim");
    c.sigma = j.at("sigma");
    c.lambda_gp = j.at("lambda_gp");
    c.batch_size = j.at("batch_size");
    c.n_critic = j.at("n_critic");
    c.iterations = j.at("iterations");
    c.weights.adversarial = j.at("a");
    c.weights.cosine = j.at("b");
    c.weights.cross_entropy = j.at("c");
    c.adam.alpha = j.at("adam_alpha");
    c.adam.beta1 = j.at("adam_beta1");
    c.adam.beta2 = j.at("adam_beta2");
    c.adam.epsilon = j.at("adam_epsilon");
    c.seed = j.at("seed");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
}

Eigen::VectorXf LatentCode::concat() const {
  Eigen::VectorXf out(continuous.size() + categorical.size());
  out << continuous, categorical;
  return out;
}

Tensor LatentBatch::concat() const {
  Tensor out(continuous.rows(), continuous.cols() + num_speakers);
  out.leftCols(continuous.cols()) = continuous;
  out.rightCols(num_speakers) = one_hot_rows<float>(speakers, num_speakers);
  return out;
}

namespace {

std::discrete_distribution<int> make_prior(int d_c,
                                           std::span<const int> labels) {
  std::vector<double> counts(static_cast<std::size_t>(d_c),
                             labels.empty() ? 1.0 : 0.0);
  for (int y : labels) {
    if (y < 0 || y >= d_c) {
      throw ConfigError("training label " + std::to_string(y) +
                        " outside [0, " + std::to_string(d_c) + ")");
    }
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  return std::discrete_distribution<int>(counts.begin(), counts.end());
}

}  // namespace

LatentSampler::LatentSampler(int d_n, int d_c, double sigma,
                             std::span<const int> training_labels)
    : d_n_(d_n),
      d_c_(d_c),
      normal_(0.0, sigma),
      prior_(make_prior(d_c, training_labels)) {
  if (d_n < 1 || d_c < 1) throw ConfigError("latent dims must be positive");
  if (!(sigma > 0)) throw ConfigError("sigma must be > 0");
}

LatentCode LatentSampler::sample(std::mt19937_64& rng,
                                 std::optional<int> speaker_index) {
  LatentCode code;
  code.continuous.resize(d_n_);
  for (int i = 0; i < d_n_; ++i) {
    code.continuous(i) = static_cast<float>(normal_(rng));
  }
  if (speaker_index) {
    if (*speaker_index < 0 || *speaker_index >= d_c_) {
      throw ConfigError("speaker index " + std::to_string(*speaker_index) +
                        " outside [0, " + std::to_string(d_c_) + ")");
    }
    code.speaker_index = *speaker_index;
  } else {
    code.speaker_index = prior_(rng);
  }
  code.categorical = Eigen::VectorXf::Zero(d_c_);
  code.categorical(code.speaker_index) = 1.0f;
  return code;
}

LatentBatch LatentSampler::sample_batch(std::mt19937_64& rng, int m) {
  LatentBatch batch;
  batch.num_speakers = d_c_;
  batch.continuous.resize(m, d_n_);
  batch.speakers.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d_n_; ++j) {
      batch.continuous(i, j) = static_cast<float>(normal_(rng));
    }
    batch.speakers[static_cast<std::size_t>(i)] = prior_(rng);
  }
  return batch;
}

ClusterGanModel ClusterGanModel::init(const ClusterGanConfig& config,
                                      std::vector<std::string> speakers,
                                      std::mt19937_64& rng) {
  config.validate();
  if (static_cast<int>(speakers.size()) != config.d_c) {
    throw ConfigError("speaker table has " + std::to_string(speakers.size()) +
                      " entries but d_c = " + std::to_string(config.d_c));
  }
  ClusterGanModel model;
  model.config = config;
  model.speaker_table = std::move(speakers);
  const int d = config.latent_dim();
  const int e = config.embedding_dim;
  const int h = config.hidden_dim;
  const std::uint64_t g_seed = rng();
  const std::uint64_t d_seed = rng();
  const std::uint64_t e_seed = rng();
  const int g_dims[] = {d, h, e};
  const int d_dims[] = {e, h, h, 1};
  const int e_dims[] = {e, h, d};
  model.generator = Mlp<float>::create(g_dims, Activation::kLinear, g_seed);
  model.discriminator = Mlp<float>::create(d_dims, Activation::kLinear, d_seed);
  model.encoder = Mlp<float>::create(e_dims, Activation::kLinear, e_seed);
  model.validate();
  return model;
}

void ClusterGanModel::validate() const {
  config.validate();
  const int d = config.latent_dim();
  const int e = config.embedding_dim;
  if (generator.input_dim() != d || generator.output_dim() != e) {
    throw DimensionError("generator must map latent dim to embedding dim");
  }
  if (discriminator.input_dim() != e || discriminator.output_dim() != 1) {
    throw DimensionError("discriminator must map embedding dim to a scalar");
  }
  if (encoder.input_dim() != e || encoder.output_dim() != d) {
    throw DimensionError("encoder must map embedding dim to latent dim");
  }
  for (const auto* net : {&generator, &discriminator, &encoder}) {
    if (net->layers().back().activation != Activation::kLinear) {
      throw DimensionError("network output layers must be linear");
    }
  }
  if (static_cast<int>(speaker_table.size()) != config.d_c) {
    throw DimensionError("speaker table length differs from d_c");
  }
  std::set<std::string> unique(speaker_table.begin(), speaker_table.end());
  if (unique.size() != speaker_table.size()) {
    throw ConfigError("speaker table has duplicate entries");
  }
}

bool ClusterGanModel::operator==(const ClusterGanModel& other) const {
  return to_json(config) == to_json(other.config) &&
         generator == other.generator &&
         discriminator == other.discriminator && encoder == other.encoder &&
         speaker_table == other.speaker_table && iteration == other.iteration;
}

CheckpointFile to_checkpoint(const ClusterGanModel& model) {
  CheckpointFile file;
  file.meta["format"] = "latentdiar-clustergan";
  file.meta["version"] = 1;
  file.meta["config"] = to_json(model.config);
  file.meta["seed"] = model.config.seed;
  file.meta["iteration"] = model.iteration;
  file.meta["speakers"] = model.speaker_table;
  file.meta["softmax_tail"] = model.config.d_c;
  file.meta["topology"] = {{"generator", mlp_topology(model.generator)},
                           {"discriminator", mlp_topology(model.discriminator)},
                           {"encoder", mlp_topology(model.encoder)}};
  append_mlp("generator", model.generator, &file);
  append_mlp("discriminator", model.discriminator, &file);
  append_mlp("encoder", model.encoder, &file);
  return file;
}

ClusterGanModel from_checkpoint(const CheckpointFile& file) {
  ClusterGanModel model;
  try {
    if (file.meta.at("format") != "latentdiar-clustergan") {
      throw FormatError("checkpoint is not a clustergan model");
    }
    model.config = config_from_json(file.meta.at("config"));
    model.iteration = file.meta.at("iteration").get<std::int64_t>();
    model.speaker_table =
        file.meta.at("speakers").get<std::vector<std::string>>();
    const auto& topo = file.meta.at("topology");
    model.generator = extract_mlp("generator", topo.at("generator"), file);
    model.discriminator =
        extract_mlp("discriminator", topo.at("discriminator"), file);
    model.encoder = extract_mlp("encoder", topo.at("encoder"), file);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const std::string& path, const ClusterGanModel& model) {
  write_checkpoint(path, to_checkpoint(model));
}

ClusterGanModel load_model(const std::string& path) {
  return from_checkpoint(read_checkpoint(path));
}

nlohmann::json to_json(const IterationLog& e) {
  return {{"iteration", e.iteration},
          {"critic_loss", e.critic_loss},
          {"gradient_penalty", e.gradient_penalty},
          {"generator_loss", e.generator_loss},
          {"cos", e.cosine_loss},
          {"ce", e.ce_loss},
          {"wall_time", e.wall_seconds}};
}

namespace {

void check_training_data(const ClusterGanConfig& config, const Tensor& x,
                         std::span<const int> labels) {
  if (x.cols() != config.embedding_dim) {
    throw DimensionError("training embeddings have width " +
                         std::to_string(x.cols()) + ", expected " +
                         std::to_string(config.embedding_dim));
  }
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw AlignmentError("one label per training embedding is required");
  }
  if (x.rows() < config.batch_size) {
    throw ConfigError("need at least batch_size (" +
                      std::to_string(config.batch_size) +
                      ") training embeddings, got " + std::to_string(x.rows()));
  }
  if (!x.allFinite()) throw DataError("training embeddings contain NaN/Inf");
  std::vector<int> counts(static_cast<std::size_t>(config.d_c), 0);
  for (int y : labels) {
    if (y < 0 || y >= config.d_c) {
      throw ConfigError("label " + std::to_string(y) + " outside speaker table");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      throw ConfigError("speaker class " + std::to_string(k) +
                        " has no training embeddings");
    }
  }
}

}  // namespace

TrainResult train(const ClusterGanConfig& config_in, const Tensor& embeddings,
                  std::span<const int> labels,
                  std::vector<std::string> speaker_table, std::mt19937_64& rng,
                  const IterationCallback& on_iteration) {
  ClusterGanConfig config = config_in;
  config.d_c = static_cast<int>(speaker_table.size());
  config.validate();
  check_training_data(config, embeddings, labels);

  TrainResult result;
  result.model = ClusterGanModel::init(config, std::move(speaker_table), rng);
  ClusterGanModel& model = result.model;
  TrainingLog& log = result.log;

  LatentSampler sampler(config.d_n, config.d_c, config.sigma, labels);
  auto d_state = AdamState<float>::init(model.discriminator, config.adam);
  auto g_state = AdamState<float>::init(model.generator, config.adam);
  auto e_state = AdamState<float>::init(model.encoder, config.adam);

  const int m = config.batch_size;
  const auto a = static_cast<float>(config.weights.adversarial);
  const auto lambda = static_cast<float>(config.lambda_gp);
  std::uniform_int_distribution<Eigen::Index> pick(0, embeddings.rows() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor real(m, embeddings.cols());
  std::vector<float> mix(static_cast<std::size_t>(m));
  const auto t0 = std::chrono::steady_clock::now();

  for (std::int64_t it = 1; it <= config.iterations; ++it) {
    ClusterGanModel last_good = model;
    IterationLog entry;
    entry.iteration = it;
    try {
      for (int tau = 0; tau < config.n_critic; ++tau) {
        for (int i = 0; i < m; ++i) real.row(i) = embeddings.row(pick(rng));
        const LatentBatch z = sampler.sample_batch(rng, m);
        const Tensor fake = predict(model.generator, z.concat());
        for (auto& e : mix) e = static_cast<float>(unit(rng));
        auto critic = wgan_critic_loss<float>(model.discriminator, real, fake,
                                              lambda, std::span<const float>(mix));
        critic.grads.scale(a);
        adam_step(model.discriminator, critic.grads, d_state);
        ++log.discriminator_updates;
        entry.critic_loss = critic.loss;
        entry.gradient_penalty = critic.gradient_penalty;
      }

      const LatentBatch z = sampler.sample_batch(rng, m);
      auto ge = generator_encoder_loss<float>(
          model.generator, model.discriminator, model.encoder, z.continuous,
          z.speakers, z.num_speakers, config.weights);
      adam_step(model.generator, ge.generator, g_state);
      adam_step(model.encoder, ge.encoder, e_state);
      ++log.generator_updates;
      log.ce_clamped += ge.ce_clamped;
      entry.generator_loss = ge.adversarial;
      entry.cosine_loss = ge.cosine;
      entry.ce_loss = ge.cross_entropy;
    } catch (const DivergenceError& e) {
      throw TrainingDivergence(
          "training diverged at iteration " + std::to_string(it) + ": " +
              e.what(),
          std::move(last_good));
    }
    model.iteration = it;
    entry.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    log.iterations.push_back(entry);
    if (on_iteration) on_iteration(entry);
  }
  return result;
}

Tensor encode(const ClusterGanModel& model, const Tensor& embeddings) {
  if (embeddings.cols() != model.config.embedding_dim) {
    throw DimensionError("embeddings have width " +
                         std::to_string(embeddings.cols()) +
                         ", model expects " +
                         std::to_string(model.config.embedding_dim));
  }
  const int d_n = model.config.d_n;
  const int d_c = model.config.d_c;
  Tensor out(embeddings.rows(), d_n + d_c);
  Tensor row(1, embeddings.cols());
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    row = embeddings.row(i);
    const Tensor y = predict(model.encoder, row);
    out.block(i, 0, 1, d_n) = y.leftCols(d_n);
    out.block(i, d_n, 1, d_c) = softmax_rows<float>(y.rightCols(d_c));
  }
  return out;
}

std::vector<int> encode_argmax(const ClusterGanModel& model,
                               const Tensor& embeddings) {
  const Tensor z = encode(model, embeddings);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index k = 0;
    z.row(i).tail(model.config.d_c).maxCoeff(&k);
    out[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  return out;
}

}  // namespace latentdiar
