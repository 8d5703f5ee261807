// latentdiar/clustergan_test.cc
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

#include <cmath>
#include <filesystem>
#include <random>

#include "gradient_check.h"
#include "latentdiar/clustergan.h"
#include "latentdiar/errors.h"
#include "latentdiar/losses.h"
#include "loss_cases.h"

namespace latentdiar {
namespace {

using testing::random_matrix;

// Four well separated clusters in a small embedding space.
struct TinyData {
  Tensor x;
  std::vector<int> labels;
  std::vector<std::string> speakers = {"a", "b", "c", "d"};
};

TinyData tiny_data(int per_class, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 0.1f);
  TinyData d;
  d.x.resize(4 * per_class, dim);
  for (int i = 0; i < 4 * per_class; ++i) {
    const int c = i % 4;
    d.labels.push_back(c);
    for (int j = 0; j < dim; ++j) d.x(i, j) = n(rng) + (j % 4 == c ? 2.0f : 0.0f);
  }
  return d;
}

ClusterGanConfig tiny_config(std::int64_t iterations) {
  ClusterGanConfig c;
  c.d_n = 3;
  c.embedding_dim = 8;
  c.hidden_dim = 16;
  c.batch_size = 8;
  c.iterations = iterations;
  c.adam.alpha = 1e-3;
  return c;
}

TEST_CASE("latent sampler moments match N(0, sigma^2)") {
  constexpr int kDraws = 100000;
  constexpr int kDn = 30;
  constexpr double kSigma = 0.1;
  LatentSampler sampler(kDn, 4, kSigma);
  std::mt19937_64 rng(12);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kDn);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(kDn);
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd z = sampler.sample(rng).continuous.cast<double>();
    sum += z;
    sq += z.cwiseProduct(z);
  }
  const Eigen::VectorXd mean = sum / kDraws;
  const Eigen::VectorXd var =
      (sq - kDraws * mean.cwiseProduct(mean)) / (kDraws - 1);
  const double bound = 3 * kSigma / std::sqrt(double(kDraws));
  for (int j = 0; j < kDn; ++j) {
    CHECK(std::abs(mean(j)) < bound);
    CHECK(std::abs(var(j) - kSigma * kSigma) < 0.05 * kSigma * kSigma);
  }
}

TEST_CASE("latent sampler one-hot part") {
  LatentSampler sampler(5, 4, 0.1);
  std::mt19937_64 rng(1);
  const LatentCode code = sampler.sample(rng, 2);
  CHECK(code.speaker_index == 2);
  CHECK(code.categorical.size() == 4);
  CHECK(code.categorical(0) == 0.0f);
  CHECK(code.categorical(1) == 0.0f);
  CHECK(code.categorical(2) == 1.0f);
  CHECK(code.categorical(3) == 0.0f);
  CHECK(code.concat().size() == 9);
  CHECK_THROWS_AS(sampler.sample(rng, 4), ConfigError);
  CHECK_THROWS_AS(sampler.sample(rng, -1), ConfigError);
}

TEST_CASE("latent sampler draws speakers from the label distribution") {
  const std::vector<int> labels = {0, 0, 0, 1, 2, 2, 2, 2};
  LatentSampler sampler(2, 3, 0.1, labels);
  std::mt19937_64 rng(4);
  const LatentBatch batch = sampler.sample_batch(rng, 80000);
  std::vector<int> count(3, 0);
  for (int s : batch.speakers) ++count[s];
  CHECK(count[0] / 80000.0 == doctest::Approx(3.0 / 8).epsilon(0.03));
  CHECK(count[1] / 80000.0 == doctest::Approx(1.0 / 8).epsilon(0.03));
  CHECK(count[2] / 80000.0 == doctest::Approx(4.0 / 8).epsilon(0.03));
  const Tensor z = batch.concat();
  CHECK(z.cols() == 5);
  CHECK((z.rightCols(3).rowwise().sum().array() == 1.0f).all());
}

TEST_CASE("gradient penalty vanishes for a unit-norm linear critic") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    auto critic = Mlp<double>::create(std::vector<int>{6, 1},
                                      Activation::kLinear, rng());
    auto& w = critic.mutable_layers()[0].weight;
    w = random_matrix(rng, 1, 6);
    w /= w.norm();
    const Matrix<double> real = random_matrix(rng, 16, 6, 3.0);
    const Matrix<double> fake = random_matrix(rng, 16, 6, 3.0);
    const auto loss = wgan_critic_loss(critic, real, fake, 10.0, rng);
    CHECK(std::abs(loss.gradient_penalty) <= 1e-10);
    CHECK(gradient_penalty(critic, real) <= 1e-10);
  }
}

TEST_CASE("gradient penalty is positive for random nonlinear critics") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto critic = testing::random_mlp(rng, {6, 8, 8, 1});
    const Matrix<double> real = random_matrix(rng, 16, 6);
    const Matrix<double> fake = random_matrix(rng, 16, 6);
    CHECK(wgan_critic_loss(critic, real, fake, 10.0, rng).gradient_penalty > 0);
  }
}

TEST_CASE("Wasserstein term cancels when real and fake coincide") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto critic = testing::random_mlp(rng, {5, 7, 7, 1});
    const Matrix<double> x = random_matrix(rng, 12, 5);
    CHECK(wgan_critic_loss(critic, x, x, 10.0, rng).wasserstein == 0.0);
  }
}

TEST_CASE("critic loss rejects mismatched batches and non-finite input") {
  std::mt19937_64 rng(2);
  const auto critic = testing::random_mlp(rng, {4, 3, 3, 1});
  const Matrix<double> a = random_matrix(rng, 4, 4);
  const Matrix<double> b = random_matrix(rng, 5, 4);
  CHECK_THROWS_AS(wgan_critic_loss(critic, a, b, 10.0, rng), DimensionError);
  Matrix<double> bad = a;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(wgan_critic_loss(critic, a, bad, 10.0, rng), DivergenceError);
}

TEST_CASE("cosine recovery loss: identical, orthogonal, opposite") {
  Matrix<double> z(1, 3), p(1, 3);
  z << 1, 2, 3;
  CHECK(cosine_recovery_loss(z, z).loss == doctest::Approx(0.0));
  p << 2, -1, 0;
  CHECK(cosine_recovery_loss(z, p).loss == doctest::Approx(1.0));
  CHECK(cosine_recovery_loss(z, Matrix<double>(-z)).loss ==
        doctest::Approx(2.0));
  p << 0, 0, 0;
  CHECK_THROWS_AS(cosine_recovery_loss(z, p), DegenerateVectorError);
}

TEST_CASE("cosine recovery loss is scale invariant and bounded") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Matrix<double> z = random_matrix(rng, 7, 4);
    const Matrix<double> p = random_matrix(rng, 7, 4);
    const double base = cosine_recovery_loss(z, p).loss;
    CHECK(base >= 0.0);
    CHECK(base <= 2.0);
    for (double s : {1e-3, 0.5, 3.0, 1e4}) {
      CHECK(cosine_recovery_loss(z, Matrix<double>(s * p)).loss ==
            doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("cross-entropy: perfect and uniform predictions") {
  const std::vector<int> labels = {0, 3, 1};
  const Matrix<double> onehot = one_hot_rows<double>(labels, 4);
  CHECK(cluster_ce_loss(onehot, onehot) == 0.0);
  const Matrix<double> uniform = Matrix<double>::Constant(3, 4, 0.25);
  CHECK(cluster_ce_loss(onehot, uniform) == doctest::Approx(std::log(4.0)));
  const auto fused =
      cluster_ce_from_logits<double>(labels, Matrix<double>::Zero(3, 4));
  CHECK(fused.loss == doctest::Approx(std::log(4.0)));
  CHECK(cluster_ce_loss(onehot, softmax_rows(Matrix<double>(Matrix<double>::Zero(3, 4)))) ==
        doctest::Approx(std::log(4.0)));
}

TEST_CASE("cross-entropy clamps zero probabilities and counts them") {
  const std::vector<int> labels = {0, 1};
  const Matrix<double> onehot = one_hot_rows<double>(labels, 2);
  Matrix<double> probs(2, 2);
  probs << 0, 1, 0, 1;
  std::int64_t clamped = 0;
  const double loss = cluster_ce_loss(onehot, probs, &clamped);
  CHECK(clamped == 1);
  CHECK(loss == doctest::Approx(-std::log(1e-30) / 2));

  Matrix<double> logits(2, 2);
  logits << -1e5, 1e5, 0, 0;
  clamped = 0;
  const auto fused = cluster_ce_from_logits<double>(labels, logits, &clamped);
  CHECK(clamped == 1);
  CHECK(std::isfinite(fused.loss));

  probs << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(cluster_ce_loss(onehot, probs), DataError);
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  std::mt19937_64 rng(1);
  Matrix<double> logits = random_matrix(rng, 10, 6, 50.0);
  logits(0, 0) = 800.0;
  const Matrix<double> p = softmax_rows(logits);
  CHECK(p.allFinite());
  for (int i = 0; i < 10; ++i) CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("critic loss gradient matches finite differences") {
  std::mt19937_64 rng(101);
  int checked = 0;
  while (checked < 20) {
    const auto c = testing::critic_case(rng);
    if (c.skipped) continue;
    ++checked;
    CHECK(c.max_rel_error < testing::kGradientRelTol);
  }
}

TEST_CASE("cosine, cross-entropy and joint gradients match finite differences") {
  const LossWeights cos_only{0.0, 1.0, 0.0};
  const LossWeights ce_only{0.0, 0.0, 1.0};
  const LossWeights adv_only{1.0, 0.0, 0.0};
  const LossWeights joint{};
  std::mt19937_64 rng(202);
  for (const auto& w : {cos_only, ce_only, adv_only, joint}) {
    int checked = 0;
    while (checked < 10) {
      const auto c = testing::generator_encoder_case(rng, w);
      if (c.skipped) continue;
      ++checked;
      CHECK(c.max_rel_error < testing::kGradientRelTol);
    }
  }
}

TEST_CASE("config validation") {
  ClusterGanConfig c = tiny_config(1);
  c.d_c = 4;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.d_c = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.sigma = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.weights.cosine = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(config_from_json(to_json(c)).d_n == c.d_n);
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
}

TEST_CASE("zero iterations return the initialised model") {
  const TinyData d = tiny_data(8, 8, 1);
  std::mt19937_64 r1(44), r2(44);
  const auto result = train(tiny_config(0), d.x, d.labels, d.speakers, r1);
  ClusterGanConfig c = tiny_config(0);
  c.d_c = 4;
  const auto fresh = ClusterGanModel::init(c, d.speakers, r2);
  CHECK(result.model == fresh);
  CHECK(result.log.iterations.empty());
  CHECK(result.log.discriminator_updates == 0);
}

TEST_CASE("training performs n_critic critic updates per iteration") {
  const TinyData d = tiny_data(8, 8, 2);
  std::mt19937_64 rng(5);
  int callbacks = 0;
  const auto result = train(tiny_config(7), d.x, d.labels, d.speakers, rng,
                            [&](const IterationLog&) { ++callbacks; });
  CHECK(result.log.discriminator_updates == 7 * 5);
  CHECK(result.log.generator_updates == 7);
  CHECK(result.log.iterations.size() == 7);
  CHECK(callbacks == 7);
  CHECK(result.model.iteration == 7);
  const auto j = to_json(result.log.iterations.back());
  for (const char* key : {"iteration", "critic_loss", "gradient_penalty",
                          "generator_loss", "cos", "ce", "wall_time"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const TinyData d = tiny_data(8, 8, 3);
  std::mt19937_64 r1(9), r2(9);
  const auto a = train(tiny_config(15), d.x, d.labels, d.speakers, r1);
  const auto b = train(tiny_config(15), d.x, d.labels, d.speakers, r2);
  CHECK(serialize_checkpoint(to_checkpoint(a.model)) ==
        serialize_checkpoint(to_checkpoint(b.model)));
  CHECK(a.log.iterations.back().critic_loss ==
        b.log.iterations.back().critic_loss);
}

TEST_CASE("training rejects unusable data") {
  const TinyData d = tiny_data(8, 8, 5);
  std::mt19937_64 rng(1);
  // Fewer rows than the batch size.
  const Tensor few = d.x.topRows(4);
  const std::vector<int> few_labels(d.labels.begin(), d.labels.begin() + 4);
  CHECK_THROWS_AS(train(tiny_config(1), few, few_labels, d.speakers, rng),
                  ConfigError);
  // A speaker with no rows.
  auto table = d.speakers;
  table.push_back("e");
  CHECK_THROWS_AS(train(tiny_config(1), d.x, d.labels, table, rng),
                  ConfigError);
  // Misaligned labels, wrong width, label out of range.
  const std::vector<int> short_labels(d.labels.begin(), d.labels.end() - 1);
  CHECK_THROWS_AS(train(tiny_config(1), d.x, short_labels, d.speakers, rng),
                  AlignmentError);
  const Tensor narrow = d.x.leftCols(7);
  CHECK_THROWS_AS(train(tiny_config(1), narrow, d.labels, d.speakers, rng),
                  DimensionError);
  auto out_of_range = d.labels;
  out_of_range[0] = 9;
  CHECK_THROWS(train(tiny_config(1), d.x, out_of_range, d.speakers, rng));
}

TEST_CASE("divergence aborts with the last good model") {
  const TinyData d = tiny_data(8, 8, 6);
  ClusterGanConfig c = tiny_config(50);
  c.adam.alpha = 1e37;
  std::mt19937_64 rng(3);
  try {
    train(c, d.x, d.labels, d.speakers, rng);
    FAIL("expected divergence");
  } catch (const TrainingDivergence& e) {
    const auto& good = e.last_good();
    for (const auto* net : {&good.generator, &good.discriminator, &good.encoder})
      for (const auto& l : net->layers()) CHECK(l.weight.allFinite());
  }
}

TEST_CASE("encode: width, softmax rows, batch invariance") {
  const TinyData d = tiny_data(8, 8, 7);
  std::mt19937_64 rng(2);
  const auto model = train(tiny_config(5), d.x, d.labels, d.speakers, rng).model;
  const Tensor z = encode(model, d.x);
  CHECK(z.rows() == d.x.rows());
  CHECK(z.cols() == 3 + 4);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    CHECK(std::abs(z.row(i).tail(4).sum() - 1.0f) <= 1e-5f);
    CHECK((z.row(i).tail(4).array() >= 0).all());
    const Tensor one = encode(model, Tensor(d.x.row(i)));
    CHECK(one == Tensor(z.row(i)));
  }
  const Tensor head = encode(model, Tensor(d.x.topRows(5)));
  CHECK(head == Tensor(z.topRows(5)));
  CHECK_THROWS_AS(encode(model, Tensor(d.x.leftCols(6))), DimensionError);
}

TEST_CASE("model checkpoints round-trip bit-exactly") {
  const TinyData d = tiny_data(8, 8, 8);
  std::mt19937_64 rng(2);
  const auto model = train(tiny_config(3), d.x, d.labels, d.speakers, rng).model;
  const auto path = std::filesystem::temp_directory_path() / "ld_model.ckpt";
  save_model(path.string(), model);
  const auto loaded = load_model(path.string());
  CHECK(loaded == model);
  CHECK(loaded.iteration == 3);
  CHECK(loaded.speaker_table == d.speakers);
  CHECK(serialize_checkpoint(to_checkpoint(loaded)) ==
        serialize_checkpoint(to_checkpoint(model)));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace latentdiar
