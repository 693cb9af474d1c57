#include <gtest/gtest.h>

#include <algorithm>

#include "aucap/error.hpp"
#include "aucap/nn/gradcheck.hpp"
#include "aucap/random.hpp"
#include "aucap/sve_predictor.hpp"
#include "test_util.hpp"

using namespace aucap;
using namespace aucap::sve;

namespace {

struct Toy {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

// Four classes around well separated sign-vector centres; label = class one-hot.
Toy separable_toy(int per_class, Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::MatrixXd centres =
      (uniform_matrix(4, dim, -1.0, 1.0, rng).array() > 0.0).cast<double>() * 4.0 - 2.0;
  Toy t{Eigen::MatrixXd(4 * per_class, dim), Eigen::MatrixXd::Zero(4 * per_class, 4)};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      t.x.row(r) = centres.row(c) + normal_matrix(1, dim, 0.3, rng);
      t.y(r, c) = 1.0;
    }
  }
  return t;
}

// Probability that a random positive outranks a random negative.
double auc(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& labels) {
  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < scores.size(); ++i) (labels(i) > 0.5 ? pos : neg).push_back(scores(i));
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

}  // namespace

TEST(Mlp, OutputRangeShapeAndZeroWeights) {
  Rng rng(1);
  Mlp m(2048, 7, {32, 16, 16, 8, 8, 8}, rng);
  EXPECT_EQ(m.layers().size(), 7u);
  const Eigen::MatrixXd p = m.predict(normal_matrix(3, 2048, 5.0, rng));
  EXPECT_EQ(p.rows(), 3);
  EXPECT_EQ(p.cols(), 7);
  EXPECT_GT(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  for (auto* param : m.parameters()) param->value.setZero();
  EXPECT_EQ(m.predict(normal_matrix(2, 2048, 1.0, rng)), Eigen::MatrixXd::Constant(2, 7, 0.5));
  EXPECT_THROW(m.predict(Eigen::MatrixXd::Zero(1, 100)), Error);
}

TEST(Mlp, DefaultWidthsHaveSixHiddenLayers) {
  Rng rng(2);
  const MlpConfig cfg;
  Mlp m(2048, 50, cfg.hidden, rng);
  ASSERT_EQ(m.layers().size(), 7u);
  EXPECT_EQ(m.layers().front().in_dim(), 2048);
  EXPECT_EQ(m.layers().back().out_dim(), 50);
  for (std::size_t i = 1; i < m.layers().size(); ++i) {
    EXPECT_EQ(m.layers()[i].in_dim(), m.layers()[i - 1].out_dim());
  }
}

TEST(Mlp, GradientsOfShrunkVariant) {
  Rng rng(3);
  Mlp m(6, 3, {5, 4}, rng);
  const Eigen::MatrixXd x = normal_matrix(4, 6, 1.0, rng);
  const Eigen::MatrixXd y = (uniform_matrix(4, 3, 0, 1, rng).array() > 0.5).cast<double>();
  auto loss = [&](nn::Graph& g) {
    Rng mask_rng(99);
    return nn::sigmoid_binary_cross_entropy(m.logits(g, g.constant(x), nn::Mode::train, 0.5, mask_rng), y);
  };
  const auto params = m.parameters();
  const auto r = nn::check_gradients(loss, params);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Mlp, InferIsDeterministic) {
  Rng rng(4);
  Mlp m(8, 2, {6, 6}, rng);
  const Eigen::MatrixXd x = normal_matrix(5, 8, 1.0, rng);
  EXPECT_EQ(m.predict(x), m.predict(x));
}

TEST(TrainMlp, SeparableToyReachesExactMatch) {
  const Toy t = separable_toy(40, 16, 5);
  MlpConfig cfg;
  cfg.hidden = {64, 64, 32, 32, 16, 16};
  cfg.epochs = 100;
  const MlpTrainResult r = train_mlp(t.x, t.y, Eigen::MatrixXd(), Eigen::MatrixXd(), cfg);
  Mlp model = r.model;
  const Eigen::MatrixXd p = model.predict(t.x);
  const Eigen::MatrixXd hard = (p.array() > 0.5).cast<double>();
  EXPECT_EQ(hard, t.y);
  EXPECT_GT(auc(p, t.y), 0.95);
  // trend: the last ten epochs average below the first ten
  const auto& l = r.train_loss;
  ASSERT_EQ(l.size(), 100u);
  double head = 0, tail = 0;
  for (int i = 0; i < 10; ++i) {
    head += l[i];
    tail += l[l.size() - 1 - i];
  }
  EXPECT_LT(tail, 0.5 * head);
}

TEST(TrainMlp, FixedSeedIsBitwiseReproducible) {
  const Toy t = separable_toy(10, 8, 6);
  MlpConfig cfg;
  cfg.hidden = {16, 8};
  cfg.epochs = 5;
  auto a = train_mlp(t.x, t.y, t.x, t.y, cfg);
  auto b = train_mlp(t.x, t.y, t.x, t.y, cfg);
  const auto pa = a.model.parameters(), pb = b.model.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_GE(a.best_epoch, 1);
  EXPECT_LE(a.best_epoch, 5);
  EXPECT_EQ(a.validation_loss[a.best_epoch - 1],
            *std::min_element(a.validation_loss.begin(), a.validation_loss.end()));
}

TEST(TrainMlp, Errors) {
  MlpConfig cfg;
  cfg.hidden = {4};
  try {
    train_mlp(Eigen::MatrixXd(0, 3), Eigen::MatrixXd(0, 2), {}, {}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_input);
  }
  try {
    train_mlp(Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Constant(2, 2, 0.5), {}, {}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(Mlp, CheckpointRoundTrip) {
  Rng rng(7);
  Mlp m(10, 3, {8, 4}, rng);
  testutil::TempDir dir("mlp");
  m.save(dir / "mlp.ckpt");
  Mlp back = Mlp::load(dir / "mlp.ckpt");
  const auto pa = m.parameters(), pb = back.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  const Eigen::MatrixXd x = normal_matrix(2, 10, 1.0, rng);
  EXPECT_EQ(m.predict(x), back.predict(x));
}

TEST(BinaryCrossEntropy, HandValue) {
  Eigen::MatrixXd p(1, 2), y(1, 2);
  p << 0.8, 0.25;
  y << 1, 0;
  EXPECT_NEAR(binary_cross_entropy(p, y), -(std::log(0.8) + std::log(0.75)) / 2.0, 1e-12);
}
