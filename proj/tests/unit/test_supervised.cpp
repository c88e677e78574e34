#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "parasent/eval.h"
#include "parasent/supervised.h"
#include "synthetic.h"
#include "test_util.h"

namespace parasent {
namespace {

ParameterSet<double> zero_head(std::size_t d, std::size_t hidden = 3) {
  ParameterSet<double> ps;
  Rng rng(1);
  add_head_parameters(ps, d, {hidden, 5}, rng);
  ps.set_zero();
  return ps;
}

TEST(SimilarityHead, ZeroParamsUniform) {
  const auto ps = zero_head(3);
  const Vec<double> l = {1, 2, 3}, r = {-1, 0, 4};
  const auto out = similarity_head<double>(l, r, ps, head_layout(ps));
  for (double p : out.distribution) EXPECT_DOUBLE_EQ(p, 0.2);
  EXPECT_DOUBLE_EQ(out.score, 3.0);
}

TEST(SimilarityHead, EqualInputsZeroAbsoluteDifference) {
  // With W_mul zeroed, only |hL − hR| feeds the hidden layer; equal inputs
  // must give the same output as an all-zero pair.
  Rng rng(2);
  ParameterSet<double> ps;
  add_head_parameters(ps, 3, {4, 5}, rng);
  ps["head.W_mul"].fill(0.0);
  const auto slots = head_layout(ps);
  const Vec<double> h = {0.3, -2, 7}, z = {0, 0, 0};
  EXPECT_EQ(similarity_head<double>(h, h, ps, slots).distribution,
            similarity_head<double>(z, z, ps, slots).distribution);
}

TEST(SimilarityHead, ScoreInRange) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    ParameterSet<double> ps;
    add_head_parameters(ps, 4, {5, 5}, rng);
    for (std::size_t i = 0; i < ps.count(); ++i) {
      for (auto& v : ps[i].data()) v += 3 * rng.normal();
    }
    Vec<double> l(4), r(4);
    for (auto& v : l) v = 3 * rng.normal();
    for (auto& v : r) v = 3 * rng.normal();
    const auto y = similarity_head<double>(l, r, ps, head_layout(ps)).score;
    EXPECT_GE(y, 1.0);
    EXPECT_LE(y, 5.0);
  }
}

TEST(SimilarityHead, ShapeMismatch) {
  const auto ps = zero_head(3);
  const Vec<double> l = {1, 2}, r = {1, 2};
  EXPECT_THROW(similarity_head<double>(l, r, ps, head_layout(ps)), DimensionError);
}

TEST(TargetDistribution, Examples) {
  EXPECT_EQ(target_distribution<double>(4.0, 5), (Vec<double>{0, 0, 0, 1, 0}));
  const auto p = target_distribution<double>(3.4, 5);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[2], 0.6, 1e-12);
  EXPECT_NEAR(p[3], 0.4, 1e-12);
  EXPECT_EQ(p[4], 0.0);
  EXPECT_EQ(target_distribution<double>(5.0, 5), (Vec<double>{0, 0, 0, 0, 1}));
  EXPECT_EQ(target_distribution<double>(1.0, 5), (Vec<double>{1, 0, 0, 0, 0}));
}

TEST(TargetDistribution, OutOfRange) {
  EXPECT_THROW(target_distribution<double>(0.99, 5), RangeError);
  EXPECT_THROW(target_distribution<double>(5.01, 5), RangeError);
  EXPECT_THROW(target_distribution<double>(NAN, 5), RangeError);
}

TEST(TargetDistribution, ExpectationRecoversScore) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.bounded(8);
    const double y = rng.uniform(1.0, static_cast<double>(k));
    const auto p = target_distribution<double>(y, k);
    double e = 0, total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_GE(p[i], 0.0);
      e += static_cast<double>(i + 1) * p[i];
      total += p[i];
    }
    EXPECT_NEAR(e, y, 1e-9);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(KlDivergence, Examples) {
  const std::vector<double> p = {0, 0, 1, 0, 0}, u(5, 0.2);
  // ln 5, shifted by the 1e-12 floor inside the log.
  EXPECT_NEAR(kl_divergence(p, u), -std::log(0.2 + 1e-12), 1e-15);
  EXPECT_NEAR(kl_divergence(p, u), 1.6094, 1e-4);
  EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-11);
  const std::vector<double> zero(5, 0.0);
  EXPECT_TRUE(std::isfinite(kl_divergence(p, zero)));
}

TEST(KlDivergence, NonNegative) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(5), q(5);
    for (auto& v : p) v = rng.uniform();
    for (auto& v : q) v = rng.uniform() + 1e-3;
    const double sp = std::accumulate(p.begin(), p.end(), 0.0);
    const double sq = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    EXPECT_GE(kl_divergence(p, q), -1e-15);
  }
}

TEST(GoldScale, MapsOntoHeadRange) {
  EXPECT_EQ(gold_to_head_scale(0.0, 5), 1.0);
  EXPECT_EQ(gold_to_head_scale(5.0, 5), 5.0);
  EXPECT_DOUBLE_EQ(gold_to_head_scale(2.5, 5), 3.0);
  EXPECT_THROW(gold_to_head_scale(5.5, 5), RangeError);
}

TEST(KlLoss, SinglePairEqualsItsDivergence) {
  const Encoder enc({EncoderKind::Avg}, 2);
  auto ps = zero_head(2);
  ps.add("W_w", Matrix<double>(2, 2, {1, 0, 0, 1}));
  const std::vector<ScoredPair> one = {{testing::seq({0}), testing::seq({1}), 3.0}};
  const double ln5 = -std::log(0.2 + 1e-12);
  EXPECT_NEAR(kl_loss(enc, ps, one), ln5, 1e-15);
  const std::vector<ScoredPair> two = {one[0], {testing::seq({1}), testing::seq({1}), 3.5}};
  const double second = std::log(0.5) - std::log(0.2 + 1e-12);
  EXPECT_NEAR(kl_loss(enc, ps, two), 0.5 * (ln5 + second), 1e-15);
}

class SupervisedRun : public ::testing::Test {
 protected:
  SupervisedRun()
      : world(testing::make_world(20, 3, 8, 11)),
        table(testing::world_table(world)) {
    Rng rng(6);
    train = encode_scored_pairs(testing::scored_pairs(world, 50, rng), {},
                                table.vocab(), 5);
    dev = encode_scored_pairs(testing::scored_pairs(world, 20, rng), {},
                              table.vocab(), 5);
  }
  testing::SyntheticWorld world;
  EmbeddingTable table;
  std::vector<ScoredPair> train, dev;
};

TEST_F(SupervisedRun, ZeroEpochsKeepsSeededHead) {
  const Encoder enc({EncoderKind::Avg}, 8);
  SupervisedConfig cfg;
  cfg.epochs = 0;
  cfg.head.hidden = 6;
  const auto r = train_supervised(train, dev, cfg, enc,
                                  testing::initial_params(enc, table, 1), {});
  EXPECT_TRUE(r.dev_pearson.empty());
  EXPECT_EQ(r.best_epoch, 0);
  ParameterSet<float> expect;
  Rng rng(cfg.seed);
  Rng head_rng = rng.fork();
  add_head_parameters(expect, 8, cfg.head, head_rng);
  for (std::size_t i = 0; i < expect.count(); ++i) {
    EXPECT_EQ(r.params[expect.name(i)], expect[i]);
  }
}

TEST_F(SupervisedRun, OverfitsSmallTrainingSet) {
  const Encoder enc({EncoderKind::Avg}, 8);
  SupervisedConfig cfg;
  cfg.epochs = 100;
  cfg.head.hidden = 20;
  cfg.batch_size = 10;
  cfg.adam.learning_rate = 0.01;
  const auto r = train_supervised(train, {}, cfg, enc,
                                  testing::initial_params(enc, table, 1), {});
  EXPECT_LT(r.train_loss.back(), r.train_loss.front());
  const auto pred = predict_scores(enc, r.params, train);
  std::vector<double> gold;
  for (const auto& p : train) gold.push_back(p.score);
  EXPECT_GT(pearson_r(pred, gold), 0.9);
}

TEST_F(SupervisedRun, SelectsBestDevEpoch) {
  const Encoder enc({EncoderKind::Avg}, 8);
  SupervisedConfig cfg;
  cfg.epochs = 5;
  cfg.head.hidden = 10;
  const auto r = train_supervised(train, dev, cfg, enc,
                                  testing::initial_params(enc, table, 1), {});
  ASSERT_EQ(r.dev_pearson.size(), 5u);
  const auto best = std::max_element(r.dev_pearson.begin(), r.dev_pearson.end());
  EXPECT_EQ(r.best_epoch, 1 + (best - r.dev_pearson.begin()));
}

TEST_F(SupervisedRun, RejectsScoresOutsideRange) {
  const Encoder enc({EncoderKind::Avg}, 8);
  auto bad = train;
  bad[0].score = 0.5;
  EXPECT_THROW(train_supervised(bad, {}, {}, enc,
                                testing::initial_params(enc, table, 1), {}),
               RangeError);
}

TEST_F(SupervisedRun, Deterministic) {
  const Encoder enc({EncoderKind::Gran1}, 8);
  SupervisedConfig cfg;
  cfg.epochs = 2;
  cfg.head.hidden = 5;
  cfg.dropout = 0.1;
  const auto a = train_supervised(train, dev, cfg, enc,
                                  testing::initial_params(enc, table, 1), {});
  const auto b = train_supervised(train, dev, cfg, enc,
                                  testing::initial_params(enc, table, 1), {});
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.dev_pearson, b.dev_pearson);
}

}  // namespace
}  // namespace parasent
