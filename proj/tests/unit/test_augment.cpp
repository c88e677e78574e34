#include <gtest/gtest.h>

#include <algorithm>

#include "parasent/augment.h"
#include "test_util.h"

namespace parasent {
namespace {

TEST(DropoutMask, ValuesAreZeroOrScaled) {
  Rng rng(1);
  const auto m = dropout_mask<double>(1000, 0.25, rng);
  for (double v : m) EXPECT_TRUE(v == 0.0 || v == 1.0 / 0.75);
  EXPECT_GT(std::count(m.begin(), m.end(), 0.0), 150);
}

TEST(DropoutMask, RateOneRejected) {
  Rng rng(1);
  EXPECT_THROW(dropout_mask<float>(3, 1.0, rng), ConfigError);
  EXPECT_THROW(dropout_mask<float>(3, -0.1, rng), ConfigError);
  EXPECT_NO_THROW(dropout_mask<float>(3, 0.0, rng));
}

TEST(EmbeddingDropout, PreservesExpectation) {
  Rng rng(99);
  const Vec<double> x = {1.0, -2.0, 0.5};
  Vec<double> acc(3, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto y = embedding_dropout(x, 0.3, rng);
    for (int k = 0; k < 3; ++k) acc[k] += y[k];
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(acc[k] / draws, x[k], 0.01 * std::abs(x[k]));
  }
}

TEST(EmbeddingDropout, EvalModeIsIdentity) {
  Rng rng(2);
  const Vec<float> x = {1, 2, 3};
  Rng untouched = rng;
  EXPECT_EQ(embedding_dropout(x, 0.5, rng, false), x);
  EXPECT_EQ(embedding_dropout(x, 0.0, rng), x);
  EXPECT_EQ(rng.next_u64(), untouched.next_u64());
}

TokenSequence ten_tokens() {
  return testing::seq({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST(WordDropout, RateZeroIsIdentity) {
  Rng rng(3);
  EXPECT_EQ(word_dropout(ten_tokens(), 0.0, rng).ids, ten_tokens().ids);
}

TEST(WordDropout, AllRemovedRestoresSequence) {
  Rng rng(3);
  EXPECT_EQ(word_dropout(ten_tokens(), 1.0, rng).ids, ten_tokens().ids);
}

TEST(WordDropout, SeededMask) {
  // One uniform draw per token; a token survives when the draw is >= rate.
  Rng oracle(21);
  std::vector<std::uint32_t> expect;
  for (std::uint32_t i = 0; i < 10; ++i) {
    if (oracle.uniform() >= 0.5) expect.push_back(i);
  }
  Rng rng(21);
  const auto kept = word_dropout(ten_tokens(), 0.5, rng).ids;
  EXPECT_EQ(kept, expect);
  EXPECT_EQ(kept, (std::vector<std::uint32_t>{1, 2, 4, 6, 8}));
}

TEST(WordDropout, KeepsOrder) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = word_dropout(ten_tokens(), 0.4, rng);
    EXPECT_TRUE(std::is_sorted(s.ids.begin(), s.ids.end()));
    EXPECT_FALSE(s.empty());
  }
}

std::vector<SentencePair> three_pairs() {
  return {{testing::seq({0, 1, 2}), testing::seq({3, 4})},
          {testing::seq({5, 6, 7, 8}), testing::seq({9})},
          {testing::seq({10, 11}), testing::seq({12, 13, 14})}};
}

TEST(Scramble, RateZeroLeavesBatch) {
  Rng rng(5);
  auto b = three_pairs();
  scramble(b, 0.0, rng);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b[i].first.ids, three_pairs()[i].first.ids);
  }
}

TEST(Scramble, RateOnePermutesEverySentence) {
  Rng rng(5);
  auto b = three_pairs();
  scramble(b, 1.0, rng);
  const auto orig = three_pairs();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (auto [got, want] : {std::pair{b[i].first.ids, orig[i].first.ids},
                             std::pair{b[i].second.ids, orig[i].second.ids}}) {
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, want);
    }
  }
}

TEST(Scramble, SeededOutput) {
  Rng oracle(4);
  auto want = three_pairs();
  for (auto& p : want) {
    if (!(oracle.uniform() < 0.5)) continue;
    p.first = p.first.subset(seeded_permutation(p.first.size(), oracle));
    p.second = p.second.subset(seeded_permutation(p.second.size(), oracle));
  }
  Rng rng(4);
  auto b = three_pairs();
  scramble(b, 0.5, rng);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b[i].first.ids, want[i].first.ids);
    EXPECT_EQ(b[i].second.ids, want[i].second.ids);
  }
  EXPECT_EQ(b[1].first.ids, (std::vector<std::uint32_t>{6, 5, 8, 7}));
}

// At rate 1 every pair still consumes its uniform draw before the shuffles.
TEST(Scramble, RateOneMatchesReplay) {
  Rng oracle(9);
  auto want = three_pairs();
  for (auto& p : want) {
    oracle.uniform();
    p.first = p.first.subset(seeded_permutation(p.first.size(), oracle));
    p.second = p.second.subset(seeded_permutation(p.second.size(), oracle));
  }
  Rng rng(9);
  auto b = three_pairs();
  scramble(b, 1.0, rng);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b[i].first.ids, want[i].first.ids);
    EXPECT_EQ(b[i].second.ids, want[i].second.ids);
  }
}

}  // namespace
}  // namespace parasent
