#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "parasent/numeric.h"
#include "parasent/rng.h"

namespace parasent {
namespace {

TEST(Affine, IdentityMatrix) {
  Matrix<double> m(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(affine(m, Vec<double>{3, 4}, Vec<double>{0, 0}),
            (Vec<double>{3, 4}));
}

TEST(Affine, ZeroMatrixGivesBias) {
  Matrix<double> m(2, 2);
  EXPECT_EQ(affine(m, Vec<double>{3, 4}, Vec<double>{1, 2}),
            (Vec<double>{1, 2}));
}

TEST(Affine, HandProduct) {
  Matrix<double> m(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(affine(m, Vec<double>{1, 1}, Vec<double>{1, 0}),
            (Vec<double>{4, 7}));
}

TEST(Affine, ShapeMismatchThrows) {
  Matrix<double> m(2, 3);
  EXPECT_THROW(affine(m, Vec<double>{1, 1}, Vec<double>{0, 0}),
               DimensionError);
  Matrix<double> sq(2, 2);
  EXPECT_THROW(affine(sq, Vec<double>{1, 1}, Vec<double>{0, 0, 0}),
               DimensionError);
}

TEST(Elementwise, SigmoidAndTanhAtZero) {
  EXPECT_EQ(elementwise(Activation::Sigmoid, Vec<double>{0, 0}),
            (Vec<double>{0.5, 0.5}));
  EXPECT_EQ(elementwise(Activation::Tanh, Vec<double>{0}), (Vec<double>{0}));
}

TEST(Elementwise, SigmoidSaturates) {
  EXPECT_NEAR(sigmoid(40.0), 1.0, 1e-9);
  EXPECT_NEAR(sigmoid(-40.0), 0.0, 1e-9);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(1000.0f)));
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
}

TEST(Softmax, UniformOnEqualLogits) {
  const auto p = softmax(Vec<double>{0, 0, 0});
  for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LogTwoGap) {
  for (double c : {-50.0, 0.0, 3.5, 700.0}) {
    const auto p = softmax(Vec<double>{c, c + std::log(2.0)});
    EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-12) << c;
    EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-12) << c;
  }
}

TEST(Softmax, LargeLogitsStable) {
  const auto p = softmax(Vec<double>{1000, 0});
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    Vec<double> z(1 + rng.bounded(10));
    for (auto& v : z) v = rng.uniform(-20, 20);
    const auto p = softmax(z);
    double s = 0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
    const double shift = rng.uniform(-100, 100);
    auto zs = z;
    for (auto& v : zs) v += shift;
    const auto q = softmax(zs);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
  }
}

TEST(Cosine, Examples) {
  EXPECT_EQ(cosine(Vec<double>{1, 0}, Vec<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(Vec<double>{1, 2}, Vec<double>{2, 4}), 1.0, 1e-15);
  EXPECT_NEAR(cosine(Vec<double>{1, 0}, Vec<double>{1, 1}), 0.7071067, 1e-6);
}

TEST(Cosine, ZeroVectorIsAnError) {
  EXPECT_THROW(cosine(Vec<double>{0, 0}, Vec<double>{1, 1}),
               DegenerateVectorError);
  EXPECT_THROW(cosine(Vec<float>{1, 1}, Vec<float>{0, 0}),
               DegenerateVectorError);
}

TEST(Cosine, Properties) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec<double> u(1 + rng.bounded(8)), v(u.size());
    for (auto& x : u) x = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
    for (auto& x : v) x = rng.normal();
    EXPECT_NEAR(cosine(u, u), 1.0, 1e-12);
    EXPECT_EQ(cosine(u, v), cosine(v, u));
    EXPECT_LE(std::abs(cosine(u, v)), 1.0 + 1e-12);
  }
}

TEST(AllFinite, DetectsNanAndInf) {
  EXPECT_TRUE(all_finite(std::span<const double>(Vec<double>{1, 2})));
  EXPECT_FALSE(all_finite(std::span<const double>(Vec<double>{1, NAN})));
  EXPECT_FALSE(all_finite(std::span<const double>(Vec<double>{INFINITY})));
}

TEST(Matrix, StorageMustMatchShape) {
  EXPECT_THROW(Matrix<float>(2, 2, std::vector<float>{1, 2, 3}),
               DimensionError);
}

}  // namespace
}  // namespace parasent
