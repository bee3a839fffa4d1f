#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "depstream/targets.hpp"

using namespace depstream;

TEST(Funnel, LogPdfAtOrigin) {
  const FunnelState s;
  const double expected = -0.5 * std::log(2 * M_PI * 9.0) + 9 * (-0.5 * std::log(2 * M_PI));
  EXPECT_NEAR(funnel_logpdf(s), expected, 1e-12);
  EXPECT_NEAR(funnel_logpdf(s), -10.287997620714837, 1e-12);
}

TEST(Funnel, EvenInEachX) {
  UniformSource src(1);
  for (int i = 0; i < 100; ++i) {
    auto s = funnel_exact_sample(src);
    auto flipped = s;
    for (double& x : flipped.x) x = -x;
    EXPECT_DOUBLE_EQ(funnel_logpdf(s), funnel_logpdf(flipped));
  }
}

TEST(Funnel, ConditionalsDifferLikeTheJoint) {
  UniformSource src(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = funnel_exact_sample(src);
    for (std::size_t i = 0; i < kFunnelDim; ++i) {
      auto moved = s;
      moved[i] += 0.37;
      const double joint = funnel_logpdf(moved) - funnel_logpdf(s);
      const double cond = funnel_conditional_logpdf(i, moved[i], s.v, s.sum_x_squared()) -
                          funnel_conditional_logpdf(i, s[i], s.v, s.sum_x_squared());
      ASSERT_NEAR(cond, joint, 1e-9 * std::max(1.0, std::fabs(joint)));
    }
  }
}

TEST(Funnel, GradientMatchesFiniteDifferences) {
  UniformSource src(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = funnel_exact_sample(src);
    s.v = std::clamp(s.v, -6.0, 6.0);
    std::array<double, kFunnelDim> grad{};
    grad[0] = -s.v / 9.0 - 4.5 + 0.5 * s.sum_x_squared() * std::exp(-s.v);
    for (std::size_t i = 1; i < kFunnelDim; ++i) grad[i] = -s[i] * std::exp(-s.v);
    for (std::size_t i = 0; i < kFunnelDim; ++i) {
      const double h = 1e-6 * std::max(1.0, std::fabs(s[i]));
      auto plus = s, minus = s;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (funnel_logpdf(plus) - funnel_logpdf(minus)) / (2 * h);
      ASSERT_NEAR(fd, grad[i], 1e-5 * std::max(1.0, std::fabs(grad[i]))) << "coordinate " << i;
    }
  }
}

TEST(Funnel, ExactSamplerMoments) {
  UniformSource src(4);
  constexpr int kDraws = 1'000'000;
  double sum = 0, sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double v = funnel_exact_sample(src).v;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kDraws;
  EXPECT_NEAR(mean, 0.0, 3 * 3.0 / 1000.0);
  EXPECT_NEAR(sq / kDraws - mean * mean, 9.0, 0.1);
}

TEST(Funnel, ExactSamplerIsDeterministic) {
  const auto a = funnel_exact_sample(123);
  const auto b = funnel_exact_sample(123);
  EXPECT_EQ(a.v, b.v);
  EXPECT_EQ(a.x, b.x);
}

TEST(Ring, WrapsUpward) {
  ValueStream d({0.0, 0.0});
  const auto s = ring_walk_step({99, 0.3}, d);
  EXPECT_EQ(s.x, 0);
  EXPECT_EQ(s.u, 0.3);
}

TEST(Ring, WrapsDownward) {
  ValueStream d({0.0, 0.0});
  EXPECT_EQ(ring_walk_step({0, 0.7}, d).x, 99);
}

TEST(Ring, EqualPairKeepsDirection) {
  ConstantStream d(0.6180339);
  RingWalkState s{10, 0.2};
  for (int i = 0; i < 30; ++i) {
    s = ring_walk_step(s, d);
    ASSERT_EQ(s.u, 0.2);
  }
  EXPECT_EQ(s.x, 40);
}

TEST(Ring, UniformOccupancyWithIidStream) {
  IidStream d(5);
  RingWalkState s{0, 0.5};
  std::vector<long> counts(kRingSize, 0);
  constexpr long kSteps = 10'000'000;
  for (long i = 0; i < kSteps; ++i) {
    s = ring_walk_step(s, d);
    ++counts[static_cast<std::size_t>(s.x)];
  }
  for (long c : counts) EXPECT_NEAR(c / static_cast<double>(kSteps), 0.01, 0.0005);
}

TEST(DiscreteJointTable, NormalizesAndMarginalizes) {
  const DiscreteJointTable t(2, 2, {1.0, 3.0, 2.0, 4.0});
  EXPECT_DOUBLE_EQ(t(1, 1), 0.4);
  EXPECT_DOUBLE_EQ(t.marginal(0, 0), 0.4);
  EXPECT_DOUBLE_EQ(t.marginal(1, 1), 0.7);
  EXPECT_THROW(DiscreteJointTable(2, 2, {1.0, 2.0}), ParameterError);
}
