#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "depstream/validation.hpp"
#include "enumerated_kernels.hpp"

using namespace depstream;

TEST(BruteForce, HandCases) {
  const std::vector<double> pi{1.0 / 3.0, 2.0 / 3.0};
  const auto [x1, u1] = brute_force_discrete_update(independence_kernel(pi), 0, 0.5);
  EXPECT_EQ(x1, 1u);
  EXPECT_NEAR(u1, 1.0 / 12.0, 1e-12);
  const auto [x2, u2] =
      brute_force_discrete_update(DiscreteKernel::reversible(2, {0.5, 0.5, 0.5, 0.5}), 0, 0.3);
  EXPECT_EQ(x2, 0u);
  EXPECT_NEAR(u2, 0.3, 1e-15);
}

TEST(BruteForce, AgreesWithOperator2OnEnumeratedKernels) {
  for (const auto& [n, steps] : {std::pair<std::size_t, int>{2, 10}, {3, 3}}) {
    const auto kernels = oracle::enumerate_kernels(n, steps);
    ASSERT_GT(kernels.size(), 10u);
    double worst = 0.0;
    for (const auto& k : kernels) {
      for (std::size_t x = 0; x < n; ++x) {
        for (int i = 0; i < 10'000; ++i) {
          const double u = (i + 0.5) / 10'000.0;
          const auto fast = operator2_discrete(k, {x, u});
          const auto [bx, bu] = brute_force_discrete_update(k, x, u);
          ASSERT_EQ(fast.x, bx);
          worst = std::max(worst, std::fabs(fast.u - bu));
        }
      }
    }
    EXPECT_LE(worst, 1e-12) << n << "-state";
  }
}

TEST(Kolmogorov, KnownQuantiles) {
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-3);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(ChiSquare, MatchesKnownTail) {
  // Two categories, stat = (60-50)^2/50 * 2 = 4, df = 1 -> p = 0.0455.
  const auto fit = chi_square_test({60, 40}, {0.5, 0.5});
  EXPECT_NEAR(fit.statistic, 4.0, 1e-12);
  EXPECT_NEAR(fit.p_value, 0.04550026389635842, 1e-10);
  EXPECT_EQ(chi_square_test({1, 1}, {1.0, 0.0}).p_value, 0.0);
}

namespace {

using Pair = AugmentedState<double>;

std::vector<Marginal<Pair>> pair_marginals() {
  return {{"x", [](const Pair& s) { return s.x; }, normal_cdf, {}},
          {"u", [](const Pair& s) { return s.u; }, standard_uniform_cdf, {}}};
}

Pair exact_pair(UniformSource& src) { return {src.normal(), src.uniform()}; }

}  // namespace

TEST(InvarianceCheck, IdentityPasses) {
  const auto r = invariance_check<Pair>(exact_pair, [](Pair s, Stream&) { return s; }, pair_marginals(),
                                        {0.0}, 20'000, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.sample_count, 20'000u);
  EXPECT_LT(r.ks_statistic, 0.02);
}

TEST(InvarianceCheck, Operator1Passes) {
  const auto r = invariance_check<Pair>(
      exact_pair, [](Pair s, Stream& st) { s.u = operator1(s.u, st.next()); return s; },
      pair_marginals(), {0.37}, 100'000, 2);
  EXPECT_TRUE(r.pass) << r.p_value;
}

TEST(InvarianceCheck, BrokenOperatorFails) {
  // Squaring u is not measure preserving.
  const auto r = invariance_check<Pair>(
      exact_pair, [](Pair s, Stream&) { s.u *= s.u; return s; }, pair_marginals(), {0.0}, 10'000, 3);
  EXPECT_FALSE(r.pass);
}

TEST(InvarianceCheck, DiscreteOperator2OnEnumeratedKernels) {
  const auto kernels = oracle::enumerate_kernels(3, 3);
  // A handful spread across the enumeration keeps the runtime modest.
  for (std::size_t idx = 0; idx < kernels.size(); idx += kernels.size() / 6) {
    const auto& k = kernels[idx];
    // pi from the kernel's own balance: pi(x') proportional to T(x'<-0) pi(0) / T~(0<-x').
    std::vector<double> pi(3, 0.0);
    const auto stationary = oracle::stationary(3, [&] {
      std::vector<double> t;
      for (std::size_t a = 0; a < 3; ++a) for (std::size_t b = 0; b < 3; ++b) t.push_back(k.forward(a, b));
      return t;
    }());
    ASSERT_TRUE(stationary.has_value());
    pi = *stationary;
    using D = AugmentedState<std::size_t>;
    const std::vector<Marginal<D>> marginals{
        {"x", [](const D& s) { return static_cast<double>(s.x); }, {}, pi},
        {"u", [](const D& s) { return s.u; }, standard_uniform_cdf, {}}};
    const auto r = invariance_check<D>(
        [&](UniformSource& src) {
          const double v = src.uniform();
          std::size_t x = v < pi[0] ? 0 : (v < pi[0] + pi[1] ? 1 : 2);
          return D{x, src.uniform()};
        },
        [&](D s, Stream& st) {
          s.u = operator1(s.u, st.next());
          return operator2_discrete(k, s);
        },
        marginals, {0.44}, 20'000, 100 + idx);
    EXPECT_TRUE(r.pass) << "kernel " << idx << " p = " << r.p_value;
  }
}

TEST(InvarianceCheck, RequiresEnoughSamples) {
  EXPECT_THROW(invariance_check<Pair>(exact_pair, [](Pair s, Stream&) { return s; }, pair_marginals(),
                                      {0.0}, 100, 1),
               ParameterError);
}
