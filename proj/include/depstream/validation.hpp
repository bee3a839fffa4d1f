#pragma once

// Independent checks used by the test suites: a literal re-derivation of the
// discrete Operator 2 update, and pushforward tests that push exact samples
// of the augmented target through an update and compare the marginals with
// their known laws.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "depstream/augmented.hpp"
#include "depstream/errors.hpp"
#include "depstream/kernels.hpp"
#include "depstream/streams.hpp"

namespace depstream {

/// Discrete Operator 2 computed from the range definitions by explicit
/// prefix sums, scanning every candidate interval.
inline std::pair<std::size_t, double> brute_force_discrete_update(const DiscreteKernel& kernel,
                                                                  std::size_t x, double u) {
  const std::size_t n = kernel.size();
  for (std::size_t candidate = 0; candidate < n; ++candidate) {
    double u_min = 0.0;
    for (std::size_t j = 0; j < candidate; ++j) u_min += kernel.forward(x, j);
    const double u_max = u_min + kernel.forward(x, candidate);
    const bool inside = u_min <= u && u < u_max;
    const bool last_positive = [&] {
      for (std::size_t j = candidate + 1; j < n; ++j) {
        if (kernel.forward(x, j) > 0.0) return false;
      }
      return kernel.forward(x, candidate) > 0.0;
    }();
    if (!inside && !(last_positive && u >= u_max)) continue;
    if (!(u_max > u_min)) throw DegenerateKernelError("brute force: zero-width interval");

    double u_min_back = 0.0;
    for (std::size_t j = 0; j < x; ++j) u_min_back += kernel.reverse(candidate, j);
    const double u_max_back = u_min_back + kernel.reverse(candidate, x);
    if (!(u_max_back > u_min_back)) throw BalanceError("brute force: zero reverse probability");
    const double u_new = u_min_back + (u_max_back - u_min_back) * (u - u_min) / (u_max - u_min);
    return {candidate, clamp_unit(u_new)};
  }
  throw DegenerateKernelError("brute force: no interval contains u");
}

// ---------------------------------------------------------------------------
// Goodness of fit.
// ---------------------------------------------------------------------------

/// Asymptotic Kolmogorov survival function P(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov statistic D_n. Sorts `samples`.
inline double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

struct GoodnessOfFit {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline GoodnessOfFit ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  const double d = ks_statistic(samples, cdf);
  return {d, kolmogorov_survival(std::sqrt(static_cast<double>(samples.size())) * d)};
}

/// Pearson chi-square test of category counts against a pmf. Categories with
/// zero expected count must have zero observed count.
inline GoodnessOfFit chi_square_test(const std::vector<std::size_t>& counts,
                                     const std::vector<double>& pmf) {
  if (counts.size() != pmf.size()) throw ParameterError("chi-square: size mismatch");
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double expected = n * pmf[i];
    if (expected <= 0.0) {
      if (counts[i] > 0) return {std::numeric_limits<double>::infinity(), 0.0};
      continue;
    }
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
    ++cells;
  }
  if (cells < 2) return {0.0, 1.0};
  const boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

// ---------------------------------------------------------------------------
// Pushforward invariance.
// ---------------------------------------------------------------------------

/// A one-dimensional marginal of the augmented state with a known law:
/// continuous (cdf set) or discrete on 0..pmf.size()-1 (pmf set).
template <class State>
struct Marginal {
  std::string name;
  std::function<double(const State&)> value;
  std::function<double(double)> cdf;
  std::vector<double> pmf;
};

struct MarginalResult {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct PushforwardReport {
  double ks_statistic = 0.0;     ///< largest KS statistic over continuous marginals
  double p_value = 1.0;          ///< smallest marginal p-value, Bonferroni-adjusted
  std::size_t sample_count = 0;
  double significance = 0.01;
  bool pass = true;
  std::vector<MarginalResult> marginals;
};

inline double standard_uniform_cdf(double u) { return std::clamp(u, 0.0, 1.0); }

/// Draws n exact samples of the augmented target, applies `update(state,
/// stream)` to each with a fresh stream replaying `d_sequence` (cycled), and
/// tests every marginal of the result. The family-wise significance is
/// split evenly across marginals.
template <class State, class ExactSampler, class Update>
PushforwardReport invariance_check(ExactSampler&& exact_sampler, Update&& update,
                                   const std::vector<Marginal<State>>& marginals,
                                   const std::vector<double>& d_sequence, std::size_t n,
                                   std::uint64_t seed, double significance = 0.01) {
  if (n < 10'000) throw ParameterError("invariance_check: needs at least 10^4 samples");
  if (marginals.empty()) throw ParameterError("invariance_check: no marginals to test");
  if (d_sequence.empty()) throw ParameterError("invariance_check: empty d sequence");

  UniformSource source(seed);
  std::vector<std::vector<double>> columns(marginals.size());
  for (auto& c : columns) c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    State s = exact_sampler(source);
    ValueStream stream(d_sequence, OnExhaust::cycle);
    s = update(std::move(s), static_cast<Stream&>(stream));
    for (std::size_t m = 0; m < marginals.size(); ++m) columns[m].push_back(marginals[m].value(s));
  }

  PushforwardReport report;
  report.sample_count = n;
  report.significance = significance;
  double min_p = 1.0;
  for (std::size_t m = 0; m < marginals.size(); ++m) {
    const auto& marginal = marginals[m];
    GoodnessOfFit fit;
    if (!marginal.pmf.empty()) {
      std::vector<std::size_t> counts(marginal.pmf.size(), 0);
      for (double v : columns[m]) {
        const auto idx = static_cast<std::size_t>(v);
        if (v < 0.0 || idx >= counts.size()) throw ParameterError("invariance_check: category out of range");
        ++counts[idx];
      }
      fit = chi_square_test(counts, marginal.pmf);
    } else {
      fit = ks_test(std::move(columns[m]), marginal.cdf);
      report.ks_statistic = std::max(report.ks_statistic, fit.statistic);
    }
    report.marginals.push_back({marginal.name, fit.statistic, fit.p_value});
    min_p = std::min(min_p, fit.p_value);
  }
  report.p_value = std::min(1.0, min_p * static_cast<double>(marginals.size()));
  report.pass = report.p_value >= significance;
  return report;
}

}  // namespace depstream
