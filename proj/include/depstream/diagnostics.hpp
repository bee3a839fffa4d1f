#pragma once

// Estimators for MCMC output: mean, variance, effective sample size from
// Geyer's initial monotone sequence, and standard errors.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "depstream/errors.hpp"

namespace depstream {

struct Trace {
  std::vector<double> values;
  std::size_t thinning = 1;
  std::string label;
};

/// Keeps every `interval`-th value, i.e. the values recorded after
/// interval, 2*interval, ... steps.
inline Trace thin(const Trace& trace, std::size_t interval) {
  if (interval == 0) throw ParameterError("thinning interval must be >= 1");
  Trace out{{}, trace.thinning * interval, trace.label};
  for (std::size_t i = interval - 1; i < trace.values.size(); i += interval) {
    out.values.push_back(trace.values[i]);
  }
  return out;
}

struct EstimateReport {
  double mean = 0.0;
  double variance = 0.0;
  double ess = 0.0;
  double standard_error = 0.0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Autocovariances gamma(0..n-1), normalized by n, via zero-padded FFT.
inline std::vector<double> autocovariance(std::span<const double> values, double mean) {
  const std::size_t n = values.size();
  std::size_t padded = 1;
  while (padded < 2 * n) padded <<= 1;
  const std::size_t bins = padded / 2 + 1;

  std::vector<double> buffer(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) buffer[i] = values[i] - mean;
  std::vector<std::complex<double>> spectrum(bins);
  auto* spec = reinterpret_cast<fftw_complex*>(spectrum.data());

  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(padded), buffer.data(), spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(padded), spec, buffer.data(), FFTW_ESTIMATE);
  }
  fftw_execute(forward);
  for (auto& c : spectrum) c = std::norm(c);
  fftw_execute(backward);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  std::vector<double> gamma(n);
  const double scale = 1.0 / (static_cast<double>(padded) * static_cast<double>(n));
  for (std::size_t t = 0; t < n; ++t) gamma[t] = buffer[t] * scale;
  return gamma;
}

inline double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace detail

/// ESS = N / tau with tau = -1 + 2 * sum_k Gamma_k, where
/// Gamma_k = rho(2k) + rho(2k+1) is summed while positive and forced to be
/// non-increasing. Clamped to [1, N].
inline double effective_sample_size(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 10) throw ParameterError("effective_sample_size: trace needs at least 10 values");
  const double mean = detail::mean_of(values);
  const auto gamma = detail::autocovariance(values, mean);
  if (!(gamma[0] > 0.0)) throw DegenerateTraceError("effective_sample_size: trace has zero variance");

  double pair_sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = gamma[2 * k] + gamma[2 * k + 1];
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    pair_sum += pair;
  }
  const double tau = (-gamma[0] + 2.0 * pair_sum) / gamma[0];
  const double count = static_cast<double>(n);
  if (!(tau > 0.0)) return count;
  return std::clamp(count / tau, 1.0, count);
}

inline double effective_sample_size(const Trace& trace) { return effective_sample_size(trace.values); }

inline EstimateReport estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 10) throw ParameterError("estimate: trace needs at least 10 values");
  EstimateReport r;
  r.mean = detail::mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.variance = ss / static_cast<double>(n - 1);
  r.ess = effective_sample_size(values);
  r.standard_error = std::sqrt(r.variance / r.ess);
  return r;
}

inline EstimateReport estimate(const Trace& trace) { return estimate(trace.values); }

}  // namespace depstream
