#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "depstream/errors.hpp"
#include "depstream/mod_one.hpp"
#include "depstream/normal.hpp"
#include "depstream/streams.hpp"

namespace depstream {

/// Unit Gaussian target, as an unnormalized log density.
struct UnitGaussian {
  double operator()(double x) const { return -0.5 * x * x; }
  static double cdf(double x) { return normal_cdf(x); }
};

// ---------------------------------------------------------------------------
// Funnel: v ~ N(0, 3^2), x_i | v ~ N(0, e^v) for i = 1..9. e^v is a variance.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFunnelDim = 10;
inline constexpr double kFunnelSdV = 3.0;

struct FunnelState {
  double v = 0.0;
  std::array<double, kFunnelDim - 1> x{};

  /// Coordinate 0 is v, coordinates 1..9 are x_1..x_9.
  double& operator[](std::size_t i) { return i == 0 ? v : x[i - 1]; }
  double operator[](std::size_t i) const { return i == 0 ? v : x[i - 1]; }

  double sum_x_squared() const {
    return std::transform_reduce(x.begin(), x.end(), 0.0, std::plus<>(),
                                 [](double xi) { return xi * xi; });
  }
};

inline double funnel_logpdf(const FunnelState& s) {
  const double log_v = normal_logpdf(s.v / kFunnelSdV) - std::log(kFunnelSdV);
  const double sd_x = std::exp(0.5 * s.v);
  double total = log_v;
  for (double xi : s.x) total += normal_logpdf(xi / sd_x) - 0.5 * s.v;
  return total;
}

/// Unnormalized log density of coordinate `i` with all others held fixed.
/// `sum_x_squared` is only read for i == 0.
inline double funnel_conditional_logpdf(std::size_t i, double value, double v,
                                        double sum_x_squared) {
  if (i == 0) {
    return -value * value / (2.0 * kFunnelSdV * kFunnelSdV) -
           0.5 * static_cast<double>(kFunnelDim - 1) * value -
           0.5 * sum_x_squared * std::exp(-value);
  }
  return -0.5 * value * value * std::exp(-v);
}

inline FunnelState funnel_exact_sample(UniformSource& source) {
  FunnelState s;
  s.v = kFunnelSdV * source.normal();
  const double sd_x = std::exp(0.5 * s.v);
  for (double& xi : s.x) xi = sd_x * source.normal();
  return s;
}

inline FunnelState funnel_exact_sample(std::uint64_t seed) {
  UniformSource source(seed);
  return funnel_exact_sample(source);
}

// ---------------------------------------------------------------------------
// Small targets for Gibbs sweeps.
// ---------------------------------------------------------------------------

/// Zero-mean bivariate Gaussian with unit variances and correlation rho.
struct BivariateGaussian {
  double rho = 0.0;

  explicit BivariateGaussian(double correlation) : rho(correlation) {
    if (!(rho > -1.0 && rho < 1.0)) throw ParameterError("correlation must lie in (-1,1)");
  }

  double logpdf(double x1, double x2) const {
    const double det = 1.0 - rho * rho;
    return -(x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / (2.0 * det) -
           std::log(2.0 * std::numbers::pi * std::sqrt(det));
  }
};

/// Joint pmf over two discrete variables, stored row-major:
/// p(a, b) = table[a * cols + b].
class DiscreteJointTable {
 public:
  DiscreteJointTable(std::size_t rows, std::size_t cols, std::vector<double> table)
      : rows_(rows), cols_(cols), table_(std::move(table)) {
    if (rows_ == 0 || cols_ == 0 || table_.size() != rows_ * cols_) {
      throw ParameterError("joint table shape mismatch");
    }
    double total = 0.0;
    for (double p : table_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("joint table entries must be >= 0");
      total += p;
    }
    if (!(total > 0.0)) throw ParameterError("joint table has no mass");
    for (double& p : table_) p /= total;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t a, std::size_t b) const { return table_[a * cols_ + b]; }

  double marginal(std::size_t coordinate, std::size_t value) const {
    double total = 0.0;
    if (coordinate == 0) {
      for (std::size_t b = 0; b < cols_; ++b) total += (*this)(value, b);
    } else {
      for (std::size_t a = 0; a < rows_; ++a) total += (*this)(a, value);
    }
    return total;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Ring walk on the integers modulo `size`.
// ---------------------------------------------------------------------------

inline constexpr int kRingSize = 100;

struct RingWalkState {
  int x = 0;
  double u = 0.0;
};

/// One step: u <- (u + d1 - d2) mod 1, then step +1 if u < 0.5, else -1.
/// Uniform on the ring is invariant for any stream.
inline RingWalkState ring_walk_step(RingWalkState s, Stream& stream, int size = kRingSize) {
  const double d1 = stream.next();
  const double d2 = stream.next();
  s.u = mod_one(s.u + (d1 - d2));
  s.x = s.u < 0.5 ? (s.x + 1) % size : (s.x - 1 + size) % size;
  return s;
}

}  // namespace depstream
