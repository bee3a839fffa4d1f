#pragma once

// One-dimensional transition kernels exposing the forward CDF, its inverse
// and the CDF of the reverse kernel. Multivariate targets are handled by
// sweeping coordinate kernels.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "depstream/errors.hpp"
#include "depstream/normal.hpp"
#include "depstream/targets.hpp"

namespace depstream {

/// forward_cdf(x, x_new)      = P(X' <= x_new | x) under T
/// forward_quantile(u, x)     = tau(u; x), the inverse of forward_cdf(x, .)
/// reverse_cdf(x_new, x)      = P(X <= x | x_new) under the reverse kernel
template <class K>
concept ContinuousKernel = requires(const K& k, double a, double b) {
  { k.forward_cdf(a, b) } -> std::convertible_to<double>;
  { k.forward_quantile(a, b) } -> std::convertible_to<double>;
  { k.reverse_cdf(a, b) } -> std::convertible_to<double>;
};

/// Kernels that can also report their transition density T(x_new <- x).
template <class K>
concept KernelWithDensity = ContinuousKernel<K> && requires(const K& k, double a, double b) {
  { k.forward_density(a, b) } -> std::convertible_to<double>;
};

inline double ar_forward_quantile(double alpha, double x, double u) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("AR coefficient must lie in [0,1)");
  return alpha * x + std::sqrt(1.0 - alpha * alpha) * normal_quantile(u);
}

/// x' = alpha x + sqrt(1 - alpha^2) nu, nu ~ N(0,1). Leaves N(0,1)
/// invariant and satisfies detailed balance, so it is its own reverse.
class ARKernel {
 public:
  explicit ARKernel(double alpha) : alpha_(alpha), scale_(std::sqrt(1.0 - alpha * alpha)) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("AR coefficient must lie in [0,1)");
  }

  double alpha() const noexcept { return alpha_; }

  double forward_cdf(double x, double x_new) const {
    return normal_cdf((x_new - alpha_ * x) / scale_);
  }
  double forward_quantile(double u, double x) const { return ar_forward_quantile(alpha_, x, u); }
  double reverse_cdf(double x_new, double x) const { return forward_cdf(x_new, x); }
  double forward_density(double x, double x_new) const {
    return normal_pdf((x_new - alpha_ * x) / scale_) / scale_;
  }

 private:
  double alpha_;
  double scale_;
};

/// Independence kernel x' ~ N(mean, sd^2). Used for tractable Gaussian
/// Gibbs conditionals; self-reverse with respect to its own target.
class GaussianKernel {
 public:
  GaussianKernel(double mean, double sd) : mean_(mean), sd_(sd) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
      throw ParameterError("Gaussian kernel needs finite mean and sd > 0");
    }
  }

  double mean() const noexcept { return mean_; }
  double sd() const noexcept { return sd_; }

  double forward_cdf(double, double x_new) const { return normal_cdf((x_new - mean_) / sd_); }
  double forward_quantile(double u, double) const { return mean_ + sd_ * normal_quantile(u); }
  double reverse_cdf(double, double x) const { return normal_cdf((x - mean_) / sd_); }
  double forward_density(double, double x_new) const {
    return normal_pdf((x_new - mean_) / sd_) / sd_;
  }

 private:
  double mean_;
  double sd_;
};

/// Reverse transition density T~(x <- x_new) = T(x_new <- x) pi(x) / pi(x_new),
/// built from a forward kernel and an unnormalized log target.
template <KernelWithDensity Kernel, class LogTarget>
class ReversedDensity {
 public:
  ReversedDensity(Kernel forward, LogTarget log_target)
      : forward_(std::move(forward)), log_target_(std::move(log_target)) {}

  /// T~(x <- x_new).
  double operator()(double x, double x_new) const {
    const double log_new = log_target_(x_new);
    if (!(log_new > -std::numeric_limits<double>::infinity())) {
      throw SupportError("reverse kernel: target density is zero at the conditioning point");
    }
    const double log_old = log_target_(x);
    if (!(log_old > -std::numeric_limits<double>::infinity())) return 0.0;
    return forward_.forward_density(x, x_new) * std::exp(log_old - log_new);
  }

 private:
  Kernel forward_;
  LogTarget log_target_;
};

template <KernelWithDensity Kernel, class LogTarget>
ReversedDensity<Kernel, LogTarget> reverse_from_target(Kernel forward, LogTarget log_target) {
  return {std::move(forward), std::move(log_target)};
}

// ---------------------------------------------------------------------------
// Discrete kernels on the states 0..n-1 (the index order is the CDF order).
// ---------------------------------------------------------------------------

class DiscreteKernel {
 public:
  static constexpr double kRowTolerance = 1e-12;

  /// `forward[x * n + x_new]` = T(x_new <- x); `reverse[x_new * n + x]` =
  /// T~(x <- x_new). Each row must sum to one.
  DiscreteKernel(std::size_t n, std::vector<double> forward, std::vector<double> reverse)
      : n_(n), forward_(std::move(forward)), reverse_(std::move(reverse)) {
    validate(forward_, "forward");
    validate(reverse_, "reverse");
  }

  /// Kernel satisfying detailed balance, so T~ = T.
  static DiscreteKernel reversible(std::size_t n, std::vector<double> forward) {
    auto reverse = forward;
    return {n, std::move(forward), std::move(reverse)};
  }

  std::size_t size() const noexcept { return n_; }

  /// T(x_new <- x).
  double forward(std::size_t x, std::size_t x_new) const { return forward_[x * n_ + x_new]; }
  /// T~(x <- x_new).
  double reverse(std::size_t x_new, std::size_t x) const { return reverse_[x_new * n_ + x]; }

  std::span<const double> forward_row(std::size_t x) const {
    return std::span<const double>(forward_).subspan(x * n_, n_);
  }
  std::span<const double> reverse_row(std::size_t x_new) const {
    return std::span<const double>(reverse_).subspan(x_new * n_, n_);
  }

  /// The kernel that runs this one backwards: forward and reverse swapped.
  DiscreteKernel reversed() const { return {n_, reverse_, forward_}; }

 private:
  void validate(const std::vector<double>& m, const char* which) const {
    if (n_ == 0 || m.size() != n_ * n_) {
      throw ParameterError(std::string("discrete kernel: ") + which + " matrix has wrong shape");
    }
    for (std::size_t r = 0; r < n_; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < n_; ++c) {
        const double p = m[r * n_ + c];
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw ParameterError(std::string("discrete kernel: ") + which + " has invalid entry");
        }
        total += p;
      }
      if (std::fabs(total - 1.0) > kRowTolerance) {
        throw ParameterError(std::string("discrete kernel: ") + which + " row " +
                             std::to_string(r) + " does not sum to one");
      }
    }
  }

  std::size_t n_;
  std::vector<double> forward_;
  std::vector<double> reverse_;
};

/// Builds the kernel with T~(x <- x') = T(x' <- x) pi(x) / pi(x'). pi need not
/// be normalized but must be invariant under T.
inline DiscreteKernel reverse_from_target(std::size_t n, const std::vector<double>& forward,
                                          std::span<const double> pi) {
  if (pi.size() != n || forward.size() != n * n) {
    throw ParameterError("reverse_from_target: size mismatch");
  }
  std::vector<double> reverse(n * n, 0.0);
  for (std::size_t xn = 0; xn < n; ++xn) {
    if (!(pi[xn] > 0.0)) throw SupportError("reverse_from_target: pi is zero at a target state");
    double flux = 0.0;
    for (std::size_t x = 0; x < n; ++x) flux += forward[x * n + xn] * pi[x];
    if (std::fabs(flux - pi[xn]) > 1e-10 * pi[xn]) {
      throw ParameterError("reverse_from_target: pi is not invariant under the forward kernel");
    }
    for (std::size_t x = 0; x < n; ++x) {
      reverse[xn * n + x] = forward[x * n + xn] * pi[x] / pi[xn];
    }
  }
  return {n, forward, std::move(reverse)};
}

/// Independence kernel T(x' <- x) = pmf(x'); self-reverse with respect to pmf.
inline DiscreteKernel independence_kernel(std::span<const double> pmf) {
  const std::size_t n = pmf.size();
  double total = 0.0;
  for (double p : pmf) total += p;
  if (n == 0 || !(total > 0.0)) throw ParameterError("independence kernel needs positive mass");
  std::vector<double> m(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xn = 0; xn < n; ++xn) m[x * n + xn] = pmf[xn] / total;
  }
  return DiscreteKernel::reversible(n, std::move(m));
}

// ---------------------------------------------------------------------------
// Gibbs conditionals: resample coordinate n from pi(x_n | x_{m != n}).
// ---------------------------------------------------------------------------

/// Conditional of coordinate n given the other: N(rho * x_other, 1 - rho^2).
inline GaussianKernel gibbs_conditional_kernel(const BivariateGaussian& target, std::size_t n,
                                               std::span<const double> x) {
  if (n > 1 || x.size() != 2) throw ParameterError("bivariate Gaussian has two coordinates");
  return {target.rho * x[1 - n], std::sqrt(1.0 - target.rho * target.rho)};
}

/// Row (or column) renormalization of the joint table.
inline DiscreteKernel gibbs_conditional_kernel(const DiscreteJointTable& target, std::size_t n,
                                               std::span<const std::size_t> x) {
  if (n > 1 || x.size() != 2) throw ParameterError("joint table has two coordinates");
  std::vector<double> pmf;
  if (n == 0) {
    for (std::size_t a = 0; a < target.rows(); ++a) pmf.push_back(target(a, x[1]));
  } else {
    for (std::size_t b = 0; b < target.cols(); ++b) pmf.push_back(target(x[0], b));
  }
  return independence_kernel(pmf);
}

/// Funnel coordinates 1..9 are Gaussian given v. The v conditional has no
/// closed-form CDF; use the slice sampler for it.
inline GaussianKernel gibbs_conditional_kernel(const FunnelState& state, std::size_t n) {
  if (n == 0) {
    throw UnsupportedTargetError("funnel: conditional of v has no tractable inverse CDF");
  }
  if (n >= kFunnelDim) throw ParameterError("funnel has ten coordinates");
  return {0.0, std::exp(0.5 * state.v)};
}

}  // namespace depstream
