#pragma once

// Metropolis-Hastings on the triple (x, u_q, u_a). Both uniforms are
// refreshed by Operator 1; the deterministic transform then proposes with
// u_q through the proposal's inverse CDF and, on acceptance, rewrites u_a
// and u_q to the values that would accept and propose the reverse move.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>

#include "depstream/errors.hpp"
#include "depstream/mod_one.hpp"
#include "depstream/normal.hpp"
#include "depstream/streams.hpp"

namespace depstream {

struct MHState {
  double x = 0.0;
  double u_q = 0.0;
  double u_a = 0.0;
};

/// log_density(x_new, x) = log q(x_new; x); cdf(x_new, x) = P(X' <= x_new | x);
/// quantile(u, x) inverts cdf(., x).
template <class Q>
concept ProposalDensity = requires(const Q& q, double a, double b) {
  { q.log_density(a, b) } -> std::convertible_to<double>;
  { q.cdf(a, b) } -> std::convertible_to<double>;
  { q.quantile(a, b) } -> std::convertible_to<double>;
};

/// x' ~ N(x, sigma^2).
class GaussianRandomWalk {
 public:
  explicit GaussianRandomWalk(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("proposal sigma must be > 0");
  }
  double log_density(double x_new, double x) const {
    return normal_logpdf((x_new - x) / sigma_) - std::log(sigma_);
  }
  double cdf(double x_new, double x) const { return normal_cdf((x_new - x) / sigma_); }
  double quantile(double u, double x) const { return x + sigma_ * normal_quantile(u); }

 private:
  double sigma_;
};

/// x' ~ N(beta x, sigma^2). Not symmetric unless beta == 1.
class ShrinkingGaussianProposal {
 public:
  ShrinkingGaussianProposal(double beta, double sigma) : beta_(beta), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("proposal sigma must be > 0");
  }
  double log_density(double x_new, double x) const {
    return normal_logpdf((x_new - beta_ * x) / sigma_) - std::log(sigma_);
  }
  double cdf(double x_new, double x) const { return normal_cdf((x_new - beta_ * x) / sigma_); }
  double quantile(double u, double x) const { return beta_ * x + sigma_ * normal_quantile(u); }

 private:
  double beta_;
  double sigma_;
};

namespace detail {

/// log of q(x; x') pi(x') / (q(x'; x) pi(x)).
template <class LogTarget, ProposalDensity Q>
double log_hastings_ratio(const LogTarget& log_target, const Q& q, double x, double x_new) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const double log_fwd = q.log_density(x_new, x);
  if (!(log_fwd > neg_inf)) throw ProposalSupportError("proposal density is zero at x'");
  const double log_pi_x = log_target(x);
  if (!(log_pi_x > neg_inf)) throw InvalidStateError("target density is zero at x");
  const double log_pi_new = log_target(x_new);
  if (std::isnan(log_pi_new)) throw NumericError("target log density is NaN");
  if (!(log_pi_new > neg_inf)) return neg_inf;
  const double log_back = q.log_density(x, x_new);
  if (std::isnan(log_back)) throw NumericError("proposal log density is NaN");
  return log_back + log_pi_new - log_fwd - log_pi_x;
}

}  // namespace detail

/// min(1, q(x; x') pi(x') / (q(x'; x) pi(x))). `log_target` is an
/// unnormalized log density.
template <class LogTarget, ProposalDensity Q>
double acceptance_prob(const LogTarget& log_target, const Q& q, double x, double x_new) {
  const double log_ratio = detail::log_hastings_ratio(log_target, q, x, x_new);
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

/// The deterministic part of the update. An involution on accepted moves:
/// applying it to its own output gives back the input.
template <class LogTarget, ProposalDensity Q>
MHState mh_transform(const MHState& s, const LogTarget& log_target, const Q& q) {
  const double x_new = q.quantile(s.u_q, s.x);
  if (!std::isfinite(x_new)) throw NumericError("proposal quantile is not finite");
  const double log_ratio = detail::log_hastings_ratio(log_target, q, s.x, x_new);
  const double accept = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  if (s.u_a > accept) return s;
  MHState out;
  out.x = x_new;
  // u_a / a(x';x) * a(x;x') == u_a * exp(-log_ratio)
  out.u_a = clamp_unit(s.u_a * std::exp(-log_ratio));
  out.u_q = clamp_unit(q.cdf(s.x, x_new));
  return out;
}

/// Operator 1 on u_q (first draw) and u_a (second draw), then the transform.
template <class LogTarget, ProposalDensity Q>
MHState mh_step(MHState s, const LogTarget& log_target, const Q& q, Stream& stream) {
  s.u_q = operator1(s.u_q, stream.next());
  s.u_a = operator1(s.u_a, stream.next());
  return mh_transform(s, log_target, q);
}

}  // namespace depstream
