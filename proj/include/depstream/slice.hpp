#pragma once

// Univariate slice sampling with linear stepping out, driven by a dependent
// stream. The state carries K auxiliary uniforms: u[0] sets the slice
// height, u[1] places the initial bracket and u[2..K-1] drive successive
// proposals. After an accepted proposal the used uniforms are rewritten so
// the same procedure, run from the new state, returns to the old one.
//
// Densities are passed as unnormalized log densities; the slice height is
// kept as log y.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "depstream/errors.hpp"
#include "depstream/mod_one.hpp"
#include "depstream/streams.hpp"

namespace depstream {

struct SliceParams {
  double w = 1.0;                         ///< bracket step size
  std::size_t K = 10;                     ///< auxiliary uniforms per update
  std::size_t max_expansions = 1'000'000; ///< cap on stepping-out iterations

  void validate() const {
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("slice: step size must be > 0");
    if (K < 3) throw ParameterError("slice: K must be at least 3");
    if (max_expansions == 0) throw ParameterError("slice: max_expansions must be >= 1");
  }
};

struct SliceState {
  double x = 0.0;
  std::vector<double> u;  ///< K uniforms in [0,1)
};

/// Quantities of one update, for diagnostics and tests.
struct SliceStepInfo {
  double log_y = 0.0;
  double x_left_initial = 0.0;  ///< x_{L,1}
  double x_left = 0.0;          ///< bracket at acceptance (or exhaustion)
  double x_right = 0.0;
  std::size_t proposal_index = 0;  ///< index into u of the accepted proposal
  std::size_t draws = 0;           ///< stream values consumed
  bool accepted = false;
};

namespace detail {

/// Runs one update. With `stream == nullptr` the uniforms are used as they
/// are (the replay used by the reverse procedure).
template <class LogDensity>
SliceState slice_update(SliceState s, const LogDensity& log_density, const SliceParams& params,
                        Stream* stream, SliceStepInfo* info) {
  params.validate();
  if (s.u.size() != params.K) throw InvalidStateError("slice: state holds the wrong number of uniforms");
  for (double u : s.u) {
    if (!(u >= 0.0 && u < 1.0)) throw InvalidStateError("slice: auxiliary uniform outside [0,1)");
  }
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const double log_px = log_density(s.x);
  if (!(log_px > neg_inf)) throw InvalidStateError("slice: target density is not positive at x");

  std::size_t draws = 0;
  auto refresh = [&](std::size_t i) {
    if (stream != nullptr) {
      s.u[i] = operator1(s.u[i], stream->next());
      ++draws;
    }
  };

  refresh(0);
  const double log_y = std::log(s.u[0]) + log_px;

  refresh(1);
  const double w = params.w;
  const double x_left_initial = s.x - s.u[1] * w;
  double x_left = x_left_initial;
  double x_right = x_left_initial + w;

  std::size_t expansions = 0;
  while (log_density(x_left) > log_y) {
    x_left -= w;
    if (++expansions > params.max_expansions) throw ExpansionLimitError("slice: stepping out did not terminate");
  }
  while (log_density(x_right) > log_y) {
    x_right += w;
    if (++expansions > params.max_expansions) throw ExpansionLimitError("slice: stepping out did not terminate");
  }

  auto record = [&](std::size_t k, bool accepted) {
    if (info != nullptr) {
      *info = SliceStepInfo{log_y, x_left_initial, x_left, x_right, k, draws, accepted};
    }
  };

  for (std::size_t k = 2; k < params.K; ++k) {
    refresh(k);
    const double x_new = x_left + s.u[k] * (x_right - x_left);
    const double log_p_new = log_density(x_new);
    if (std::isnan(log_p_new)) throw NumericError("slice: log density is NaN");
    if (log_p_new < log_y || !(log_p_new > neg_inf)) {
      if (x_new > s.x) {
        x_right = x_new;
      } else {
        x_left = x_new;
      }
      continue;
    }
    s.u[0] = clamp_unit(std::exp(log_y - log_p_new));
    s.u[1] = mod_one((x_new - x_left_initial) / w);
    s.u[k] = clamp_unit((s.x - x_left) / (x_right - x_left));
    s.x = x_new;
    record(k, true);
    return s;
  }
  // All K uniforms used without an acceptable proposal: x stays put and the
  // refreshed uniforms are kept.
  record(params.K, false);
  return s;
}

}  // namespace detail

template <class LogDensity>
SliceState slice_step(SliceState s, const LogDensity& log_density, const SliceParams& params,
                      Stream& stream, SliceStepInfo* info = nullptr) {
  return detail::slice_update(std::move(s), log_density, params, &stream, info);
}

/// Undoes a slice_step given the draws it consumed, in the order they were
/// drawn. Runs the update without stream refreshes to move x back, then
/// unwinds u[k], ..., u[0] with u <- (u - d) mod 1.
template <class LogDensity>
SliceState slice_step_reverse(SliceState s, const LogDensity& log_density,
                              const SliceParams& params, std::span<const double> draws) {
  SliceStepInfo info;
  s = detail::slice_update(std::move(s), log_density, params, nullptr, &info);
  const std::size_t expected = info.accepted ? info.proposal_index + 1 : params.K;
  if (draws.size() != expected) {
    throw ReplayError("slice reverse: replay consumed " + std::to_string(expected) +
                      " uniforms but " + std::to_string(draws.size()) + " draws were recorded");
  }
  for (std::size_t i = draws.size(); i-- > 0;) s.u[i] = mod_one(s.u[i] - draws[i]);
  return s;
}

/// Standard stepping-out slice sampler that treats stream outputs as
/// independent uniforms (after wrapping them into [0,1)). Not invariant for
/// dependent streams; kept as the baseline the augmented sampler fixes.
template <class LogDensity>
double naive_slice_step(double x, const LogDensity& log_density, double w, Stream& stream,
                        std::size_t max_expansions = 1'000'000) {
  if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("slice: step size must be > 0");
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const double log_px = log_density(x);
  if (!(log_px > neg_inf)) throw InvalidStateError("slice: target density is not positive at x");

  const double log_y = std::log(mod_one(stream.next())) + log_px;
  double x_left = x - mod_one(stream.next()) * w;
  double x_right = x_left + w;
  std::size_t expansions = 0;
  while (log_density(x_left) > log_y) {
    x_left -= w;
    if (++expansions > max_expansions) throw ExpansionLimitError("slice: stepping out did not terminate");
  }
  while (log_density(x_right) > log_y) {
    x_right += w;
    if (++expansions > max_expansions) throw ExpansionLimitError("slice: stepping out did not terminate");
  }
  // Shrinkage toward x always terminates in exact arithmetic; in floating
  // point the bracket can stop shrinking, so give up after many tries.
  for (int tries = 0; tries < 100'000; ++tries) {
    const double x_new = x_left + mod_one(stream.next()) * (x_right - x_left);
    const double log_p_new = log_density(x_new);
    if (!(log_p_new < log_y) && log_p_new > neg_inf) return x_new;
    if (x_new > x) {
      x_right = x_new;
    } else {
      x_left = x_new;
    }
  }
  return x;
}

}  // namespace depstream
