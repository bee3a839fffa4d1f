#pragma once

// Markov chains on the pair (x, u) with target pi(x) * Uniform[0,1)(u).
// Operator 1 shifts u by a stream output modulo one; Operator 2 moves x
// deterministically with u and resets u to the value that would drive the
// reverse kernel back. Both leave the pair target invariant, whatever the
// stream does.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "depstream/errors.hpp"
#include "depstream/kernels.hpp"
#include "depstream/mod_one.hpp"
#include "depstream/streams.hpp"

namespace depstream {

template <class X>
struct AugmentedState {
  X x{};
  double u = 0.0;  ///< always in [0,1)
};

/// x' = tau(u; x), u' = reverse_cdf(x', x).
template <ContinuousKernel Kernel>
AugmentedState<double> operator2_continuous(const Kernel& kernel, AugmentedState<double> s) {
  const double x_new = kernel.forward_quantile(s.u, s.x);
  if (!std::isfinite(x_new)) throw KernelError("operator2: forward quantile is not finite");
  const double u_new = kernel.reverse_cdf(x_new, s.x);
  if (!(u_new >= -1e-12 && u_new <= 1.0 + 1e-12)) {
    throw KernelError("operator2: reverse CDF outside [0,1]");
  }
  return {x_new, clamp_unit(u_new)};
}

/// Discrete Operator 2. The forward move picks the unique x' whose CDF
/// interval [u_min, u_max) contains u; u' keeps the same fraction through
/// the reverse interval of x.
inline AugmentedState<std::size_t> operator2_discrete(const DiscreteKernel& kernel,
                                                      AugmentedState<std::size_t> s) {
  const std::size_t n = kernel.size();
  if (s.x >= n) throw InvalidStateError("operator2: state outside the kernel support");
  if (!(s.u >= 0.0 && s.u < 1.0)) throw InvalidStateError("operator2: u outside [0,1)");

  const auto row = kernel.forward_row(s.x);
  double u_min = 0.0;
  std::size_t x_new = n;
  for (std::size_t c = 0; c < n; ++c) {
    if (s.u < u_min + row[c]) {
      x_new = c;
      break;
    }
    u_min += row[c];
  }
  if (x_new == n) {
    // Row sums a hair under one: u fell past the last boundary.
    for (std::size_t c = n; c-- > 0;) {
      if (row[c] > 0.0) {
        x_new = c;
        u_min -= row[c];
        break;
      }
    }
  }
  const double forward_prob = row[x_new];
  if (!(forward_prob > 0.0)) throw DegenerateKernelError("operator2: zero-width forward interval");

  const auto back = kernel.reverse_row(x_new);
  const double reverse_prob = back[s.x];
  if (!(reverse_prob > 0.0)) {
    throw BalanceError("operator2: reverse kernel cannot undo a possible forward move");
  }
  double u_min_back = 0.0;
  for (std::size_t c = 0; c < s.x; ++c) u_min_back += back[c];

  const double u_new = u_min_back + (reverse_prob / forward_prob) * (s.u - u_min);
  return {x_new, clamp_unit(u_new)};
}

/// One component update: maps a state to a new state, consuming no stream.
template <class X>
using Operator2 = std::function<AugmentedState<X>(const AugmentedState<X>&)>;

template <ContinuousKernel Kernel>
Operator2<double> continuous_update(Kernel kernel) {
  return [k = std::move(kernel)](const AugmentedState<double>& s) {
    return operator2_continuous(k, s);
  };
}

inline Operator2<std::size_t> discrete_update(DiscreteKernel kernel) {
  return [k = std::move(kernel)](const AugmentedState<std::size_t>& s) {
    return operator2_discrete(k, s);
  };
}

/// Update of coordinate `n` of a vector state. `make_kernel(x)` returns the
/// coordinate kernel given the current full state (e.g. a Gibbs conditional).
template <class MakeKernel>
Operator2<std::vector<double>> coordinate_update(std::size_t n, MakeKernel make_kernel) {
  return [n, make = std::move(make_kernel)](const AugmentedState<std::vector<double>>& s) {
    const auto kernel = make(std::span<const double>(s.x));
    const auto moved = operator2_continuous(kernel, AugmentedState<double>{s.x.at(n), s.u});
    AugmentedState<std::vector<double>> out = s;
    out.x[n] = moved.x;
    out.u = moved.u;
    return out;
  };
}

template <class MakeKernel>
Operator2<std::vector<std::size_t>> discrete_coordinate_update(std::size_t n, MakeKernel make_kernel) {
  return [n, make = std::move(make_kernel)](const AugmentedState<std::vector<std::size_t>>& s) {
    const auto kernel = make(std::span<const std::size_t>(s.x));
    const auto moved = operator2_discrete(kernel, AugmentedState<std::size_t>{s.x.at(n), s.u});
    AugmentedState<std::vector<std::size_t>> out = s;
    out.x[n] = moved.x;
    out.u = moved.u;
    return out;
  };
}

/// For each component in order: Operator 1 with one stream draw, then the
/// component's Operator 2.
template <class X>
AugmentedState<X> compose_sweep(std::span<const Operator2<X>> operators, AugmentedState<X> s,
                                Stream& stream) {
  for (const auto& op : operators) {
    s.u = operator1(s.u, stream.next());
    s = op(s);
  }
  return s;
}

template <class X>
AugmentedState<X> compose_sweep(const std::vector<Operator2<X>>& operators, AugmentedState<X> s,
                                Stream& stream) {
  return compose_sweep(std::span<const Operator2<X>>(operators), std::move(s), stream);
}

}  // namespace depstream
