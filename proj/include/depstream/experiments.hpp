#pragma once

// Experiment drivers: the funnel bias sweep, the AR(1) duplicated-noise
// variance study, the ring half-traversal study, funnel runs interleaving
// ideal and dependent driving, and a pushforward validation battery. Each
// run is a deterministic function of its configuration and seed.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "depstream/augmented.hpp"
#include "depstream/diagnostics.hpp"
#include "depstream/errors.hpp"
#include "depstream/kernels.hpp"
#include "depstream/mh.hpp"
#include "depstream/slice.hpp"
#include "depstream/streams.hpp"
#include "depstream/targets.hpp"
#include "depstream/validation.hpp"

namespace depstream {

// ---------------------------------------------------------------------------
// Configuration pieces.
// ---------------------------------------------------------------------------

enum class StreamKind { iid, sticky, constant, file };
enum class SamplerKind { ds, naive };

inline std::string to_string(StreamKind k) {
  switch (k) {
    case StreamKind::iid: return "iid";
    case StreamKind::sticky: return "sticky";
    case StreamKind::constant: return "constant";
    case StreamKind::file: return "file";
  }
  return "?";
}

inline std::string to_string(SamplerKind k) { return k == SamplerKind::ds ? "ds" : "naive"; }

struct StreamSpec {
  StreamKind kind = StreamKind::sticky;
  double value = 0.5;  ///< constant streams
  std::string path;    ///< file streams
  OnExhaust on_exhaust = OnExhaust::error;
};

/// `p` is only read by sticky streams.
inline std::unique_ptr<Stream> make_stream(const StreamSpec& spec, double p, std::uint64_t seed) {
  switch (spec.kind) {
    case StreamKind::iid: return std::make_unique<IidStream>(seed);
    case StreamKind::sticky: return std::make_unique<StickyStream>(p, seed);
    case StreamKind::constant: return std::make_unique<ConstantStream>(spec.value);
    case StreamKind::file:
      return std::make_unique<ValueStream>(make_file_stream(spec.path, spec.on_exhaust));
  }
  throw ConfigError("unknown stream kind");
}

/// Seed salts for the independent pieces of one run.
enum SeedSalt : std::uint64_t { kSaltInitX = 1, kSaltInitU = 2, kSaltIdeal = 4 };

namespace detail {

inline double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Runs job(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown is rethrown after all threads join.
template <class Job>
void parallel_for(std::size_t count, std::size_t jobs, Job&& job) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

inline std::string format_real(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Funnel samplers.
// ---------------------------------------------------------------------------

/// Chain on the funnel that updates each of the ten coordinates in turn
/// with a single-variable slice update. The augmented sampler gives every
/// coordinate its own K auxiliary uniforms.
class FunnelChain {
 public:
  FunnelChain(SamplerKind sampler, const SliceParams& params, std::uint64_t seed)
      : sampler_(sampler), params_(params) {
    params_.validate();
    UniformSource init_x(mix_seed(seed, kSaltInitX));
    state_ = funnel_exact_sample(init_x);
    UniformSource init_u(mix_seed(seed, kSaltInitU));
    for (auto& u : aux_) {
      u.resize(params_.K);
      for (double& ui : u) ui = init_u.uniform();
    }
  }

  const FunnelState& state() const noexcept { return state_; }

  /// One slice update of every coordinate.
  void sweep(Stream& stream) {
    for (std::size_t i = 0; i < kFunnelDim; ++i) {
      const double v = state_.v;
      const double sum_sq = i == 0 ? state_.sum_x_squared() : 0.0;
      auto log_density = [i, v, sum_sq](double value) {
        return funnel_conditional_logpdf(i, value, v, sum_sq);
      };
      if (sampler_ == SamplerKind::ds) {
        SliceState s{state_[i], std::move(aux_[i])};
        s = slice_step(std::move(s), log_density, params_, stream);
        state_[i] = s.x;
        aux_[i] = std::move(s.u);
      } else {
        state_[i] = naive_slice_step(state_[i], log_density, params_.w, stream, params_.max_expansions);
      }
    }
  }

 private:
  SamplerKind sampler_;
  SliceParams params_;
  FunnelState state_;
  std::array<std::vector<double>, kFunnelDim> aux_;
};

struct FunnelConfig {
  std::vector<double> p_grid{0.0, 0.25, 0.5, 0.75, 0.9, 1.0};
  std::vector<SamplerKind> samplers{SamplerKind::ds, SamplerKind::naive};
  StreamSpec stream;
  std::uint64_t seed = 1;
  std::size_t updates = 240'000;  ///< slice updates per variable (= sweeps)
  SliceParams slice;
  std::size_t thin = 120;
  std::size_t jobs = 1;
  /// Interleaving: per `period` sweeps, the first round(r * period) are
  /// driven by an ideal i.i.d. source, the rest by the dependent stream.
  double ideal_fraction = 0.0;
  std::size_t period = 1000;

  void validate() const {
    if (p_grid.empty()) throw ConfigError("funnel: empty p grid");
    for (double p : p_grid) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("funnel: p must lie in [0,1]");
    }
    if (samplers.empty()) throw ConfigError("funnel: no sampler selected");
    if (updates < 10) throw ConfigError("funnel: need at least 10 updates per variable");
    if (thin == 0) throw ConfigError("funnel: thinning interval must be >= 1");
    if (!(ideal_fraction >= 0.0 && ideal_fraction <= 1.0)) throw ConfigError("interleave: r must lie in [0,1]");
    if (period == 0) throw ConfigError("interleave: period must be >= 1");
    try {
      slice.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
};

struct FunnelRow {
  double p = 0.0;
  SamplerKind sampler = SamplerKind::ds;
  std::uint64_t seed = 0;
  std::size_t updates = 0;
  double ideal_fraction = 0.0;
  EstimateReport v;
  double runtime_seconds = 0.0;
  std::string failure;  ///< empty unless the chain stopped early
};

struct FunnelCell {
  FunnelRow row;
  std::vector<double> v_trace;  ///< v after every sweep
};

inline FunnelCell run_funnel_cell(const FunnelConfig& config, double p, SamplerKind sampler) {
  const auto start = std::chrono::steady_clock::now();
  auto dependent = make_stream(config.stream, p, config.seed);
  IidStream ideal(mix_seed(config.seed, kSaltIdeal));
  FunnelChain chain(sampler, config.slice, config.seed);

  const auto ideal_sweeps =
      static_cast<std::size_t>(std::llround(config.ideal_fraction * static_cast<double>(config.period)));
  FunnelCell cell;
  cell.v_trace.reserve(config.updates);
  std::string failure;
  try {
    for (std::size_t t = 0; t < config.updates; ++t) {
      Stream& driver = (t % config.period) < ideal_sweeps ? static_cast<Stream&>(ideal) : *dependent;
      chain.sweep(driver);
      cell.v_trace.push_back(chain.state().v);
    }
  } catch (const Error& e) {
    // A runaway chain (the naive sampler on a constant stream, say) stops
    // here; the row then reports the sweeps actually completed.
    failure = e.what();
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  EstimateReport v{nan, nan, nan, nan};
  if (cell.v_trace.size() >= 10) {
    try {
      v = estimate(cell.v_trace);
    } catch (const DegenerateTraceError&) {
      v.mean = cell.v_trace.front();
      v.variance = 0.0;
    }
  }
  cell.row = FunnelRow{p, sampler, config.seed, cell.v_trace.size(), config.ideal_fraction,
                       v, detail::elapsed_seconds(start), std::move(failure)};
  return cell;
}

/// One cell per (p, sampler), p-major. Cells may run in parallel; the
/// result order is fixed by the grid.
inline std::vector<FunnelCell> run_funnel_experiment(const FunnelConfig& config) {
  config.validate();
  std::vector<std::pair<double, SamplerKind>> grid;
  for (double p : config.p_grid) {
    for (SamplerKind s : config.samplers) grid.emplace_back(p, s);
  }
  std::vector<FunnelCell> cells(grid.size());
  detail::parallel_for(grid.size(), config.jobs, [&](std::size_t i) {
    cells[i] = run_funnel_cell(config, grid[i].first, grid[i].second);
  });
  return cells;
}

inline void write_funnel_csv(std::ostream& out, const std::vector<FunnelCell>& cells,
                             bool include_runtime = true, bool interleaved = false) {
  if (interleaved) out << "r,";
  out << "p,sampler,seed,updates,mean_v,se_v,ess_v,runtime_seconds\n";
  for (const auto& c : cells) {
    const auto& r = c.row;
    if (interleaved) out << detail::format_real(r.ideal_fraction) << ',';
    out << detail::format_real(r.p) << ',' << to_string(r.sampler) << ',' << r.seed << ','
        << r.updates << ',' << detail::format_real(r.v.mean) << ','
        << detail::format_real(r.v.standard_error) << ',' << detail::format_real(r.v.ess) << ','
        << (include_runtime ? detail::format_real(r.runtime_seconds) : "0") << '\n';
  }
}

/// `step,v` rows for the trace thinned to every `thin` sweeps; step counts
/// updates per variable.
inline void write_trace_csv(std::ostream& out, const std::vector<double>& v_trace, std::size_t thin) {
  const Trace thinned = depstream::thin(Trace{v_trace, 1, "v"}, thin);
  out << "step,v\n";
  for (std::size_t i = 0; i < thinned.values.size(); ++i) {
    out << (i + 1) * thin << ',' << detail::format_real(thinned.values[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// AR(1) with duplicated noise.
// ---------------------------------------------------------------------------

enum class NoisePattern { iid, duplicate_pairs };
enum class ArMode { naive, adapted };

inline std::string to_string(NoisePattern p) { return p == NoisePattern::iid ? "iid" : "duplicate-pairs"; }
inline std::string to_string(ArMode m) { return m == ArMode::naive ? "naive" : "adapted"; }

struct ArConfig {
  double alpha = 0.5;
  NoisePattern pattern = NoisePattern::duplicate_pairs;
  ArMode mode = ArMode::naive;
  std::size_t samples = 1'000'000;  ///< even-step samples recorded
  std::uint64_t seed = 1;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("ar: alpha must lie in [0,1)");
    if (samples < 10) throw ConfigError("ar: need at least 10 samples");
  }
};

struct ArResult {
  ArConfig config;
  double mean = 0.0;
  double variance = 0.0;
  double runtime_seconds = 0.0;
};

/// Naive mode feeds nu = Phi^{-1}(d) straight into x' = alpha x + sqrt(1-alpha^2) nu.
/// Adapted mode drives the same kernel with Operator 1 then Operator 2.
/// x is recorded after every second transition, i.e. before each fresh
/// noise pair.
inline ArResult run_ar_variance_experiment(const ArConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  IidStream base(config.seed);
  DuplicatePairStream duplicated(base);
  Stream& stream = config.pattern == NoisePattern::iid ? static_cast<Stream&>(base) : duplicated;

  UniformSource init(mix_seed(config.seed, kSaltInitX));
  const ARKernel kernel(config.alpha);
  AugmentedState<double> s{init.normal(), init.uniform()};

  auto transition = [&] {
    if (config.mode == ArMode::naive) {
      double d = mod_one(stream.next());
      if (d == 0.0) d = 0x1.0p-54;
      s.x = ar_forward_quantile(config.alpha, s.x, d);
    } else {
      s.u = operator1(s.u, stream.next());
      s = operator2_continuous(kernel, s);
    }
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < config.samples; ++i) {
    transition();
    transition();
    sum += s.x;
    sum_sq += s.x * s.x;
  }
  const double n = static_cast<double>(config.samples);
  ArResult r{config, sum / n, 0.0, 0.0};
  r.variance = (sum_sq - n * r.mean * r.mean) / (n - 1.0);
  r.runtime_seconds = detail::elapsed_seconds(start);
  return r;
}

inline void write_ar_csv(std::ostream& out, const std::vector<ArResult>& rows, bool include_runtime = true) {
  out << "alpha,pattern,mode,seed,samples,mean,variance,runtime_seconds\n";
  for (const auto& r : rows) {
    out << detail::format_real(r.config.alpha) << ',' << to_string(r.config.pattern) << ','
        << to_string(r.config.mode) << ',' << r.config.seed << ',' << r.config.samples << ','
        << detail::format_real(r.mean) << ',' << detail::format_real(r.variance) << ','
        << (include_runtime ? detail::format_real(r.runtime_seconds) : "0") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Ring half-traversal.
// ---------------------------------------------------------------------------

struct RingConfig {
  StreamSpec stream;
  double p = 0.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::size_t step_cap = 10'000'000;

  void validate() const {
    if (trials < 1) throw ConfigError("ring: need at least one trial");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("ring: p must lie in [0,1]");
    if (step_cap < 1) throw ConfigError("ring: step cap must be >= 1");
  }
};

struct RingResult {
  RingConfig config;
  std::vector<std::size_t> hitting_times;  ///< step_cap + 1 marks a timeout
  double mean_hit = 0.0;                   ///< over trials that finished
  double median_hit = 0.0;
  std::size_t timeouts = 0;
  double runtime_seconds = 0.0;
};

/// Steps from x = 0 until x = 50 is first reached. All trials share one
/// stream; each trial starts from a fresh uniform u.
inline RingResult run_ring_experiment(const RingConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto stream = make_stream(config.stream, config.p, config.seed);
  UniformSource init(mix_seed(config.seed, kSaltInitU));
  RingResult r;
  r.config = config;
  std::vector<double> finished;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    RingWalkState s{0, init.uniform()};
    std::size_t steps = 0;
    while (s.x != kRingSize / 2 && steps <= config.step_cap) {
      s = ring_walk_step(s, *stream);
      ++steps;
    }
    if (s.x != kRingSize / 2) {
      ++r.timeouts;
      r.hitting_times.push_back(config.step_cap + 1);
    } else {
      r.hitting_times.push_back(steps);
      finished.push_back(static_cast<double>(steps));
    }
  }
  if (!finished.empty()) {
    r.mean_hit = std::accumulate(finished.begin(), finished.end(), 0.0) / static_cast<double>(finished.size());
    std::sort(finished.begin(), finished.end());
    const std::size_t m = finished.size();
    r.median_hit = m % 2 == 1 ? finished[m / 2] : 0.5 * (finished[m / 2 - 1] + finished[m / 2]);
  }
  r.runtime_seconds = detail::elapsed_seconds(start);
  return r;
}

inline void write_ring_csv(std::ostream& out, const std::vector<RingResult>& rows, bool include_runtime = true) {
  out << "stream,p,seed,trials,mean_hit,median_hit,timeouts,runtime_seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.config.stream.kind) << ',' << detail::format_real(r.config.p) << ','
        << r.config.seed << ',' << r.config.trials << ',' << detail::format_real(r.mean_hit) << ','
        << detail::format_real(r.median_hit) << ',' << r.timeouts << ','
        << (include_runtime ? detail::format_real(r.runtime_seconds) : "0") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Interleaved driving.
// ---------------------------------------------------------------------------

/// Funnel runs where a fraction r of sweeps per period use an ideal i.i.d.
/// source. r = 0 is run_funnel_experiment; r = 1 is fully ideal driving.
inline std::vector<FunnelCell> run_interleaved_experiment(FunnelConfig config, double r) {
  config.ideal_fraction = r;
  return run_funnel_experiment(config);
}

// ---------------------------------------------------------------------------
// Validation battery.
// ---------------------------------------------------------------------------

struct ValidationRow {
  std::string check;
  double statistic = 0.0;
  double p_value = 1.0;
  bool expect_invariant = true;
  bool invariant = true;
  bool ok() const { return expect_invariant == invariant; }
};

/// Pushforward checks for each operator, plus the naive slice sampler under
/// a sticky stream, which is expected to fail.
inline std::vector<ValidationRow> run_validation(std::uint64_t seed, std::size_t samples,
                                                 double significance = 0.01) {
  std::vector<ValidationRow> rows;
  auto add = [&](std::string name, const PushforwardReport& rep, bool expect) {
    double stat = 0.0;
    for (const auto& m : rep.marginals) stat = std::max(stat, m.statistic);
    rows.push_back({std::move(name), stat, rep.p_value, expect, rep.pass});
  };

  using Pair = AugmentedState<double>;
  const std::vector<Marginal<Pair>> pair_marginals{
      {"x", [](const Pair& s) { return s.x; }, normal_cdf, {}},
      {"u", [](const Pair& s) { return s.u; }, standard_uniform_cdf, {}}};
  auto exact_pair = [](UniformSource& src) { return Pair{src.normal(), src.uniform()}; };

  const std::vector<double> d_fixed{0.37};
  add("operator1",
      invariance_check<Pair>(exact_pair,
                             [](Pair s, Stream& st) {
                               s.u = operator1(s.u, st.next());
                               return s;
                             },
                             pair_marginals, d_fixed, samples, mix_seed(seed, 10), significance),
      true);

  const ARKernel ar(0.6);
  add("operator2_ar",
      invariance_check<Pair>(exact_pair,
                             [&](Pair s, Stream& st) {
                               s.u = operator1(s.u, st.next());
                               return operator2_continuous(ar, s);
                             },
                             pair_marginals, d_fixed, samples, mix_seed(seed, 11), significance),
      true);

  const std::vector<Marginal<MHState>> mh_marginals{
      {"x", [](const MHState& s) { return s.x; }, normal_cdf, {}},
      {"u_q", [](const MHState& s) { return s.u_q; }, standard_uniform_cdf, {}},
      {"u_a", [](const MHState& s) { return s.u_a; }, standard_uniform_cdf, {}}};
  const GaussianRandomWalk rw(1.5);
  const UnitGaussian gauss;
  add("mh_transform",
      invariance_check<MHState>(
          [](UniformSource& src) { return MHState{src.normal(), src.uniform(), src.uniform()}; },
          [&](MHState s, Stream& st) { return mh_step(s, gauss, rw, st); }, mh_marginals,
          std::vector<double>{0.21, 0.73}, samples, mix_seed(seed, 12), significance),
      true);

  const SliceParams sp{1.0, 10, 1'000'000};
  std::vector<Marginal<SliceState>> slice_marginals{
      {"x", [](const SliceState& s) { return s.x; }, normal_cdf, {}}};
  for (std::size_t k = 0; k < sp.K; ++k) {
    slice_marginals.push_back({"u" + std::to_string(k + 1),
                               [k](const SliceState& s) { return s.u[k]; }, standard_uniform_cdf, {}});
  }
  add("slice_step",
      invariance_check<SliceState>(
          [&](UniformSource& src) {
            SliceState s{src.normal(), std::vector<double>(sp.K)};
            for (double& u : s.u) u = src.uniform();
            return s;
          },
          [&](SliceState s, Stream& st) { return slice_step(std::move(s), gauss, sp, st); },
          slice_marginals, std::vector<double>{0.9, 0.9, 0.9, 0.45, 0.45, 0.1}, samples,
          mix_seed(seed, 13), significance),
      true);

  // Funnel v given exact x, updated by the naive sampler with a fixed
  // realization of a p = 0.9 sticky stream.
  std::vector<double> sticky_draws;
  {
    StickyStream sticky(0.9, mix_seed(seed, 14));
    for (int i = 0; i < 64; ++i) sticky_draws.push_back(sticky.next());
  }
  const std::vector<Marginal<FunnelState>> v_marginal{
      {"v", [](const FunnelState& s) { return s.v; },
       [](double v) { return normal_cdf(v / kFunnelSdV); }, {}}};
  add("naive_slice_sticky_0.9",
      invariance_check<FunnelState>(
          [](UniformSource& src) { return funnel_exact_sample(src); },
          [](FunnelState s, Stream& st) {
            const double sum_sq = s.sum_x_squared();
            s.v = naive_slice_step(
                s.v, [&](double v) { return funnel_conditional_logpdf(0, v, 0.0, sum_sq); }, 1.0, st);
            return s;
          },
          v_marginal, sticky_draws, samples, mix_seed(seed, 15), significance),
      false);
  return rows;
}

inline void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows) {
  out << "check,statistic,p_value,expected,observed,pass\n";
  for (const auto& r : rows) {
    out << r.check << ',' << detail::format_real(r.statistic) << ',' << detail::format_real(r.p_value)
        << ',' << (r.expect_invariant ? "invariant" : "biased") << ','
        << (r.invariant ? "invariant" : "biased") << ',' << (r.ok() ? "yes" : "no") << '\n';
  }
}

}  // namespace depstream
