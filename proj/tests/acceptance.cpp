// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Pass --quick to skip the full-length funnel runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "depstream/depstream.hpp"
#include "enumerated_kernels.hpp"

using namespace depstream;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class F>
double timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double circular(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

// ---------------------------------------------------------------------------

void ar_variance() {
  ArConfig c;
  c.samples = 1'000'000;
  c.seed = 1;
  ArResult naive, adapted;
  c.mode = ArMode::naive;
  const double t1 = timed([&] { naive = run_ar_variance_experiment(c); });
  c.mode = ArMode::adapted;
  const double t2 = timed([&] { adapted = run_ar_variance_experiment(c); });
  const bool ok = std::fabs(naive.variance - 1.8) <= 0.05 && std::fabs(adapted.variance - 1.0) <= 0.05 &&
                  t1 < 10.0 && t2 < 10.0;
  report("ar_duplicate_noise_variance", ok,
         fmt("naive %.4f (want 1.8 +- 0.05, %.2fs), adapted %.4f (want 1.0 +- 0.05, %.2fs)", naive.variance,
             t1, adapted.variance, t2));
}

void funnel_bias(std::size_t updates, const std::string& label, std::vector<FunnelCell>* keep_p1) {
  FunnelConfig c;
  c.updates = updates;
  c.seed = 1;
  struct Want {
    double p;
    SamplerKind sampler;
    bool unbiased;
  };
  const std::vector<Want> wants{{0.0, SamplerKind::ds, true},   {0.5, SamplerKind::ds, true},
                                {1.0, SamplerKind::ds, true},   {0.5, SamplerKind::naive, false},
                                {0.9, SamplerKind::naive, false}};
  bool ok = true;
  std::string detail;
  for (const auto& w : wants) {
    FunnelCell cell;
    const double t = timed([&] { cell = run_funnel_cell(c, w.p, w.sampler); });
    const double z = std::fabs(cell.row.v.mean) / cell.row.v.standard_error;
    const bool cell_ok = (w.unbiased ? z <= 2.0 : z > 2.0) && t < 60.0;
    ok = ok && cell_ok;
    detail += fmt("%s p=%.2g mean %.3f se %.3f |z| %.2f %.1fs%s; ", to_string(w.sampler).c_str(), w.p,
                  cell.row.v.mean, cell.row.v.standard_error, z, t, cell_ok ? "" : " <-");
    if (keep_p1 && w.p == 1.0 && w.sampler == SamplerKind::ds) keep_p1->push_back(std::move(cell));
  }
  report("funnel_bias_" + label, ok, detail);
}

void funnel_constant_stream(const FunnelCell& cell) {
  const auto& v = cell.v_trace;
  const auto est = estimate(v);
  const double sd = std::sqrt(est.variance);
  const bool ok = std::fabs(est.mean) <= 2.0 * est.standard_error && std::fabs(sd - 3.0) <= 0.15 * 3.0;
  report("funnel_p1_trace", ok,
         fmt("mean %.3f (2se %.3f), sd %.3f (want 3 +- 0.45), ess %.0f", est.mean, 2.0 * est.standard_error, sd,
             est.ess));
}

void ring_hitting() {
  RingConfig c;
  c.trials = 200;
  c.seed = 1;
  c.stream.kind = StreamKind::iid;
  RingResult iid, sticky;
  const double t1 = timed([&] { iid = run_ring_experiment(c); });
  c.stream.kind = StreamKind::sticky;
  c.p = 0.999;
  const double t2 = timed([&] { sticky = run_ring_experiment(c); });
  const bool ok = iid.mean_hit >= 1875.0 && iid.mean_hit <= 3125.0 && sticky.median_hit <= 300.0 &&
                  iid.timeouts == 0 && t1 < 30.0 && t2 < 30.0;
  report("ring_half_traversal", ok,
         fmt("iid mean %.1f (want [1875,3125], %.2fs), sticky 0.999 median %.1f (want <= 300, %.2fs)",
             iid.mean_hit, t1, sticky.median_hit, t2));
}

void round_trips() {
  UniformSource src(2024);
  double cont = 0.0, mh = 0.0, slice = 0.0, disc = 0.0;
  std::size_t mh_accepted = 0;

  for (int i = 0; i < 1000; ++i) {
    const ARKernel k(0.95 * src.uniform());
    const AugmentedState<double> s{src.normal(), src.open_uniform()};
    const auto back = operator2_continuous(k, operator2_continuous(k, s));
    cont = std::max({cont, std::fabs(back.x - s.x), std::fabs(back.u - s.u)});
  }

  const GaussianRandomWalk rw(1.5);
  const UnitGaussian gauss;
  while (mh_accepted < 1000) {
    const MHState s{src.normal(), src.open_uniform(), src.open_uniform()};
    const MHState f = mh_transform(s, gauss, rw);
    if (f.x == s.x) continue;
    ++mh_accepted;
    const MHState b = mh_transform(f, gauss, rw);
    mh = std::max({mh, std::fabs(b.x - s.x), std::fabs(b.u_q - s.u_q), std::fabs(b.u_a - s.u_a)});
  }

  const SliceParams sp{1.0, 10, 1'000'000};
  for (int i = 0; i < 1000; ++i) {
    SliceState start{src.normal(), std::vector<double>(sp.K)};
    for (double& u : start.u) u = src.uniform();
    IidStream inner(mix_seed(77, i));
    StreamRecorder rec(inner);
    const auto fwd = slice_step(start, gauss, sp, rec);
    const auto back = slice_step_reverse(fwd, gauss, sp, rec.log());
    double dev = std::fabs(back.x - start.x);
    for (std::size_t j = 0; j < sp.K; ++j) dev = std::max(dev, circular(back.u[j], start.u[j]));
    slice = std::max(slice, dev);
  }

  const auto kernels = oracle::enumerate_kernels(3, 3);
  for (int i = 0; i < 1000; ++i) {
    const auto& k = kernels[static_cast<std::size_t>(src.uniform() * kernels.size())];
    const AugmentedState<std::size_t> s{static_cast<std::size_t>(src.uniform() * 3), src.uniform()};
    const auto f = operator2_discrete(k, s);
    const auto b = operator2_discrete(k.reversed(), f);
    disc = std::max(disc, b.x == s.x ? std::fabs(b.u - s.u) : 1.0);
  }

  report("round_trip_continuous", cont <= 1e-9, fmt("max deviation %.3g over 1000 (want <= 1e-9)", cont));
  report("round_trip_mh_accepted", mh <= 1e-9, fmt("max deviation %.3g over 1000 (want <= 1e-9)", mh));
  report("round_trip_slice", slice <= 1e-9, fmt("max deviation %.3g over 1000 (want <= 1e-9)", slice));
  report("round_trip_discrete", disc <= 1e-12, fmt("max deviation %.3g over 1000 (want <= 1e-12)", disc));
}

void discrete_oracle() {
  double worst = 0.0;
  std::size_t mismatched = 0, count = 0;
  for (const auto& [n, steps] : {std::pair<std::size_t, int>{2, 10}, {3, 3}}) {
    const auto kernels = oracle::enumerate_kernels(n, steps);
    count += kernels.size();
    for (const auto& k : kernels) {
      for (std::size_t x = 0; x < n; ++x) {
        for (int i = 0; i < 10'000; ++i) {
          const double u = (i + 0.5) / 10'000.0;
          const auto fast = operator2_discrete(k, {x, u});
          const auto [bx, bu] = brute_force_discrete_update(k, x, u);
          if (fast.x != bx) ++mismatched;
          worst = std::max(worst, std::fabs(fast.u - bu));
        }
      }
    }
  }
  report("discrete_oracle", mismatched == 0 && worst <= 1e-12,
         fmt("%zu kernels, %zu state mismatches, max u deviation %.3g (want <= 1e-12)", count, mismatched, worst));
}

void invariance() {
  const auto rows = run_validation(1, 100'000);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    ok = ok && r.ok();
    detail += fmt("%s p=%.3g %s; ", r.check.c_str(), r.p_value, r.invariant ? "invariant" : "biased");
  }
  report("invariance_suite", ok, detail);

  // False alarms of an invariant operator across seeds.
  using Pair = AugmentedState<double>;
  const std::vector<Marginal<Pair>> marginals{
      {"x", [](const Pair& s) { return s.x; }, normal_cdf, {}},
      {"u", [](const Pair& s) { return s.u; }, standard_uniform_cdf, {}}};
  const ARKernel ar(0.6);
  int alarms = 0;
  for (int seed = 1; seed <= 50; ++seed) {
    const auto r = invariance_check<Pair>(
        [](UniformSource& src) { return Pair{src.normal(), src.uniform()}; },
        [&](Pair s, Stream& st) {
          s.u = operator1(s.u, st.next());
          return operator2_continuous(ar, s);
        },
        marginals, {0.37}, 100'000, mix_seed(500, seed));
    if (!r.pass) ++alarms;
  }
  report("invariance_false_alarm_rate", alarms <= 1, fmt("%d of 50 seeds rejected (want <= 2%%)", alarms));
}

void ess() {
  const std::size_t n = 100'000;
  UniformSource src(3);
  std::vector<double> iid(n), ar(n);
  for (auto& v : iid) v = src.normal();
  double x = src.normal();
  for (auto& v : ar) {
    x = 0.5 * x + std::sqrt(0.75) * src.normal();
    v = x;
  }
  const double r_iid = effective_sample_size(iid) / n;
  const double r_ar = effective_sample_size(ar) / n;
  report("ess_iid", r_iid >= 0.9 && r_iid <= 1.1, fmt("ESS/N %.4f (want [0.9,1.1])", r_iid));
  report("ess_ar", std::fabs(r_ar - 1.0 / 3.0) <= 0.05, fmt("ESS/N %.4f (want 1/3 +- 0.05)", r_ar));
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const std::vector<std::pair<const char*, std::function<void()>>> checks{
      {"ar", ar_variance},
      {"funnel", [&] {
         std::vector<FunnelCell> p1;
         funnel_bias(24'000, "short", nullptr);
         if (!quick) {
           funnel_bias(240'000, "full", &p1);
           funnel_constant_stream(p1.front());
         }
       }},
      {"ring", ring_hitting},
      {"round_trips", round_trips},
      {"oracle", discrete_oracle},
      {"invariance", invariance},
      {"ess", ess}};
  for (const auto& [name, check] : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(name, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
