// depstream: runs the funnel, AR(1), ring and interleaving studies and the
// invariance battery, writing CSV.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numeric error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depstream/depstream.hpp"

using namespace depstream;

namespace {

struct Options {
  std::string stream = "sticky";
  std::vector<double> p;
  std::uint64_t seed = 1;
  std::vector<std::string> sampler{"ds", "naive"};
  std::optional<std::size_t> updates;
  std::size_t scale = 1;
  std::size_t thin = 120;
  std::string out;
  std::string trace;
  double value = 0.5;
  std::string file;
  std::string on_exhaust = "error";
  std::size_t K = 10;
  double w = 1.0;
  std::size_t jobs = 1;
  bool no_runtime = false;
  double alpha = 0.5;
  std::vector<std::string> pattern{"iid", "duplicate-pairs"};
  std::vector<std::string> mode{"naive", "adapted"};
  std::optional<std::size_t> samples;
  std::size_t trials = 200;
  std::size_t step_cap = 10'000'000;
  std::vector<double> r{0.0, 0.001, 1.0};
  std::size_t period = 1000;
  double significance = 0.01;
};

StreamSpec stream_spec(const Options& o) {
  StreamSpec s;
  if (o.stream == "iid") {
    s.kind = StreamKind::iid;
  } else if (o.stream == "sticky") {
    s.kind = StreamKind::sticky;
  } else if (o.stream == "constant") {
    s.kind = StreamKind::constant;
  } else if (o.stream == "file") {
    s.kind = StreamKind::file;
    if (o.file.empty()) throw ConfigError("--stream file needs --file <path>");
    if (!std::filesystem::is_regular_file(o.file)) throw ConfigError("stream file not found: " + o.file);
  } else {
    throw ConfigError("unknown stream '" + o.stream + "'");
  }
  s.value = o.value;
  s.path = o.file;
  if (o.on_exhaust == "error") {
    s.on_exhaust = OnExhaust::error;
  } else if (o.on_exhaust == "cycle") {
    s.on_exhaust = OnExhaust::cycle;
  } else {
    throw ConfigError("--on-exhaust must be error or cycle");
  }
  return s;
}

std::size_t scaled(std::size_t count, std::size_t scale) {
  if (scale == 0) throw ConfigError("--scale must be >= 1");
  return count / scale;
}

FunnelConfig funnel_config(const Options& o) {
  FunnelConfig c;
  if (!o.p.empty()) c.p_grid = o.p;
  c.samplers.clear();
  for (const auto& s : o.sampler) {
    if (s == "ds") {
      c.samplers.push_back(SamplerKind::ds);
    } else if (s == "naive") {
      c.samplers.push_back(SamplerKind::naive);
    } else {
      throw ConfigError("unknown sampler '" + s + "'");
    }
  }
  c.stream = stream_spec(o);
  c.seed = o.seed;
  c.updates = scaled(o.updates.value_or(240'000), o.scale);
  c.slice.K = o.K;
  c.slice.w = o.w;
  c.thin = o.thin;
  c.jobs = o.jobs;
  c.period = o.period;
  c.validate();
  return c;
}

/// Output file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output '" + path + "'");
    }
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// The trace comes from the DS cell at the largest p (the constant-stream
// chain with the default grid).
void write_trace(const Options& o, const std::vector<FunnelCell>& cells) {
  if (o.trace.empty()) return;
  const FunnelCell* pick = nullptr;
  for (const auto& c : cells) {
    if (!pick || (c.row.sampler == SamplerKind::ds &&
                  (pick->row.sampler != SamplerKind::ds || c.row.p > pick->row.p))) {
      pick = &c;
    }
  }
  Sink sink(o.trace);
  write_trace_csv(sink.get(), pick->v_trace, o.thin);
}

void warn_failures(const std::vector<FunnelCell>& cells, std::size_t requested) {
  for (const auto& c : cells) {
    if (c.row.failure.empty()) continue;
    std::cerr << "depstream: " << to_string(c.row.sampler) << " chain at p=" << c.row.p << " stopped after "
              << c.row.updates << " of " << requested << " updates: " << c.row.failure << '\n';
  }
}

int run_funnel(const Options& o) {
  const auto config = funnel_config(o);
  const auto cells = run_funnel_experiment(config);
  Sink sink(o.out);
  write_funnel_csv(sink.get(), cells, !o.no_runtime);
  warn_failures(cells, config.updates);
  write_trace(o, cells);
  return 0;
}

int run_interleave(const Options& o) {
  const auto config = funnel_config(o);
  if (o.r.empty()) throw ConfigError("--r needs at least one value");
  std::vector<FunnelCell> all;
  for (double r : o.r) {
    auto cells = run_interleaved_experiment(config, r);
    warn_failures(cells, config.updates);
    for (auto& c : cells) all.push_back(std::move(c));
  }
  Sink sink(o.out);
  write_funnel_csv(sink.get(), all, !o.no_runtime, true);
  return 0;
}

int run_ar(const Options& o) {
  std::vector<ArConfig> configs;
  for (const auto& pat : o.pattern) {
    for (const auto& m : o.mode) {
      ArConfig c;
      c.alpha = o.alpha;
      c.seed = o.seed;
      c.samples = scaled(o.samples.value_or(1'000'000), o.scale);
      if (pat == "iid") {
        c.pattern = NoisePattern::iid;
      } else if (pat == "duplicate-pairs") {
        c.pattern = NoisePattern::duplicate_pairs;
      } else {
        throw ConfigError("unknown pattern '" + pat + "'");
      }
      if (m == "naive") {
        c.mode = ArMode::naive;
      } else if (m == "adapted") {
        c.mode = ArMode::adapted;
      } else {
        throw ConfigError("unknown mode '" + m + "'");
      }
      c.validate();
      configs.push_back(c);
    }
  }
  std::vector<ArResult> rows;
  for (const auto& c : configs) rows.push_back(run_ar_variance_experiment(c));
  Sink sink(o.out);
  write_ar_csv(sink.get(), rows, !o.no_runtime);
  return 0;
}

int run_ring(const Options& o) {
  if (o.trials < 100) throw ConfigError("ring: need at least 100 trials");
  // p only matters for sticky streams.
  std::vector<double> grid = o.p;
  if (grid.empty()) grid.push_back(o.stream == "sticky" ? 0.999 : 0.0);
  std::vector<RingConfig> configs;
  for (double p : grid) {
    RingConfig c;
    c.stream = stream_spec(o);
    c.p = p;
    c.trials = o.trials;
    c.seed = o.seed;
    c.step_cap = o.step_cap;
    c.validate();
    configs.push_back(c);
  }
  std::vector<RingResult> rows;
  for (const auto& c : configs) rows.push_back(run_ring_experiment(c));
  Sink sink(o.out);
  write_ring_csv(sink.get(), rows, !o.no_runtime);
  return 0;
}

int run_validate(const Options& o) {
  const std::size_t samples = scaled(o.samples.value_or(100'000), o.scale);
  if (samples < 10'000) throw ConfigError("validate: need at least 10000 samples");
  if (!(o.significance > 0.0 && o.significance < 1.0)) throw ConfigError("--significance must lie in (0,1)");
  const auto rows = run_validation(o.seed, samples, o.significance);
  Sink sink(o.out);
  write_validation_csv(sink.get(), rows);
  for (const auto& r : rows) {
    if (!r.ok()) {
      std::cerr << "depstream: check '" << r.check << "' did not match its expected outcome\n";
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov chain Monte Carlo driven by dependent random streams", "depstream"};
  Options o;

  app.set_config("--config", "", "Flat key = value file; command-line flags override it");
  app.allow_config_extras(false);
  app.add_option("--stream", o.stream, "iid | sticky | constant | file")->capture_default_str();
  app.add_option("--p", o.p, "Sticky repeat probabilities (comma list)")->delimiter(',');
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--sampler", o.sampler, "ds | naive (comma list)")->delimiter(',')->capture_default_str();
  app.add_option("--updates", o.updates, "Slice updates per variable (default 240000)");
  app.add_option("--scale", o.scale, "Divide iteration counts by this factor")->capture_default_str();
  app.add_option("--thin", o.thin, "Trace thinning interval")->capture_default_str();
  app.add_option("--out", o.out, "Result CSV (default stdout)");
  app.add_option("--trace", o.trace, "Thinned v trace CSV (funnel)");
  app.add_option("--value", o.value, "Value emitted by a constant stream")->capture_default_str();
  app.add_option("--file", o.file, "Stream values, one per line");
  app.add_option("--on-exhaust", o.on_exhaust, "error | cycle")->capture_default_str();
  app.add_option("--K", o.K, "Slice uniforms per variable")->capture_default_str();
  app.add_option("--w", o.w, "Slice step size")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Grid cells run in parallel")->capture_default_str();
  app.add_flag("--no-runtime", o.no_runtime, "Write 0 for runtime_seconds so CSVs are byte-identical");
  app.add_option("--alpha", o.alpha, "AR(1) coefficient")->capture_default_str();
  app.add_option("--pattern", o.pattern, "iid | duplicate-pairs (comma list)")->delimiter(',');
  app.add_option("--mode", o.mode, "naive | adapted (comma list)")->delimiter(',');
  app.add_option("--samples", o.samples, "AR samples (default 1e6) or validation samples (default 1e5)");
  app.add_option("--trials", o.trials, "Ring trials")->capture_default_str();
  app.add_option("--step-cap", o.step_cap, "Ring steps before a trial times out")->capture_default_str();
  app.add_option("--r", o.r, "Ideal-draw fractions for interleave (comma list)")->delimiter(',');
  app.add_option("--period", o.period, "Sweeps per interleaving block")->capture_default_str();
  app.add_option("--significance", o.significance)->capture_default_str();

  app.fallthrough();
  auto* funnel = app.add_subcommand("funnel", "Bias of E[v] on the funnel across stream stickiness");
  auto* ar = app.add_subcommand("ar", "AR(1) even-step variance under duplicated noise");
  auto* ring = app.add_subcommand("ring", "Half-traversal times of the ring walk");
  auto* interleave = app.add_subcommand("interleave", "Funnel runs mixing ideal and dependent driving");
  auto* validate = app.add_subcommand("validate", "Pushforward invariance checks");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (funnel->parsed()) return run_funnel(o);
    if (ar->parsed()) return run_ar(o);
    if (ring->parsed()) return run_ring(o);
    if (interleave->parsed()) return run_interleave(o);
    if (validate->parsed()) return run_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "depstream: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "depstream: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "depstream: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
