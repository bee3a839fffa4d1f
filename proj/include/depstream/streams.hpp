#pragma once

// Dependent streams: sources of finite reals that drive a sampler in place of
// i.i.d. uniforms. A stream never sees the chain state.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depstream/errors.hpp"
#include "depstream/normal.hpp"

namespace depstream {

/// Seeded i.i.d. Uniform[0,1) source. The seed-to-sequence mapping is fixed:
/// mt19937_64 words, top 53 bits scaled by 2^-53.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0,1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0,1).
  double open_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(open_uniform()); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Stream {
 public:
  virtual ~Stream() = default;
  /// Next stream output. Always finite.
  virtual double next() = 0;
};

class IidStream final : public Stream {
 public:
  explicit IidStream(std::uint64_t seed) : source_(seed) {}
  double next() override { return source_.uniform(); }

 private:
  UniformSource source_;
};

class ConstantStream final : public Stream {
 public:
  explicit ConstantStream(double value) : value_(value) {
    if (!std::isfinite(value)) throw ParameterError("constant stream value must be finite");
  }
  double next() override { return value_; }

 private:
  double value_;
};

/// Repeats its previous output with probability p, otherwise emits a fresh
/// Uniform[0,1) from the base source. The stick/fresh coin comes from a
/// separate engine so fresh values follow exactly the base sequence.
class StickyStream final : public Stream {
 public:
  StickyStream(double p, std::uint64_t seed)
      : p_(p), base_(seed), coin_(mix_seed(seed, 0x5717)) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("sticking probability must lie in [0,1]");
  }

  double next() override {
    const bool stick = coin_.uniform() < p_;
    if (!started_ || !stick) {
      last_ = base_.uniform();
      started_ = true;
    }
    return last_;
  }

  double p() const noexcept { return p_; }

 private:
  double p_;
  UniformSource base_;
  UniformSource coin_;
  double last_ = 0.0;
  bool started_ = false;
};

inline StickyStream make_sticky(double p, std::uint64_t base_seed) {
  return StickyStream(p, base_seed);
}

enum class OnExhaust { error, cycle };

/// Emits a fixed list of values in order.
class ValueStream final : public Stream {
 public:
  explicit ValueStream(std::vector<double> values, OnExhaust on_exhaust = OnExhaust::error)
      : values_(std::move(values)), on_exhaust_(on_exhaust) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw ParameterError("stream values must be finite");
    }
    if (values_.empty() && on_exhaust_ == OnExhaust::cycle) {
      throw ParameterError("cannot cycle an empty stream");
    }
  }

  double next() override {
    if (pos_ == values_.size()) {
      if (on_exhaust_ == OnExhaust::error) {
        throw StreamExhaustedError("stream exhausted after " + std::to_string(values_.size()) +
                                   " values");
      }
      pos_ = 0;
    }
    return values_[pos_++];
  }

  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
  OnExhaust on_exhaust_;
  std::size_t pos_ = 0;
};

/// Parses one decimal real per line; blank lines and lines starting with '#'
/// are skipped.
inline std::vector<double> read_stream_values(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    text.remove_prefix(first);
    if (text.front() == '#') continue;
    const auto last = text.find_last_not_of(" \t");
    text = text.substr(0, last + 1);
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw FormatError("stream file: cannot parse '" + std::string(text) + "' as a real",
                        line_no);
    }
    values.push_back(value);
  }
  return values;
}

inline ValueStream make_file_stream(const std::string& path, OnExhaust on_exhaust) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open stream file: " + path);
  auto values = read_stream_values(in);
  if (values.empty()) throw FormatError("stream file holds no values: " + path, 1);
  return ValueStream(std::move(values), on_exhaust);
}

/// Emits every value of the inner stream twice in a row.
class DuplicatePairStream final : public Stream {
 public:
  explicit DuplicatePairStream(Stream& inner) : inner_(&inner) {}

  double next() override {
    if (!pending_) {
      held_ = inner_->next();
      pending_ = true;
      return held_;
    }
    pending_ = false;
    return held_;
  }

 private:
  Stream* inner_;
  double held_ = 0.0;
  bool pending_ = false;
};

/// Pass-through that logs every value drawn from the inner stream.
class StreamRecorder final : public Stream {
 public:
  explicit StreamRecorder(Stream& inner) : inner_(&inner) {}

  double next() override {
    const double d = inner_->next();
    log_.push_back(d);
    return d;
  }

  const std::vector<double>& log() const noexcept { return log_; }
  void clear() { log_.clear(); }

  /// Logged values, last draw first.
  std::vector<double> reversed() const { return {log_.rbegin(), log_.rend()}; }

  ValueStream reverse_replay() const { return ValueStream(reversed()); }

 private:
  Stream* inner_;
  std::vector<double> log_;
};

}  // namespace depstream
