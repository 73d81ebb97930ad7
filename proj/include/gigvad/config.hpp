#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/inference.hpp"
#include "gigvad/io.hpp"
#include "gigvad/training.hpp"

// `key = value` configuration. One entry per line, `#` starts a comment,
// blank lines are ignored. Unknown or repeated keys are rejected; missing
// keys keep their defaults.
namespace gigvad {

struct Config {
  TrainConfig train;
  InferenceConfig inference;
  std::string train_data;
  std::string test_data;
  std::string output_dir = ".";

  void validate() const {
    train.validate();
    inference.validate();
  }
};

namespace detail {

struct ConfigKey {
  std::string_view name;
  std::function<bool(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

template <class T>
ConfigKey count_key(std::string_view name, T Config::*group, std::size_t T::*field) {
  return {name,
          [=](Config& c, std::string_view v) {
            std::uint64_t n;
            if (!io::parse_u64(v, n)) return false;
            (c.*group).*field = static_cast<std::size_t>(n);
            return true;
          },
          [=](const Config& c) { return std::to_string((c.*group).*field); }};
}

template <class T>
ConfigKey real_key(std::string_view name, T Config::*group, double T::*field) {
  return {name,
          [=](Config& c, std::string_view v) { return io::parse_double(v, (c.*group).*field); },
          [=](const Config& c) { return io::format_double((c.*group).*field); }};
}

inline ConfigKey path_key(std::string_view name, std::string Config::*field) {
  return {name,
          [=](Config& c, std::string_view v) {
            c.*field = std::string(v);
            return true;
          },
          [=](const Config& c) { return c.*field; }};
}

inline const std::vector<ConfigKey>& config_keys() {
  using C = Config;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(count_key("segments", &C::train, &TrainConfig::segments));
    k.push_back(count_key("clips_per_segment", &C::train, &TrainConfig::clips_per_segment));
    k.push_back(count_key("clip_interval", &C::train, &TrainConfig::clip_interval));
    k.push_back(count_key("batch_size", &C::train, &TrainConfig::batch_size));
    k.push_back(real_key("lr", &C::train, &TrainConfig::lr));
    k.push_back(real_key("adagrad_eps", &C::train, &TrainConfig::adagrad_eps));
    k.push_back(count_key("epochs", &C::train, &TrainConfig::epochs));
    k.push_back(real_key("dropout", &C::train, &TrainConfig::dropout));
    k.push_back(real_key("flip_prob", &C::train, &TrainConfig::flip_prob));
    // k and p echo their resolved values; 0 in a file means "default".
    k.push_back({"k",
                 [](C& c, std::string_view v) {
                   std::uint64_t n;
                   if (!io::parse_u64(v, n)) return false;
                   c.train.k = n;
                   return true;
                 },
                 [](const C& c) { return std::to_string(c.train.resolved_k()); }});
    k.push_back({"p",
                 [](C& c, std::string_view v) {
                   std::uint64_t n;
                   if (!io::parse_u64(v, n)) return false;
                   c.train.p = n;
                   return true;
                 },
                 [](const C& c) { return std::to_string(c.train.resolved_p()); }});
    auto lambda = [](std::string_view name, double LossWeights::*f) {
      return ConfigKey{name,
                       [=](C& c, std::string_view v) { return io::parse_double(v, c.train.lambdas.*f); },
                       [=](const C& c) { return io::format_double(c.train.lambdas.*f); }};
    };
    k.push_back(lambda("lambda1", &LossWeights::segment_overall));
    k.push_back(lambda("lambda2", &LossWeights::video_level));
    k.push_back(lambda("lambda3", &LossWeights::sparsity));
    auto dim = [](std::string_view name, std::size_t FeatureDims::*f) {
      return ConfigKey{name,
                       [=](C& c, std::string_view v) {
                         std::uint64_t n;
                         if (!io::parse_u64(v, n)) return false;
                         c.train.dims.*f = n;
                         return true;
                       },
                       [=](const C& c) { return std::to_string(c.train.dims.*f); }};
    };
    k.push_back(dim("feature_w", &FeatureDims::w));
    k.push_back(dim("feature_h", &FeatureDims::h));
    k.push_back(dim("feature_d", &FeatureDims::d));
    k.push_back(real_key("signature_offset", &C::train, &TrainConfig::signature_offset));
    k.push_back({"seed",
                 [](C& c, std::string_view v) { return io::parse_u64(v, c.train.seed); },
                 [](const C& c) { return std::to_string(c.train.seed); }});
    k.push_back(count_key("window", &C::inference, &InferenceConfig::window));
    k.push_back(count_key("stride", &C::inference, &InferenceConfig::stride));
    k.push_back(real_key("sigma", &C::inference, &InferenceConfig::sigma));
    k.push_back(real_key("tau", &C::inference, &InferenceConfig::tau));
    k.push_back(path_key("train_data", &C::train_data));
    k.push_back(path_key("test_data", &C::test_data));
    k.push_back(path_key("output_dir", &C::output_dir));
    return k;
  }();
  return keys;
}

}  // namespace detail

/// Applies `key = value` to `cfg`. Returns false for an unknown key;
/// throws ConfigError for an unparsable value.
inline bool set_config_value(Config& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : detail::config_keys()) {
    if (k.name == key) {
      if (!k.set(cfg, value)) {
        throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
      }
      return true;
    }
  }
  return false;
}

/// Parses config text on top of `base`. `origin` names the source in
/// diagnostics, which always carry the offending line number.
inline Config parse_config(std::string_view text, const std::string& origin = "<config>", Config base = {}) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string_view raw : io::split(text, '\n')) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = io::trim(line.substr(0, eq));
    const auto value = io::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    if (seen.contains(key)) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    seen.emplace(key);
    try {
      if (!set_config_value(base, key, value)) throw ConfigError("unknown key '" + std::string(key) + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return base;
}

inline Config load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path), path.string());
}

/// Every key with its resolved value, in a form parse_config accepts.
inline std::string config_to_text(const Config& cfg) {
  std::ostringstream os;
  for (const auto& k : detail::config_keys()) {
    const std::string v = k.get(cfg);
    if (v.empty()) continue;
    os << k.name << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace gigvad
