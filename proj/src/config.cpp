#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "mz/cli.hpp"

namespace mz::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "m", "alpha", "epsilon", "g", "temperature", "q0", "p0", "dt_full",
      "dt_reduced", "t_end", "n_samples", "seed", "tau_max",
      "persistence_horizon", "noise_multiplier", "histogram_time",
      "histogram_bins", "ergodicity_horizon", "random_sign_sqrt_a",
      "a_sampler", "covariance_estimator", "divergence_threshold"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double real(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return parse_real(key, it->second);
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const auto& [text, line] = it->second;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw ConfigError(fmt::format("line {}: {} expects a non-negative integer, got '{}'",
                                    line, key, text));
    }
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const auto& [text, line] = it->second;
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(fmt::format("line {}: {} expects true/false, got '{}'", line, key, text));
  }

  std::vector<double> list(const std::string& key) const {
    const auto& entry = entries_.at(key);
    std::vector<double> out;
    std::stringstream ss(entry.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(parse_real(key, Entry{trim(item), entry.line}));
    }
    return out;
  }

  template <class Parse>
  auto choice(const std::string& key, decltype(std::declval<Parse>()(std::string{})) fallback,
              Parse parse) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
      return parse(it->second.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("line {}: {}", it->second.line, e.what()));
    }
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  static double parse_real(const std::string& key, const Entry& entry) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(entry.value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != entry.value.size() || !std::isfinite(v)) {
      throw ConfigError(fmt::format("line {}: {} expects a real number, got '{}'",
                                    entry.line, key, entry.value));
    }
    return v;
  }

  std::map<std::string, Entry> entries_;
};

CovarianceEstimator parse_estimator(const std::string& text) {
  if (text == "ensemble") return CovarianceEstimator::ensemble;
  if (text == "time_average") return CovarianceEstimator::time_average;
  throw std::invalid_argument(
      "covariance_estimator must be 'ensemble' or 'time_average', got '" + text + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line));
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (known_keys().count(key) == 0) {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line, key));
    }
    if (value.empty()) throw ConfigError(fmt::format("line {}: {} has no value", line, key));
    if (!entries.emplace(key, Entry{value, line}).second) {
      throw ConfigError(fmt::format("line {}: duplicate key '{}'", line, key));
    }
  }

  const Reader r(std::move(entries));
  ExperimentConfig cfg;

  const auto m_raw = r.unsigned_int("m", 2);
  if (m_raw > 1000000) throw ConfigError(fmt::format("line {}: m is too large", r.line_of("m")));
  const int m = static_cast<int>(m_raw);
  cfg.params = ModelParams::with_bath_size(m);
  cfg.params.alpha = r.real("alpha", cfg.params.alpha);
  cfg.params.epsilon = r.real("epsilon", cfg.params.epsilon);
  cfg.params.temperature = r.real("temperature", cfg.params.temperature);
  if (r.has("g")) {
    cfg.params.g = r.list("g");
  } else if (m != 2 && m != 0) {
    throw ConfigError(fmt::format("g must be given ({} values) when m = {}", m, m));
  }

  cfg.q0 = r.real("q0", cfg.q0);
  cfg.p0 = r.real("p0", cfg.p0);
  cfg.dt_full = r.real("dt_full", cfg.dt_full);
  cfg.dt_reduced = r.real("dt_reduced", cfg.dt_reduced);
  cfg.t_end = r.real("t_end", cfg.t_end);
  cfg.n_samples = r.unsigned_int("n_samples", cfg.n_samples);
  cfg.seed = r.unsigned_int("seed", cfg.seed);
  cfg.tau_max = r.real("tau_max", cfg.tau_max);
  cfg.persistence_horizon = r.real("persistence_horizon", cfg.persistence_horizon);
  cfg.noise_multiplier =
      r.choice("noise_multiplier", cfg.noise_multiplier, parse_noise_multiplier);
  cfg.histogram_time = r.real("histogram_time", cfg.histogram_time);
  cfg.histogram_bins = r.unsigned_int("histogram_bins", cfg.histogram_bins);
  cfg.ergodicity_horizon = r.real("ergodicity_horizon", cfg.ergodicity_horizon);
  cfg.random_sign_sqrt_a = r.boolean("random_sign_sqrt_a", cfg.random_sign_sqrt_a);
  cfg.a_sampler = r.choice("a_sampler", cfg.a_sampler, parse_persistence_sampler);
  cfg.covariance_estimator =
      r.choice("covariance_estimator", cfg.covariance_estimator, parse_estimator);
  cfg.divergence_threshold = r.real("divergence_threshold", cfg.divergence_threshold);

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace mz::cli
