#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/experiments.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

// Flat key = value text files ('#' starts a comment, lists are comma
// separated). Shared by the simulate and bench subcommands.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    KeyValueFile kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InvalidConfig(path + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw InvalidConfig(path + ":" + std::to_string(lineno) + ": empty key");
      kv.values_[key] = value;
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidConfig("missing config key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const {
    double v;
    if (!detail::parse_double(get(key), v))
      throw InvalidConfig("config key '" + key + "' is not a number");
    return v;
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long get_int(const std::string& key) const {
    const double v = get_double(key);
    const long r = static_cast<long>(v);
    if (static_cast<double>(r) != v)
      throw InvalidConfig("config key '" + key + "' is not an integer");
    return r;
  }

  long get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : detail::split(get(key), ',')) {
      double v;
      if (!detail::parse_double(tok, v))
        throw InvalidConfig("config key '" + key + "': bad list entry '" + tok + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> get_ints(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_doubles(key)) {
      const int r = static_cast<int>(v);
      if (static_cast<double>(r) != v)
        throw InvalidConfig("config key '" + key + "': expected integers");
      out.push_back(r);
    }
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline std::vector<std::pair<int, double>> parse_offsets(const std::string& text) {
  std::vector<std::pair<int, double>> out;
  for (const auto& tok : split(text, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw InvalidConfig("loc_offsets entries must look like offset:prob");
    double off, p;
    if (!parse_double(tok.substr(0, colon), off) || !parse_double(tok.substr(colon + 1), p))
      throw InvalidConfig("loc_offsets: cannot parse '" + tok + "'");
    out.emplace_back(static_cast<int>(off), p);
  }
  return out;
}

inline FactorRule parse_factors(const std::string& text) {
  if (text == "none" || text == "off" || text == "0") return FactorRule::None;
  if (text == "k^-1/2" || text == "inverse-sqrt") return FactorRule::InverseSqrt;
  throw InvalidConfig("factors must be 'none' or 'k^-1/2'");
}

inline NoiseKind parse_noise(const std::string& text) {
  if (text == "iid") return NoiseKind::IID;
  if (text == "ma1") return NoiseKind::MA1;
  throw InvalidConfig("noise must be 'iid' or 'ma1'");
}

}  // namespace detail

// Everything needed to draw one panel matrix (the simulate subcommand).
struct SimulationSpec {
  int n = 100;
  int d = 50;
  std::vector<int> change_points;
  std::vector<double> segment_levels;  // one scalar per segment
  NoiseKind noise = NoiseKind::MA1;
  double phi = 0.0, theta = 0.0, sigma2_tilde = 1.0;
  FactorRule factors = FactorRule::None;
  bool loc_noise = false;
  std::vector<std::pair<int, double>> loc_offsets{{-2, 0.5}, {2, 0.5}};
  std::uint64_t seed = 1;

  static SimulationSpec from_file(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::parse(path);
    SimulationSpec s;
    s.n = static_cast<int>(kv.get_int("n"));
    s.d = static_cast<int>(kv.get_int("d"));
    if (kv.has("change_points")) s.change_points = kv.get_ints("change_points");
    if (kv.has("levels"))
      s.segment_levels = kv.get_doubles("levels");
    else
      s.segment_levels.assign(s.change_points.size() + 1, 0.0);
    s.noise = detail::parse_noise(kv.get_or("noise", "ma1"));
    s.phi = kv.get_double_or("phi", 0.0);
    s.theta = kv.get_double_or("theta", 0.0);
    s.sigma2_tilde = kv.get_double_or("sigma2_tilde", 1.0);
    s.factors = detail::parse_factors(kv.get_or("factors", "none"));
    const std::string loc = kv.get_or("loc_noise", "off");
    s.loc_noise = (loc == "on" || loc == "true" || loc == "1");
    if (kv.has("loc_offsets")) s.loc_offsets = detail::parse_offsets(kv.get("loc_offsets"));
    s.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
    return s;
  }

  PanelMatrix generate() const {
    if (segment_levels.size() != change_points.size() + 1)
      throw InvalidConfig("levels must list one value per segment (P+1 entries)");
    const SignalSpec signal = SignalSpec::constant_levels(n, change_points, segment_levels, d);
    const NoiseModel model = (noise == NoiseKind::IID)
                                 ? NoiseModel::iid(sigma2_tilde)
                                 : NoiseModel::ma1(phi, theta, sigma2_tilde);
    const CommonFactorSpec f = (factors == FactorRule::InverseSqrt)
                                   ? CommonFactorSpec::inverse_sqrt()
                                   : CommonFactorSpec::none();
    const ChangeLocationNoise loc =
        loc_noise ? ChangeLocationNoise::with_support(loc_offsets) : ChangeLocationNoise::none();
    return generate_panel(signal, model, f, loc, d, seed);
  }
};

inline ExperimentConfig experiment_config_from_file(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse(path);
  ExperimentConfig cfg;
  const std::string scen = kv.get_or("scenario", "single_change");
  if (scen == "single_change") cfg.scenario = Scenario::SingleChange;
  else if (scen == "random_location") cfg.scenario = Scenario::RandomLocation;
  else if (scen == "epidemic") cfg.scenario = Scenario::Epidemic;
  else if (scen == "vanishing_change") cfg.scenario = Scenario::VanishingChange;
  else throw InvalidConfig("unknown scenario '" + scen + "'");

  const std::string acc = kv.get_or("accuracy", "exact");
  if (acc == "exact") cfg.accuracy = AccuracyMode::Exact;
  else if (acc == "support") cfg.accuracy = AccuracyMode::Support;
  else throw InvalidConfig("accuracy must be 'exact' or 'support'");

  cfg.n = static_cast<int>(kv.get_int("n"));
  cfg.d_grid = kv.get_ints("d");
  if (kv.has("phi")) cfg.phi_grid = kv.get_doubles("phi");
  if (kv.has("theta")) cfg.theta_grid = kv.get_doubles("theta");
  if (kv.has("sigma2_tilde")) cfg.sigma2_grid = kv.get_doubles("sigma2_tilde");
  if (kv.has("u")) cfg.u_grid = kv.get_ints("u");
  if (kv.has("change_points")) cfg.change_points = kv.get_ints("change_points");
  cfg.jump = kv.get_double_or("jump", 1.0);
  cfg.noise = detail::parse_noise(kv.get_or("noise", "ma1"));
  cfg.factors = detail::parse_factors(kv.get_or("factors", "none"));
  for (const auto& tok : detail::split(kv.get("schemes"), ','))
    cfg.schemes.push_back(SchemeConfig::parse(tok));
  cfg.repetitions = static_cast<int>(kv.get_int_or("repetitions", 100));
  cfg.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
  cfg.n1 = static_cast<int>(kv.get_int_or("n1", 1));
  cfg.n2 = static_cast<int>(kv.get_int_or("n2", 20));
  cfg.h = static_cast<int>(kv.get_int_or("h", 2));
  if (kv.has("loc_offsets")) cfg.loc_offsets = detail::parse_offsets(kv.get("loc_offsets"));
  cfg.threads = static_cast<int>(kv.get_int_or("threads", 0));
  cfg.validate();
  return cfg;
}

}  // namespace panelseg
