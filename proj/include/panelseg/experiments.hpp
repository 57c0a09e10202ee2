#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "panelseg/convex_regression.hpp"
#include "panelseg/covariance.hpp"
#include "panelseg/csv.hpp"
#include "panelseg/cusum.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/gflasso.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/parallel.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/svg.hpp"
#include "panelseg/theory.hpp"
#include "panelseg/version.hpp"
#include "panelseg/weights.hpp"

namespace panelseg {

enum class Scenario { SingleChange, RandomLocation, Epidemic, VanishingChange };
enum class AccuracyMode { Exact, Support };
enum class FactorRule { None, InverseSqrt };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::SingleChange: return "single_change";
    case Scenario::RandomLocation: return "random_location";
    case Scenario::Epidemic: return "epidemic";
    case Scenario::VanishingChange: return "vanishing_change";
  }
  return "?";
}

inline const char* to_string(AccuracyMode m) {
  return m == AccuracyMode::Exact ? "exact" : "support";
}

inline const char* to_string(FactorRule r) {
  return r == FactorRule::None ? "none" : "k^-1/2";
}

// One estimator entry in a benchmark run.
struct SchemeConfig {
  enum class Kind {
    Simple,
    Standard,
    Weighted,
    Exact,                // 1/V from the true noise model
    ExactEst,             // natural covariance estimate
    ExactBanded,          // banded training-window estimate
    ExactBandedCentered,  // banded estimate on training-centered panels
    ExactReg,             // natural estimate + convex regression
  };
  Kind kind = Kind::Standard;
  double gamma = 0.25;  // Weighted only
  RegressionOrientation orientation = RegressionOrientation::Convex;  // ExactReg only

  std::string label() const {
    switch (kind) {
      case Kind::Simple: return "simple";
      case Kind::Standard: return "standard";
      case Kind::Weighted: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "weighted:%g", gamma);
        return buf;
      }
      case Kind::Exact: return "exact";
      case Kind::ExactEst: return "exact-est";
      case Kind::ExactBanded: return "exact-banded";
      case Kind::ExactBandedCentered: return "exact-banded-centered";
      case Kind::ExactReg: return "exact-reg";
    }
    return "?";
  }

  static SchemeConfig parse(const std::string& text) {
    SchemeConfig sc;
    if (text == "simple") { sc.kind = Kind::Simple; return sc; }
    if (text == "standard") { sc.kind = Kind::Standard; return sc; }
    if (text.rfind("weighted:", 0) == 0) {
      sc.kind = Kind::Weighted;
      double g;
      if (!detail::parse_double(text.substr(9), g))
        throw InvalidConfig("scheme: cannot parse gamma in '" + text + "'");
      sc.gamma = g;
      (void)WeightScheme::weighted(g);  // range check
      return sc;
    }
    if (text == "exact") { sc.kind = Kind::Exact; return sc; }
    if (text == "exact-est") { sc.kind = Kind::ExactEst; return sc; }
    if (text == "exact-banded") { sc.kind = Kind::ExactBanded; return sc; }
    if (text == "exact-banded,centered" || text == "exact-banded-centered") {
      sc.kind = Kind::ExactBandedCentered;
      return sc;
    }
    if (text == "exact-reg") { sc.kind = Kind::ExactReg; return sc; }
    if (text == "exact-reg-concave") {
      sc.kind = Kind::ExactReg;
      sc.orientation = RegressionOrientation::Concave;
      return sc;
    }
    throw InvalidConfig("unknown scheme '" + text + "'");
  }
};

struct ExperimentConfig {
  Scenario scenario = Scenario::SingleChange;
  AccuracyMode accuracy = AccuracyMode::Exact;
  int n = 100;
  std::vector<int> d_grid;
  std::vector<double> phi_grid{0.0};
  std::vector<double> theta_grid{0.0};
  std::vector<double> sigma2_grid{1.0};
  std::vector<int> u_grid;         // single-change style scenarios
  std::vector<int> change_points;  // epidemic
  double jump = 1.0;
  NoiseKind noise = NoiseKind::MA1;
  FactorRule factors = FactorRule::None;
  std::vector<SchemeConfig> schemes;
  int repetitions = 100;
  std::uint64_t seed = 1;
  int n1 = 1, n2 = 20, h = 2;  // training window for estimated weights
  std::vector<std::pair<int, double>> loc_offsets{{-2, 0.5}, {2, 0.5}};
  int threads = 0;

  void validate() const {
    if (n < 3) throw InvalidConfig("config: n must be >= 3");
    if (repetitions < 1) throw InvalidConfig("config: repetitions must be >= 1");
    if (d_grid.empty() || phi_grid.empty() || theta_grid.empty() || sigma2_grid.empty())
      throw InvalidConfig("config: grids must be nonempty");
    if (schemes.empty()) throw InvalidConfig("config: at least one scheme");
    for (int d : d_grid)
      if (d < 1) throw InvalidConfig("config: d must be >= 1");
    for (double s2 : sigma2_grid)
      if (!(s2 > 0.0)) throw InvalidConfig("config: sigma2_tilde must be > 0");
    const bool needs_u = scenario == Scenario::SingleChange || scenario == Scenario::RandomLocation;
    if (needs_u && u_grid.empty()) throw InvalidConfig("config: u grid must be nonempty");
    for (int u : u_grid)
      if (u < 1 || u > n - 1) throw InvalidConfig("config: u must lie in {1..n-1}");
    if (scenario == Scenario::Epidemic && change_points.size() < 1)
      throw InvalidConfig("config: epidemic scenario needs change_points");
    if (accuracy == AccuracyMode::Support && scenario != Scenario::RandomLocation)
      throw InvalidConfig("config: support accuracy only applies to random_location");
  }
};

struct GridPoint {
  int d = 0;
  double phi = 0.0, theta = 0.0, sigma2_tilde = 1.0;
  int u = 0;  // 0 for epidemic / vanishing-change scenarios
};

struct SummaryRow {
  std::string scheme;
  GridPoint at;
  int repetitions = 0;
  double accuracy = 0.0;
  double accuracy_se = 0.0;      // binomial standard error
  double mean_estimate = 0.0;    // NaN when no scalar estimate exists
  double sd_estimate = 0.0;
  double fallback_rate = 0.0;
  int estimator_failures = 0;
};

struct SummaryTable {
  ExperimentConfig config;
  std::vector<SummaryRow> rows;
};

namespace detail {

struct RepOutcome {
  bool correct = false;
  bool fallback = false;
  bool failed = false;
  double estimate = std::numeric_limits<double>::quiet_NaN();
};

inline WeightScheme limit_scheme(const SchemeConfig& sc, const VarianceFunction& true_v) {
  using K = SchemeConfig::Kind;
  switch (sc.kind) {
    case K::Simple: return WeightScheme::simple();
    case K::Standard: return WeightScheme::standard();
    case K::Weighted: return WeightScheme::weighted(sc.gamma);
    default: return WeightScheme::exact_from(true_v);  // estimates converge to w^exact
  }
}

struct SchemeWeights {
  Vector w;
  bool fallback = false;
};

inline SchemeWeights realize_weights(const SchemeConfig& sc, const PanelMatrix& y,
                                     const NoiseModel& noise, const ExperimentConfig& cfg) {
  using K = SchemeConfig::Kind;
  const int n = y.n();
  switch (sc.kind) {
    case K::Simple: return {WeightScheme::simple().vector(n), false};
    case K::Standard: return {WeightScheme::standard().vector(n), false};
    case K::Weighted: return {WeightScheme::weighted(sc.gamma).vector(n), false};
    case K::Exact:
      return {exact_weights_from_v(VarianceFunction::from_model(noise, n)), false};
    case K::ExactEst: {
      auto est = estimated_exact_weights(natural_covariance(y));
      return {std::move(est.weights), est.fallback_used};
    }
    case K::ExactBanded: {
      auto est = estimated_exact_weights(banded_covariance(y, cfg.n1, cfg.n2, cfg.h, false));
      return {std::move(est.weights), est.fallback_used};
    }
    case K::ExactBandedCentered: {
      auto est = estimated_exact_weights(banded_covariance(y, cfg.n1, cfg.n2, cfg.h, true));
      return {std::move(est.weights), est.fallback_used};
    }
    case K::ExactReg: {
      auto est = estimated_exact_weights(natural_covariance(y));
      if (est.fallback_used) return {std::move(est.weights), true};
      auto reg = convex_regression(est.weights, sc.orientation);
      return {std::move(reg.weights), reg.fallback_used};
    }
  }
  throw InvalidConfig("unknown scheme kind");
}

}  // namespace detail

// Runs the configured Monte Carlo study. Every scheme at a grid point sees
// the same panel realizations (paired comparison); the per-repetition seed
// is derived from (master seed, grid index, repetition index), so the table
// is deterministic for any thread count. Estimated-weight schemes recompute
// their weights inside every repetition.
inline SummaryTable run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;

  std::vector<GridPoint> grid;
  const std::vector<int> us =
      (cfg.scenario == Scenario::SingleChange || cfg.scenario == Scenario::RandomLocation)
          ? cfg.u_grid
          : std::vector<int>{0};
  for (int d : cfg.d_grid)
    for (double phi : cfg.phi_grid)
      for (double theta : cfg.theta_grid)
        for (double s2 : cfg.sigma2_grid)
          for (int u : us) grid.push_back(GridPoint{d, phi, theta, s2, u});

  SummaryTable table;
  table.config = cfg;

  const int ns = static_cast<int>(cfg.schemes.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const GridPoint g = grid[gi];
    const NoiseModel noise = (cfg.noise == NoiseKind::IID)
                                 ? NoiseModel::iid(g.sigma2_tilde)
                                 : NoiseModel::ma1(g.phi, g.theta, g.sigma2_tilde);
    const CommonFactorSpec factors = (cfg.factors == FactorRule::InverseSqrt)
                                         ? CommonFactorSpec::inverse_sqrt()
                                         : CommonFactorSpec::none();
    const VarianceFunction true_v = VarianceFunction::from_model(noise, n);

    SignalSpec signal = [&] {
      switch (cfg.scenario) {
        case Scenario::Epidemic: {
          std::vector<double> levels(cfg.change_points.size() + 1, 0.0);
          for (std::size_t j = 1; j < levels.size() - 1; ++j) levels[j] = cfg.jump;
          if (levels.size() == 2) levels[1] = cfg.jump;  // single change: jump persists
          return SignalSpec::constant_levels(n, cfg.change_points, levels, g.d);
        }
        case Scenario::VanishingChange:
          return SignalSpec::constant_levels(n, {}, {0.0}, g.d);
        default:
          return SignalSpec::constant_levels(n, {g.u}, {0.0, cfg.jump}, g.d);
      }
    }();
    const ChangeLocationNoise loc = (cfg.scenario == Scenario::RandomLocation)
                                        ? ChangeLocationNoise::with_support(cfg.loc_offsets)
                                        : ChangeLocationNoise::none();

    // per-scheme truth for the vanishing-change scenario: the spurious set
    // predicted by the scheme's limiting weights
    std::vector<std::vector<int>> spurious_sets(ns);
    if (cfg.scenario == Scenario::VanishingChange)
      for (int si = 0; si < ns; ++si)
        spurious_sets[si] =
            spurious_argmax(detail::limit_scheme(cfg.schemes[si], true_v), true_v, n);

    std::vector<int> support_hits;
    if (cfg.scenario == Scenario::RandomLocation && cfg.accuracy == AccuracyMode::Support) {
      ChangeLocationNoise ln = ChangeLocationNoise::with_support(cfg.loc_offsets);
      for (int off : ln.positive_support()) support_hits.push_back(g.u + off);
    }

    std::vector<std::vector<detail::RepOutcome>> outcomes(
        static_cast<std::size_t>(ns), std::vector<detail::RepOutcome>(cfg.repetitions));

    parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
      const std::uint64_t seed =
          rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(rep));
      const PanelMatrix y = generate_panel(signal, noise, factors, loc, g.d, seed);
      for (int si = 0; si < ns; ++si) {
        detail::RepOutcome& out = outcomes[static_cast<std::size_t>(si)][rep];
        try {
          auto sw = detail::realize_weights(cfg.schemes[si], y, noise, cfg);
          out.fallback = sw.fallback;
          if (cfg.scenario == Scenario::Epidemic) {
            const auto res = segment(y, sw.w, static_cast<int>(cfg.change_points.size()));
            out.correct = res.change_set == cfg.change_points;
          } else {
            const int est = estimate_change(y, sw.w);
            out.estimate = est;
            switch (cfg.scenario) {
              case Scenario::SingleChange:
                out.correct = est == g.u;
                break;
              case Scenario::RandomLocation:
                if (cfg.accuracy == AccuracyMode::Support)
                  out.correct = std::find(support_hits.begin(), support_hits.end(), est) !=
                                support_hits.end();
                else
                  out.correct = est == g.u;
                break;
              case Scenario::VanishingChange: {
                const auto& set = spurious_sets[static_cast<std::size_t>(si)];
                out.correct = std::binary_search(set.begin(), set.end(), est);
                break;
              }
              default:
                break;
            }
          }
        } catch (const EstimatorFailure&) {
          out.failed = true;
        }
      }
    });

    for (int si = 0; si < ns; ++si) {
      const auto& reps = outcomes[static_cast<std::size_t>(si)];
      SummaryRow row;
      row.scheme = cfg.schemes[si].label();
      row.at = g;
      row.repetitions = cfg.repetitions;
      int correct = 0, fallback = 0, failed = 0, with_estimate = 0;
      double sum = 0.0, sumsq = 0.0;
      for (const auto& r : reps) {
        correct += r.correct ? 1 : 0;
        fallback += r.fallback ? 1 : 0;
        failed += r.failed ? 1 : 0;
        if (!std::isnan(r.estimate)) {
          ++with_estimate;
          sum += r.estimate;
          sumsq += r.estimate * r.estimate;
        }
      }
      const double reps_d = static_cast<double>(cfg.repetitions);
      row.accuracy = correct / reps_d;
      row.accuracy_se = std::sqrt(row.accuracy * (1.0 - row.accuracy) / reps_d);
      if (with_estimate > 0) {
        row.mean_estimate = sum / with_estimate;
        row.sd_estimate =
            with_estimate > 1
                ? std::sqrt(std::max(0.0, (sumsq - sum * sum / with_estimate) / (with_estimate - 1)))
                : 0.0;
      } else {
        row.mean_estimate = std::numeric_limits<double>::quiet_NaN();
        row.sd_estimate = std::numeric_limits<double>::quiet_NaN();
      }
      row.fallback_rate = fallback / reps_d;
      row.estimator_failures = failed;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) out += (j ? "," : "") + std::to_string(v[j]);
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) out += (j ? "," : "") + format_double(v[j]);
  return out;
}

}  // namespace detail

// Deterministic key=value echo of a configuration (manifest contents).
inline std::string config_to_text(const ExperimentConfig& cfg) {
  std::string s;
  s += "scenario = " + std::string(to_string(cfg.scenario)) + "\n";
  s += "accuracy = " + std::string(to_string(cfg.accuracy)) + "\n";
  s += "n = " + std::to_string(cfg.n) + "\n";
  s += "d = " + detail::join_ints(cfg.d_grid) + "\n";
  s += "phi = " + detail::join_doubles(cfg.phi_grid) + "\n";
  s += "theta = " + detail::join_doubles(cfg.theta_grid) + "\n";
  s += "sigma2_tilde = " + detail::join_doubles(cfg.sigma2_grid) + "\n";
  if (!cfg.u_grid.empty()) s += "u = " + detail::join_ints(cfg.u_grid) + "\n";
  if (!cfg.change_points.empty())
    s += "change_points = " + detail::join_ints(cfg.change_points) + "\n";
  s += "jump = " + detail::format_double(cfg.jump) + "\n";
  s += "noise = " + std::string(cfg.noise == NoiseKind::IID ? "iid" : "ma1") + "\n";
  s += "factors = " + std::string(to_string(cfg.factors)) + "\n";
  std::string schemes;
  for (std::size_t j = 0; j < cfg.schemes.size(); ++j)
    schemes += (j ? "," : "") + cfg.schemes[j].label();
  s += "schemes = " + schemes + "\n";
  s += "repetitions = " + std::to_string(cfg.repetitions) + "\n";
  s += "seed = " + std::to_string(cfg.seed) + "\n";
  s += "n1 = " + std::to_string(cfg.n1) + "\n";
  s += "n2 = " + std::to_string(cfg.n2) + "\n";
  s += "h = " + std::to_string(cfg.h) + "\n";
  if (cfg.scenario == Scenario::RandomLocation) {
    std::string offs;
    for (std::size_t j = 0; j < cfg.loc_offsets.size(); ++j)
      offs += (j ? "," : "") + std::to_string(cfg.loc_offsets[j].first) + ":" +
              detail::format_double(cfg.loc_offsets[j].second);
    s += "loc_offsets = " + offs + "\n";
  }
  return s;
}

// Writes summary.csv, manifest.txt, and one SVG line chart per metric and
// (phi, theta, sigma2, u) combination (accuracy/mean/sd against d, one
// series per scheme). Reruns with the same table produce byte-identical
// files.
inline void emit_report(const SummaryTable& table, const std::string& out_dir) {
  if (table.rows.empty()) throw InvalidConfig("emit_report: empty summary table");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("emit_report: cannot create " + out_dir);

  {
    auto f = detail::open_out(out_dir + "/summary.csv");
    f << "scenario,scheme,d,phi,theta,sigma2_tilde,u,repetitions,accuracy,accuracy_se,"
         "mean,sd,fallback_rate,estimator_failures\n";
    for (const auto& r : table.rows) {
      f << to_string(table.config.scenario) << "," << r.scheme << "," << r.at.d << ","
        << detail::format_double(r.at.phi) << "," << detail::format_double(r.at.theta) << ","
        << detail::format_double(r.at.sigma2_tilde) << "," << r.at.u << "," << r.repetitions
        << "," << detail::format_double(r.accuracy) << ","
        << detail::format_double(r.accuracy_se) << ",";
      f << (std::isnan(r.mean_estimate) ? "" : detail::format_double(r.mean_estimate)) << ",";
      f << (std::isnan(r.sd_estimate) ? "" : detail::format_double(r.sd_estimate)) << ",";
      f << detail::format_double(r.fallback_rate) << "," << r.estimator_failures << "\n";
    }
    if (!f) throw IoError("emit_report: write failed");
  }

  {
    auto f = detail::open_out(out_dir + "/manifest.txt");
    f << "panelseg " << PANELSEG_VERSION << " benchmark manifest\n";
    f << config_to_text(table.config);
    f << "pairing = all schemes share the panel realization of each repetition\n";
    f << "rep_seed = derive_seed(seed, grid_index, repetition)\n";
    if (!f) throw IoError("emit_report: write failed");
  }

  // group rows by the non-d grid coordinates
  std::map<std::string, std::vector<const SummaryRow*>> groups;
  for (const auto& r : table.rows) {
    char key[128];
    std::snprintf(key, sizeof(key), "phi%g_theta%g_s%g_u%d", r.at.phi, r.at.theta,
                  r.at.sigma2_tilde, r.at.u);
    groups[key].push_back(&r);
  }
  struct Metric {
    const char* name;
    double SummaryRow::*field;
  };
  const Metric metrics[] = {{"accuracy", &SummaryRow::accuracy},
                            {"mean", &SummaryRow::mean_estimate},
                            {"sd", &SummaryRow::sd_estimate}};
  for (const auto& [key, rows] : groups) {
    std::vector<std::string> scheme_order;
    for (const auto* r : rows)
      if (std::find(scheme_order.begin(), scheme_order.end(), r->scheme) == scheme_order.end())
        scheme_order.push_back(r->scheme);
    for (const auto& metric : metrics) {
      std::vector<SvgSeries> series;
      for (const auto& scheme : scheme_order) {
        SvgSeries s;
        s.label = scheme;
        for (const auto* r : rows) {
          if (r->scheme != scheme) continue;
          s.x.push_back(r->at.d);
          s.y.push_back(r->*(metric.field));
        }
        series.push_back(std::move(s));
      }
      write_line_chart_svg(out_dir + "/" + metric.name + "_" + key + ".svg",
                           std::string(metric.name) + " (" + key + ")", "d", metric.name,
                           series);
    }
  }
}

}  // namespace panelseg
