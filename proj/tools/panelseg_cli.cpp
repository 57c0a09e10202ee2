// Command line front end: simulate panels, run the CUSUM and group fused
// LASSO estimators on CSV data, estimate weight vectors, query the theory
// calculators, and run benchmark configs.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "panelseg/panelseg.hpp"

namespace {

using namespace panelseg;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitEstimatorFailure = 3;

struct WeightFlags {
  std::string weights = "standard";
  std::string weights_file;
  int n1 = 1, n2 = 20, h = 2;
};

void add_weight_flags(CLI::App* cmd, WeightFlags& wf) {
  cmd->set_help_flag("--help", "print help");  // frees -h for the bandwidth flag
  cmd->add_option("--weights", wf.weights,
                  "simple | standard | weighted:<gamma> | exact-file | exact-est | "
                  "exact-banded | exact-banded,centered")
      ->capture_default_str();
  cmd->add_option("--weights-file", wf.weights_file,
                  "single-column CSV with w(1..n-1), for --weights exact-file");
  cmd->add_option("--n1", wf.n1, "training window start (banded weights)")->capture_default_str();
  cmd->add_option("--n2", wf.n2, "training window end (banded weights)")->capture_default_str();
  cmd->add_option("--h", wf.h, "bandwidth (banded weights)")->capture_default_str();
}

// Resolves the --weights flag against the loaded panel.
Vector resolve_weights(const WeightFlags& wf, const PanelMatrix& y) {
  const int n = y.n();
  if (wf.weights == "simple") return WeightScheme::simple().vector(n);
  if (wf.weights == "standard") return WeightScheme::standard().vector(n);
  if (wf.weights.rfind("weighted:", 0) == 0) {
    double g;
    if (!detail::parse_double(wf.weights.substr(9), g))
      throw InvalidArgument("--weights weighted:<gamma>: cannot parse gamma");
    return WeightScheme::weighted(g).vector(n);
  }
  if (wf.weights == "exact-file") {
    if (wf.weights_file.empty())
      throw InvalidArgument("--weights exact-file requires --weights-file");
    Vector w = read_vector_csv(wf.weights_file);
    if (w.size() != n - 1)
      throw InvalidArgument("--weights-file: expected n-1 entries");
    if (!(w.array() > 0.0).all())
      throw InvalidWeights("--weights-file: weights must be strictly positive");
    return w;
  }
  if (wf.weights == "exact-est")
    return estimated_exact_weights(natural_covariance(y)).weights;
  if (wf.weights == "exact-banded")
    return estimated_exact_weights(banded_covariance(y, wf.n1, wf.n2, wf.h, false)).weights;
  if (wf.weights == "exact-banded,centered" || wf.weights == "exact-banded-centered")
    return estimated_exact_weights(banded_covariance(y, wf.n1, wf.n2, wf.h, true)).weights;
  throw InvalidArgument("unknown --weights value '" + wf.weights + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"panel change-point segmentation toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string sim_spec, sim_out;
  bool sim_header = false;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate a panel CSV from a spec file");
  simulate_cmd->add_option("--spec", sim_spec, "key = value spec file")->required();
  simulate_cmd->add_option("--out", sim_out, "output CSV path")->required();
  simulate_cmd->add_flag("--header", sim_header, "write a header row");
  simulate_cmd->add_option("--seed", sim_seed, "override the spec's seed");

  // cusum
  std::string cusum_in, cusum_profile_out, cusum_weights_out;
  WeightFlags cusum_wf;
  auto* cusum_cmd = app.add_subcommand("cusum", "single change point via weighted CUSUM");
  cusum_cmd->add_option("--input", cusum_in, "panel CSV")->required();
  add_weight_flags(cusum_cmd, cusum_wf);
  cusum_cmd->add_option("--out", cusum_profile_out, "write the profile (i, t(i)) as CSV");
  cusum_cmd->add_option("--out-weights", cusum_weights_out, "write the resolved weight vector");

  // gflasso
  std::string gfl_in, gfl_beta_out, gfl_fitted_out, gfl_changes_out, gfl_path_out;
  WeightFlags gfl_wf;
  std::optional<double> gfl_lambda;
  std::optional<int> gfl_ktarget;
  auto* gfl_cmd = app.add_subcommand("gflasso", "total variation denoising segmentation");
  gfl_cmd->add_option("--input", gfl_in, "panel CSV")->required();
  add_weight_flags(gfl_cmd, gfl_wf);
  gfl_cmd->add_option("--lambda", gfl_lambda, "solve at a fixed regularization value");
  gfl_cmd->add_option("--k-target", gfl_ktarget, "search lambda for this many changes");
  gfl_cmd->add_option("--out-beta", gfl_beta_out, "write beta_hat as CSV");
  gfl_cmd->add_option("--out-fitted", gfl_fitted_out, "write U_hat as CSV");
  gfl_cmd->add_option("--out-changes", gfl_changes_out, "write the change set");
  gfl_cmd->add_option("--out-path", gfl_path_out, "write the lambda path log as CSV");

  // weights
  std::string w_in, w_method = "natural", w_out, w_cov_out;
  bool w_convex_reg = false, w_concave = false;
  WeightFlags w_wf;
  auto* weights_cmd = app.add_subcommand("weights", "estimate an exact weight vector from data");
  weights_cmd->set_help_flag("--help", "print help");
  weights_cmd->add_option("--input", w_in, "panel CSV")->required();
  weights_cmd->add_option("--method", w_method, "natural | banded | banded-centered")
      ->capture_default_str();
  weights_cmd->add_option("--n1", w_wf.n1, "training window start")->capture_default_str();
  weights_cmd->add_option("--n2", w_wf.n2, "training window end")->capture_default_str();
  weights_cmd->add_option("--h", w_wf.h, "bandwidth")->capture_default_str();
  weights_cmd->add_flag("--convex-reg", w_convex_reg, "post-process by convex regression");
  weights_cmd->add_flag("--concave", w_concave, "fit the concave orientation instead");
  weights_cmd->add_option("--out", w_out, "output weight vector CSV")->required();
  weights_cmd->add_option("--out-cov", w_cov_out, "also write the covariance estimate as CSV");

  // theory
  int th_n = 100, th_u = 0;
  double th_gamma = 0.0, th_r = 1.0;
  std::optional<double> th_boundary, th_limit;
  bool th_report = false;
  std::string th_critical_out, th_scheme = "standard";
  double th_phi = 0.0, th_theta = 0.0;
  bool th_ma1 = false;
  auto* theory_cmd = app.add_subcommand("theory", "deterministic consistency calculators");
  theory_cmd->add_option("--n", th_n, "panel length")->capture_default_str();
  theory_cmd->add_option("--u", th_u, "change point for the consistency bound");
  theory_cmd->add_option("--gamma", th_gamma, "weighted-scheme exponent")->capture_default_str();
  theory_cmd->add_option("--boundary", th_boundary, "print B(gamma) for this gamma");
  theory_cmd->add_option("--limit", th_limit, "print the large-n bound at this zeta (uses --gamma)");
  theory_cmd->add_flag("--report", th_report, "perfect-estimation verdict plus R table");
  theory_cmd->add_option("--critical-out", th_critical_out, "write C(i;u,n,r) as CSV");
  theory_cmd->add_option("--r", th_r, "noise-to-change ratio for --critical-out")
      ->capture_default_str();
  theory_cmd->add_option("--scheme", th_scheme, "simple | standard | weighted:<g> | exact")
      ->capture_default_str();
  theory_cmd->add_flag("--ma1", th_ma1, "use the MA(1) V^2 (with --phi/--theta)");
  theory_cmd->add_option("--phi", th_phi, "MA(1) time coefficient")->capture_default_str();
  theory_cmd->add_option("--theta", th_theta, "MA(1) cross-panel coefficient")
      ->capture_default_str();

  // bench
  std::string bench_config, bench_out;
  int bench_threads = 0;
  auto* bench_cmd = app.add_subcommand("bench", "run a Monte Carlo benchmark config");
  bench_cmd->add_option("--config", bench_config, "experiment config file")->required();
  bench_cmd->add_option("--out", bench_out, "output directory")->required();
  bench_cmd->add_option("--threads", bench_threads, "worker threads (0 = hardware)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  if (simulate_cmd->parsed()) {
    SimulationSpec spec = SimulationSpec::from_file(sim_spec);
    if (sim_seed) spec.seed = *sim_seed;
    const PanelMatrix y = spec.generate();
    write_panel_csv(y.values(), sim_out, sim_header);
    std::cout << "wrote " << y.n() << "x" << y.d() << " panel to " << sim_out << "\n";
    return kExitOk;
  }

  if (cusum_cmd->parsed()) {
    const PanelMatrix y(read_panel_csv(cusum_in));
    const Vector w = resolve_weights(cusum_wf, y);
    const CusumProfile prof = cusum_statistic(y, w);
    std::cout << "estimate " << prof.estimate << "\n";
    if (prof.argmax_set.size() > 1) {
      std::cout << "argmax_set";
      for (int i : prof.argmax_set) std::cout << " " << i;
      std::cout << "\n";
    }
    if (!cusum_profile_out.empty()) write_profile_csv(prof.t, cusum_profile_out, "t");
    if (!cusum_weights_out.empty()) write_vector_csv(w, cusum_weights_out);
    return kExitOk;
  }

  if (gfl_cmd->parsed()) {
    if (gfl_lambda.has_value() == gfl_ktarget.has_value())
      throw InvalidArgument("gflasso: pass exactly one of --lambda or --k-target");
    const PanelMatrix y(read_panel_csv(gfl_in));
    const Vector w = resolve_weights(gfl_wf, y);
    if (gfl_lambda) {
      const LassoSolution sol = solve(y, w, *gfl_lambda);
      std::cout << "lambda " << *gfl_lambda << "\nchanges";
      for (int u : sol.change_set) std::cout << " " << u;
      std::cout << "\nkkt_residual " << sol.kkt_residual << "\n";
      if (!gfl_beta_out.empty()) write_matrix_csv(sol.beta, gfl_beta_out);
      if (!gfl_fitted_out.empty()) write_matrix_csv(sol.fitted, gfl_fitted_out);
      if (!gfl_changes_out.empty()) write_change_set(sol.change_set, gfl_changes_out);
    } else {
      const SegmentResult res = segment(y, w, *gfl_ktarget);
      std::cout << "lambda " << res.lambda << "\nchanges";
      for (int u : res.change_set) std::cout << " " << u;
      std::cout << "\n";
      if (!gfl_changes_out.empty()) write_change_set(res.change_set, gfl_changes_out);
      if (!gfl_path_out.empty()) {
        auto f = detail::open_out(gfl_path_out);
        f << "lambda,count,kkt_residual\n";
        for (const auto& e : res.path)
          f << detail::format_double(e.lambda) << "," << e.count << ","
            << detail::format_double(e.kkt_residual) << "\n";
      }
      if (!gfl_beta_out.empty() || !gfl_fitted_out.empty()) {
        const LassoSolution sol = solve(y, w, res.lambda);
        if (!gfl_beta_out.empty()) write_matrix_csv(sol.beta, gfl_beta_out);
        if (!gfl_fitted_out.empty()) write_matrix_csv(sol.fitted, gfl_fitted_out);
      }
    }
    return kExitOk;
  }

  if (weights_cmd->parsed()) {
    const PanelMatrix y(read_panel_csv(w_in));
    CovarianceEstimate cov;
    if (w_method == "natural") cov = natural_covariance(y);
    else if (w_method == "banded") cov = banded_covariance(y, w_wf.n1, w_wf.n2, w_wf.h, false);
    else if (w_method == "banded-centered")
      cov = banded_covariance(y, w_wf.n1, w_wf.n2, w_wf.h, true);
    else throw InvalidArgument("--method must be natural, banded or banded-centered");
    EstimatedWeights est = estimated_exact_weights(cov);
    if (w_convex_reg && !est.fallback_used) {
      est = convex_regression(est.weights, w_concave ? RegressionOrientation::Concave
                                                     : RegressionOrientation::Convex);
    }
    write_vector_csv(est.weights, w_out);
    if (!w_cov_out.empty()) write_matrix_csv(cov.sigma, w_cov_out);
    std::cout << "source " << to_string(est.source) << "\nfallback "
              << (est.fallback_used ? "yes" : "no") << "\n";
    return kExitOk;
  }

  if (theory_cmd->parsed()) {
    if (th_boundary) {
      std::cout << detail::format_double(boundary(*th_boundary)) << "\n";
      return kExitOk;
    }
    if (th_limit) {
      std::cout << detail::format_double(bound_limit(*th_limit, th_gamma)) << "\n";
      return kExitOk;
    }
    const NoiseModel model =
        th_ma1 ? NoiseModel::ma1(th_phi, th_theta, 1.0) : NoiseModel::iid(1.0);
    if (th_report) {
      std::cout << theory_report(th_n, th_gamma, VarianceFunction::from_model(model, th_n));
      return kExitOk;
    }
    if (!th_critical_out.empty()) {
      if (th_u < 1) throw InvalidArgument("theory: --critical-out needs --u");
      const VarianceFunction vf = VarianceFunction::from_model(model, th_n);
      WeightScheme scheme = WeightScheme::standard();
      if (th_scheme == "simple") scheme = WeightScheme::simple();
      else if (th_scheme == "standard") scheme = WeightScheme::standard();
      else if (th_scheme.rfind("weighted:", 0) == 0) {
        double g;
        if (!detail::parse_double(th_scheme.substr(9), g))
          throw InvalidArgument("--scheme weighted:<gamma>: cannot parse gamma");
        scheme = WeightScheme::weighted(g);
      } else if (th_scheme == "exact") scheme = WeightScheme::exact_from(vf);
      else throw InvalidArgument("unknown --scheme value");
      Vector c(th_n - 1);
      for (int i = 1; i <= th_n - 1; ++i)
        c[i - 1] = critical_function(i, th_u, th_n, th_r, scheme, vf);
      write_profile_csv(c, th_critical_out, "C");
      return kExitOk;
    }
    if (th_u >= 1) {
      const auto region = consistency_bound(th_u, th_n, th_gamma);
      std::cout << "u " << region.u << "\nu_star " << region.u_star << "\ns "
                << detail::format_double(region.location_fraction) << "\nR ";
      if (std::isinf(region.bound)) std::cout << "inf";
      else std::cout << detail::format_double(region.bound);
      std::cout << "\n";
      return kExitOk;
    }
    throw InvalidArgument("theory: pass --u, --boundary, --limit, --report or --critical-out");
  }

  if (bench_cmd->parsed()) {
    ExperimentConfig cfg = experiment_config_from_file(bench_config);
    if (bench_threads > 0) cfg.threads = bench_threads;
    const SummaryTable table = run_monte_carlo(cfg);
    emit_report(table, bench_out);
    std::cout << "wrote " << table.rows.size() << " summary rows to " << bench_out << "\n";
    return kExitOk;
  }

  return kExitInvalidInput;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const panelseg::EstimatorFailure& e) {
    std::cerr << "estimator failure: " << e.what() << "\n";
    return kExitEstimatorFailure;
  } catch (const panelseg::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}
