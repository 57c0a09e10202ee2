#include <catch2/catch_amalgamated.hpp>

#include "panelseg/covariance.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/weights.hpp"

using namespace panelseg;

TEST_CASE("natural covariance basics", "[covariance]") {
  SECTION("two identical panels give the zero matrix") {
    Matrix y(4, 2);
    y << 1, 1, -2, -2, 0.5, 0.5, 3, 3;
    Matrix sigma = natural_covariance(y).sigma;
    REQUIRE((sigma.array() == 0.0).all());
  }
  SECTION("2x2 toy") {
    Matrix y(2, 2);
    y << 0, 2, 1, 1;
    Matrix sigma = natural_covariance(y).sigma;
    REQUIRE(sigma(0, 0) == Catch::Approx(2.0));
    REQUIRE(sigma(0, 1) == 0.0);
    REQUIRE(sigma(1, 0) == 0.0);
    REQUIRE(sigma(1, 1) == 0.0);
  }
  SECTION("exactly symmetric") {
    auto spec = SignalSpec::constant_levels(12, {}, {0.0}, 500);
    auto y = generate_panel(spec, NoiseModel::ma1(0.7, -0.3, 2.0), CommonFactorSpec::none(),
                            ChangeLocationNoise::none(), 500, 5);
    Matrix sigma = natural_covariance(y).sigma;
    REQUIRE(sigma == Matrix(sigma.transpose()));
  }
  SECTION("d <= 1 rejected") {
    REQUIRE_THROWS_AS(natural_covariance(Matrix::Zero(4, 1)), InsufficientPanels);
  }
}

TEST_CASE("quadratic form f_i", "[covariance]") {
  SECTION("identity scales to the uncorrelated V^2") {
    const int n = 25;
    Matrix sigma = 3.7 * Matrix::Identity(n, n);
    for (int i = 1; i <= n - 1; ++i) {
      const double expect = 3.7 * (double(i) / n) * (double(n - i) / n);
      REQUIRE(quadratic_form_f(sigma, i) == Catch::Approx(expect).margin(1e-14));
    }
  }
  SECTION("zero matrix gives zero") {
    REQUIRE(quadratic_form_f(Matrix::Zero(6, 6), 3) == 0.0);
  }
  SECTION("analytic MA covariance reproduces V^2 * sigma^2") {
    auto model = NoiseModel::ma1(-1.7, 0.8, 2.5);
    const int n = 60;
    Matrix sigma = analytic_covariance(model, n);
    for (int i = 1; i <= n - 1; ++i)
      REQUIRE(std::abs(quadratic_form_f(sigma, i) - v_squared(model, i, n) * model.sigma2()) <
              1e-12);
  }
  SECTION("prefix-sum batch route agrees with the per-index route") {
    rng::Substream s(42, rng::Purpose::Generic, 0);
    const int n = 23;
    Matrix a(n, n);
    std::uint64_t c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = s.normal(c++);
    Matrix sigma = a + Matrix(a.transpose());
    Vector batch = quadratic_form_all(sigma);
    for (int i = 1; i <= n - 1; ++i)
      REQUIRE(batch[i - 1] == Catch::Approx(quadratic_form_f(sigma, i)).margin(1e-11));
  }
  SECTION("argument checks") {
    REQUIRE_THROWS_AS(quadratic_form_f(Matrix::Zero(4, 3), 1), InvalidArgument);
    REQUIRE_THROWS_AS(quadratic_form_f(Matrix::Zero(4, 4), 4), InvalidArgument);
  }
}

TEST_CASE("banded covariance", "[covariance]") {
  SECTION("constant panels give the zero matrix") {
    Matrix sigma = banded_covariance(Matrix::Constant(6, 3, 4.0), 1, 5, 2, false).sigma;
    REQUIRE((sigma.array() == 0.0).all());
    // panels constant in time at distinct levels: training-window centering
    // wipes them out entirely
    Matrix y(6, 3);
    for (int k = 0; k < 3; ++k) y.col(k).setConstant(double(k));
    Matrix centered = banded_covariance(y, 1, 5, 2, true).sigma;
    REQUIRE((centered.array() == 0.0).all());
  }
  SECTION("h = 0 on iid data is a diagonal matrix with xi_0 near s2") {
    const int n = 30, d = 100000;
    auto spec = SignalSpec::constant_levels(n, {}, {0.0}, d);
    auto y = generate_panel(spec, NoiseModel::iid(4.0), CommonFactorSpec::none(),
                            ChangeLocationNoise::none(), d, 21);
    auto est = banded_covariance(y, 1, 20, 0, false);
    REQUIRE(est.sigma(0, 0) == Catch::Approx(4.0).epsilon(0.05));
    for (int i = 0; i < n; ++i) REQUIRE(est.sigma(i, i) == est.sigma(0, 0));
    REQUIRE(est.sigma.diagonal().asDiagonal().toDenseMatrix() == est.sigma);
  }
  SECTION("MA1 xi_1 recovers the lag-1 covariance") {
    const int n = 30, d = 100000;
    auto spec = SignalSpec::constant_levels(n, {}, {0.0}, d);
    auto y = generate_panel(spec, NoiseModel::ma1(-1.0, 0.0, 1.0), CommonFactorSpec::none(),
                            ChangeLocationNoise::none(), d, 22);
    auto est = banded_covariance(y, 1, 20, 1, false);
    REQUIRE(est.sigma(0, 1) == Catch::Approx(-1.0).epsilon(0.05));
  }
  SECTION("zeros outside the band, symmetric, Toeplitz within") {
    const int n = 15;
    auto spec = SignalSpec::constant_levels(n, {}, {0.0}, 50);
    auto y = generate_panel(spec, NoiseModel::ma1(0.5, 0.2, 1.0), CommonFactorSpec::none(),
                            ChangeLocationNoise::none(), 50, 23);
    const int h = 3;
    auto est = banded_covariance(y, 2, 12, h, false);
    REQUIRE(est.sigma == Matrix(est.sigma.transpose()));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (std::abs(j - k) > h) REQUIRE(est.sigma(j, k) == 0.0);
    for (int j = 0; j + h < n; ++j) REQUIRE(est.sigma(j, j + h) == est.sigma(0, h));
  }
  SECTION("centered variant removes per-panel level shifts") {
    const int n = 24, d = 20000;
    // panels with distinct levels violate the natural estimate's assumption;
    // training-window centering restores the banded estimate
    Matrix levels(1, d);
    for (int k = 0; k < d; ++k) levels(0, k) = (k % 7) * 10.0;
    SignalSpec spec(n, {}, levels);
    auto y = generate_panel(spec, NoiseModel::iid(1.0), CommonFactorSpec::none(),
                            ChangeLocationNoise::none(), d, 24);
    auto raw = banded_covariance(y, 1, 12, 1, false);
    auto centered = banded_covariance(y, 1, 12, 1, true);
    REQUIRE(raw.sigma(0, 0) > 5.0);  // inflated by the level spread
    // centering by the window mean shrinks the variance to (1 - 1/w) s2
    REQUIRE(centered.sigma(0, 0) == Catch::Approx(1.0 - 1.0 / 12.0).epsilon(0.05));
  }
  SECTION("window and band validation") {
    Matrix y = Matrix::Zero(10, 4);
    REQUIRE_THROWS_AS(banded_covariance(y, 0, 5, 1, false), InvalidTrainingWindow);
    REQUIRE_THROWS_AS(banded_covariance(y, 5, 5, 0, false), InvalidTrainingWindow);
    REQUIRE_THROWS_AS(banded_covariance(y, 1, 11, 1, false), InvalidTrainingWindow);
    REQUIRE_THROWS_AS(banded_covariance(y, 1, 5, 5, false), InvalidTrainingWindow);
    REQUIRE_THROWS_AS(banded_covariance(y, 1, 5, -1, false), InvalidTrainingWindow);
  }
}

TEST_CASE("estimated exact weights", "[covariance]") {
  SECTION("identity covariance is argmax-equivalent to standard") {
    const int n = 20;
    CovarianceEstimate est{Matrix::Identity(n, n), CovMethod::Natural, -1, 0, 0};
    auto ew = estimated_exact_weights(est);
    REQUIRE_FALSE(ew.fallback_used);
    Vector ws = WeightScheme::standard().vector(n);
    const double ratio = ew.weights[0] / ws[0];
    for (int i = 0; i < n - 1; ++i)
      REQUIRE(ew.weights[i] / ws[i] == Catch::Approx(ratio).margin(1e-12));
  }
  SECTION("any non-positive f_i triggers the standard fallback") {
    const int n = 8;
    Matrix sigma = Matrix::Zero(n, n);  // f_i = 0 for every i
    auto ew = estimated_exact_weights({sigma, CovMethod::Natural, -1, 0, 0});
    REQUIRE(ew.fallback_used);
    REQUIRE(ew.weights == WeightScheme::standard().vector(n));
    REQUIRE((ew.weights.array() > 0.0).all());
  }
  SECTION("consistent for MA1 panels at large d") {
    const int n = 100, d = 10000;
    auto model = NoiseModel::ma1(-3.0, 1.0, 9.0);
    auto spec = SignalSpec::constant_levels(n, {}, {0.0}, d);
    auto y = generate_panel(spec, model, CommonFactorSpec::none(), ChangeLocationNoise::none(),
                            d, 31);
    auto ew = estimated_exact_weights(natural_covariance(y));
    REQUIRE_FALSE(ew.fallback_used);
    Vector truth = exact_weights_from_v(VarianceFunction::from_model(model, n));
    const int mid = n / 2;
    const double scale = truth[mid - 1] / ew.weights[mid - 1];
    for (int i = 0; i < n - 1; ++i)
      REQUIRE(ew.weights[i] * scale == Catch::Approx(truth[i]).epsilon(0.05));
  }
  SECTION("estimation error shrinks as d grows (median over 20 seeds)") {
    const int n = 20;
    auto model = NoiseModel::ma1(-1.0, 1.0, 4.0);
    Matrix truth = analytic_covariance(model, n);
    Vector f_true = quadratic_form_all(truth);
    auto spec_levels = [&](int d) { return SignalSpec::constant_levels(n, {}, {0.0}, d); };
    std::vector<double> medians;
    for (int d : {100, 1000, 10000}) {
      std::vector<double> errs;
      for (int seed = 0; seed < 20; ++seed) {
        auto y = generate_panel(spec_levels(d), model, CommonFactorSpec::none(),
                                ChangeLocationNoise::none(), d,
                                rng::derive_seed(777, static_cast<std::uint64_t>(d), seed));
        Vector f_hat = quadratic_form_all(natural_covariance(y).sigma);
        errs.push_back((f_hat - f_true).cwiseAbs().maxCoeff());
      }
      std::sort(errs.begin(), errs.end());
      medians.push_back(0.5 * (errs[9] + errs[10]));
    }
    REQUIRE(medians[1] < medians[0]);
    REQUIRE(medians[2] < medians[1]);
  }
}
