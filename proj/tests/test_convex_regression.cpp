#include <catch2/catch_amalgamated.hpp>

#include "panelseg/convex_regression.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/weights.hpp"

using namespace panelseg;

namespace {

double min_second_difference(const Vector& x) {
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 2 < x.size(); ++j)
    worst = std::min(worst, x[j] - 2.0 * x[j + 1] + x[j + 2]);
  return worst;
}

// least-squares affine fit, a feasible reference point for the projection
Vector affine_fit(const Vector& y) {
  const int m = static_cast<int>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int j = 0; j < m; ++j) {
    sx += j;
    sy += y[j];
    sxx += double(j) * j;
    sxy += double(j) * y[j];
  }
  const double det = m * sxx - sx * sx;
  const double b = (m * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / m;
  Vector out(m);
  for (int j = 0; j < m; ++j) out[j] = a + b * j;
  return out;
}

}  // namespace

TEST_CASE("convex regression is idempotent on feasible inputs", "[convexreg]") {
  SECTION("standard weights are convex already") {
    Vector w = WeightScheme::standard().vector(40);
    Vector fit = convex_regression_fit(w, RegressionOrientation::Convex);
    REQUIRE((fit - w).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SECTION("affine input is fixed by both orientations") {
    Vector w(6);
    w << 1.0, 1.5, 2.0, 2.5, 3.0, 3.5;
    for (auto o : {RegressionOrientation::Convex, RegressionOrientation::Concave}) {
      Vector fit = convex_regression_fit(w, o);
      REQUIRE((fit - w).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SECTION("two points are always feasible") {
    Vector w(2);
    w << 5.0, 1.0;
    REQUIRE(convex_regression_fit(w, RegressionOrientation::Convex) == w);
  }
}

TEST_CASE("convex regression projects noisy convex curves", "[convexreg]") {
  const int m = 60;
  rng::Substream noise(99, rng::Purpose::Generic, 0);
  Vector truth(m), observed(m);
  for (int j = 0; j < m; ++j) {
    const double x = (j - m / 2.0) / 10.0;
    truth[j] = 1.0 + x * x;  // strictly convex
    observed[j] = truth[j] + 0.15 * noise.normal(static_cast<std::uint64_t>(j));
  }
  ConvexRegressionDiagnostics diag;
  Vector fit = convex_regression_fit(observed, RegressionOrientation::Convex, &diag);

  SECTION("feasible to tolerance") {
    REQUIRE(min_second_difference(fit) >= -1e-8);
    REQUIRE(diag.max_violation <= 1e-8 * observed.cwiseAbs().maxCoeff());
  }
  SECTION("objective no worse than the affine feasible point") {
    REQUIRE((fit - observed).squaredNorm() <= (affine_fit(observed) - observed).squaredNorm());
  }
  SECTION("variational inequality of a projection") {
    // <observed - fit, v - fit> <= tol for every feasible v
    std::vector<Vector> feasible{affine_fit(observed), truth, Vector::Zero(m),
                                 Vector::Constant(m, observed.mean())};
    for (const auto& v : feasible) {
      const double inner = (observed - fit).dot(v - fit);
      REQUIRE(inner <= 1e-6 * observed.norm() * (v - fit).norm() + 1e-9);
    }
  }
  SECTION("projecting the projection changes nothing") {
    Vector again = convex_regression_fit(fit, RegressionOrientation::Convex);
    REQUIRE((again - fit).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("concave orientation mirrors the convex fit", "[convexreg]") {
  const int m = 30;
  Vector w(m);
  for (int j = 0; j < m; ++j) w[j] = std::sqrt(1.0 + j);  // concave
  Vector fit = convex_regression_fit(w, RegressionOrientation::Concave);
  REQUIRE((fit - w).cwiseAbs().maxCoeff() <= 1e-8);
  // and the convex fit of the negation matches the negated concave fit
  Vector neg = convex_regression_fit(-w, RegressionOrientation::Convex);
  REQUIRE((neg + fit).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("EstimatedWeights wrapper falls back when the fit is not positive", "[convexreg]") {
  Vector bad = Vector::Constant(9, -1.0);  // affine, stays negative
  auto est = convex_regression(bad, RegressionOrientation::Convex);
  REQUIRE(est.fallback_used);
  REQUIRE(est.source == WeightSource::ExactReg);
  REQUIRE(est.weights == WeightScheme::standard().vector(10));

  Vector good = WeightScheme::standard().vector(12);
  auto ok = convex_regression(good, RegressionOrientation::Convex);
  REQUIRE_FALSE(ok.fallback_used);
  REQUIRE((ok.weights.array() > 0.0).all());
}

TEST_CASE("convex regression input validation", "[convexreg]") {
  REQUIRE_THROWS_AS(convex_regression_fit(Vector::Ones(1), RegressionOrientation::Convex),
                    InvalidArgument);
  Vector nan(4);
  nan << 1.0, std::numeric_limits<double>::quiet_NaN(), 2.0, 3.0;
  REQUIRE_THROWS_AS(convex_regression_fit(nan, RegressionOrientation::Convex), InvalidArgument);
}
