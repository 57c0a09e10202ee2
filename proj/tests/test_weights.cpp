#include <catch2/catch_amalgamated.hpp>

#include "panelseg/covariance.hpp"
#include "panelseg/weights.hpp"

using namespace panelseg;

namespace {

// Independent route to Var(S_i(eps))/sigma^2 for the MA(1) model: expand the
// partial-sum contrast in the innovation coefficients. With a_{i,0} := 0,
//   Var(S_i) = s2 (1+theta^2) sum_{t=0}^{n} (a_{i,t} + phi a_{i,t+1})^2.
double v2_bruteforce(double phi, double theta, int i, int n) {
  auto a = [&](int j) {
    if (j < 1 || j > n) return 0.0;
    return (j <= i ? 1.0 - double(i) / n : -double(i) / n) / std::sqrt(double(n));
  };
  double acc = 0.0;
  for (int t = 0; t <= n; ++t) {
    const double c = a(t) + phi * a(t + 1);
    acc += c * c;
  }
  const double var = (1.0 + theta * theta) * acc;           // per unit s2
  const double sigma2 = (1.0 + phi * phi) * (1.0 + theta * theta);
  return var / sigma2;
}

}  // namespace

TEST_CASE("weight closed forms", "[weights]") {
  REQUIRE(WeightScheme::weighted(0.0).weight(3, 10) == 1.0);
  REQUIRE(WeightScheme::simple().weight(3, 10) == 1.0);
  REQUIRE(WeightScheme::standard().weight(50, 100) == Catch::Approx(2.0).margin(1e-15));

  SECTION("weighted(1/2) coincides with standard at every i") {
    for (int n : {5, 17, 100})
      for (int i = 1; i <= n - 1; ++i)
        REQUIRE(WeightScheme::weighted(0.5).weight(i, n) ==
                WeightScheme::standard().weight(i, n));
  }
  SECTION("symmetry w(i) = w(n-i)") {
    for (double g : {0.0, 0.2, 0.5}) {
      auto s = WeightScheme::weighted(g);
      for (int n : {8, 13, 64})
        for (int i = 1; i <= n - 1; ++i) REQUIRE(s.weight(i, n) == s.weight(n - i, n));
    }
  }
  SECTION("range and argument errors") {
    REQUIRE_THROWS_AS(WeightScheme::weighted(-0.1), InvalidArgument);
    REQUIRE_THROWS_AS(WeightScheme::weighted(0.51), InvalidArgument);
    REQUIRE_THROWS_AS(WeightScheme::standard().weight(0, 10), InvalidArgument);
    REQUIRE_THROWS_AS(WeightScheme::standard().weight(10, 10), InvalidArgument);
  }
}

TEST_CASE("v_squared closed forms", "[weights]") {
  REQUIRE(v_squared(NoiseModel::iid(3.0), 25, 100) == Catch::Approx(0.1875).margin(1e-15));

  SECTION("phi = 0 reduces to the uncorrelated value for any theta") {
    for (double theta : {-2.0, 0.0, 1.0, 5.0})
      for (int i = 1; i <= 19; ++i)
        REQUIRE(v_squared(NoiseModel::ma1(0.0, theta, 1.0), i, 20) ==
                Catch::Approx(v_squared(NoiseModel::iid(1.0), i, 20)).margin(1e-15));
  }
  SECTION("MA1 phi=-1, theta=0, n=4, i=2 equals 3/16") {
    REQUIRE(v_squared(NoiseModel::ma1(-1.0, 0.0, 1.0), 2, 4) ==
            Catch::Approx(3.0 / 16.0).margin(1e-15));
    REQUIRE(v2_bruteforce(-1.0, 0.0, 2, 4) == Catch::Approx(3.0 / 16.0).margin(1e-14));
  }
  SECTION("matches the innovation-expansion oracle") {
    for (double phi : {-3.0, -1.0, -0.5, 0.0, 0.7, 2.0})
      for (double theta : {-1.0, 0.0, 1.5})
        for (int n : {3, 7, 24})
          for (int i = 1; i <= n - 1; ++i)
            REQUIRE(v_squared(NoiseModel::ma1(phi, theta, 4.0), i, n) ==
                    Catch::Approx(v2_bruteforce(phi, theta, i, n)).margin(1e-13));
  }
  SECTION("independent of theta to 1e-12") {
    for (double theta : {-2.0, 0.0, 1.0, 5.0})
      for (int i = 1; i <= 29; ++i)
        REQUIRE(std::abs(v_squared(NoiseModel::ma1(-2.5, theta, 1.0), i, 30) -
                         v_squared(NoiseModel::ma1(-2.5, 0.0, 1.0), i, 30)) < 1e-12);
  }
  SECTION("strictly positive for n >= 3 whatever the parameters") {
    for (double phi : {-5.0, -2.0, -1.0, -0.5, 0.0, 1.0, 5.0})
      for (int n : {3, 4, 10, 57})
        for (int i = 1; i <= n - 1; ++i)
          REQUIRE(v_squared(NoiseModel::ma1(phi, 1.0, 1.0), i, n) > 0.0);
  }
  SECTION("cross-check against the analytic covariance quadratic form") {
    for (double phi : {-3.0, -1.0, 0.5})
      for (double theta : {0.0, 1.0}) {
        auto model = NoiseModel::ma1(phi, theta, 9.0);
        Matrix sigma = analytic_covariance(model, 40);
        for (int i = 1; i <= 39; ++i)
          REQUIRE(std::abs(v_squared(model, i, 40) -
                           quadratic_form_f(sigma, i) / model.sigma2()) < 1e-12);
      }
  }
}

TEST_CASE("exact weights from V", "[weights]") {
  SECTION("V == 1 gives w == 1") {
    VarianceFunction vf{Vector::Ones(9)};
    Vector w = exact_weights_from_v(vf);
    REQUIRE((w.array() == 1.0).all());
  }
  SECTION("uncorrelated V reproduces the standard scheme up to scale") {
    const int n = 30;
    auto vf = VarianceFunction::from_model(NoiseModel::iid(1.0), n);
    Vector w = exact_weights_from_v(vf);
    Vector ws = WeightScheme::standard().vector(n);
    const double ratio = w[0] / ws[0];
    for (int i = 0; i < n - 1; ++i) REQUIRE(w[i] / ws[i] == Catch::Approx(ratio).margin(1e-12));
  }
  SECTION("strongly negative phi gives a concave reciprocal-square curve") {
    const int n = 100;
    auto vf = VarianceFunction::from_model(NoiseModel::ma1(-3.0, 1.0, 9.0), n);
    Vector w = exact_weights_from_v(vf);
    // 1/w^2 = V^2 must be strictly concave here
    for (int i = 1; i + 1 < n - 1; ++i) {
      const double second = vf.v2(i) - 2.0 * vf.v2(i + 1) + vf.v2(i + 2);
      REQUIRE(second < 0.0);
    }
    // and the weights themselves are far from the standard shape: standard is
    // symmetric-convex, this V makes w almost flat in the middle
    REQUIRE((w.array() > 0.0).all());
  }
  SECTION("non-positive variance is rejected") {
    Vector v2(4);
    v2 << 0.1, 0.0, 0.1, 0.2;
    REQUIRE_THROWS_AS(exact_weights_from_v(VarianceFunction{v2}), NonPositiveVariance);
  }
}
