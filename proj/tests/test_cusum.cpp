#include <catch2/catch_amalgamated.hpp>

#include "panelseg/cusum.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/weights.hpp"

using namespace panelseg;

namespace {

PanelMatrix random_panel(int n, int d, std::uint64_t seed) {
  rng::Substream s(seed, rng::Purpose::Generic, 0);
  Matrix y(n, d);
  std::uint64_t c = 0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < n; ++i) y(i, k) = s.normal(c++);
  return PanelMatrix(std::move(y));
}

}  // namespace

TEST_CASE("partial sums", "[cusum]") {
  SECTION("constant column is identically zero") {
    Matrix x = Matrix::Constant(7, 2, 4.2);
    REQUIRE((partial_sums(x).array() == 0.0).all());
  }
  SECTION("hand value for [0,0,1,1]") {
    Matrix x(4, 1);
    x << 0, 0, 1, 1;
    Matrix s = partial_sums(x);
    REQUIRE(s(0, 0) == Catch::Approx(-0.25));
    REQUIRE(s(1, 0) == Catch::Approx(-0.5));
    REQUIRE(s(2, 0) == Catch::Approx(-0.25));
  }
  SECTION("full centered sum telescopes to zero") {
    auto y = random_panel(16, 5, 404);
    Matrix s = partial_sums(y.values());
    for (int k = 0; k < 5; ++k) {
      const double mean = y.values().col(k).mean();
      const double full = s(14, k) + (y.values()(15, k) - mean) / 4.0;  // n^{-1/2} = 1/4
      REQUIRE(std::abs(full) < 1e-12);
    }
  }
  SECTION("n < 3 rejected") {
    REQUIRE_THROWS_AS(partial_sums(Matrix::Zero(2, 3)), InvalidPanelLength);
  }
}

TEST_CASE("cusum statistic on the toy column", "[cusum]") {
  PanelMatrix y{[] {
    Matrix x(4, 1);
    x << 0, 0, 1, 1;
    return x;
  }()};
  auto prof = cusum_statistic(y, Vector::Ones(3));
  REQUIRE(prof.t[0] == Catch::Approx(0.25));
  REQUIRE(prof.t[1] == Catch::Approx(1.0));
  REQUIRE(prof.t[2] == Catch::Approx(0.25));
  REQUIRE(prof.estimate == 2);
  REQUIRE(prof.argmax_set == std::vector<int>{2});
}

TEST_CASE("degenerate constant panel ties everywhere", "[cusum]") {
  PanelMatrix y{Matrix::Constant(5, 3, 1.0)};
  auto prof = cusum_statistic(y, Vector::Ones(4));
  REQUIRE((prof.t.array() == 0.0).all());
  REQUIRE(prof.argmax_set == std::vector<int>{1, 2, 3, 4});
  REQUIRE(prof.estimate == 1);
}

TEST_CASE("weight scaling moves t by c^2 and keeps the argmax", "[cusum]") {
  auto y = random_panel(12, 6, 7);
  Vector w = WeightScheme::standard().vector(12);
  auto base = cusum_statistic(y, w);
  auto scaled = cusum_statistic(y, Vector(3.0 * w));
  REQUIRE(scaled.argmax_set == base.argmax_set);
  for (int i = 0; i < 11; ++i) REQUIRE(scaled.t[i] == Catch::Approx(9.0 * base.t[i]));
}

TEST_CASE("cusum invariances", "[cusum]") {
  auto y = random_panel(10, 8, 55);
  Vector w = WeightScheme::weighted(0.3).vector(10);
  auto base = cusum_statistic(y, w);

  SECTION("adding a constant per panel changes nothing") {
    Matrix shifted = y.values();
    for (int k = 0; k < 8; ++k) shifted.col(k).array() += 10.0 * (k + 1);
    auto moved = cusum_statistic(PanelMatrix(shifted), w);
    REQUIRE((moved.t - base.t).cwiseAbs().maxCoeff() < 1e-9);
  }
  SECTION("permuting panels changes nothing") {
    Matrix perm = y.values();
    perm.col(0).swap(perm.col(5));
    perm.col(2).swap(perm.col(7));
    auto moved = cusum_statistic(PanelMatrix(perm), w);
    // the k-sum is reordered, so only rounding-level differences remain
    REQUIRE((moved.t - base.t).cwiseAbs().maxCoeff() <= 1e-12 * base.t.maxCoeff());
  }
  SECTION("two evaluation routes agree to 1e-10 relative") {
    Matrix s = partial_sums(y.values());
    const int n = 10;
    for (int i = 0; i < n - 1; ++i) {
      const double via_s = w[i] * w[i] * n * s.row(i).squaredNorm();
      REQUIRE(via_s == Catch::Approx(base.t[i]).epsilon(1e-10));
    }
  }
  SECTION("time reversal maps t(i) to t(n-i) for symmetric weights") {
    Matrix rev = y.values().colwise().reverse();
    auto moved = cusum_statistic(PanelMatrix(rev), w);
    for (int i = 1; i <= 9; ++i)
      REQUIRE(moved.t[i - 1] == Catch::Approx(base.t[9 - i]).epsilon(1e-10));
  }
}

TEST_CASE("cusum argument errors", "[cusum]") {
  auto y = random_panel(8, 2, 1);
  REQUIRE_THROWS_AS(cusum_statistic(y, Vector::Ones(6)), InvalidArgument);
  Vector w = Vector::Ones(7);
  w[3] = 0.0;
  REQUIRE_THROWS_AS(cusum_statistic(y, w), InvalidWeights);
}

TEST_CASE("noiseless single change is located exactly", "[cusum]") {
  for (int u : {1, 3, 9, 14}) {
    auto spec = SignalSpec::constant_levels(15, {u}, {0.0, 1.0}, 4);
    PanelMatrix y{mean_matrix(spec, 4)};
    for (auto scheme : {WeightScheme::simple(), WeightScheme::standard(),
                        WeightScheme::weighted(0.25)})
      REQUIRE(estimate_change(y, scheme.vector(15)) == u);
  }
}

TEST_CASE("dependence breaks the standard weights but not the exact ones", "[cusum][montecarlo]") {
  // n=100, u=70, phi=-3, theta=1, s2=9, d=10^4: the exact scheme finds u,
  // the standard scheme drifts to the right border
  const int n = 100, d = 10000;
  auto model = NoiseModel::ma1(-3.0, 1.0, 9.0);
  auto spec = SignalSpec::constant_levels(n, {70}, {0.0, 1.0}, d);
  auto y = generate_panel(spec, model, CommonFactorSpec::inverse_sqrt(),
                          ChangeLocationNoise::none(), d, 2024);
  Vector w_exact = exact_weights_from_v(VarianceFunction::from_model(model, n));
  Vector w_standard = WeightScheme::standard().vector(n);
  REQUIRE(estimate_change(y, w_exact) == 70);
  REQUIRE(estimate_change(y, w_standard) >= 95);
}
