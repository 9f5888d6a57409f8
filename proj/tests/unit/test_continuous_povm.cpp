#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eurlab/continuous_povm.hpp"
#include "eurlab/error.hpp"

using namespace eurlab;
using std::numbers::pi;

TEST_CASE("bins_that_fit is robust at integer ratios") {
  CHECK(bins_that_fit(1.0, 0.1) == 10);
  CHECK(bins_that_fit(123.2, 0.1) == 1232);
  CHECK(bins_that_fit(0.05, 0.1) == 0);
}

TEST_CASE("interval bin spec construction and lookup") {
  const IntervalBinSpec s({-1.0, 1.0}, 1.0, -2.0, 2.0);
  CHECK(s.size() == 2);
  CHECK(s.locate(-1.2) == std::optional<std::size_t>(0));
  CHECK(s.locate(0.7) == std::optional<std::size_t>(1));
  CHECK_FALSE(s.locate(0.0).has_value());
  CHECK_FALSE(s.locate(3.0).has_value());

  const auto nulls = s.null_regions();
  REQUIRE(nulls.size() == 3);
  CHECK(std::isinf(nulls.front().lo));
  CHECK(nulls.front().hi == -1.5);
  CHECK(nulls[1].lo == -0.5);
  CHECK(nulls[1].hi == 0.5);
  CHECK(std::isinf(nulls.back().hi));

  CHECK_THROWS_AS(IntervalBinSpec({0.0, 0.5}, 1.0, -2.0, 2.0), InvalidInput);   // overlap
  CHECK_THROWS_AS(IntervalBinSpec({1.8}, 1.0, -2.0, 2.0), InvalidInput);        // leaves range
  CHECK_THROWS_AS(IntervalBinSpec({0.0}, 0.0, -2.0, 2.0), InvalidInput);        // width
  CHECK_THROWS_AS(IntervalBinSpec({0.0}, 1.0, 2.0, -2.0), InvalidInput);        // range
}

TEST_CASE("two time bins inside the window leave the two outer null regions") {
  const double t_c = 1e-9;
  const IntervalBinSpec time({-0.5e-9, 0.5e-9}, 1e-9, -t_c, t_c);
  const IntervalBinSpec freq = IntervalBinSpec::uniform(1e9, -1e10, 1e10);
  const ConjugatePovmPair pair = build_time_frequency_povms(freq, time);
  CHECK(pair.second.kind == ObservableKind::ArrivalTime);
  REQUIRE(pair.second.null_regions.size() == 2);
  CHECK(pair.second.null_regions[0].hi == -t_c);
  CHECK(pair.second.null_regions[1].lo == t_c);
  CHECK(pair.second.outcomes() == 3);
}

TEST_CASE("uniform bins: time window and quadrature range counts") {
  const double t_c = 1 / (2 * 55.6e6);
  const IntervalBinSpec time = IntervalBinSpec::uniform(20e-12, -t_c, t_c);
  CHECK(time.size() == 899);
  CHECK(time.centers().front() == doctest::Approx(-time.centers().back()).epsilon(1e-12));

  const IntervalBinSpec x = IntervalBinSpec::uniform(0.1, -61.6, 61.6);
  CHECK(x.size() == 1232);
  const ConjugatePovmPair q = build_quadrature_povms(x, x);
  CHECK(q.first.kind == ObservableKind::QuadratureX);
  CHECK_THROWS_AS(build_quadrature_povms(x, IntervalBinSpec::uniform(0.2, -61.6, 61.6)), InvalidInput);
}

TEST_CASE("analytic overlap matches the Nystrom oracle over small and moderate products") {
  for (double c : {1e-4, 3e-4, 1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5}) {
    const double dt = 20e-12;
    const double dw = 4 * c / dt;
    const double a = analytic_overlap(dw, dt);
    const double o = slepian_overlap_oracle(dw, dt).eigenvalue;
    CHECK(std::abs(a - o) / o < 1e-2);
    CHECK(std::abs(a - o) / o < 1e-8);  // in practice the two agree far more closely
  }
}

TEST_CASE("midpoint oracle converges to the same value") {
  SlepianGrid grid;
  grid.rule = QuadratureRule::Midpoint;
  grid.rtol = 1e-7;
  grid.max_doublings = 8;
  const double dw = 2 * pi * 0.01 / 1.0;
  const double mid = slepian_overlap_oracle(dw, 1.0, grid).eigenvalue;
  CHECK(mid == doctest::Approx(analytic_overlap(dw, 1.0)).epsilon(1e-5));
}

TEST_CASE("oracle reports non-convergence") {
  SlepianGrid grid;
  grid.n_points = 64;
  grid.rule = QuadratureRule::Midpoint;
  grid.rtol = 1e-14;
  grid.max_doublings = 1;
  CHECK_THROWS_AS(slepian_overlap_oracle(1.0, 1.0, grid), NumericalError);
}

TEST_CASE("small and large product limits") {
  for (double prod : {1e-4, 1e-3, 1e-2, 0.05, 0.1}) {  // prod = dw dt / 2 pi
    const double dt = 1.0;
    const double dw = 2 * pi * prod / dt;
    CHECK(std::abs(analytic_overlap(dw, dt) / prod - 1) < 0.05);
  }
  CHECK(analytic_overlap(2 * pi * 20, 1.0) >= 0.999);
  CHECK(analytic_overlap(2 * pi * 1e-3 / 20e-12, 20e-12) == doctest::Approx(1e-3).epsilon(1e-5));
  CHECK_THROWS_AS(analytic_overlap(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(analytic_overlap(1.0, -1.0), InvalidInput);
}

TEST_CASE("overlap is monotone, bounded and depends only on the product") {
  double prev = 0.0;
  for (double dw = 0.01; dw < 200; dw *= 1.5) {
    const double v = analytic_overlap(dw, 1.0);
    if (dw < 20) {
      CHECK(v > prev);
    } else {
      CHECK(v >= prev);  // saturated at 1 in double precision
    }
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    prev = v;
    for (double k : {1e-12, 1e-3, 7.0, 1e9}) {
      CHECK(std::abs(analytic_overlap(dw * k, 1.0 / k) - v) <= 1e-10 * v);
    }
  }
}

TEST_CASE("quadrature overlap equals the analytic overlap at equal widths") {
  for (double d : {0.05, 0.1, 1.0, 3.0}) CHECK(quadrature_bin_overlap(d) == doctest::Approx(analytic_overlap(d, d)));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const auto [x, w] = gauss_legendre(8);
  for (int deg = 0; deg <= 15; ++deg) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], deg);
    const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14));
  }
}

TEST_CASE("frequency width for a target overlap inverts the overlap") {
  const double dw = frequency_width_for_overlap(1e-3, 20e-12);
  CHECK(dw == doctest::Approx(3.14159e8).epsilon(1e-5));
  CHECK(analytic_overlap(dw, 20e-12) == doctest::Approx(1e-3).epsilon(1e-10));
}
