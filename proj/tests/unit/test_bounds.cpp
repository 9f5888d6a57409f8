#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "../oracles/oracles.hpp"
#include "eurlab/bounds.hpp"
#include "eurlab/error.hpp"

using namespace eurlab;

namespace {

// The bracket as written, no log-domain rearrangement.
double modified_direct(double pz, double px, double c, double h) {
  return -2 * std::log2(std::sqrt(pz) + std::sqrt(px) + std::sqrt(1 - px) * std::sqrt(c) * std::pow(std::sqrt(2.0), h));
}

// Closed form of the smoothing extremes, valid before the turning points.
double smoothing_direct(double p, double e, double sign) {
  return 2 * e + p + 2 * p * e * e - 4 * p * e - e * e + sign * 2 * (1 - e) * std::sqrt(p * (1 - p) * (2 * e - e * e));
}

std::vector<std::vector<double>> random_table(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> p(r, std::vector<double>(c));
  double s = 0.0;
  for (auto& row : p)
    for (auto& v : row) s += v = u(rng) < 0.3 ? 0.0 : std::pow(u(rng), 3);
  if (s == 0) {
    p[0][0] = s = 1.0;
  }
  for (auto& row : p)
    for (auto& v : row) v /= s;
  return p;
}

}  // namespace

TEST_CASE("unmodified bound examples") {
  CHECK(eur_unmodified(1.0, 0.7) == doctest::Approx(-0.7));
  CHECK(eur_unmodified(0.5, 0.0) == doctest::Approx(1.0));
  CHECK(eur_unmodified(1e-3, 1.0) == doctest::Approx(8.966).epsilon(1e-4));
  CHECK(std::isinf(eur_unmodified(0.0, 1.0)));
  CHECK_THROWS_AS(eur_unmodified(1.5, 0.0), InvalidInput);
}

TEST_CASE("modified bound reduces to the unmodified one without nulls") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const double c = std::max(1e-300, std::pow(u(rng), 8));
    const double h = 40 * u(rng) - 10;
    const BoundResult r = eur_modified({0, 0, c, h});
    CHECK(std::abs(r.raw_bound - eur_unmodified(c, h)) <= 1e-12 * std::max(1.0, std::abs(r.raw_bound)));
  }
}

TEST_CASE("modified bound matches the direct bracket") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 2000; ++k) {
    const double pz = u(rng), px = u(rng), c = u(rng), h = 6 * u(rng);
    const double raw = eur_modified({pz, px, c, h}).raw_bound;
    CHECK(raw == doctest::Approx(modified_direct(pz, px, c, h)).epsilon(1e-12));
  }
}

TEST_CASE("modified bound at the operating points") {
  CHECK(std::abs(eur_modified({0.232, 0.232, 1e-3, 1}).raw_bound) < 0.02);
  CHECK(eur_modified({0.25, 0.25, 0, 1}).raw_bound == doctest::Approx(0.0));
  CHECK(eur_modified({1e-3, 0.9, 1e-3, 1}).raw_bound > 0);
  CHECK(eur_modified({1e-3, 0.94, 1e-3, 1}).raw_bound < 0);
}

TEST_CASE("clamping, dominant term and sentinels") {
  const BoundResult clamped = eur_modified({0.5, 0.5, 1e-3, 1});
  CHECK(clamped.clamped);
  CHECK(clamped.raw_bound < 0);
  CHECK(clamped.clamped_bound == 0.0);
  CHECK(clamped.dominant_term != DominantTerm::Overlap);

  const BoundResult open = eur_modified({1e-6, 0.0, 0.1, 0});
  CHECK_FALSE(open.clamped);
  CHECK(open.clamped_bound == open.raw_bound);
  CHECK(open.dominant_term == DominantTerm::Overlap);
  CHECK(eur_modified({0.2, 0.01, 1e-6, 0}).dominant_term == DominantTerm::ZNull);
  CHECK(eur_modified({0.01, 0.2, 1e-6, 0}).dominant_term == DominantTerm::XNull);

  const BoundResult inf = eur_modified({0, 0, 0, 1});
  CHECK(std::isinf(inf.raw_bound));
  CHECK(inf.diagnostic.has_value());
  // Large max-entropy terms stay finite in the log domain.
  CHECK(eur_modified({0, 0, 1e-3, 5000}).raw_bound == doctest::Approx(eur_unmodified(1e-3, 5000)));

  CHECK_THROWS_AS(eur_modified({-0.1, 0, 0.5, 0}), InvalidInput);
  CHECK_THROWS_AS(eur_modified({0, 0, 1.1, 0}), InvalidInput);
  CHECK_THROWS_AS(eur_modified({0, 0, 0.5, std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
}

TEST_CASE("bound is non-increasing in each argument") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const double pz = u(rng), px = u(rng), c = u(rng), h = 8 * u(rng) - 2;
    const double step = 0.1 * u(rng);
    const BoundResult base = eur_modified({pz, px, c, h});
    CHECK(eur_modified({std::min(1.0, pz + step), px, c, h}).raw_bound <= base.raw_bound);
    CHECK(eur_modified({pz, px, std::min(1.0, c + step), h}).raw_bound <= base.raw_bound);
    CHECK(eur_modified({pz, px, c, h + step}).raw_bound <= base.raw_bound);
    // In p_x_null only the clamped bound is monotone: past 1/(1 + c 2^h) the
    // raw bracket turns down again, but it stays above 1 there.
    CHECK(eur_modified({pz, std::min(1.0, px + step), c, h}).clamped_bound <= base.clamped_bound);
  }
  const double k2 = 1e-3 * 2.0;  // c 2^h
  const double turn = 1 / (1 + k2);
  CHECK(eur_modified({0, 0.999, 1e-3, 1}).raw_bound > eur_modified({0, turn, 1e-3, 1}).raw_bound);
  CHECK(eur_modified({0, 0.999, 1e-3, 1}).raw_bound < 0);
}

TEST_CASE("smoothing extremes") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const double p = u(rng);
    const double e = 0.5 * u(rng);
    const double lo = smoothing_f(p, e, SmoothingSign::Minus);
    const double hi = smoothing_f(p, e, SmoothingSign::Plus);
    CHECK(lo <= p);
    CHECK(p <= hi);
    CHECK(smoothing_f(p, 0.0, SmoothingSign::Plus) == p);
    CHECK(smoothing_f(p, 0.0, SmoothingSign::Minus) == p);
    const double ball = 2 * e - e * e;
    if (p < 1 - ball) CHECK(hi == doctest::Approx(smoothing_direct(p, e, 1)).epsilon(1e-12));
    if (p > ball) CHECK(lo == doctest::Approx(smoothing_direct(p, e, -1)).epsilon(1e-12));
  }
  for (double e : {0.01, 0.1, 0.4}) CHECK(smoothing_f(0.0, e, SmoothingSign::Plus) == doctest::Approx(2 * e - e * e));
  CHECK(smoothing_f(0.0, 0.01, SmoothingSign::Plus) == doctest::Approx(0.0199));
  CHECK_THROWS_AS(smoothing_f(0.5, 1.0, SmoothingSign::Plus), InvalidInput);
  CHECK_THROWS_AS(smoothing_f(1.5, 0.1, SmoothingSign::Plus), InvalidInput);
}

TEST_CASE("smoothed bound") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 2000; ++k) {
    const BoundInput in{u(rng), u(rng), u(rng), 4 * u(rng)};
    CHECK(std::abs(eur_modified_smooth(in, {0.0}).raw_bound - eur_modified(in).raw_bound) <= 1e-12);
  }
  const BoundInput clean{0, 0, 1e-3, 1};
  CHECK(eur_modified_smooth(clean, {0.01}).raw_bound < eur_modified(clean).raw_bound);
  const BoundResult heavy = eur_modified_smooth({0.2, 0.2, 1e-3, 1}, {0.3});
  CHECK(heavy.clamped);
  CHECK(heavy.clamped_bound == 0.0);
  const BoundResult full = eur_modified_smooth({0.9, 0.9, 1e-3, 1}, {0.2});
  CHECK(full.diagnostic.has_value());
  CHECK_THROWS_AS(eur_modified_smooth(clean, {1.0}), InvalidInput);
}

TEST_CASE("conditional entropies on small tables") {
  const JointDistribution j = JointDistribution::from_dense({{0.4, 0.1}, {0.1, 0.4}});
  CHECK(cond_shannon(j) == doctest::Approx(0.7219).epsilon(1e-4));
  CHECK(cond_max_entropy_classical(j) == doctest::Approx(std::log2(std::pow(std::sqrt(0.8) + std::sqrt(0.2), 2))));
  CHECK(cond_max_entropy_classical(j) == doctest::Approx(0.848).epsilon(1e-3));

  for (std::size_t n : {2u, 5u, 16u}) {
    std::vector<std::vector<double>> diag(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> flat(n, std::vector<double>(n, 1.0 / (n * n)));
    for (std::size_t i = 0; i < n; ++i) diag[i][i] = 1.0 / n;
    CHECK(cond_shannon(JointDistribution::from_dense(diag)) == doctest::Approx(0.0));
    CHECK(cond_max_entropy_classical(JointDistribution::from_dense(diag)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cond_shannon(JointDistribution::from_dense(flat)) == doctest::Approx(std::log2(n)));
    CHECK(cond_max_entropy_classical(JointDistribution::from_dense(flat)) == doctest::Approx(std::log2(n)));
  }
}

TEST_CASE("conditional entropies match dense oracles and are ordered") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t r = 1 + t % 6, c = 1 + (t / 6) % 6;
    const auto p = random_table(rng, r, c);
    const JointDistribution j = JointDistribution::from_dense(p);
    const double hs = cond_shannon(j);
    const double hm = cond_max_entropy_classical(j);
    CHECK(hs == doctest::Approx(oracle::shannon_conditional(p)).epsilon(1e-10));
    CHECK(hm == doctest::Approx(oracle::renyi_half_conditional(p)).epsilon(1e-10));
    CHECK(hm >= hs - 1e-12);
  }
}

TEST_CASE("entropies of distributions with a background term") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 4;
    auto p = random_table(rng, n + 1, n + 1);
    std::vector<double> centers(n + 1);
    JointDistribution j(centers, n, centers, n);
    for (std::size_t a = 0; a <= n; ++a) {
      std::vector<JointDistribution::Entry> row;
      for (std::size_t b = 0; b <= n; ++b)
        if (p[a][b] > 0) row.push_back({b, p[a][b]});
      j.append_row(a, row);
    }
    j.finish();
    double informative = 0.0;
    for (std::size_t a = 0; a < n; ++a) informative += j.row_marginal()[a];
    if (informative == 0) continue;
    const JointDistribution l = j.with_loss(u(rng), true, j.public_row_distribution());
    const auto dense = l.dense();
    CHECK(cond_shannon(l) == doctest::Approx(oracle::shannon_conditional(dense)).epsilon(1e-10));
    CHECK(cond_max_entropy_classical(l) == doctest::Approx(oracle::renyi_half_conditional(dense)).epsilon(1e-10));
    CHECK(cond_max_entropy_classical(l) >= cond_shannon(l) - 1e-12);
  }
}

TEST_CASE("key rate") {
  BoundResult b;
  b.raw_bound = b.clamped_bound = 2.0;
  CHECK(key_rate(b, 0.5) == 1.5);
  CHECK(key_rate(b, 3.0) == 0.0);
  const BoundResult zero = eur_modified({0.5, 0.5, 1e-3, 1});
  CHECK(key_rate(zero, 0.0) == 0.0);
  CHECK_THROWS_AS(key_rate(b, -0.1), InvalidInput);
}
