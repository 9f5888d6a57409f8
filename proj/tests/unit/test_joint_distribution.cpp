#include <doctest.h>

#include <random>
#include <sstream>

#include "eurlab/error.hpp"
#include "eurlab/joint_distribution.hpp"

using namespace eurlab;

namespace {

// 2 + null rows, 2 + null columns, null last on each side.
JointDistribution small_with_nulls() {
  JointDistribution j({-1.0, 1.0, 0.0}, 2, {-1.0, 1.0, 0.0}, 2);
  j.append_row(0, {{0, 0.3}, {1, 0.05}, {2, 0.05}});
  j.append_row(1, {{0, 0.05}, {1, 0.35}});
  j.append_row(2, {{2, 0.2}});
  j.finish();
  return j;
}

}  // namespace

TEST_CASE("dense round trip and marginals") {
  const std::vector<std::vector<double>> p = {{0.1, 0.2, 0.0}, {0.3, 0.0, 0.4}};
  const JointDistribution j = JointDistribution::from_dense(p);
  CHECK(j.dense() == p);
  CHECK(j.is_normalized());
  CHECK(j.row_marginal()[0] == doctest::Approx(0.3));
  CHECK(j.col_marginal()[2] == doctest::Approx(0.4));
  CHECK(j.at(1, 1) == 0.0);
  CHECK_THROWS_AS(JointDistribution::from_dense({{0.5, -0.1}, {0.3, 0.3}}), InvalidInput);
  CHECK_THROWS_AS(JointDistribution::from_dense({{0.5, 0.1}, {0.4}}), DimensionMismatch);
}

TEST_CASE("row construction rules") {
  JointDistribution j({0.0, 1.0}, std::nullopt, {0.0, 1.0}, std::nullopt);
  CHECK_THROWS_AS(j.append_row(0, {{1, 0.1}, {0, 0.1}}), InvalidInput);
  j.append_row(1, {{0, 1.0}});
  CHECK_THROWS_AS(j.append_row(0, {}), InvalidInput);
  j.finish();
  CHECK(j.at(0, 0) == 0.0);
  CHECK(j.is_normalized());
}

TEST_CASE("loss moves mass to Bob's null column") {
  const JointDistribution j = small_with_nulls();
  REQUIRE(j.is_normalized());
  const double eta = 0.6;
  const JointDistribution l = j.with_loss(eta, false, {});
  CHECK(l.is_normalized(1e-14));
  const auto before = j.row_marginal();
  const auto after = l.row_marginal();
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(after[a] == doctest::Approx(before[a]));
    for (std::size_t b = 0; b < 2; ++b) CHECK(l.at(a, b) == doctest::Approx(eta * j.at(a, b)));
    CHECK(l.at(a, 2) == doctest::Approx(j.at(a, 2) + (1 - eta) * (before[a] - j.at(a, 2))));
  }
  CHECK_THROWS_AS(j.with_loss(1.5, false, {}), InvalidInput);
  CHECK_THROWS_AS(JointDistribution::from_dense({{1.0}}).with_loss(0.5, false, {}), InvalidInput);
}

TEST_CASE("null replacement redistributes Bob's nulls by the public distribution") {
  const JointDistribution j = small_with_nulls();
  const std::vector<double> pub = j.public_row_distribution();
  REQUIRE(pub.size() == 3);
  CHECK(pub[0] == doctest::Approx(0.4 / 0.8));
  CHECK(pub[1] == doctest::Approx(0.4 / 0.8));
  CHECK(pub[2] == 0.0);

  const JointDistribution r = j.with_loss(0.7, true, pub);
  CHECK(r.is_normalized(1e-14));
  CHECK(r.col_marginal()[2] == 0.0);
  const auto before = j.row_marginal();
  const auto after = r.row_marginal();
  for (std::size_t a = 0; a < 3; ++a) CHECK(after[a] == doctest::Approx(before[a]));

  // Applying loss twice composes the transmissions.
  const JointDistribution twice = j.with_loss(0.7, true, pub).with_loss(0.5, true, pub);
  const JointDistribution once = j.with_loss(0.35, true, pub);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) CHECK(twice.at(a, b) == doctest::Approx(once.at(a, b)).epsilon(1e-12));
  CHECK_THROWS_AS(j.with_loss(0.5, true, {1.0}), DimensionMismatch);
}

TEST_CASE("random sparse distributions stay normalized under loss and replacement") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + t % 5;
    std::vector<double> centers(n + 1);
    JointDistribution j(centers, n, centers, n);
    std::vector<std::vector<double>> raw(n + 1, std::vector<double>(n + 1));
    double s = 0.0;
    for (auto& row : raw)
      for (auto& v : row) s += v = u(rng) < 0.5 ? u(rng) : 0.0;
    for (std::size_t a = 0; a <= n; ++a) {
      std::vector<JointDistribution::Entry> row;
      for (std::size_t b = 0; b <= n; ++b)
        if (raw[a][b] > 0) row.push_back({b, raw[a][b] / s});
      j.append_row(a, row);
    }
    j.finish();
    const double eta = u(rng);
    CHECK(j.with_loss(eta, false, {}).is_normalized(1e-12));
    double informative = 0.0;
    for (std::size_t a = 0; a < n; ++a) informative += j.row_marginal()[a];
    if (informative > 0) CHECK(j.with_loss(eta, true, j.public_row_distribution()).is_normalized(1e-12));
  }
}

TEST_CASE("dropping Alice's null row renormalizes") {
  const JointDistribution j = small_with_nulls().without_null_row();
  CHECK(j.rows() == 2);
  CHECK_FALSE(j.null_row().has_value());
  CHECK(j.is_normalized(1e-14));
  CHECK(j.at(0, 0) == doctest::Approx(0.3 / 0.8));
}

TEST_CASE("labels and CSV export") {
  const JointDistribution j = small_with_nulls();
  CHECK(j.row_label(2) == "null");
  CHECK(j.col_label(0) == "-1");
  std::ostringstream out;
  j.write_csv(out);
  const std::string csv = out.str();
  CHECK(csv.rfind("row,col,probability\n", 0) == 0);
  CHECK(csv.find("null,null,0.2") != std::string::npos);
  CHECK(csv.find("1,-1,0.05") != std::string::npos);
}
