#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles/oracles.hpp"
#include "eurlab/error.hpp"
#include "eurlab/scenarios.hpp"
#include "support.hpp"

using namespace eurlab;
using testing::computational;
using testing::hadamard_basis;
using testing::to_oracle;

namespace {

ScenarioConfig short_scan() {
  ScenarioConfig cfg;
  cfg.distances_km = {0.0, 0.5, 1.0, 2.0, 3.0, 5.0};
  cfg.threads = 1;
  return cfg;
}

Matrix diagonal(const std::vector<double>& d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return m;
}

}  // namespace

TEST_CASE("threshold contour headline numbers") {
  const ContourResult r = threshold_contour(1e-3, 1, 21);
  CHECK(std::abs(r.equal_null_crossing - 0.232) <= 0.005);
  CHECK(std::abs(r.frontier_p_x - 0.92) <= 0.02);
  CHECK(r.grid.size() == 21u * 21u);
  CHECK(std::abs(equal_null_crossing(0.0, 1) - 0.25) <= 1e-6);
  CHECK(std::abs(equal_null_crossing(1e-14, 1) - 0.25) <= 1e-4);
  CHECK_THROWS_AS(threshold_contour(1e-3, 1, 1), InvalidInput);
}

TEST_CASE("threshold contour is non-increasing along both axes") {
  const int n = 41;
  const ContourResult r = threshold_contour(1e-3, 1, n);
  auto at = [&](int i, int j) { return r.grid[static_cast<std::size_t>(i * n + j)]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(at(i, j).bound >= 0.0);
      CHECK(at(i, j).p_z_null == doctest::Approx(i / double(n - 1)));
      CHECK(at(i, j).p_x_null == doctest::Approx(j / double(n - 1)));
      if (i + 1 < n) CHECK(at(i + 1, j).bound <= at(i, j).bound);
      if (j + 1 < n) CHECK(at(i, j + 1).bound <= at(i, j).bound);
    }
  }
}

TEST_CASE("time-frequency scan") {
  const KeyRateResult r = tf_keyrate_scan(short_scan());
  REQUIRE(r.rows.size() == 6);
  CHECK(r.rows.front().key_rate > 0);
  REQUIRE(r.zero_rate_onset_km.has_value());
  CHECK(*r.zero_rate_onset_km >= 0.5);
  CHECK(*r.zero_rate_onset_km <= 5.0);
  CHECK(std::abs(r.p_t_null_alice - 0.0027) <= 0.0002);
  CHECK(r.p_f_null_alice == 0.0);
  CHECK(r.c_less == doctest::Approx(1e-3).epsilon(1e-6));
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    CHECK(r.rows[k].key_rate <= r.rows[k - 1].key_rate);
    CHECK(r.rows[k].p_t_null_bob >= r.rows[k - 1].p_t_null_bob);
  }
}

TEST_CASE("without loss the scan does not depend on distance") {
  ScenarioConfig cfg = short_scan();
  cfg.channel.loss_db_per_km = 0.0;
  const KeyRateResult r = tf_keyrate_scan(cfg);
  for (const auto& row : r.rows) {
    CHECK(row.transmission == 1.0);
    CHECK(row.key_rate == r.rows.front().key_rate);
  }
}

TEST_CASE("scan configuration errors") {
  ScenarioConfig cfg = short_scan();
  cfg.distances_km = {1.0, 0.5};
  CHECK_THROWS_AS(tf_keyrate_scan(cfg), InvalidInput);
  cfg.distances_km = {};
  CHECK_THROWS_AS(tf_keyrate_scan(cfg), InvalidInput);
  cfg = short_scan();
  cfg.source = TmsvSpec{};
  CHECK_THROWS_AS(tf_keyrate_scan(cfg), InvalidInput);
}

TEST_CASE("saturation report") {
  const TmsvSpec spec;
  const CvSaturationReport r = cv_saturation_report(spec, -61.6, 61.6, 0.1, 1.0);
  CHECK(r.p_sat_x_raw < 1e-10);
  CHECK(r.p_sat_x == 0.0);
  CHECK(std::abs(r.bound.raw_bound - r.unmodified_bound) <= 1e-12);
  CHECK_FALSE(r.abort);
  CHECK(r.bins_per_quadrature == 1232);

  const double shift = mean_shift_for_saturation(spec, -61.6, 61.6, 0.3);
  CHECK(tmsv_saturation_prob(spec, -61.6, 61.6, shift) == doctest::Approx(0.3).epsilon(1e-9));
  const CvSaturationReport attacked = cv_saturation_report(spec, -61.6, 61.6, 0.1, 1.0, shift);
  CHECK(attacked.abort);
  CHECK(attacked.bound.clamped);

  const double inf = std::numeric_limits<double>::infinity();
  for (double h : {0.0, 1.0, 3.0}) CHECK_FALSE(cv_saturation_report(spec, -inf, inf, 0.1, h).abort);
}

TEST_CASE("narrow-bin attack") {
  ScenarioConfig cfg;
  cfg.seed = 5;
  cfg.threads = 1;
  const AttackReport a = narrow_bin_attack_sim(cfg, 1e5, 20000);
  CHECK(a.attack_active);
  CHECK(a.naive.value > 0);
  CHECK(a.modified.value == 0.0);
  CHECK(a.modified_clamped);
  CHECK(a.observed_p_t_null > 0.99);
  CHECK(a.loophole_exhibited);
  CHECK(a.modified.value <= a.naive.value);
  CHECK_FALSE(a.model_note.empty());
  CHECK_THROWS_AS(narrow_bin_attack_sim(cfg, 1e5, 50), InvalidInput);
}

TEST_CASE("without the attack both estimators agree") {
  ScenarioConfig cfg;
  cfg.seed = 6;
  cfg.threads = 1;
  cfg.rep_rate_hz = 1.0 / (2 * 10 * 3e-9);
  const AttackReport b = narrow_bin_attack_sim(cfg, 1e30, 20000);
  CHECK_FALSE(b.attack_active);
  CHECK(b.transmission == 1.0);
  CHECK(std::abs(b.naive.value - b.modified.value) <= 3 * b.difference.standard_error + 1e-12);
  CHECK_FALSE(b.loophole_exhibited);
}

TEST_CASE("attack simulation does not depend on the thread count") {
  ScenarioConfig cfg;
  cfg.seed = 9;
  cfg.threads = 1;
  const AttackReport one = narrow_bin_attack_sim(cfg, 1e5, 5000);
  cfg.threads = 3;
  const AttackReport three = narrow_bin_attack_sim(cfg, 1e5, 5000);
  CHECK(one.naive.value == three.naive.value);
  CHECK(one.naive.standard_error == three.naive.standard_error);
  CHECK(one.observed_p_t_null == three.observed_p_t_null);
  CHECK(one.eve_guess_probability == three.eve_guess_probability);
}

TEST_CASE("guessing probability for two states is the Helstrom value") {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const Matrix r0 = random_density(d, rng) * 0.3;
    const Matrix r1 = random_density(d, rng) * 0.7;
    const GuessResult g = guessing_probability({r0, r1}, rng);
    CHECK(g.exact);
    CHECK(g.p_guess == doctest::Approx(oracle::helstrom(to_oracle(r0), to_oracle(r1))).epsilon(1e-10));
  }
}

TEST_CASE("guessing probability for commuting states") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 3 + t % 3, d = 2 + t % 3;
    std::vector<std::vector<double>> p(n, std::vector<double>(d));
    double s = 0.0;
    for (auto& row : p)
      for (auto& v : row) s += v = u(rng);
    std::vector<Matrix> states;
    for (auto& row : p) {
      for (auto& v : row) v /= s;
      states.push_back(diagonal(row));
    }
    double best = 0.0;
    for (std::size_t e = 0; e < d; ++e) {
      double m = 0.0;
      for (const auto& row : p) m = std::max(m, row[e]);
      best += m;
    }
    const GuessResult g = guessing_probability(states, rng);
    CHECK(g.p_guess <= best + 1e-12);
    CHECK(g.p_guess == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("max-entropy of commuting blocks is the order-1/2 classical value") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.01, 1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t nx = 2 + t % 3, nb = 1 + t % 4;
    std::vector<std::vector<double>> p(nx, std::vector<double>(nb));
    double s = 0.0;
    for (auto& row : p)
      for (auto& v : row) s += v = u(rng);
    std::vector<Matrix> blocks;
    for (auto& row : p) {
      for (auto& v : row) v /= s;
      blocks.push_back(diagonal(row));
    }
    CHECK(conditional_max_entropy(blocks, rng) == doctest::Approx(oracle::renyi_half_conditional(p)).epsilon(1e-8));
  }
}

TEST_CASE("max-entropy with a trivial B system") {
  Rng rng(4);
  const std::vector<double> px = {0.5, 0.3, 0.2};
  std::vector<Matrix> blocks;
  double root = 0.0;
  for (double v : px) {
    blocks.push_back(Matrix::Constant(1, 1, v));
    root += std::sqrt(v);
  }
  CHECK(conditional_max_entropy(blocks, rng) == doctest::Approx(2 * std::log2(root)).epsilon(1e-12));
}

TEST_CASE("tripartite state marginals") {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(0) = psi(7) = 1 / std::sqrt(2.0);  // GHZ
  const TripartiteTestState st(2, 2, 2, psi);
  CHECK(st.rho_a().isApprox(Matrix::Identity(2, 2) / 2.0));
  CHECK(st.rho_ab().trace().real() == doctest::Approx(1.0));
  const Matrix p0 = computational(2).elements[0];
  CHECK(st.eve_conditional(p0).isApprox(diagonal({0.5, 0.0})));
  CHECK(st.bob_conditional(p0).isApprox(diagonal({0.5, 0.0})));
  CHECK_THROWS_AS(TripartiteTestState(2, 2, 2, psi * 2.0), InvalidInput);
  CHECK_THROWS_AS(TripartiteTestState(5, 1, 1, Eigen::VectorXcd::Constant(5, 1 / std::sqrt(5.0))), InvalidInput);
}

TEST_CASE("product with E: Eve guesses no better than the prior") {
  // A entangled with B only, E in a fixed state.
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(0) = std::sqrt(0.7);  // |0>_A |0>_B |0>_E
  psi(6) = std::sqrt(0.3);  // |1>_A |1>_B |0>_E
  const TripartiteTestState st(2, 2, 2, psi);
  Rng rng(5);
  std::vector<Matrix> eve;
  for (const auto& e : computational(2).elements) eve.push_back(st.eve_conditional(e));
  CHECK(guessing_probability(eve, rng).p_guess == doctest::Approx(0.7));
  const InstanceEvaluation ev = evaluate_instance(st, hadamard_basis(), computational(2), rng);
  CHECK_FALSE(ev.violation);
  CHECK(ev.rhs <= -std::log2(0.7) + 1e-9);
}

TEST_CASE("A maximally entangled with E: Eve guesses perfectly") {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(0) = psi(3) = 1 / std::sqrt(2.0);  // d_B = 1
  const TripartiteTestState st(2, 1, 2, psi);
  Rng rng(6);
  std::vector<Matrix> eve;
  for (const auto& e : computational(2).elements) eve.push_back(st.eve_conditional(e));
  const GuessResult g = guessing_probability(eve, rng);
  CHECK(g.exact);
  CHECK(g.p_guess == doctest::Approx(1.0));
  const InstanceEvaluation ev = evaluate_instance(st, computational(2), computational(2), rng);
  CHECK(ev.c_less == doctest::Approx(1.0));
  CHECK(ev.rhs <= 1e-12);
  CHECK_FALSE(ev.violation);
}

TEST_CASE("falsifier finds no violations and is thread independent") {
  FalsifierConfig cfg;
  cfg.n_states = 120;
  cfg.seed = 11;
  cfg.threads = 1;
  const FalsifierReport one = bound_falsifier(cfg);
  CHECK(one.instances == 120);
  CHECK(one.violations == 0);
  CHECK(one.lemma_violations == 0);
  CHECK(one.searched > 0);
  CHECK(one.max_excess <= 1e-9);
  cfg.threads = 3;
  const FalsifierReport three = bound_falsifier(cfg);
  CHECK(three.searched == one.searched);
  CHECK(three.max_excess == one.max_excess);
  CHECK(three.lemma_max_excess == one.lemma_max_excess);
  cfg.max_dim = 5;
  CHECK_THROWS_AS(bound_falsifier(cfg), InvalidInput);
}

TEST_CASE("shared-null equivalence holds on random instances") {
  const EquivalenceReport one = shared_null_equivalence_check(200, 6, 3, 1);
  CHECK(one.povm_failures == 0);
  CHECK(one.probability_failures == 0);
  CHECK(one.max_probability_error < 1e-10);
  CHECK(one.rank_deficient_trials > 0);
  const EquivalenceReport two = shared_null_equivalence_check(200, 6, 3, 2);
  CHECK(two.max_probability_error == one.max_probability_error);
}
