#include <algorithm>
#include <cmath>

#include "eurlab/error.hpp"
#include "eurlab/parallel.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab {

namespace {

struct TrialOutcome {
  bool povm_ok = true;
  bool probabilities_ok = true;
  double max_error = 0.0;
  bool rank_deficient = false;
};

struct Filter {
  Matrix m;
  Matrix root;  // built from the same eigenbasis, exact zeros off the support
};

// Filter M = U diag(m) U^dag with m in [0.05, 1]; some trials zero out part
// of the spectrum, others use M = I.
Filter random_filter(Eigen::Index d, Rng& rng, bool& rank_deficient) {
  std::uniform_int_distribution<int> kind(0, 3);
  const int k = kind(rng);
  if (k == 0) return {Matrix::Identity(d, d), Matrix::Identity(d, d)};
  std::uniform_real_distribution<double> eig(0.05, 1.0);
  RealVector m(d);
  for (Eigen::Index i = 0; i < d; ++i) m(i) = eig(rng);
  if (k == 1) {
    std::uniform_int_distribution<Eigen::Index> zeros(1, d - 1);
    const Eigen::Index z = zeros(rng);
    for (Eigen::Index i = 0; i < z; ++i) m(i) = 0.0;
    rank_deficient = true;
  }
  const Matrix u = random_unitary(d, rng);
  return {hermitian_part(u * m.cast<Complex>().asDiagonal() * u.adjoint()),
          hermitian_part(u * m.cwiseSqrt().cast<Complex>().asDiagonal() * u.adjoint())};
}

MatrixPovm with_shared_null(const MatrixPovm& ideal, const Matrix& root_m, const Matrix& m) {
  MatrixPovm out;
  for (const auto& e : ideal.elements) out.elements.push_back(hermitian_part(root_m * e * root_m));
  out.elements.push_back(hermitian_part(Matrix::Identity(m.rows(), m.cols()) - m));
  out.null_index = out.elements.size() - 1;
  return out;
}

void check_measurement(const MatrixPovm& povm, const Matrix& rho, const Matrix& m, TrialOutcome& out) {
  const EffectivePovm eff = effective_povm(povm);
  if (!validate_effective_povm(eff).pass) out.povm_ok = false;
  const DensityOp filtered = filtered_state(DensityOp(rho), povm);
  const Matrix reduced = compress(filtered.matrix(), eff.support_basis);
  const double accepted = expectation(rho, m);
  for (std::size_t k = 0; k + 1 < povm.size(); ++k) {
    const double direct = expectation(rho, povm.elements[k]) / accepted;
    const double err = std::abs(expectation(reduced, eff.povm.elements[k]) - direct);
    out.max_error = std::max(out.max_error, err);
    if (err > 1e-10) out.probabilities_ok = false;
  }
}

}  // namespace

EquivalenceReport shared_null_equivalence_check(std::size_t n_trials, int max_dim, std::uint64_t seed,
                                              unsigned threads) {
  if (max_dim < 2 || max_dim > 6) throw InvalidInput("equivalence check dimensions must lie in [2, 6]");
  if (n_trials == 0) throw InvalidInput("equivalence check needs at least one trial");

  std::vector<TrialOutcome> results(n_trials);
  parallel_for(n_trials, threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::uniform_int_distribution<int> dim(2, max_dim);
    const Eigen::Index d = dim(rng);
    TrialOutcome& out = results[t];
    const Filter filter = random_filter(d, rng, out.rank_deficient);
    const Matrix& m = filter.m;
    const Matrix& root_m = filter.root;
    std::uniform_int_distribution<std::size_t> outcomes(2, static_cast<std::size_t>(d) + 1);
    const MatrixPovm x = with_shared_null(random_povm(d, outcomes(rng), rng), root_m, m);
    const MatrixPovm z = with_shared_null(random_projective_povm(d, static_cast<std::size_t>(d), rng), root_m, m);

    // Full-rank state so that Tr(rho M) stays away from zero.
    const Matrix rho = random_density(d, rng);
    check_measurement(x, rho, m, out);
    check_measurement(z, rho, m, out);
  });

  EquivalenceReport rep;
  rep.trials = n_trials;
  rep.max_dim = max_dim;
  rep.seed = seed;
  for (const auto& r : results) {
    if (!r.povm_ok) ++rep.povm_failures;
    if (!r.probabilities_ok) ++rep.probability_failures;
    if (r.rank_deficient) ++rep.rank_deficient_trials;
    rep.max_probability_error = std::max(rep.max_probability_error, r.max_error);
  }
  return rep;
}

}  // namespace eurlab
