#include <algorithm>
#include <cmath>
#include <limits>

#include "eurlab/error.hpp"
#include "eurlab/parallel.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// (Hermitian part of) A^{-1/2} on its support.
Matrix inverse_sqrt_on_support(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(a));
  const RealVector& w = eig.eigenvalues();
  const double cutoff = 1e-14 * std::max(1.0, w.cwiseAbs().maxCoeff());
  RealVector inv(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) inv(i) = w(i) > cutoff ? 1 / std::sqrt(w(i)) : 0.0;
  return eig.eigenvectors() * inv.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

double success(const std::vector<Matrix>& states, const std::vector<Matrix>& m) {
  double s = 0.0;
  for (std::size_t z = 0; z < states.size(); ++z) s += expectation(states[z], m[z]);
  return s;
}

// Fixed-point iteration for minimum-error discrimination; every iterate is
// a sub-normalized measurement, so every value is achievable.
double iterate_measurement(const std::vector<Matrix>& states, std::vector<Matrix> m, int iterations) {
  double best = success(states, m);
  for (int it = 0; it < iterations; ++it) {
    Matrix lambda = Matrix::Zero(states[0].rows(), states[0].cols());
    for (std::size_t z = 0; z < states.size(); ++z) lambda += states[z] * m[z] * states[z];
    const Matrix s = inverse_sqrt_on_support(lambda);
    for (std::size_t z = 0; z < states.size(); ++z) m[z] = hermitian_part(s * states[z] * m[z] * states[z] * s);
    const double v = success(states, m);
    const bool stalled = v - best < 1e-14;
    best = std::max(best, v);
    if (stalled && it > 5) break;
  }
  return best;
}

// Projective measurement in the given orthonormal basis, each vector
// assigned to the state it favors most.
double assign_in_basis(const std::vector<Matrix>& states, const Matrix& basis) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    double best = 0.0;
    for (const auto& st : states) best = std::max(best, (basis.col(k).adjoint() * st * basis.col(k))(0, 0).real());
    s += best;
  }
  return s;
}

Matrix random_projector(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  const Matrix u = random_unitary(dim, rng);
  return u.leftCols(rank) * u.leftCols(rank).adjoint();
}

// Adds a null element s * R (R a random PSD operator of unit norm) and
// shrinks the informative elements to keep completeness.
MatrixPovm inject_null(MatrixPovm p, double strength, Rng& rng) {
  const Eigen::Index d = static_cast<Eigen::Index>(p.dim());
  Matrix r = random_density(d, rng);
  r /= operator_norm(r);
  const Matrix null = strength * r;
  const Matrix keep = psd_sqrt(Matrix::Identity(d, d) - null);
  for (auto& e : p.elements) e = hermitian_part(keep * e * keep);
  p.elements.push_back(null);
  p.null_index = p.elements.size() - 1;
  return p;
}

Eigen::VectorXcd embedded_maximally_entangled(int d1, int d2, Rng& rng) {
  // sum_i |i>|i> on the first two factors (dims d1, d2), randomly rotated on the first.
  const int m = std::min(d1, d2);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d1 * d2);
  const Matrix u = random_unitary(d1, rng);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < d1; ++a) v(a * d2 + i) += u(a, i) / std::sqrt(static_cast<double>(m));
  }
  return v;
}

struct MeasurementPair {
  MatrixPovm x;
  MatrixPovm z;
};

TripartiteTestState random_state(int da, int db, int de, int f, Rng& rng) {
  std::uniform_real_distribution<double> mix(0.0, f == 3 ? 0.02 : 0.3);
  const Eigen::Index n = da * db * de;
  Eigen::VectorXcd psi = random_pure_state(n, rng);
  if (f == 1 || f == 3) {
    // A maximally entangled with B, E nearly decoupled.
    const Eigen::VectorXcd ab = embedded_maximally_entangled(da, db, rng);
    Eigen::VectorXcd core = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < da * db; ++i) core(i * de) = ab(i);
    const double q = mix(rng);
    psi = std::sqrt(1 - q) * core + std::sqrt(q) * psi;
  } else if (f == 2) {
    // A maximally entangled with E, B nearly decoupled.
    const Eigen::VectorXcd ae = embedded_maximally_entangled(da, de, rng);
    Eigen::VectorXcd core = Eigen::VectorXcd::Zero(n);
    for (int a = 0; a < da; ++a) {
      for (int e = 0; e < de; ++e) core(a * db * de + e) = ae(a * de + e);
    }
    const double q = mix(rng);
    psi = std::sqrt(1 - q) * core + std::sqrt(q) * psi;
  }
  psi /= psi.norm();
  return TripartiteTestState(da, db, de, psi);
}

// Family 3 is close to tight: A and B nearly maximally entangled with
// equal dimensions, measured in mutually unbiased bases.
TripartiteTestState random_tripartite(int max_dim, int family, Rng& rng) {
  std::uniform_int_distribution<int> dim(2, max_dim);
  const int da = dim(rng);
  const int db = family == 3 ? da : dim(rng);
  const int de = dim(rng);
  return random_state(da, db, de, family, rng);
}

MatrixPovm fourier_basis(int d) {
  MatrixPovm out;
  const double pi = std::acos(-1.0);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXcd v(d);
    for (int j = 0; j < d; ++j) v(j) = std::polar(1 / std::sqrt(static_cast<double>(d)), 2 * pi * j * k / d);
    out.elements.push_back(v * v.adjoint());
  }
  return out;
}

MeasurementPair random_measurements(int da, int family, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> strength(0.0, family == 3 ? 0.1 : 0.3);
  const int k = family == 3 ? 3 : kind(rng);
  std::uniform_int_distribution<int> outcomes(1, std::min(3, da));
  MatrixPovm z;
  MatrixPovm x;
  if (k == 0) {
    // General POVMs, small nulls.
    z = inject_null(random_povm(da, static_cast<std::size_t>(outcomes(rng)) + 1, rng), strength(rng), rng);
    x = inject_null(random_povm(da, static_cast<std::size_t>(outcomes(rng)) + 1, rng), strength(rng), rng);
  } else if (k == 1) {
    // Projective with a projective null block.
    std::uniform_int_distribution<int> blocks(2, da);
    z = random_projective_povm(da, static_cast<std::size_t>(blocks(rng)), rng);
    z.null_index = z.size() - 1;
    x = random_projective_povm(da, static_cast<std::size_t>(blocks(rng)), rng);
    x.null_index = x.size() - 1;
  } else if (k == 3) {
    // Computational and Fourier bases, with independent small nulls.
    MatrixPovm basis;
    for (int j = 0; j < da; ++j) {
      Matrix e = Matrix::Zero(da, da);
      e(j, j) = 1.0;
      basis.elements.push_back(e);
    }
    z = inject_null(basis, strength(rng), rng);
    x = inject_null(fourier_basis(da), strength(rng), rng);
  } else {
    // A basis and a rotated copy, with independent small nulls.
    MatrixPovm basis = random_projective_povm(da, static_cast<std::size_t>(da), rng);
    const Matrix u = random_unitary(da, rng);
    MatrixPovm rotated;
    for (const auto& e : basis.elements) rotated.elements.push_back(hermitian_part(u * e * u.adjoint()));
    z = inject_null(basis, strength(rng), rng);
    x = inject_null(rotated, strength(rng), rng);
  }
  return {std::move(x), std::move(z)};
}

}  // namespace

TripartiteTestState::TripartiteTestState(int d_a, int d_b, int d_e, Eigen::VectorXcd amplitudes)
    : d_a_(d_a), d_b_(d_b), d_e_(d_e), psi_(std::move(amplitudes)) {
  for (int d : {d_a, d_b, d_e}) {
    if (d < 1 || d > 4) throw InvalidInput("tripartite dimensions must lie in [1, 4]");
  }
  if (psi_.size() != d_a * d_b * d_e) throw DimensionMismatch("amplitude vector does not match the dimensions");
  if (std::abs(psi_.norm() - 1) > 1e-12) throw InvalidInput("tripartite state must have unit norm");
}

Matrix TripartiteTestState::rho_a() const {
  const Eigen::Map<const Matrix> psi(psi_.data(), d_b_ * d_e_, d_a_);  // column a holds (b, e)
  return hermitian_part((psi.adjoint() * psi).transpose());
}

Matrix TripartiteTestState::rho_ab() const {
  const Eigen::Map<const Matrix> psi(psi_.data(), d_e_, d_a_ * d_b_);  // column (a, b) holds e
  return hermitian_part((psi.adjoint() * psi).transpose());
}

Matrix TripartiteTestState::eve_conditional(const Matrix& p_a) const {
  // rho_E(e, e') = sum_{a, a', b} P(a', a) psi(a, b, e) conj(psi(a', b, e'))
  if (p_a.rows() != d_a_) throw DimensionMismatch("operator does not act on A");
  Matrix out = Matrix::Zero(d_e_, d_e_);
  for (int b = 0; b < d_b_; ++b) {
    Matrix m(d_a_, d_e_);
    for (int a = 0; a < d_a_; ++a) {
      for (int e = 0; e < d_e_; ++e) m(a, e) = psi_(a * d_b_ * d_e_ + b * d_e_ + e);
    }
    out += m.transpose() * p_a.transpose() * m.conjugate();
  }
  return hermitian_part(out);
}

Matrix TripartiteTestState::bob_conditional(const Matrix& p_a) const {
  if (p_a.rows() != d_a_) throw DimensionMismatch("operator does not act on A");
  Matrix out = Matrix::Zero(d_b_, d_b_);
  for (int e = 0; e < d_e_; ++e) {
    Matrix m(d_a_, d_b_);
    for (int a = 0; a < d_a_; ++a) {
      for (int b = 0; b < d_b_; ++b) m(a, b) = psi_(a * d_b_ * d_e_ + b * d_e_ + e);
    }
    out += m.transpose() * p_a.transpose() * m.conjugate();
  }
  return hermitian_part(out);
}

GuessResult guessing_probability(const std::vector<Matrix>& states, Rng& rng, int restarts, int iterations) {
  if (states.empty()) throw InvalidInput("no states to discriminate");
  GuessResult out;
  if (states.size() == 1) return {states[0].trace().real(), true};
  if (states.size() == 2) {
    const double t = states[0].trace().real() + states[1].trace().real();
    return {0.5 * (t + trace_norm(states[0] - states[1])), true};
  }
  const Eigen::Index d = states[0].rows();
  for (const auto& s : states) out.p_guess = std::max(out.p_guess, s.trace().real());

  // Pretty-good measurement, completed on the kernel of the average state.
  Matrix total = Matrix::Zero(d, d);
  for (const auto& s : states) total += s;
  const Matrix r = inverse_sqrt_on_support(total);
  std::vector<Matrix> pgm;
  for (const auto& s : states) pgm.push_back(hermitian_part(r * s * r));
  out.p_guess = std::max(out.p_guess, success(states, pgm));
  // Eigenbases of the states and their sum; exact when the states commute.
  auto eigenbasis = [](const Matrix& m) { return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvectors(); };
  out.p_guess = std::max(out.p_guess, assign_in_basis(states, eigenbasis(total)));
  for (const auto& st : states) out.p_guess = std::max(out.p_guess, assign_in_basis(states, eigenbasis(st)));
  out.p_guess = std::max(out.p_guess, iterate_measurement(states, pgm, iterations));
  for (int k = 0; k < restarts; ++k) {
    const MatrixPovm start = random_povm(d, states.size(), rng);
    out.p_guess = std::max(out.p_guess, iterate_measurement(states, start.elements, iterations));
  }
  return out;
}

double conditional_max_entropy(const std::vector<Matrix>& states, Rng& rng, int restarts) {
  if (states.empty()) throw InvalidInput("no conditional states");
  const Eigen::Index d = states[0].rows();
  if (d == 1) {
    double s = 0.0;
    for (const auto& st : states) s += std::sqrt(std::max(0.0, st(0, 0).real()));
    return 2 * std::log2(s);
  }
  std::vector<Matrix> roots;
  for (const auto& st : states) roots.push_back(psd_sqrt(hermitian_part(st)));

  auto objective = [&](const Matrix& root_sigma) {
    double g = 0.0;
    for (const auto& r : roots) g += trace_norm(r * root_sigma);
    return g;
  };

  double best = 0.0;
  for (int start = 0; start <= restarts; ++start) {
    Matrix sigma = start == 0 ? Matrix(Matrix::Identity(d, d) / static_cast<double>(d)) : random_density(d, rng);
    Matrix root = psd_sqrt(sigma);
    double value = objective(root);
    for (int it = 0; it < 2000; ++it) {
      // Optimal unitaries for the current sigma, then the optimal sigma for
      // those unitaries: sqrt(sigma) proportional to the positive part of
      // the Hermitian part of sum_x U_x sqrt(rho_x).
      Matrix a = Matrix::Zero(d, d);
      for (const auto& r : roots) {
        Eigen::JacobiSVD<Matrix> svd(r * root, Eigen::ComputeFullU | Eigen::ComputeFullV);
        a += svd.matrixV() * svd.matrixU().adjoint() * r;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(a));
      const RealVector w = eig.eigenvalues().cwiseMax(0.0);
      if (w.norm() == 0.0) break;
      const Matrix next = eig.eigenvectors() * (w / w.norm()).cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
      const double v = objective(next);
      const bool done = v - value <= 1e-13 * v;
      if (v > value) {
        value = v;
        root = next;
      }
      if (done) break;
    }
    best = std::max(best, value);
  }
  return 2 * std::log2(best);
}

InstanceEvaluation evaluate_instance(const TripartiteTestState& state, const MatrixPovm& x, const MatrixPovm& z,
                                     Rng& rng, double tolerance) {
  if (static_cast<int>(x.dim()) != state.d_a() || static_cast<int>(z.dim()) != state.d_a()) {
    throw DimensionMismatch("measurements must act on A");
  }
  InstanceEvaluation ev;
  const Matrix rho_a = state.rho_a();
  auto null_prob = [&](const MatrixPovm& p) {
    return p.null_index ? std::clamp(expectation(rho_a, p.elements[*p.null_index]), 0.0, 1.0) : 0.0;
  };
  ev.p_z_null = null_prob(z);
  ev.p_x_null = null_prob(x);
  ev.c_less = std::clamp(restricted_overlap(x, z), 0.0, 1.0);

  if (1 - ev.p_x_null > 1e-12) {
    std::vector<Matrix> cond;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x.null_index && k == *x.null_index) continue;
      cond.push_back(state.bob_conditional(x.elements[k]) / (1 - ev.p_x_null));
    }
    ev.h_max = conditional_max_entropy(cond, rng);
  }
  ev.rhs = eur_modified({ev.p_z_null, ev.p_x_null, ev.c_less, ev.h_max}).raw_bound;
  ev.guess_ceiling = std::min(1.0, std::exp2(-ev.rhs));
  if (ev.guess_ceiling >= 1.0 - tolerance) return ev;

  ev.searched = true;
  std::vector<Matrix> eve;
  for (const auto& e : z.elements) eve.push_back(state.eve_conditional(e));
  const GuessResult g = guessing_probability(eve, rng);
  ev.p_guess = g.p_guess;
  ev.exact_guess = g.exact;
  ev.violation = ev.p_guess > ev.guess_ceiling + tolerance;
  return ev;
}

FalsifierReport bound_falsifier(const FalsifierConfig& cfg) {
  if (cfg.max_dim < 2 || cfg.max_dim > 4) throw InvalidInput("falsifier dimensions must lie in [2, 4]");
  if (cfg.n_states == 0 || cfg.n_measurements == 0) throw InvalidInput("falsifier needs at least one instance");
  const std::size_t total = cfg.n_states * cfg.n_measurements;

  struct Outcome {
    InstanceEvaluation ev;
    double lemma_excess;
  };
  std::vector<Outcome> results(total);
  parallel_for(cfg.n_states, cfg.threads, [&](std::size_t s) {
    Rng rng(derive_seed(cfg.seed, s));
    std::uniform_int_distribution<int> family(0, 3);
    const int f = family(rng);
    const TripartiteTestState use = random_tripartite(cfg.max_dim, f, rng);
    for (std::size_t m = 0; m < cfg.n_measurements; ++m) {
      const MeasurementPair inst = random_measurements(use.d_a(), f, rng);
      Outcome& out = results[s * cfg.n_measurements + m];
      out.ev = evaluate_instance(use, inst.x, inst.z, rng, cfg.tolerance);

      // Splitting lemma: F(rho, I x sigma) <= F(rho, G x sigma) + F(rho, (I - G) x sigma)
      // for a projector G.
      const Eigen::Index da = use.d_a();
      const Eigen::Index db = use.d_b();
      std::uniform_int_distribution<Eigen::Index> rank(1, da - 1);
      const Matrix g = random_projector(da, rank(rng), rng);
      const Matrix sigma = random_density(db, rng);
      const Matrix rho = use.rho_ab();
      const Matrix id = Matrix::Identity(da, da);
      const double lhs = fidelity(rho, kron(id, sigma));
      const double rhs = fidelity(rho, kron(g, sigma)) + fidelity(rho, kron(id - g, sigma));
      out.lemma_excess = lhs - rhs;
    }
  });

  FalsifierReport rep;
  rep.config = cfg;
  rep.instances = total;
  rep.lemma_checks = total;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& ev = results[i].ev;
    if (ev.searched) {
      ++rep.searched;
      rep.max_nontrivial_rhs = std::max(rep.max_nontrivial_rhs, ev.rhs);
      const double excess = ev.p_guess - ev.guess_ceiling;
      if (excess > rep.max_excess) {
        rep.max_excess = excess;
        rep.worst_instance = i;
      }
    }
    if (ev.exact_guess) ++rep.exact;
    if (ev.violation) ++rep.violations;
    rep.lemma_max_excess = std::max(rep.lemma_max_excess, results[i].lemma_excess);
    if (results[i].lemma_excess > cfg.tolerance) ++rep.lemma_violations;
  }
  rep.note =
      "The search finds achievable guessing probabilities, i.e. lower bounds on the optimum; a run without "
      "violations fails to falsify the bound but does not certify it. Instances whose bound is trivial (guess "
      "ceiling 1) are counted but not searched.";
  return rep;
}

}  // namespace eurlab
