#include "eurlab/random.hpp"

#include <cmath>

#include "eurlab/error.hpp"

namespace eurlab {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  return g;
}

Matrix random_unitary(Eigen::Index dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(i) *= d / mag;
  }
  return q;
}

Eigen::VectorXcd random_pure_state(Eigen::Index dim, Rng& rng) {
  Eigen::VectorXcd v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_density(Eigen::Index dim, Rng& rng, Eigen::Index rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  const Matrix g = ginibre(dim, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return hermitian_part(rho);
}

MatrixPovm random_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng) {
  if (outcomes == 0) throw InvalidInput("random_povm needs at least one outcome");
  std::vector<Matrix> raw;
  raw.reserve(outcomes);
  Matrix total = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < outcomes; ++k) {
    const Matrix g = ginibre(dim, dim, rng);
    raw.push_back(g * g.adjoint());
    total += raw.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(total));
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  const Matrix s = eig.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  MatrixPovm povm;
  for (auto& a : raw) povm.elements.push_back(hermitian_part(s * a * s));
  return povm;
}

MatrixPovm random_projective_povm(Eigen::Index dim, std::size_t outcomes, Rng& rng) {
  if (outcomes == 0 || static_cast<Eigen::Index>(outcomes) > dim) {
    throw InvalidInput("projective POVM needs between 1 and dim outcomes");
  }
  const Matrix u = random_unitary(dim, rng);
  MatrixPovm povm;
  const auto per = dim / static_cast<Eigen::Index>(outcomes);
  const auto extra = dim % static_cast<Eigen::Index>(outcomes);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < outcomes; ++k) {
    const Eigen::Index width = per + (static_cast<Eigen::Index>(k) < extra ? 1 : 0);
    const Matrix block = u.middleCols(col, width);
    povm.elements.push_back(block * block.adjoint());
    col += width;
  }
  return povm;
}

}  // namespace eurlab
