#include "eurlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eurlab/error.hpp"

namespace eurlab {

namespace {

void require_same_dim(const MatrixPovm& a, const MatrixPovm& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "POVM dimensions differ: " << a.dim() << " vs " << b.dim();
    throw DimensionMismatch(msg.str());
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(a));
}

std::vector<Matrix> sqrt_all(const std::vector<Matrix>& ops, const Tolerances& tol) {
  std::vector<Matrix> out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(psd_sqrt(op, tol));
  return out;
}

double max_pairwise_overlap(const std::vector<Matrix>& xs, const std::vector<Matrix>& zs,
                            const Tolerances& tol) {
  const auto sx = sqrt_all(xs, tol);
  const auto sz = sqrt_all(zs, tol);
  double best = 0.0;
  for (const auto& a : sx) {
    for (const auto& b : sz) {
      const double s = largest_singular_value(a * b);
      best = std::max(best, s * s);
    }
  }
  return std::min(best, 1.0);
}

}  // namespace

std::size_t MatrixPovm::dim() const {
  if (elements.empty()) return 0;
  return static_cast<std::size_t>(elements.front().rows());
}

std::vector<Matrix> MatrixPovm::informative_elements() const {
  std::vector<Matrix> out;
  out.reserve(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (null_index && *null_index == i) continue;
    out.push_back(elements[i]);
  }
  return out;
}

DensityOp::DensityOp(Matrix m, const Tolerances& tol) : op_(std::move(m)) {
  if (op_.rows() != op_.cols() || op_.rows() == 0) {
    throw InvalidInput("density operator must be a non-empty square matrix");
  }
  if (!op_.allFinite()) throw InvalidInput("density operator has non-finite entries");
  const double herm = (op_ - op_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermitian) {
    throw InvalidInput("density operator is not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  op_ = hermitian_part(op_);
  const double min_eig = hermitian_eig(op_).eigenvalues().minCoeff();
  if (min_eig < -tol.psd) {
    throw InvalidInput("density operator has negative eigenvalue " + std::to_string(min_eig));
  }
  const double tr = op_.trace().real();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw InvalidInput("density operator trace is " + std::to_string(tr));
  }
}

const char* to_string(PovmViolationKind kind) {
  switch (kind) {
    case PovmViolationKind::NonFinite: return "non-finite";
    case PovmViolationKind::NonHermitian: return "non-hermitian";
    case PovmViolationKind::NotPositive: return "not-positive";
    case PovmViolationKind::IncompleteSum: return "completeness";
  }
  return "unknown";
}

std::string PovmReport::summary() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " dim=" << dim << " worst_hermiticity=" << worst_hermiticity
      << " min_eigenvalue=" << min_eigenvalue << " worst_sum_deviation=" << worst_sum_deviation;
  for (const auto& v : violations) {
    out << "\n  " << to_string(v.kind);
    if (v.element) out << " element " << *v.element;
    out << " magnitude " << v.magnitude;
  }
  if (note) out << "\n  note: " << *note;
  return out.str();
}

PovmReport validate_povm(const MatrixPovm& povm, const Tolerances& tol) {
  PovmReport report;
  if (povm.elements.empty()) throw InvalidInput("POVM has no elements");
  const auto n = povm.elements.front().rows();
  for (const auto& e : povm.elements) {
    if (e.rows() != n || e.cols() != n) throw DimensionMismatch("POVM elements differ in shape");
  }
  if (povm.null_index && *povm.null_index >= povm.size()) {
    throw InvalidInput("null index out of range");
  }
  report.dim = static_cast<std::size_t>(n);
  report.min_eigenvalue = std::numeric_limits<double>::infinity();

  Matrix total = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < povm.size(); ++i) {
    const Matrix& e = povm.elements[i];
    if (!e.allFinite()) {
      report.violations.push_back({PovmViolationKind::NonFinite, i,
                                   std::numeric_limits<double>::infinity()});
      continue;
    }
    const double herm = (e - e.adjoint()).cwiseAbs().maxCoeff();
    report.worst_hermiticity = std::max(report.worst_hermiticity, herm);
    if (herm > tol.hermitian) report.violations.push_back({PovmViolationKind::NonHermitian, i, herm});

    const double min_eig = hermitian_eig(e).eigenvalues().minCoeff();
    report.min_eigenvalue = std::min(report.min_eigenvalue, min_eig);
    if (min_eig < -tol.psd) report.violations.push_back({PovmViolationKind::NotPositive, i, -min_eig});
    total += e;
  }
  report.worst_sum_deviation = (total - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(report.worst_sum_deviation <= tol.sum)) {
    report.violations.push_back({PovmViolationKind::IncompleteSum, std::nullopt,
                                 report.worst_sum_deviation});
  }
  report.pass = report.violations.empty();
  return report;
}

Matrix hermitian_part(const Matrix& a) { return (a + a.adjoint()) * 0.5; }

Matrix psd_sqrt(const Matrix& a, const Tolerances& tol) {
  const auto eig = hermitian_eig(a);
  RealVector vals = eig.eigenvalues();
  if (vals.size() > 0 && vals.minCoeff() < -tol.psd) {
    throw InvalidInput("operator is not positive semidefinite (eigenvalue " +
                       std::to_string(vals.minCoeff()) + ")");
  }
  vals = vals.cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  return v * vals.cast<Complex>().asDiagonal() * v.adjoint();
}

double trace_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double operator_norm(const Matrix& a) { return largest_singular_value(a); }

double largest_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double fidelity(const Matrix& rho, const Matrix& sigma, const Tolerances& tol) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw DimensionMismatch("fidelity arguments differ in shape");
  }
  return trace_norm(psd_sqrt(rho, tol) * psd_sqrt(sigma, tol));
}

double max_overlap_c(const MatrixPovm& x, const MatrixPovm& z, const Tolerances& tol) {
  require_same_dim(x, z);
  return max_pairwise_overlap(x.elements, z.elements, tol);
}

double overlap_cprime(const MatrixPovm& x, const MatrixPovm& z) {
  require_same_dim(x, z);
  const auto n = static_cast<Eigen::Index>(x.dim());
  auto sandwich_max = [n](const std::vector<Matrix>& outer, const std::vector<Matrix>& inner) {
    double best = 0.0;
    for (const auto& in : inner) {
      Matrix acc = Matrix::Zero(n, n);
      for (const auto& out : outer) acc += out * in * out;
      best = std::max(best, operator_norm(hermitian_part(acc)));
    }
    return best;
  };
  const double over_x = sandwich_max(z.elements, x.elements);
  const double over_z = sandwich_max(x.elements, z.elements);
  return std::min({over_x, over_z, 1.0});
}

double restricted_overlap(const MatrixPovm& x, const MatrixPovm& z, const Tolerances& tol) {
  require_same_dim(x, z);
  return max_pairwise_overlap(x.informative_elements(), z.informative_elements(), tol);
}

EffectivePovm effective_povm(const MatrixPovm& povm, const Tolerances& tol) {
  if (!povm.null_index) throw InvalidInput("effective_povm needs a designated null element");
  const auto n = static_cast<Eigen::Index>(povm.dim());
  const auto informative = povm.informative_elements();
  Matrix m = Matrix::Zero(n, n);
  for (const auto& e : informative) m += e;

  const auto eig = hermitian_eig(m);
  const RealVector& vals = eig.eigenvalues();

  EffectivePovm out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > tol.support) {
      keep.push_back(i);
    } else {
      ++out.dropped;
      out.largest_dropped = std::max(out.largest_dropped, std::abs(vals(i)));
    }
  }
  if (keep.empty()) throw NumericalError("non-null part of the POVM vanishes; null element is the identity");

  const auto k = static_cast<Eigen::Index>(keep.size());
  out.reduced_dim = keep.size();
  out.support_basis.resize(n, k);
  out.support_eigenvalues.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.support_basis.col(j) = eig.eigenvectors().col(keep[static_cast<std::size_t>(j)]);
    out.support_eigenvalues(j) = vals(keep[static_cast<std::size_t>(j)]);
  }
  // Eigenvalues below ~ machine precision times the dimension are round-off zeros.
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  out.cutoff_exercised = out.largest_dropped > roundoff;

  const RealVector inv_sqrt = out.support_eigenvalues.cwiseSqrt().cwiseInverse();
  const auto scale = inv_sqrt.cast<Complex>().asDiagonal();
  out.povm.elements.reserve(informative.size());
  for (const auto& e : informative) {
    Matrix reduced = scale * compress(e, out.support_basis) * scale;
    out.povm.elements.push_back(hermitian_part(reduced));
  }
  return out;
}

PovmReport validate_effective_povm(const EffectivePovm& eff, const Tolerances& tol) {
  PovmReport report = validate_povm(eff.povm, tol);
  if (eff.cutoff_exercised) {
    std::ostringstream note;
    note << "support cutoff " << tol.support << " dropped " << eff.dropped
         << " eigenvalue(s) of M, largest " << eff.largest_dropped;
    report.note = note.str();
  }
  return report;
}

DensityOp filtered_state(const DensityOp& rho, const MatrixPovm& povm, const Tolerances& tol) {
  if (rho.dim() != povm.dim()) throw DimensionMismatch("state and POVM dimensions differ");
  const auto n = static_cast<Eigen::Index>(povm.dim());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& e : povm.informative_elements()) m += e;
  const double pass = expectation(rho.matrix(), m);
  if (!(pass > tol.probability)) {
    throw InvalidInput("state is fully blocked by the filter (Tr(rho M) = " + std::to_string(pass) + ")");
  }
  // Square root restricted to the same support as effective_povm, so that
  // round-off eigenvalues of M do not leak O(sqrt(eps)) weight.
  const auto eig = hermitian_eig(m);
  RealVector vals = eig.eigenvalues();
  if (vals.size() > 0 && vals.minCoeff() < -tol.psd) {
    throw InvalidInput("filter is not positive semidefinite (eigenvalue " + std::to_string(vals.minCoeff()) + ")");
  }
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = vals(i) > tol.support ? std::sqrt(vals(i)) : 0.0;
  const Matrix root = eig.eigenvectors() * vals.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  Matrix out = root * rho.matrix() * root / pass;
  return DensityOp(hermitian_part(out), tol);
}

Matrix compress(const Matrix& a, const Matrix& isometry) { return isometry.adjoint() * a * isometry; }

double expectation(const Matrix& rho, const Matrix& p) { return (rho * p).trace().real(); }

}  // namespace eurlab
