#pragma once

// Finite-dimensional operator algebra used by the uncertainty bounds:
// POVM validation, fidelity, overlap constants and the effective-POVM
// construction for a null outcome shared by two measurements.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eurlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

struct Tolerances {
  double hermitian = 1e-9;  // entrywise |A - A^dag|
  double psd = 1e-9;        // smallest admissible eigenvalue is -psd
  double sum = 1e-9;        // entrywise |sum - I|
  double trace = 1e-9;      // |Tr rho - 1| for density operators
  double support = 1e-10;   // eigenvalues at or below this are outside the support
  double probability = 1e-12;
};

// A measurement given by its elements. `null_index`, when set, marks the
// element whose outcome is treated as "no result" (out of range, saturated).
struct MatrixPovm {
  std::vector<Matrix> elements;
  std::optional<std::size_t> null_index;

  std::size_t dim() const;
  std::size_t size() const { return elements.size(); }
  // Elements with the null element removed, in original order.
  std::vector<Matrix> informative_elements() const;
};

class DensityOp {
 public:
  // Throws InvalidInput unless `m` is Hermitian, PSD and unit trace.
  explicit DensityOp(Matrix m, const Tolerances& tol = {});

  const Matrix& matrix() const { return op_; }
  std::size_t dim() const { return static_cast<std::size_t>(op_.rows()); }

 private:
  Matrix op_;
};

enum class PovmViolationKind { NonFinite, NonHermitian, NotPositive, IncompleteSum };

struct PovmViolation {
  PovmViolationKind kind;
  std::optional<std::size_t> element;  // empty for the completeness check
  double magnitude;
};

struct PovmReport {
  bool pass = true;
  std::size_t dim = 0;
  std::vector<PovmViolation> violations;
  double worst_hermiticity = 0.0;  // max entrywise |A - A^dag| over elements
  double min_eigenvalue = 0.0;     // smallest eigenvalue over all elements
  double worst_sum_deviation = 0.0;
  // Populated when the report comes from an effective-POVM construction.
  std::optional<std::string> note;

  std::string summary() const;
};

const char* to_string(PovmViolationKind kind);

// Throws DimensionMismatch if the elements do not share one square shape.
PovmReport validate_povm(const MatrixPovm& povm, const Tolerances& tol = {});

// (A + A^dag) / 2
Matrix hermitian_part(const Matrix& a);

// Square root of a PSD operator. Eigenvalues in [-tol.psd, 0) are clamped;
// anything more negative throws InvalidInput.
Matrix psd_sqrt(const Matrix& a, const Tolerances& tol = {});

double trace_norm(const Matrix& a);
double operator_norm(const Matrix& a);

// Tr sqrt(sqrt(sigma) rho sqrt(sigma)), evaluated as ||sqrt(rho) sqrt(sigma)||_Tr.
// Arguments need not be normalized.
double fidelity(const Matrix& rho, const Matrix& sigma, const Tolerances& tol = {});

// max_{x,z} ||sqrt(X_x) sqrt(Z_z)||_inf^2 over all element pairs.
double max_overlap_c(const MatrixPovm& x, const MatrixPovm& z, const Tolerances& tol = {});

// min{ max_x ||sum_z Z_z X_x Z_z||_inf , max_z ||sum_x X_x Z_z X_x||_inf }.
// Never exceeds max_overlap_c.
double overlap_cprime(const MatrixPovm& x, const MatrixPovm& z);

// max_overlap_c with each POVM's null element (if any) left out.
double restricted_overlap(const MatrixPovm& x, const MatrixPovm& z, const Tolerances& tol = {});

// Result of compressing a POVM to the support of M = I - N.
struct EffectivePovm {
  MatrixPovm povm;          // elements act on the reduced space, no null element
  Matrix support_basis;     // dim x reduced_dim isometry onto supp(M)
  RealVector support_eigenvalues;  // eigenvalues of M kept, ascending
  std::size_t reduced_dim = 0;
  std::size_t dropped = 0;         // eigenvalues of M at or below tol.support
  double largest_dropped = 0.0;    // largest |eigenvalue| among the dropped ones
  // True when a dropped eigenvalue was small but not numerically zero, i.e.
  // the support cutoff actually changed the answer.
  bool cutoff_exercised = false;
};

// Builds M^{-1/2} P_n M^{-1/2} on supp(M) for every non-null element P_n,
// with M the sum of the non-null elements. Throws InvalidInput when no null
// element is designated and NumericalError when M vanishes.
EffectivePovm effective_povm(const MatrixPovm& povm, const Tolerances& tol = {});

// Validation of an effective POVM, with the support-cutoff note attached.
PovmReport validate_effective_povm(const EffectivePovm& eff, const Tolerances& tol = {});

// sqrt(M) rho sqrt(M) / Tr(rho M) with M the non-null part of `povm`;
// eigenvalues of M at or below tol.support count as zero.
// Throws InvalidInput when Tr(rho M) <= tol.probability.
DensityOp filtered_state(const DensityOp& rho, const MatrixPovm& povm, const Tolerances& tol = {});

// V^dag A V for an isometry V (e.g. EffectivePovm::support_basis).
Matrix compress(const Matrix& a, const Matrix& isometry);

// Tr(rho P) as a real number.
double expectation(const Matrix& rho, const Matrix& p);

// Largest singular value of a general matrix via Jacobi SVD.
double largest_singular_value(const Matrix& a);

}  // namespace eurlab
