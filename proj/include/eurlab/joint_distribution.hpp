#pragma once

// Binned joint outcome distribution of two parties.
//
// Stored as p(a, b) = core(a, b) + u(a) q(b): a sparse core holding the
// correlated band, plus a rank-one background. The background is what loss
// and null replacement produce (Bob's result replaced by an independent draw
// from a public distribution), so large frequency grids never need a dense
// matrix.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eurlab {

class JointDistribution {
 public:
  struct Entry {
    std::size_t col;
    double value;
  };

  // Labels are bin centers; the null outcome (if any) is its own row/column.
  JointDistribution(std::vector<double> row_centers, std::optional<std::size_t> null_row,
                    std::vector<double> col_centers, std::optional<std::size_t> null_col);

  // Dense matrix, no null outcomes, integer labels.
  static JointDistribution from_dense(const std::vector<std::vector<double>>& p);

  std::size_t rows() const { return row_centers_.size(); }
  std::size_t cols() const { return col_centers_.size(); }
  std::optional<std::size_t> null_row() const { return null_row_; }
  std::optional<std::size_t> null_col() const { return null_col_; }
  std::string row_label(std::size_t a) const;
  std::string col_label(std::size_t b) const;
  const std::vector<double>& row_centers() const { return row_centers_; }
  const std::vector<double>& col_centers() const { return col_centers_; }

  // Core rows are filled in order; entries within a row must have
  // increasing column index.
  void append_row(std::size_t row, const std::vector<Entry>& entries);
  void finish();

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<Entry>& core() const { return core_; }
  const std::vector<double>& background_rows() const { return u_; }
  const std::vector<double>& background_cols() const { return q_; }

  double at(std::size_t a, std::size_t b) const;
  double total() const;
  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  std::vector<std::vector<double>> dense() const;

  // Every row/column mass is non-negative and the total is 1 within tol.
  bool is_normalized(double tol = 1e-12) const;

  // Bob's outcome (column) is replaced with probability 1 - eta by a null;
  // with `replace_null` every null column entry is then redistributed
  // according to `replacement`, indexed by column. Needs a null column.
  JointDistribution with_loss(double eta, bool replace_null, const std::vector<double>& replacement) const;

  // Removes Alice's null row and rescales the remainder to unit mass.
  JointDistribution without_null_row() const;

  // Non-null row marginal normalized to one, laid out by column index
  // (requires equal numbers of non-null rows and columns).
  std::vector<double> public_row_distribution() const;

  void write_csv(std::ostream& out) const;

 private:
  void scale(double factor);

  std::vector<double> row_centers_;
  std::vector<double> col_centers_;
  std::optional<std::size_t> null_row_;
  std::optional<std::size_t> null_col_;
  std::vector<std::size_t> row_ptr_;
  std::vector<Entry> core_;
  std::vector<double> u_;
  std::vector<double> q_;
  std::size_t filled_rows_ = 0;
};

}  // namespace eurlab
