#include "eurlab/joint_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "eurlab/error.hpp"
#include "eurlab/format.hpp"

namespace eurlab {

JointDistribution::JointDistribution(std::vector<double> row_centers, std::optional<std::size_t> null_row,
                                     std::vector<double> col_centers, std::optional<std::size_t> null_col)
    : row_centers_(std::move(row_centers)),
      col_centers_(std::move(col_centers)),
      null_row_(null_row),
      null_col_(null_col),
      row_ptr_(1, 0),
      u_(row_centers_.size(), 0.0),
      q_(col_centers_.size(), 0.0) {
  if (row_centers_.empty() || col_centers_.empty()) throw InvalidInput("joint distribution needs rows and columns");
  if (null_row_ && *null_row_ >= rows()) throw InvalidInput("null row index out of range");
  if (null_col_ && *null_col_ >= cols()) throw InvalidInput("null column index out of range");
}

JointDistribution JointDistribution::from_dense(const std::vector<std::vector<double>>& p) {
  if (p.empty() || p.front().empty()) throw InvalidInput("empty distribution");
  std::vector<double> rl(p.size());
  std::vector<double> cl(p.front().size());
  for (std::size_t i = 0; i < rl.size(); ++i) rl[i] = static_cast<double>(i);
  for (std::size_t j = 0; j < cl.size(); ++j) cl[j] = static_cast<double>(j);
  JointDistribution j(rl, std::nullopt, cl, std::nullopt);
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a].size() != cl.size()) throw DimensionMismatch("ragged distribution matrix");
    std::vector<Entry> row;
    for (std::size_t b = 0; b < cl.size(); ++b) {
      if (!(p[a][b] >= 0) || !std::isfinite(p[a][b])) throw InvalidInput("probabilities must be finite and non-negative");
      if (p[a][b] > 0) row.push_back({b, p[a][b]});
    }
    j.append_row(a, row);
  }
  j.finish();
  return j;
}

std::string JointDistribution::row_label(std::size_t a) const {
  return null_row_ && a == *null_row_ ? "null" : format_double(row_centers_[a]);
}

std::string JointDistribution::col_label(std::size_t b) const {
  return null_col_ && b == *null_col_ ? "null" : format_double(col_centers_[b]);
}

void JointDistribution::append_row(std::size_t row, const std::vector<Entry>& entries) {
  if (row < filled_rows_ || row >= rows()) throw InvalidInput("rows must be appended in increasing order");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].col >= cols() || (k > 0 && entries[k].col <= entries[k - 1].col)) {
      throw InvalidInput("row entries must have increasing, in-range column indices");
    }
  }
  while (filled_rows_ < row) {
    row_ptr_.push_back(core_.size());
    ++filled_rows_;
  }
  core_.insert(core_.end(), entries.begin(), entries.end());
  row_ptr_.push_back(core_.size());
  ++filled_rows_;
}

void JointDistribution::finish() {
  while (filled_rows_ < rows()) {
    row_ptr_.push_back(core_.size());
    ++filled_rows_;
  }
}

double JointDistribution::at(std::size_t a, std::size_t b) const {
  double v = u_[a] * q_[b];
  for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) {
    if (core_[k].col == b) v += core_[k].value;
  }
  return v;
}

double JointDistribution::total() const {
  double s = 0.0;
  for (double m : row_marginal()) s += m;
  return s;
}

std::vector<double> JointDistribution::row_marginal() const {
  double qsum = 0.0;
  for (double v : q_) qsum += v;
  std::vector<double> out(rows());
  for (std::size_t a = 0; a < rows(); ++a) {
    double s = u_[a] * qsum;
    for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) s += core_[k].value;
    out[a] = s;
  }
  return out;
}

std::vector<double> JointDistribution::col_marginal() const {
  double usum = 0.0;
  for (double v : u_) usum += v;
  std::vector<double> out(cols());
  for (std::size_t b = 0; b < cols(); ++b) out[b] = usum * q_[b];
  for (const auto& e : core_) out[e.col] += e.value;
  return out;
}

std::vector<std::vector<double>> JointDistribution::dense() const {
  std::vector<std::vector<double>> out(rows(), std::vector<double>(cols()));
  for (std::size_t a = 0; a < rows(); ++a) {
    for (std::size_t b = 0; b < cols(); ++b) out[a][b] = u_[a] * q_[b];
    for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) out[a][core_[k].col] += core_[k].value;
  }
  return out;
}

bool JointDistribution::is_normalized(double tol) const {
  for (const auto& e : core_) {
    if (!(e.value >= 0)) return false;
  }
  for (double v : u_) {
    if (!(v >= 0)) return false;
  }
  for (double v : q_) {
    if (!(v >= 0)) return false;
  }
  return std::abs(total() - 1.0) <= tol;
}

void JointDistribution::scale(double factor) {
  for (auto& e : core_) e.value *= factor;
  for (auto& v : u_) v *= factor;
}

JointDistribution JointDistribution::with_loss(double eta, bool replace_null,
                                               const std::vector<double>& replacement) const {
  if (!(eta >= 0 && eta <= 1)) throw InvalidInput("transmission must lie in [0, 1]");
  if (!null_col_) throw InvalidInput("loss needs a null column");
  const std::size_t nc = *null_col_;
  const std::vector<double> mass = row_marginal();

  JointDistribution out(row_centers_, null_row_, col_centers_, null_col_);
  out.q_ = q_;
  for (std::size_t a = 0; a < rows(); ++a) out.u_[a] = eta * u_[a];

  std::vector<double> r;
  if (replace_null) {
    if (replacement.size() != cols()) throw DimensionMismatch("replacement distribution has the wrong length");
    r = replacement;
    r[nc] = 0.0;
    double bg = 0.0;
    for (double v : u_) bg += v;
    if (bg > 0) {
      for (std::size_t b = 0; b < cols(); ++b) {
        if (std::abs(q_[b] - r[b]) > 1e-12) throw InvalidInput("existing background differs from the replacement");
      }
    }
    out.q_ = r;
  }

  std::vector<Entry> row;
  for (std::size_t a = 0; a < rows(); ++a) {
    row.clear();
    // The background's own null column (if any) stays in the scaled background.
    double null_mass = (1 - eta) * mass[a];
    for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) {
      if (core_[k].col == nc) {
        null_mass += eta * core_[k].value;
      } else {
        row.push_back({core_[k].col, eta * core_[k].value});
      }
    }
    if (replace_null) {
      out.u_[a] += null_mass;
    } else if (null_mass > 0) {
      auto pos = std::lower_bound(row.begin(), row.end(), nc, [](const Entry& e, std::size_t c) { return e.col < c; });
      row.insert(pos, Entry{nc, null_mass});
    }
    out.append_row(a, row);
  }
  out.finish();
  return out;
}

JointDistribution JointDistribution::without_null_row() const {
  if (!null_row_) return *this;
  const std::size_t nr = *null_row_;
  std::vector<double> centers;
  centers.reserve(rows() - 1);
  for (std::size_t a = 0; a < rows(); ++a) {
    if (a != nr) centers.push_back(row_centers_[a]);
  }
  JointDistribution out(centers, std::nullopt, col_centers_, null_col_);
  out.q_ = q_;
  std::size_t dst = 0;
  std::vector<Entry> row;
  for (std::size_t a = 0; a < rows(); ++a) {
    if (a == nr) continue;
    row.assign(core_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[a]),
               core_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[a + 1]));
    out.u_[dst] = u_[a];
    out.append_row(dst, row);
    ++dst;
  }
  out.finish();
  const double t = out.total();
  if (!(t > 0)) throw NumericalError("no probability mass outside the null row");
  out.scale(1.0 / t);
  return out;
}

std::vector<double> JointDistribution::public_row_distribution() const {
  const std::size_t informative_rows = rows() - (null_row_ ? 1 : 0);
  const std::size_t informative_cols = cols() - (null_col_ ? 1 : 0);
  if (informative_rows != informative_cols) {
    throw DimensionMismatch("public distribution needs as many row bins as column bins");
  }
  const std::vector<double> mass = row_marginal();
  std::vector<double> out(cols(), 0.0);
  double s = 0.0;
  std::size_t b = 0;
  for (std::size_t a = 0; a < rows(); ++a) {
    if (null_row_ && a == *null_row_) continue;
    if (null_col_ && b == *null_col_) ++b;
    out[b] = mass[a];
    s += mass[a];
    ++b;
  }
  if (!(s > 0)) throw NumericalError("no probability mass outside the null row");
  for (double& v : out) v /= s;
  return out;
}

void JointDistribution::write_csv(std::ostream& out) const {
  out << "row,col,probability\n";
  for (std::size_t a = 0; a < rows(); ++a) {
    if (u_[a] > 0) {
      // Background present: the row is dense.
      std::size_t k = row_ptr_[a];
      for (std::size_t b = 0; b < cols(); ++b) {
        double v = u_[a] * q_[b];
        while (k < row_ptr_[a + 1] && core_[k].col < b) ++k;
        if (k < row_ptr_[a + 1] && core_[k].col == b) v += core_[k].value;
        if (v > 0) out << row_label(a) << ',' << col_label(b) << ',' << format_double(v) << '\n';
      }
    } else {
      for (std::size_t k = row_ptr_[a]; k < row_ptr_[a + 1]; ++k) {
        if (core_[k].value > 0) {
          out << row_label(a) << ',' << col_label(core_[k].col) << ',' << format_double(core_[k].value) << '\n';
        }
      }
    }
  }
}

}  // namespace eurlab
