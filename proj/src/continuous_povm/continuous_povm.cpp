#include "eurlab/continuous_povm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "eurlab/error.hpp"

namespace eurlab {

namespace {

constexpr double kPi = std::numbers::pi;

double relative_slack(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

// sin(s)/s, accurate near zero.
double sinc(double s) {
  if (std::abs(s) < 1e-4) return 1.0 - s * s / 6.0;
  return std::sin(s) / s;
}

double top_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(a.rows() - 1);
}

double nystrom_eigenvalue(double delta_omega, double delta_t, std::size_t n, QuadratureRule rule) {
  std::vector<double> nodes(n);
  std::vector<double> weights(n);
  const double half = delta_t / 2;
  if (rule == QuadratureRule::GaussLegendre) {
    auto [x, w] = gauss_legendre(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[i] = half * x[i];
      weights[i] = half * w[i];
    }
  } else {
    const double h = delta_t / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[i] = -half + (static_cast<double>(i) + 0.5) * h;
      weights[i] = h;
    }
  }
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(size, size);
  const double diag = delta_omega / (2 * kPi);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double s = delta_omega * (nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)]) / 2;
      const double k = diag * sinc(s);
      const double v = std::sqrt(weights[static_cast<std::size_t>(i)] * weights[static_cast<std::size_t>(j)]) * k;
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return top_eigenvalue(a);
}

}  // namespace

std::size_t bins_that_fit(double span, double width) {
  if (!(width > 0) || !(span >= 0)) return 0;
  const double q = span / width;
  auto n = static_cast<std::size_t>(std::floor(q));
  if (q - static_cast<double>(n) > 1.0 - 1e-9) ++n;
  return n;
}

IntervalBinSpec::IntervalBinSpec(std::vector<double> centers, double width, double range_lo, double range_hi)
    : centers_(std::move(centers)), width_(width), range_lo_(range_lo), range_hi_(range_hi) {
  if (!(width_ > 0) || !std::isfinite(width_)) throw InvalidInput("bin width must be positive and finite");
  if (!(range_lo_ < range_hi_)) throw InvalidInput("bin range must satisfy range_lo < range_hi");
  std::sort(centers_.begin(), centers_.end());
  const double slack = relative_slack(std::max(std::abs(range_lo_), std::abs(range_hi_))) + 1e-9 * width_;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const double c = centers_[i];
    if (!std::isfinite(c)) throw InvalidInput("bin center is not finite");
    if (c - width_ / 2 < range_lo_ - slack || c + width_ / 2 > range_hi_ + slack) {
      std::ostringstream msg;
      msg << "bin " << i << " centered at " << c << " leaves the range [" << range_lo_ << ", " << range_hi_ << "]";
      throw InvalidInput(msg.str());
    }
    if (i > 0 && c - centers_[i - 1] < width_ - slack) {
      std::ostringstream msg;
      msg << "bins centered at " << centers_[i - 1] << " and " << c << " overlap (width " << width_ << ")";
      throw InvalidInput(msg.str());
    }
  }
}

IntervalBinSpec IntervalBinSpec::uniform(double width, double range_lo, double range_hi) {
  if (!(width > 0)) throw InvalidInput("bin width must be positive");
  if (!(range_lo < range_hi)) throw InvalidInput("bin range must satisfy range_lo < range_hi");
  const std::size_t n = bins_that_fit(range_hi - range_lo, width);
  if (n == 0) throw InvalidInput("no bin of the requested width fits in the range");
  const double used = static_cast<double>(n) * width;
  const double start = range_lo + std::max(0.0, (range_hi - range_lo) - used) / 2 + width / 2;
  std::vector<double> centers(n);
  for (std::size_t i = 0; i < n; ++i) centers[i] = start + static_cast<double>(i) * width;
  return IntervalBinSpec(std::move(centers), width, range_lo, range_hi);
}

std::optional<std::size_t> IntervalBinSpec::locate(double x) const {
  const double half = width_ / 2;
  auto it = std::lower_bound(centers_.begin(), centers_.end(), x - half);
  // Half-open bins: a point sitting exactly on a lower edge belongs to that bin.
  for (int step = 0; step < 2 && it != centers_.end(); ++step, ++it) {
    if (x >= *it - half && x < *it + half) return static_cast<std::size_t>(it - centers_.begin());
  }
  return std::nullopt;
}

std::vector<Interval> IntervalBinSpec::null_regions() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<Interval> out;
  if (centers_.empty()) {
    out.push_back({-inf, inf});
    return out;
  }
  out.push_back({-inf, bin(0).lo});
  const double slack = 1e-9 * width_;
  for (std::size_t i = 1; i < centers_.size(); ++i) {
    const double gap_lo = bin(i - 1).hi;
    const double gap_hi = bin(i).lo;
    if (gap_hi - gap_lo > slack) out.push_back({gap_lo, gap_hi});
  }
  out.push_back({bin(centers_.size() - 1).hi, inf});
  return out;
}

ConjugatePovmPair build_time_frequency_povms(const IntervalBinSpec& freq, const IntervalBinSpec& time) {
  return {BinnedPovm{ObservableKind::Frequency, freq, freq.null_regions()},
          BinnedPovm{ObservableKind::ArrivalTime, time, time.null_regions()}};
}

ConjugatePovmPair build_quadrature_povms(const IntervalBinSpec& x, const IntervalBinSpec& p) {
  if (std::abs(x.width() - p.width()) > 1e-12 * std::max(x.width(), p.width())) {
    throw InvalidInput("quadrature bins must share one width");
  }
  return {BinnedPovm{ObservableKind::QuadratureX, x, x.null_regions()},
          BinnedPovm{ObservableKind::QuadratureP, p, p.null_regions()}};
}

double prolate_top_eigenvalue(double c) {
  if (!(c > 0) || !std::isfinite(c)) throw InvalidInput("bandwidth parameter must be positive and finite");
  // Even-order normalized Legendre coefficients of the lowest prolate function.
  // The expansion converges super-exponentially once k exceeds ~c.
  const auto terms = static_cast<Eigen::Index>(2 * std::ceil(c) + 60);
  Eigen::VectorXd diag(terms);
  Eigen::VectorXd sub(terms - 1);
  const double c2 = c * c;
  for (Eigen::Index j = 0; j < terms; ++j) {
    const double k = 2.0 * static_cast<double>(j);
    diag(j) = k * (k + 1) + c2 * (2 * k * k + 2 * k - 1) / ((2 * k - 1) * (2 * k + 3));
    if (j + 1 < terms) {
      sub(j) = c2 * (k + 1) * (k + 2) / ((2 * k + 3) * std::sqrt((2 * k + 1) * (2 * k + 5)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) throw NumericalError("prolate eigenproblem did not converge");
  const Eigen::VectorXd beta = eig.eigenvectors().col(0);

  // psi(0) = sum_k beta_k sqrt(k + 1/2) P_k(0); the integral of psi over [-1, 1]
  // only sees the k = 0 term.
  double legendre_at_zero = 1.0;
  double psi0 = 0.0;
  for (Eigen::Index j = 0; j < terms; ++j) {
    const double k = 2.0 * static_cast<double>(j);
    psi0 += beta(j) * std::sqrt(k + 0.5) * legendre_at_zero;
    legendre_at_zero *= -(k + 1) / (k + 2);
  }
  const double integral = std::sqrt(2.0) * beta(0);
  const double mu = integral / psi0;
  return std::min(1.0, c * mu * mu / (2 * kPi));
}

double analytic_overlap(double delta_omega, double delta_t) {
  if (!(delta_omega > 0) || !(delta_t > 0)) throw InvalidInput("bin widths must be positive");
  return prolate_top_eigenvalue(delta_omega * delta_t / 4);
}

double quadrature_bin_overlap(double width) { return analytic_overlap(width, width); }

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidInput("Gauss-Legendre rule needs at least one node");
  std::vector<double> x(n);
  std::vector<double> w(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = z;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = n == 1 ? 1.0 : static_cast<double>(n) * (z * p1 - p0) / (z * z - 1);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

SlepianOracleResult slepian_overlap_oracle(double delta_omega, double delta_t, const SlepianGrid& grid) {
  if (!(delta_omega > 0) || !(delta_t > 0)) throw InvalidInput("bin widths must be positive");
  if (grid.n_points < 64) throw InvalidInput("Slepian grid needs at least 64 points");
  std::size_t n = grid.n_points;
  double previous = nystrom_eigenvalue(delta_omega, delta_t, n, grid.rule);
  double change = std::numeric_limits<double>::infinity();
  for (int d = 0; d < grid.max_doublings; ++d) {
    n *= 2;
    const double current = nystrom_eigenvalue(delta_omega, delta_t, n, grid.rule);
    change = std::abs(current - previous) / std::abs(current);
    if (change < grid.rtol) return {current, n, change};
    previous = current;
  }
  std::ostringstream msg;
  msg << "Slepian oracle did not converge: relative change " << change << " at " << n << " points";
  throw NumericalError(msg.str());
}

double frequency_width_for_overlap(double target, double delta_t) {
  if (!(target > 0 && target < 1)) throw InvalidInput("target overlap must lie in (0, 1)");
  if (!(delta_t > 0)) throw InvalidInput("time bin width must be positive");
  double lo = std::log(1e-14);
  double hi = std::log(1e3);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    if (prolate_top_eigenvalue(std::exp(mid)) < target) lo = mid; else hi = mid;
  }
  return 4 * std::exp((lo + hi) / 2) / delta_t;
}

}  // namespace eurlab
