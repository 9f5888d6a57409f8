#include "eurlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eurlab/error.hpp"

namespace eurlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_probability(double p) { return p >= 0 && p <= 1; }

double xlog2x(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

// Core of the bound with the three bracket terms given separately:
// sqrt(pz) + sqrt(px) + sqrt(1 - px_lower) sqrt(c) 2^(h/2).
BoundResult evaluate(double pz, double px, double px_lower, double c, double h) {
  const double tz = std::sqrt(pz);
  const double tx = std::sqrt(px);
  const double nulls = tz + tx;
  BoundResult r;
  if (c > 0 && px_lower < 1) {
    const double log_to = 0.5 * std::log2(1 - px_lower) + 0.5 * std::log2(c) + 0.5 * h;
    const double to = std::exp2(log_to);
    // -2 log2(to + nulls) = -2 log_to - 2 log2(1 + nulls / to)
    r.raw_bound = -2 * log_to - 2 * std::log1p(std::exp2(std::log2(nulls) - log_to)) / std::log(2.0);
    r.dominant_term = to >= tz && to >= tx ? DominantTerm::Overlap : (tz >= tx ? DominantTerm::ZNull : DominantTerm::XNull);
  } else {
    r.raw_bound = nulls > 0 ? -2 * std::log2(nulls) : kInf;
    r.dominant_term = tz >= tx ? DominantTerm::ZNull : DominantTerm::XNull;
    if (nulls == 0) r.diagnostic = "all bracket terms vanish";
  }
  r.clamped = r.raw_bound < 0;
  r.clamped_bound = std::max(0.0, r.raw_bound);
  return r;
}

}  // namespace

void BoundInput::validate() const {
  if (!is_probability(p_z_null) || !is_probability(p_x_null)) throw InvalidInput("null probabilities must lie in [0, 1]");
  if (!is_probability(c_less)) throw InvalidInput("overlap must lie in [0, 1]");
  if (!std::isfinite(h_max)) throw InvalidInput("max-entropy term must be finite");
}

void SmoothParams::validate() const {
  if (!(epsilon >= 0 && epsilon < 1)) throw InvalidInput("smoothing parameter must lie in [0, 1)");
}

const char* to_string(DominantTerm term) {
  switch (term) {
    case DominantTerm::ZNull: return "z_null";
    case DominantTerm::XNull: return "x_null";
    case DominantTerm::Overlap: return "overlap";
  }
  return "unknown";
}

double eur_unmodified(double c, double h_max) {
  if (!is_probability(c)) throw InvalidInput("overlap must lie in [0, 1]");
  if (!std::isfinite(h_max)) throw InvalidInput("max-entropy term must be finite");
  if (c == 0) return kInf;
  return -std::log2(c) - h_max;
}

BoundResult eur_modified(const BoundInput& in) {
  in.validate();
  return evaluate(in.p_z_null, in.p_x_null, in.p_x_null, in.c_less, in.h_max);
}

double smoothing_f(double p, double eps, SmoothingSign sign) {
  if (!is_probability(p)) throw InvalidInput("probability must lie in [0, 1]");
  SmoothParams{eps}.validate();
  const double ball = 2 * eps - eps * eps;  // 1 - (1 - eps)^2
  if (sign == SmoothingSign::Plus && p >= 1 - ball && eps > 0) return 1.0;
  if (sign == SmoothingSign::Minus && p <= ball && eps > 0) return 0.0;
  const double base = 2 * eps + p + 2 * p * eps * eps - 4 * p * eps - eps * eps;
  const double cross = 2 * (1 - eps) * std::sqrt(p * (1 - p) * ball);
  const double f = sign == SmoothingSign::Plus ? base + cross : base - cross;
  return std::clamp(f, 0.0, 1.0);
}

BoundResult eur_modified_smooth(const BoundInput& in, const SmoothParams& sp) {
  in.validate();
  sp.validate();
  const double pz = smoothing_f(in.p_z_null, sp.epsilon, SmoothingSign::Plus);
  const double px = smoothing_f(in.p_x_null, sp.epsilon, SmoothingSign::Plus);
  const double px_lower = smoothing_f(in.p_x_null, sp.epsilon, SmoothingSign::Minus);
  BoundResult r = evaluate(pz, px, px_lower, in.c_less, in.h_max);
  if (sp.epsilon > 0 && (pz == 1.0 || px == 1.0)) {
    r.diagnostic = "smoothed null probability reached 1";
  }
  return r;
}

double cond_shannon(const JointDistribution& j) {
  const auto& u = j.background_rows();
  const auto& q = j.background_cols();
  const auto& ptr = j.row_ptr();
  const auto& core = j.core();
  double usum = 0.0;
  double qsum = 0.0;
  double ulog = 0.0;
  double qlog = 0.0;
  for (double v : u) {
    usum += v;
    ulog += xlog2x(v);
  }
  for (double v : q) {
    qsum += v;
    qlog += xlog2x(v);
  }
  // sum over all cells of (u q) log(u q), then swap in the core cells.
  double plogp = ulog * qsum + usum * qlog;
  for (std::size_t a = 0; a < j.rows(); ++a) {
    for (std::size_t k = ptr[a]; k < ptr[a + 1]; ++k) {
      const double bg = u[a] * q[core[k].col];
      plogp += xlog2x(core[k].value + bg) - xlog2x(bg);
    }
  }
  double col_plogp = 0.0;
  for (double v : j.col_marginal()) col_plogp += xlog2x(v);
  return std::max(0.0, -plogp + col_plogp);
}

double cond_max_entropy_classical(const JointDistribution& j) {
  const auto& u = j.background_rows();
  const auto& q = j.background_cols();
  const auto& ptr = j.row_ptr();
  const auto& core = j.core();
  double root_u = 0.0;
  for (double v : u) root_u += std::sqrt(v);
  std::vector<double> col(j.cols());
  for (std::size_t b = 0; b < j.cols(); ++b) col[b] = std::sqrt(q[b]) * root_u;
  for (std::size_t a = 0; a < j.rows(); ++a) {
    for (std::size_t k = ptr[a]; k < ptr[a + 1]; ++k) {
      const double bg = u[a] * q[core[k].col];
      col[core[k].col] += std::sqrt(core[k].value + bg) - std::sqrt(bg);
    }
  }
  double s = 0.0;
  for (double v : col) s += v * v;
  if (!(s > 0)) throw InvalidInput("distribution has no mass");
  return std::log2(s);
}

double key_rate(const BoundResult& bound, double leak) {
  if (!(leak >= 0)) throw InvalidInput("leak must be non-negative");
  return std::max(0.0, bound.clamped_bound - leak);
}

}  // namespace eurlab
