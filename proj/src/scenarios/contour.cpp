#include "eurlab/scenarios.hpp"

#include "eurlab/error.hpp"

namespace eurlab {

namespace {

double raw(double pz, double px, double c, double h) { return eur_modified({pz, px, c, h}).raw_bound; }

// Largest p in [0, 1] with f(p) > 0 for a decreasing f, by bisection.
template <class F>
double last_positive(F f) {
  if (!(f(0.0) > 0)) return 0.0;
  if (f(1.0) > 0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double equal_null_crossing(double c_less, double h_max) {
  return last_positive([&](double p) { return raw(p, p, c_less, h_max); });
}

double positive_frontier(double p_z_null, double c_less, double h_max) {
  return last_positive([&](double p) { return raw(p_z_null, p, c_less, h_max); });
}

ContourResult threshold_contour(double c_less, double h_max, int grid_n, double frontier_p_z) {
  if (grid_n < 2) throw InvalidInput("contour grid needs at least 2 points per axis");
  ContourResult out;
  out.c_less = c_less;
  out.h_max = h_max;
  out.grid_n = grid_n;
  out.grid.reserve(static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n));
  const double step = 1.0 / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    const double pz = i == grid_n - 1 ? 1.0 : i * step;
    for (int j = 0; j < grid_n; ++j) {
      const double px = j == grid_n - 1 ? 1.0 : j * step;
      const BoundResult r = eur_modified({pz, px, c_less, h_max});
      out.grid.push_back({pz, px, r.raw_bound, r.clamped_bound});
    }
  }
  out.equal_null_crossing = equal_null_crossing(c_less, h_max);
  out.frontier_p_z = frontier_p_z;
  out.frontier_p_x = positive_frontier(frontier_p_z, c_less, h_max);
  return out;
}

}  // namespace eurlab
