#pragma once

// Binned measurements of continuous observables (arrival time / frequency,
// homodyne quadratures) and the overlap of a pair of bins from conjugate
// observables.
//
// Bins are kept symbolic. A bin of width w centered at x0 is the projector
// onto [x0 - w/2, x0 + w/2]; the null element is everything outside the
// union of bins (the part of the line the detector cannot resolve).
//
// For conjugate bins of widths dw (frequency, measure dw/2pi) and dt the
// squared overlap ||T F||^2 is the top eigenvalue of the time- and
// band-limiting operator with kernel sin(dw (t - t')/2) / (pi (t - t')) on
// [-dt/2, dt/2]. After rescaling it depends only on the bandwidth
// parameter c = dw dt / 4 and equals (2c/pi) R_00(c, 1)^2, R_00 the radial
// prolate spheroidal function.

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace eurlab {

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

class IntervalBinSpec {
 public:
  // Throws InvalidInput when the width is not positive, the range is empty,
  // bins overlap or a bin leaves the range.
  IntervalBinSpec(std::vector<double> centers, double width, double range_lo, double range_hi);

  // As many bins of `width` as fit in [range_lo, range_hi], centered as a
  // block inside the range.
  static IntervalBinSpec uniform(double width, double range_lo, double range_hi);

  const std::vector<double>& centers() const { return centers_; }
  double width() const { return width_; }
  double range_lo() const { return range_lo_; }
  double range_hi() const { return range_hi_; }
  std::size_t size() const { return centers_.size(); }
  Interval bin(std::size_t i) const { return {centers_[i] - width_ / 2, centers_[i] + width_ / 2}; }

  // Index of the bin containing x (half-open [lo, hi)), or nothing.
  std::optional<std::size_t> locate(double x) const;

  // Complement of the union of bins, as disjoint intervals. The two outer
  // pieces are semi-infinite.
  std::vector<Interval> null_regions() const;

 private:
  std::vector<double> centers_;  // ascending
  double width_;
  double range_lo_;
  double range_hi_;
};

// Number of bins of `width` that fit in a window of length `span`, robust to
// round-off when span/width is an integer up to a few ulps.
std::size_t bins_that_fit(double span, double width);

enum class ObservableKind { ArrivalTime, Frequency, QuadratureX, QuadratureP };

struct BinnedPovm {
  ObservableKind kind;
  IntervalBinSpec bins;
  std::vector<Interval> null_regions;

  std::size_t outcomes() const { return bins.size() + 1; }  // bins plus the null outcome
};

struct ConjugatePovmPair {
  BinnedPovm first;
  BinnedPovm second;
};

// Frequency bins in rad/s, time bins in seconds.
ConjugatePovmPair build_time_frequency_povms(const IntervalBinSpec& freq, const IntervalBinSpec& time);

// Quadrature bins in the units where [x, p] = i. Widths must match.
ConjugatePovmPair build_quadrature_povms(const IntervalBinSpec& x, const IntervalBinSpec& p);

// Overlap of a frequency bin (rad/s) with a time bin (s), evaluated through
// the Legendre expansion of the prolate spheroidal functions.
double analytic_overlap(double delta_omega, double delta_t);

// Same quantity as a function of the bandwidth parameter c = dw dt / 4.
double prolate_top_eigenvalue(double c);

// Overlap of two quadrature bins of equal width.
double quadrature_bin_overlap(double width);

enum class QuadratureRule { GaussLegendre, Midpoint };

struct SlepianGrid {
  std::size_t n_points = 128;
  QuadratureRule rule = QuadratureRule::GaussLegendre;
  double rtol = 1e-6;
  int max_doublings = 6;
};

struct SlepianOracleResult {
  double eigenvalue;
  std::size_t n_points;  // grid size at which the result converged
  double last_change;    // relative change of the final doubling
};

// Nystrom discretization of the band-limiting kernel on [-dt/2, dt/2];
// doubles the grid until the top eigenvalue moves by less than grid.rtol.
// Throws NumericalError when max_doublings is exhausted.
SlepianOracleResult slepian_overlap_oracle(double delta_omega, double delta_t, const SlepianGrid& grid = {});

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n);

// Frequency bin width that gives `target` overlap with time bins of `delta_t`.
double frequency_width_for_overlap(double target, double delta_t);

}  // namespace eurlab
