#pragma once

// Entropic uncertainty bounds with null outcomes, their smoothed form, and
// classical conditional entropies of binned data. All entropies in bits.

#include <optional>
#include <string>

#include "eurlab/joint_distribution.hpp"

namespace eurlab {

struct BoundInput {
  double p_z_null = 0.0;
  double p_x_null = 0.0;
  double c_less = 1.0;
  double h_max = 0.0;  // bits

  // Throws InvalidInput when a probability or c_less leaves [0, 1] or h_max
  // is not finite.
  void validate() const;
};

enum class DominantTerm { ZNull, XNull, Overlap };

const char* to_string(DominantTerm term);

struct BoundResult {
  double raw_bound = 0.0;      // may be negative or +inf
  double clamped_bound = 0.0;  // max(0, raw_bound)
  bool clamped = false;        // raw_bound < 0
  DominantTerm dominant_term = DominantTerm::Overlap;
  std::optional<std::string> diagnostic;
};

struct SmoothParams {
  double epsilon = 0.0;

  void validate() const;
};

// -log2 c - h_max; +inf for c = 0.
double eur_unmodified(double c, double h_max);

// -2 log2[ sqrt(pZ) + sqrt(pX) + sqrt(1 - pX) sqrt(c) 2^(h/2) ], evaluated in
// the log domain so large h_max cannot overflow.
BoundResult eur_modified(const BoundInput& in);

enum class SmoothingSign { Plus, Minus };

// Extremes of a null probability over the epsilon ball. The closed form is
// cos^2(a -/+ t) with sqrt(p) = cos a and 1 - eps = cos t; past the turning
// points (p >= (1 - eps)^2 for the upper, p <= 2 eps - eps^2 for the lower)
// the extremes are 1 and 0. f(p, 0) = p exactly.
double smoothing_f(double p, double eps, SmoothingSign sign);

// Smoothed bound: both nulls enter through their upper extremes, the
// sqrt(1 - pX) factor through the lower one. `h_max` is taken to be the
// smooth max-entropy at the same epsilon.
BoundResult eur_modified_smooth(const BoundInput& in, const SmoothParams& sp);

// H(A|B) = H(AB) - H(B), rows are A.
double cond_shannon(const JointDistribution& j);

// log2 sum_b ( sum_a sqrt p(a, b) )^2, the order-1/2 conditional entropy.
double cond_max_entropy_classical(const JointDistribution& j);

// max(0, clamped bound - leak); throws InvalidInput for a negative leak.
double key_rate(const BoundResult& bound, double leak);

}  // namespace eurlab
