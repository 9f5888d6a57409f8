#include <cmath>

#include "eurlab/error.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab {

CvSaturationReport cv_saturation_report(const TmsvSpec& spec, double range_lo, double range_hi, double bin_width,
                                        double h_max, double mean_shift) {
  spec.validate();
  CvSaturationReport rep;
  rep.spec = spec;
  rep.range_lo = range_lo;
  rep.range_hi = range_hi;
  rep.bin_width = bin_width;
  rep.h_max = h_max;
  rep.mean_shift = mean_shift;
  if (std::isfinite(range_lo) && std::isfinite(range_hi)) {
    rep.bins_per_quadrature = IntervalBinSpec::uniform(bin_width, range_lo, range_hi).size();
  }
  rep.p_sat_x_raw = tmsv_saturation_prob(spec, range_lo, range_hi, mean_shift);
  rep.p_sat_p_raw = tmsv_saturation_prob(spec, range_lo, range_hi, mean_shift);
  rep.p_sat_x = flush_below_machine_epsilon(rep.p_sat_x_raw);
  rep.p_sat_p = flush_below_machine_epsilon(rep.p_sat_p_raw);
  rep.c_less = quadrature_bin_overlap(bin_width);
  rep.bound = eur_modified({rep.p_sat_x, rep.p_sat_p, rep.c_less, h_max});
  rep.unmodified_bound = eur_unmodified(rep.c_less, h_max);
  rep.abort = rep.bound.clamped;
  return rep;
}

double mean_shift_for_saturation(const TmsvSpec& spec, double range_lo, double range_hi, double target) {
  const double base = tmsv_saturation_prob(spec, range_lo, range_hi, 0.0);
  if (!(target > base && target < 1)) throw InvalidInput("target saturation must lie between the unshifted value and 1");
  double lo = 0.0;
  double hi = (range_hi - range_lo) + 40 * std::sqrt(spec.quadrature_variance());
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tmsv_saturation_prob(spec, range_lo, range_hi, mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace eurlab
