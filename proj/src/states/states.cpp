#include "eurlab/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eurlab/error.hpp"

namespace eurlab {

namespace {

constexpr double kBandSigmas = 12.0;

// Lower and upper standard normal tails, accurate far into either side.
double phi_lower(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double phi_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// P(z0 <= Z <= z1) without cancellation in the far tails.
double normal_mass(double z0, double z1) {
  if (!(z1 > z0)) return 0.0;
  if (z0 >= 0) return phi_upper(z0) - phi_upper(z1);
  if (z1 <= 0) return phi_lower(z1) - phi_lower(z0);
  return 1.0 - phi_lower(z0) - phi_upper(z1);
}

double normal_pdf(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2 * std::numbers::pi));
}

const std::pair<std::vector<double>, std::vector<double>>& gl8() {
  static const auto rule = gauss_legendre(8);
  return rule;
}

// One direction of the binning: the variable being integrated ("outer") has
// marginal N(mean, std^2); given it, the other ("inner") is
// N(inner_mean + slope (x - mean), cond_std^2).
struct Conditional {
  double mean;
  double std;
  double inner_mean;
  double slope;
  double cond_std;
};

// var_a var_b - cov^2, factored when the variances coincide (strong
// correlation makes the direct difference lose digits).
double covariance_det(const BivariateGaussian& g) {
  if (g.var_a == g.var_b) return (g.var_a - g.cov) * (g.var_a + g.cov);
  return g.var_a * g.var_b - g.cov * g.cov;
}

Conditional condition_on_a(const BivariateGaussian& g) {
  return {g.mean_a, std::sqrt(g.var_a), g.mean_b, g.cov / g.var_a, std::sqrt(covariance_det(g) / g.var_a)};
}

Conditional condition_on_b(const BivariateGaussian& g) {
  return {g.mean_b, std::sqrt(g.var_b), g.mean_a, g.cov / g.var_b, std::sqrt(covariance_det(g) / g.var_b)};
}

struct Target {
  double lo;
  double hi;
  double* acc;
};

// Integrates density(x) * P(inner in target) over [x0, x1] for all targets.
void integrate_bin(const Conditional& c, double x0, double x1, const std::vector<Target>& targets) {
  if (targets.empty()) return;
  const double width = x1 - x0;
  const double far = std::max({std::abs(x0 - c.mean), std::abs(x1 - c.mean), c.std});
  double panels = std::ceil(std::abs(c.slope) * width / c.cond_std);
  panels = std::max(panels, std::ceil(width * far / (c.std * c.std)));
  const auto n = static_cast<std::size_t>(std::clamp(panels, 1.0, 4096.0));
  const auto& [nodes, weights] = gl8();
  const double h = width / static_cast<double>(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double left = x0 + static_cast<double>(p) * h;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double x = left + 0.5 * h * (nodes[k] + 1);
      const double w = 0.5 * h * weights[k] * normal_pdf(x, c.mean, c.std);
      if (w == 0.0) continue;
      const double m = c.inner_mean + c.slope * (x - c.mean);
      for (const auto& t : targets) {
        *t.acc += w * normal_mass((t.lo - m) / c.cond_std, (t.hi - m) / c.cond_std);
      }
    }
  }
}

// Bins of `spec` within the band [lo, hi].
std::pair<std::size_t, std::size_t> bins_in_band(const IntervalBinSpec& spec, double lo, double hi) {
  const auto& centers = spec.centers();
  const double half = spec.width() / 2;
  const auto first = std::lower_bound(centers.begin(), centers.end(), lo - half);
  const auto last = std::upper_bound(centers.begin(), centers.end(), hi + half);
  return {static_cast<std::size_t>(first - centers.begin()), static_cast<std::size_t>(last - centers.begin())};
}

double mass_of_regions(const std::vector<Interval>& regions, double mean, double std) {
  double s = 0.0;
  for (const auto& r : regions) s += normal_mass((r.lo - mean) / std, (r.hi - mean) / std);
  return s;
}

}  // namespace

double wavelength_to_omega(double wavelength_m) {
  if (!(wavelength_m > 0)) throw InvalidInput("wavelength must be positive");
  return 2 * std::numbers::pi * kSpeedOfLight / wavelength_m;
}

void GaussianBiphoton::validate() const {
  if (!(sigma_cor > 0) || !(sigma_coh > sigma_cor) || !std::isfinite(sigma_coh)) {
    throw InvalidInput("biphoton source needs sigma_coh > sigma_cor > 0");
  }
  if (!std::isfinite(omega_o)) throw InvalidInput("central frequency must be finite");
}

BivariateGaussian time_moments(const GaussianBiphoton& src) {
  src.validate();
  const double var_diff = src.sigma_cor * src.sigma_cor;
  const double sum_std =
      src.time_convention == TimeStdConvention::DirectTransform ? 2 * src.sigma_coh : src.sigma_coh;
  const double var_sum = sum_std * sum_std;
  BivariateGaussian g;
  g.var_a = g.var_b = (var_diff + var_sum) / 4;
  g.cov = (var_sum - var_diff) / 4;
  return g;
}

BivariateGaussian frequency_moments(const GaussianBiphoton& src) {
  src.validate();
  const double var_diff = 1 / (src.sigma_cor * src.sigma_cor);
  const double var_sum = 1 / (4 * src.sigma_coh * src.sigma_coh);
  BivariateGaussian g;
  g.mean_a = g.mean_b = src.omega_o;
  g.var_a = g.var_b = (var_diff + var_sum) / 4;
  g.cov = (var_diff - var_sum) / 4;  // sign flipped by Bob's mirroring
  return g;
}

MarginalStds marginal_stds(const GaussianBiphoton& src) {
  return {std::sqrt(frequency_moments(src).var_a), std::sqrt(time_moments(src).var_a)};
}

double gaussian_two_sided_tail(double mean, double std, double lo, double hi) {
  if (!(std > 0) || !std::isfinite(std)) throw InvalidInput("standard deviation must be positive and finite");
  if (!(lo < hi)) throw InvalidInput("range must satisfy lo < hi");
  const double below = std::isinf(lo) ? 0.0 : phi_lower((lo - mean) / std);
  const double above = std::isinf(hi) ? 0.0 : phi_upper((hi - mean) / std);
  return std::min(1.0, below + above);
}

double flush_below_machine_epsilon(double p) {
  return p < std::numeric_limits<double>::epsilon() ? 0.0 : p;
}

double null_prob_frequency(const GaussianBiphoton& src, double range_lo, double range_hi) {
  if (!(range_lo < range_hi)) throw InvalidInput("frequency range must satisfy lo < hi");
  if (!(range_lo <= src.omega_o && src.omega_o <= range_hi)) {
    throw InvalidInput("frequency range must contain the central frequency");
  }
  return gaussian_two_sided_tail(src.omega_o, marginal_stds(src).frequency, range_lo, range_hi);
}

double null_prob_time(const GaussianBiphoton& src, double t_c) {
  if (!(t_c > 0)) throw InvalidInput("time window half-width must be positive");
  return gaussian_two_sided_tail(0.0, marginal_stds(src).time, -t_c, t_c);
}

double ChannelModel::transmission() const {
  validate();
  return std::pow(10.0, -loss_db_per_km * distance_km / 10);
}

void ChannelModel::validate() const {
  if (!(loss_db_per_km >= 0) || !std::isfinite(loss_db_per_km)) throw InvalidInput("loss must be finite and >= 0");
  if (!(distance_km >= 0) || !std::isfinite(distance_km)) throw InvalidInput("distance must be finite and >= 0");
}

double apply_loss_to_null_prob(double p_null, const ChannelModel& channel) {
  if (!(p_null >= 0 && p_null <= 1)) throw InvalidInput("null probability must lie in [0, 1]");
  return 1 - channel.transmission() * (1 - p_null);
}

JointDistribution bin_bivariate_gaussian(const BivariateGaussian& g, const IntervalBinSpec& bins_a,
                                         const IntervalBinSpec& bins_b) {
  if (!(g.var_a > 0) || !(g.var_b > 0) || !(covariance_det(g) > 0)) {
    throw InvalidInput("covariance must be positive definite");
  }
  const std::size_t na = bins_a.size();
  const std::size_t nb = bins_b.size();
  std::vector<double> row_centers = bins_a.centers();
  row_centers.push_back(std::numeric_limits<double>::quiet_NaN());
  std::vector<double> col_centers = bins_b.centers();
  col_centers.push_back(std::numeric_limits<double>::quiet_NaN());
  JointDistribution joint(row_centers, na, col_centers, nb);

  const Conditional on_a = condition_on_a(g);
  const Conditional on_b = condition_on_b(g);
  const std::vector<Interval> null_a = bins_a.null_regions();
  const std::vector<Interval> null_b = bins_b.null_regions();

  std::vector<double> acc;
  std::vector<Target> targets;
  std::vector<JointDistribution::Entry> row;
  for (std::size_t a = 0; a < na; ++a) {
    const Interval bin = bins_a.bin(a);
    if (normal_mass((bin.lo - on_a.mean) / on_a.std, (bin.hi - on_a.mean) / on_a.std) == 0.0) {
      joint.append_row(a, {});
      continue;
    }
    const double m0 = on_a.inner_mean + on_a.slope * (bin.lo - on_a.mean);
    const double m1 = on_a.inner_mean + on_a.slope * (bin.hi - on_a.mean);
    const double band_lo = std::min(m0, m1) - kBandSigmas * on_a.cond_std;
    const double band_hi = std::max(m0, m1) + kBandSigmas * on_a.cond_std;
    const auto [first, last] = bins_in_band(bins_b, band_lo, band_hi);
    acc.assign(last - first + 1, 0.0);
    targets.clear();
    for (std::size_t j = first; j < last; ++j) {
      const Interval b = bins_b.bin(j);
      targets.push_back({b.lo, b.hi, &acc[j - first]});
    }
    for (const auto& r : null_b) {
      if (r.hi >= band_lo && r.lo <= band_hi) targets.push_back({r.lo, r.hi, &acc.back()});
    }
    integrate_bin(on_a, bin.lo, bin.hi, targets);
    row.clear();
    for (std::size_t j = first; j < last; ++j) {
      if (acc[j - first] > 0) row.push_back({j, acc[j - first]});
    }
    if (acc.back() > 0) row.push_back({nb, acc.back()});
    joint.append_row(a, row);
  }

  // Alice's null row, integrating over Bob's outcome instead.
  std::vector<double> null_row(nb + 1, 0.0);
  for (std::size_t j = 0; j < nb; ++j) {
    const Interval bin = bins_b.bin(j);
    if (normal_mass((bin.lo - on_b.mean) / on_b.std, (bin.hi - on_b.mean) / on_b.std) == 0.0) continue;
    const double m0 = on_b.inner_mean + on_b.slope * (bin.lo - on_b.mean);
    const double m1 = on_b.inner_mean + on_b.slope * (bin.hi - on_b.mean);
    const double band_lo = std::min(m0, m1) - kBandSigmas * on_b.cond_std;
    const double band_hi = std::max(m0, m1) + kBandSigmas * on_b.cond_std;
    targets.clear();
    for (const auto& r : null_a) {
      if (r.hi >= band_lo && r.lo <= band_hi) targets.push_back({r.lo, r.hi, &null_row[j]});
    }
    integrate_bin(on_b, bin.lo, bin.hi, targets);
  }
  double informative = 0.0;
  for (std::size_t j = 0; j < nb; ++j) informative += null_row[j];
  null_row[nb] = std::max(0.0, mass_of_regions(null_a, on_a.mean, on_a.std) - informative);
  row.clear();
  for (std::size_t j = 0; j <= nb; ++j) {
    if (null_row[j] > 0) row.push_back({j, null_row[j]});
  }
  joint.append_row(na, row);
  joint.finish();
  return joint;
}

JointDistribution apply_channel(const JointDistribution& lossless, const ChannelModel& channel,
                                bool bob_null_replacement) {
  const double eta = channel.transmission();
  std::vector<double> replacement;
  if (bob_null_replacement) replacement = lossless.public_row_distribution();
  return lossless.with_loss(eta, bob_null_replacement, replacement);
}

JointDistribution joint_time_distribution(const GaussianBiphoton& src, const IntervalBinSpec& bins_a,
                                          const IntervalBinSpec& bins_b, const ChannelModel& channel,
                                          bool bob_null_replacement) {
  return apply_channel(bin_bivariate_gaussian(time_moments(src), bins_a, bins_b), channel, bob_null_replacement);
}

JointDistribution joint_frequency_distribution(const GaussianBiphoton& src, const IntervalBinSpec& bins_a,
                                               const IntervalBinSpec& bins_b, const ChannelModel& channel,
                                               bool bob_null_replacement) {
  return apply_channel(bin_bivariate_gaussian(frequency_moments(src), bins_a, bins_b), channel,
                       bob_null_replacement);
}

double TmsvSpec::quadrature_variance() const {
  validate();
  const double vacuum_variance = vacuum == VacuumConvention::UnitVariance ? 1.0 : 0.5;
  return std::pow(10.0, antisqueezing_db / 10) * vacuum_variance;
}

void TmsvSpec::validate() const {
  if (!(antisqueezing_db >= 0) || !std::isfinite(antisqueezing_db)) {
    throw InvalidInput("anti-squeezing must be finite and >= 0 dB");
  }
}

double tmsv_saturation_prob(const TmsvSpec& spec, double range_lo, double range_hi, double mean_shift) {
  if (!(range_lo < 0 && 0 < range_hi)) throw InvalidInput("quadrature range must contain 0");
  return gaussian_two_sided_tail(mean_shift, std::sqrt(spec.quadrature_variance()), range_lo, range_hi);
}

}  // namespace eurlab
