#pragma once

// Source models and their binned outcome statistics.

#include <cstdint>

#include "eurlab/continuous_povm.hpp"
#include "eurlab/joint_distribution.hpp"

namespace eurlab {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// rad/s for a vacuum wavelength in meters.
double wavelength_to_omega(double wavelength_m);

enum class TimeStdConvention {
  DirectTransform,  // Fourier transform of the spectral amplitude as written
  HalvedSumWidth,   // sum-time width set by sigma_coh rather than 2 sigma_coh
};

// Two-photon spectral amplitude Gaussian in the frequency difference (scale
// 1/sigma_cor) and in the frequency sum (scale 1/sigma_coh).
struct GaussianBiphoton {
  double sigma_coh = 6e-9;   // s
  double sigma_cor = 2e-12;  // s
  double omega_o = 0.0;      // rad/s, central frequency of each photon
  TimeStdConvention time_convention = TimeStdConvention::HalvedSumWidth;

  // Throws InvalidInput unless sigma_coh > sigma_cor > 0.
  void validate() const;
};

// Second moments of a pair of jointly Gaussian variables.
struct BivariateGaussian {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double var_a = 1.0;
  double var_b = 1.0;
  double cov = 0.0;
};

// Arrival times (s) of the two photons, centered at zero.
BivariateGaussian time_moments(const GaussianBiphoton& src);

// Frequencies (rad/s). Bob's frequency is reported mirrored about omega_o,
// 2 omega_o - omega_B, so that his outcome is positively correlated with
// Alice's and bin indices can be matched one to one.
BivariateGaussian frequency_moments(const GaussianBiphoton& src);

struct MarginalStds {
  double frequency;  // rad/s, either photon
  double time;       // s, either photon
};

MarginalStds marginal_stds(const GaussianBiphoton& src);

// Probability mass of N(mean, std^2) outside [lo, hi]; either bound may be
// infinite.
double gaussian_two_sided_tail(double mean, double std, double lo, double hi);

// Probabilities below 2^-52 carry no information relative to 1 in double
// precision; they are reported as 0.
double flush_below_machine_epsilon(double p);

double null_prob_frequency(const GaussianBiphoton& src, double range_lo, double range_hi);
double null_prob_time(const GaussianBiphoton& src, double t_c);

struct ChannelModel {
  double loss_db_per_km = 0.2;
  double distance_km = 0.0;

  double transmission() const;
  void validate() const;
};

// 1 - eta (1 - p_null)
double apply_loss_to_null_prob(double p_null, const ChannelModel& channel);

// Bins a bivariate Gaussian on the two specs, with a null row and column
// holding the mass outside each party's bins. Cells further than 12
// conditional standard deviations from the correlation line are omitted.
JointDistribution bin_bivariate_gaussian(const BivariateGaussian& g, const IntervalBinSpec& bins_a,
                                         const IntervalBinSpec& bins_b);

// Bob's outcome is lost with probability 1 - eta (counted as null); with
// `bob_null_replacement` his nulls are replaced by an independent draw from
// Alice's public non-null distribution. Requires equal bin counts.
JointDistribution apply_channel(const JointDistribution& lossless, const ChannelModel& channel,
                                bool bob_null_replacement);

JointDistribution joint_time_distribution(const GaussianBiphoton& src, const IntervalBinSpec& bins_a,
                                          const IntervalBinSpec& bins_b, const ChannelModel& channel,
                                          bool bob_null_replacement);

// Bob's axis uses the mirrored frequency of frequency_moments.
JointDistribution joint_frequency_distribution(const GaussianBiphoton& src, const IntervalBinSpec& bins_a,
                                               const IntervalBinSpec& bins_b, const ChannelModel& channel,
                                               bool bob_null_replacement);

enum class VacuumConvention {
  UnitVariance,  // vacuum quadrature variance 1
  HalfVariance,  // vacuum quadrature variance 1/2, i.e. [x, p] = i
};

struct TmsvSpec {
  double antisqueezing_db = 19.3;
  VacuumConvention vacuum = VacuumConvention::HalfVariance;

  double quadrature_variance() const;
  void validate() const;
};

// Mass of a quadrature of the spec outside [lo, hi]; `mean_shift`
// displaces the quadrature (used to emulate a saturation attack).
double tmsv_saturation_prob(const TmsvSpec& spec, double range_lo, double range_hi, double mean_shift = 0.0);

}  // namespace eurlab
