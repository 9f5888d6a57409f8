#pragma once

// End-to-end drivers: threshold contours of the modified bound, the
// time-frequency key-rate scan, homodyne saturation, the narrow-bin
// frequency attack, and randomized falsification of the bound and of the
// effective-POVM construction.
//
// Every driver that draws random numbers takes a seed and derives one
// generator per work item, so results do not depend on the thread count.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eurlab/bounds.hpp"
#include "eurlab/operators.hpp"
#include "eurlab/random.hpp"
#include "eurlab/states.hpp"

namespace eurlab {

struct ContourPoint {
  double p_z_null;
  double p_x_null;
  double raw_bound;
  double bound;  // clamped
};

struct ContourResult {
  double c_less = 0.0;
  double h_max = 0.0;
  int grid_n = 0;
  std::vector<ContourPoint> grid;  // p_z_null major, both axes i / (grid_n - 1)
  double equal_null_crossing = 0.0;
  double frontier_p_z = 0.0;
  double frontier_p_x = 0.0;  // largest p_x_null with a positive bound at frontier_p_z
};

// p with eur_modified(p, p, c_less, h_max) = 0, by bisection on [0, 1].
double equal_null_crossing(double c_less, double h_max);

// Largest p_x_null with a positive bound for the given p_z_null.
double positive_frontier(double p_z_null, double c_less, double h_max);

ContourResult threshold_contour(double c_less, double h_max, int grid_n, double frontier_p_z = 1e-3);

struct ScenarioConfig {
  std::variant<GaussianBiphoton, TmsvSpec> source = GaussianBiphoton{};
  double center_wavelength_m = 1550e-9;
  double wavelength_lo_m = 1520e-9;  // detection range, shorter edge
  double wavelength_hi_m = 1610e-9;
  double rep_rate_hz = 55.6e6;       // time window is +-1/(2 rep_rate)
  double time_bin_s = 20e-12;
  std::optional<double> freq_bin_rad_s;  // default: overlap target_overlap with the time bins
  double target_overlap = 1e-3;
  ChannelModel channel;  // distance ignored; see distances_km
  std::vector<double> distances_km = {0.0};
  SmoothParams smoothing;
  std::optional<double> c_less_override;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  // Throws InvalidInput for an empty or non-increasing distance list and for
  // inconsistent ranges.
  void validate() const;

  const GaussianBiphoton& biphoton() const;  // throws InvalidInput for other sources
  double time_window() const;                // t_c
  double omega_o() const;
  double freq_range_lo() const;  // rad/s, absolute
  double freq_range_hi() const;
  double freq_bin() const;
};

struct KeyRateRow {
  double distance_km;
  double transmission;
  double p_t_null_bob;
  double h_max_proxy;
  double leak;
  BoundResult bound;
  double key_rate;
};

struct KeyRateResult {
  std::vector<KeyRateRow> rows;
  double p_t_null_alice = 0.0;  // as fed to the bound (flushed below 2^-52)
  double p_f_null_alice = 0.0;
  double p_t_null_raw = 0.0;
  double p_f_null_raw = 0.0;
  double c_less = 0.0;
  bool c_less_overridden = false;
  double delta_t = 0.0;
  double delta_omega = 0.0;
  double t_c = 0.0;
  std::size_t time_bins = 0;
  std::size_t freq_bins = 0;
  std::optional<double> zero_rate_onset_km;  // first grid distance with zero rate
};

KeyRateResult tf_keyrate_scan(const ScenarioConfig& cfg);

struct CvSaturationReport {
  TmsvSpec spec;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double bin_width = 0.0;
  double h_max = 0.0;
  double mean_shift = 0.0;
  std::size_t bins_per_quadrature = 0;
  double p_sat_x_raw = 0.0;
  double p_sat_p_raw = 0.0;
  double p_sat_x = 0.0;  // flushed below 2^-52
  double p_sat_p = 0.0;
  double c_less = 0.0;
  BoundResult bound;
  double unmodified_bound = 0.0;
  bool abort = false;
};

CvSaturationReport cv_saturation_report(const TmsvSpec& spec, double range_lo, double range_hi, double bin_width,
                                        double h_max, double mean_shift = 0.0);

// Mean shift of the quadrature that produces saturation probability `target`.
double mean_shift_for_saturation(const TmsvSpec& spec, double range_lo, double range_hi, double target);

struct AttackEstimate {
  double value;
  double standard_error;  // from batch means
};

struct AttackReport {
  double eve_bin_width = 0.0;  // rad/s
  bool attack_active = false;
  std::size_t n_trials = 0;
  std::size_t batches = 0;
  std::uint64_t seed = 0;
  double transmission = 1.0;
  double c_less = 0.0;
  double observed_p_t_null = 0.0;
  double observed_p_f_null = 0.0;
  std::size_t surviving_time_rounds = 0;
  double h_max_plugin = 0.0;
  AttackEstimate naive;     // eur_unmodified on rounds without nulls
  AttackEstimate modified;  // eur_modified with observed null rates
  AttackEstimate difference;  // naive - modified, per batch
  bool modified_clamped = false;
  double eve_guess_probability = 0.0;  // of Alice's frequency bin, non-null rounds
  bool loophole_exhibited = false;
  std::string model_note;
};

// Monte Carlo of the attack in which Eve measures Alice's photon frequency
// in bins of width `eve_bin_width` (rad/s). A width at least as large as the
// frequency detection range means no attack. Uses cfg.distances_km.front()
// for the channel.
AttackReport narrow_bin_attack_sim(const ScenarioConfig& cfg, double eve_bin_width, std::size_t n_trials);

class TripartiteTestState {
 public:
  // Amplitudes ordered a * dB * dE + b * dE + e; throws unless the norm is
  // 1 within 1e-12 and every dimension lies in [1, 4].
  TripartiteTestState(int d_a, int d_b, int d_e, Eigen::VectorXcd amplitudes);

  int d_a() const { return d_a_; }
  int d_b() const { return d_b_; }
  int d_e() const { return d_e_; }
  const Eigen::VectorXcd& amplitudes() const { return psi_; }

  Matrix rho_a() const;
  Matrix rho_ab() const;
  // Tr_AB[(P x I x I) rho] on E, and Tr_AE[(P x I x I) rho] on B.
  Matrix eve_conditional(const Matrix& p_a) const;
  Matrix bob_conditional(const Matrix& p_a) const;

 private:
  int d_a_;
  int d_b_;
  int d_e_;
  Eigen::VectorXcd psi_;
};

// max over Eve's measurements of sum_z Tr(M_z rho_z) for subnormalized
// rho_z: exact (Helstrom) for two states. Otherwise the best of the trivial
// guess, projective measurements in the states' eigenbases, the pretty-good
// measurement and fixed-point iterations; exact for commuting states.
struct GuessResult {
  double p_guess = 0.0;
  bool exact = false;
};

GuessResult guessing_probability(const std::vector<Matrix>& states, Rng& rng, int restarts = 2,
                                 int iterations = 300);

// 2 log2 max_sigma sum_x F(rho_x, sigma) for normalized block states
// rho_x (subnormalized, summing to trace 1), by alternating maximization.
double conditional_max_entropy(const std::vector<Matrix>& states, Rng& rng, int restarts = 3);

struct InstanceEvaluation {
  double p_z_null = 0.0;
  double p_x_null = 0.0;
  double c_less = 0.0;
  double h_max = 0.0;
  double rhs = 0.0;            // raw modified bound in bits
  double guess_ceiling = 1.0;  // min(1, 2^-rhs)
  double p_guess = 0.0;        // best found
  bool exact_guess = false;
  bool searched = false;       // false when the ceiling is 1 (nothing to falsify)
  bool violation = false;
};

InstanceEvaluation evaluate_instance(const TripartiteTestState& state, const MatrixPovm& x, const MatrixPovm& z,
                                     Rng& rng, double tolerance = 1e-9);

struct FalsifierConfig {
  std::size_t n_states = 1000;
  int max_dim = 4;  // dims drawn from [2, max_dim]
  std::size_t n_measurements = 1;  // POVM pairs per state
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  unsigned threads = 0;
};

struct FalsifierReport {
  FalsifierConfig config;
  std::size_t instances = 0;
  std::size_t searched = 0;
  std::size_t exact = 0;
  std::size_t violations = 0;
  double max_excess = -1.0;  // max over instances of p_guess - ceiling
  std::optional<std::size_t> worst_instance;
  double max_nontrivial_rhs = 0.0;
  std::size_t lemma_checks = 0;
  std::size_t lemma_violations = 0;
  double lemma_max_excess = -1.0;
  std::string note;
};

FalsifierReport bound_falsifier(const FalsifierConfig& cfg);

struct EquivalenceReport {
  std::size_t trials = 0;
  int max_dim = 0;
  std::uint64_t seed = 0;
  std::size_t povm_failures = 0;
  std::size_t probability_failures = 0;
  double max_probability_error = 0.0;
  std::size_t rank_deficient_trials = 0;
};

EquivalenceReport shared_null_equivalence_check(std::size_t n_trials, int max_dim, std::uint64_t seed,
                                              unsigned threads = 0);

}  // namespace eurlab
