#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eurlab/error.hpp"
#include "eurlab/parallel.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab {

void ScenarioConfig::validate() const {
  if (distances_km.empty()) throw InvalidInput("distance list is empty");
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    if (!(distances_km[i] >= 0) || !std::isfinite(distances_km[i])) throw InvalidInput("distances must be finite and >= 0");
    if (i > 0 && !(distances_km[i] > distances_km[i - 1])) throw InvalidInput("distances must be strictly increasing");
  }
  if (!(wavelength_lo_m > 0 && wavelength_lo_m < center_wavelength_m && center_wavelength_m < wavelength_hi_m)) {
    throw InvalidInput("wavelengths must satisfy 0 < lo < center < hi");
  }
  if (!(rep_rate_hz > 0) || !std::isfinite(rep_rate_hz)) throw InvalidInput("repetition rate must be positive");
  if (!(time_bin_s > 0)) throw InvalidInput("time bin width must be positive");
  if (freq_bin_rad_s && !(*freq_bin_rad_s > 0)) throw InvalidInput("frequency bin width must be positive");
  if (!(target_overlap > 0 && target_overlap < 1)) throw InvalidInput("target overlap must lie in (0, 1)");
  if (c_less_override && !(*c_less_override >= 0 && *c_less_override <= 1)) {
    throw InvalidInput("overlap override must lie in [0, 1]");
  }
  channel.validate();
  smoothing.validate();
  std::visit([](const auto& s) { s.validate(); }, source);
}

const GaussianBiphoton& ScenarioConfig::biphoton() const {
  const auto* src = std::get_if<GaussianBiphoton>(&source);
  if (!src) throw InvalidInput("scenario needs a biphoton source");
  return *src;
}

double ScenarioConfig::time_window() const { return 1 / (2 * rep_rate_hz); }
double ScenarioConfig::omega_o() const { return wavelength_to_omega(center_wavelength_m); }
double ScenarioConfig::freq_range_lo() const { return wavelength_to_omega(wavelength_hi_m); }
double ScenarioConfig::freq_range_hi() const { return wavelength_to_omega(wavelength_lo_m); }

double ScenarioConfig::freq_bin() const {
  return freq_bin_rad_s ? *freq_bin_rad_s : frequency_width_for_overlap(target_overlap, time_bin_s);
}

namespace {

// Frequencies are handled as detunings from omega_o; absolute values near
// 1e15 rad/s would cost nine digits in every bin edge.
IntervalBinSpec detuning_bins(const ScenarioConfig& cfg) {
  const double wo = cfg.omega_o();
  return IntervalBinSpec::uniform(cfg.freq_bin(), cfg.freq_range_lo() - wo, cfg.freq_range_hi() - wo);
}

GaussianBiphoton detuned(const GaussianBiphoton& src) {
  GaussianBiphoton out = src;
  out.omega_o = 0.0;
  return out;
}

}  // namespace

KeyRateResult tf_keyrate_scan(const ScenarioConfig& cfg) {
  cfg.validate();
  GaussianBiphoton src = cfg.biphoton();
  src.omega_o = cfg.omega_o();

  KeyRateResult out;
  out.t_c = cfg.time_window();
  out.delta_t = cfg.time_bin_s;
  out.delta_omega = cfg.freq_bin();
  out.p_t_null_raw = null_prob_time(src, out.t_c);
  out.p_f_null_raw = null_prob_frequency(src, cfg.freq_range_lo(), cfg.freq_range_hi());
  out.p_t_null_alice = flush_below_machine_epsilon(out.p_t_null_raw);
  out.p_f_null_alice = flush_below_machine_epsilon(out.p_f_null_raw);
  out.c_less_overridden = cfg.c_less_override.has_value();
  out.c_less = cfg.c_less_override ? *cfg.c_less_override : analytic_overlap(out.delta_omega, out.delta_t);

  const IntervalBinSpec time_bins = IntervalBinSpec::uniform(cfg.time_bin_s, -out.t_c, out.t_c);
  const IntervalBinSpec freq_bins = detuning_bins(cfg);
  out.time_bins = time_bins.size();
  out.freq_bins = freq_bins.size();
  const JointDistribution time_base = bin_bivariate_gaussian(time_moments(src), time_bins, time_bins);
  const JointDistribution freq_base = bin_bivariate_gaussian(frequency_moments(detuned(src)), freq_bins, freq_bins);

  out.rows.resize(cfg.distances_km.size());
  parallel_for(cfg.distances_km.size(), cfg.threads, [&](std::size_t i) {
    ChannelModel channel = cfg.channel;
    channel.distance_km = cfg.distances_km[i];
    KeyRateRow& row = out.rows[i];
    row.distance_km = channel.distance_km;
    row.transmission = channel.transmission();
    row.p_t_null_bob = apply_loss_to_null_prob(out.p_t_null_alice, channel);
    row.h_max_proxy = cond_max_entropy_classical(apply_channel(time_base, channel, true).without_null_row());
    row.leak = cond_shannon(apply_channel(freq_base, channel, true));
    const BoundInput in{out.p_f_null_alice, out.p_t_null_alice, out.c_less, row.h_max_proxy};
    row.bound = cfg.smoothing.epsilon > 0 ? eur_modified_smooth(in, cfg.smoothing) : eur_modified(in);
    row.key_rate = key_rate(row.bound, row.leak);
  });
  for (const auto& row : out.rows) {
    if (row.key_rate == 0.0) {
      out.zero_rate_onset_km = row.distance_km;
      break;
    }
  }
  return out;
}

namespace {

constexpr std::size_t kBatches = 20;

// Density proportional to sin(u)^2 / u^2, by rejection from a Cauchy proposal
// (the ratio to the proposal is at most 2).
double sample_sinc_squared(Rng& rng) {
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (;;) {
    const double u = cauchy(rng);
    const double s = u == 0.0 ? 1.0 : std::sin(u) / u;
    if (uniform(rng) * 2 <= s * s * (1 + u * u)) return u;
  }
}

struct BatchTally {
  std::size_t time_rounds = 0;
  std::size_t time_nulls = 0;
  std::size_t freq_rounds = 0;
  std::size_t freq_nulls = 0;
  std::size_t freq_informative = 0;
  std::size_t eve_correct = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // surviving time rounds (Alice, Bob)
};

// Plug-in order-1/2 conditional entropy of the surviving time rounds.
double plugin_h_max(std::vector<std::pair<std::size_t, std::size_t>> pairs, std::size_t bins) {
  if (pairs.empty()) return 0.0;
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> labels(bins);
  for (std::size_t i = 0; i < bins; ++i) labels[i] = static_cast<double>(i);
  JointDistribution j(labels, std::nullopt, labels, std::nullopt);
  const double w = 1.0 / static_cast<double>(pairs.size());
  std::vector<JointDistribution::Entry> row;
  std::size_t k = 0;
  while (k < pairs.size()) {
    const std::size_t a = pairs[k].first;
    row.clear();
    while (k < pairs.size() && pairs[k].first == a) {
      const std::size_t b = pairs[k].second;
      double count = 0;
      while (k < pairs.size() && pairs[k].first == a && pairs[k].second == b) {
        count += 1;
        ++k;
      }
      row.push_back({b, count * w});
    }
    j.append_row(a, row);
  }
  j.finish();
  return cond_max_entropy_classical(j);
}

AttackEstimate mean_and_error(const std::vector<double>& values, double pooled) {
  if (values.size() < 2) return {pooled, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return {pooled, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace

AttackReport narrow_bin_attack_sim(const ScenarioConfig& cfg, double eve_bin_width, std::size_t n_trials) {
  cfg.validate();
  if (n_trials < 100) throw InvalidInput("attack simulation needs at least 100 trials");
  if (!(eve_bin_width > 0)) throw InvalidInput("Eve's bin width must be positive");
  const GaussianBiphoton src = detuned(cfg.biphoton());
  ChannelModel channel = cfg.channel;
  channel.distance_km = cfg.distances_km.front();

  AttackReport rep;
  rep.eve_bin_width = eve_bin_width;
  rep.n_trials = n_trials;
  rep.batches = kBatches;
  rep.seed = cfg.seed;
  rep.transmission = channel.transmission();
  rep.attack_active = eve_bin_width < cfg.freq_range_hi() - cfg.freq_range_lo();
  rep.model_note =
      "Eve projects Alice's photon onto a frequency interval of her bin width; Alice's arrival time then follows "
      "the sinc^2 law of that interval and Bob's arrival time keeps its unconditioned Gaussian marginal. "
      "Each trial uses one basis for both parties, time or frequency with equal probability.";

  const double t_c = cfg.time_window();
  const IntervalBinSpec time_bins = IntervalBinSpec::uniform(cfg.time_bin_s, -t_c, t_c);
  const IntervalBinSpec freq_bins = detuning_bins(cfg);
  rep.c_less = cfg.c_less_override ? *cfg.c_less_override : analytic_overlap(cfg.freq_bin(), cfg.time_bin_s);

  const BivariateGaussian fg = frequency_moments(src);
  const BivariateGaussian tg = time_moments(src);
  const double f_std = std::sqrt(fg.var_a);
  const double t_std = std::sqrt(tg.var_a);
  const double t_slope = tg.cov / tg.var_a;
  const double t_cond = std::sqrt((tg.var_a - tg.cov) * (tg.var_a + tg.cov) / tg.var_a);
  const double eta = rep.transmission;
  const double W = eve_bin_width;
  const auto prior_guess = freq_bins.locate(0.0);

  std::vector<BatchTally> tallies(kBatches);
  parallel_for(kBatches, cfg.threads, [&](std::size_t b) {
    Rng rng(derive_seed(cfg.seed, b));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::size_t begin = n_trials * b / kBatches;
    const std::size_t end = n_trials * (b + 1) / kBatches;
    BatchTally& tally = tallies[b];
    for (std::size_t trial = begin; trial < end; ++trial) {
      const bool time_round = uniform(rng) < 0.5;
      const bool bob_lost = uniform(rng) >= eta;
      double omega_a = f_std * normal(rng);
      std::optional<std::size_t> eve_guess = prior_guess;
      if (rep.attack_active) {
        const double k = std::floor(omega_a / W + 0.5);
        omega_a = (k + uniform(rng) - 0.5) * W;
        eve_guess = freq_bins.locate(k * W);
      }
      if (time_round) {
        double t_a;
        double t_b;
        if (rep.attack_active) {
          t_a = 2 * sample_sinc_squared(rng) / W;
          t_b = t_std * normal(rng);
        } else {
          t_a = t_std * normal(rng);
          t_b = t_slope * t_a + t_cond * normal(rng);
        }
        ++tally.time_rounds;
        const auto a = time_bins.locate(t_a);
        if (!a) {
          ++tally.time_nulls;
          continue;
        }
        const auto bob = bob_lost ? std::nullopt : time_bins.locate(t_b);
        if (bob) tally.pairs.emplace_back(*a, *bob);
      } else {
        ++tally.freq_rounds;
        const auto a = freq_bins.locate(omega_a);
        if (!a) {
          ++tally.freq_nulls;
          continue;
        }
        ++tally.freq_informative;
        if (eve_guess && *eve_guess == *a) ++tally.eve_correct;
      }
    }
  });

  auto estimates = [&](const BatchTally& t, double& naive, double& modified, double& h) {
    const double p_t = t.time_rounds ? static_cast<double>(t.time_nulls) / static_cast<double>(t.time_rounds) : 0.0;
    const double p_f = t.freq_rounds ? static_cast<double>(t.freq_nulls) / static_cast<double>(t.freq_rounds) : 0.0;
    h = plugin_h_max(t.pairs, time_bins.size());
    naive = eur_unmodified(rep.c_less, h);
    const BoundResult r = eur_modified({p_f, p_t, rep.c_less, h});
    modified = r.clamped_bound;
    return r;
  };

  BatchTally pooled;
  std::vector<double> naive_values;
  std::vector<double> modified_values;
  std::vector<double> diff_values;
  for (const auto& t : tallies) {
    pooled.time_rounds += t.time_rounds;
    pooled.time_nulls += t.time_nulls;
    pooled.freq_rounds += t.freq_rounds;
    pooled.freq_nulls += t.freq_nulls;
    pooled.freq_informative += t.freq_informative;
    pooled.eve_correct += t.eve_correct;
    pooled.pairs.insert(pooled.pairs.end(), t.pairs.begin(), t.pairs.end());
    if (t.pairs.empty()) continue;  // no surviving rounds: this batch has no naive estimate
    double naive = 0.0;
    double modified = 0.0;
    double h = 0.0;
    estimates(t, naive, modified, h);
    naive_values.push_back(naive);
    modified_values.push_back(modified);
    diff_values.push_back(naive - modified);
  }

  double naive = 0.0;
  double modified = 0.0;
  const BoundResult pooled_bound = estimates(pooled, naive, modified, rep.h_max_plugin);
  rep.observed_p_t_null =
      pooled.time_rounds ? static_cast<double>(pooled.time_nulls) / static_cast<double>(pooled.time_rounds) : 0.0;
  rep.observed_p_f_null =
      pooled.freq_rounds ? static_cast<double>(pooled.freq_nulls) / static_cast<double>(pooled.freq_rounds) : 0.0;
  rep.surviving_time_rounds = pooled.pairs.size();
  rep.naive = mean_and_error(naive_values, naive);
  rep.modified = mean_and_error(modified_values, modified);
  rep.difference = mean_and_error(diff_values, naive - modified);
  rep.modified_clamped = pooled_bound.clamped;
  rep.eve_guess_probability = pooled.freq_informative ? static_cast<double>(pooled.eve_correct) /
                                                            static_cast<double>(pooled.freq_informative)
                                                      : 0.0;
  rep.loophole_exhibited = rep.naive.value > 0 && rep.modified_clamped && rep.eve_guess_probability >= 0.99;
  return rep;
}

}  // namespace eurlab
