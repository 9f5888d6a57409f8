#include "eurlab/reports.hpp"

#include <cmath>
#include <ostream>

#include "eurlab/format.hpp"

namespace eurlab::report {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json to_json(const BoundResult& r) {
  Json j;
  j["raw_bound_bits"] = number(r.raw_bound);
  j["clamped_bound_bits"] = number(r.clamped_bound);
  j["clamped"] = r.clamped;
  j["dominant_term"] = to_string(r.dominant_term);
  j["diagnostic"] = r.diagnostic ? Json(*r.diagnostic) : Json(nullptr);
  return j;
}

Json to_json(const PovmReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["dim"] = r.dim;
  j["worst_hermiticity"] = number(r.worst_hermiticity);
  j["min_eigenvalue"] = number(r.min_eigenvalue);
  j["worst_sum_deviation"] = number(r.worst_sum_deviation);
  Json v = Json::array();
  for (const auto& x : r.violations) {
    Json e;
    e["kind"] = to_string(x.kind);
    e["element"] = x.element ? Json(*x.element) : Json(nullptr);
    e["magnitude"] = number(x.magnitude);
    v.push_back(e);
  }
  j["violations"] = v;
  j["note"] = r.note ? Json(*r.note) : Json(nullptr);
  return j;
}

Json to_json(const ContourResult& r) {
  Json j;
  j["c_less"] = number(r.c_less);
  j["h_max"] = number(r.h_max);
  j["grid_n"] = r.grid_n;
  j["equal_null_crossing"] = number(r.equal_null_crossing);
  j["frontier_p_z"] = number(r.frontier_p_z);
  j["frontier_p_x"] = number(r.frontier_p_x);
  return j;
}

Json to_json(const KeyRateResult& r) {
  Json j;
  j["h_max_source"] = "proxy: classical order-1/2 conditional entropy of the binned arrival times";
  j["p_t_null_alice"] = number(r.p_t_null_alice);
  j["p_f_null_alice"] = number(r.p_f_null_alice);
  j["p_t_null_raw"] = number(r.p_t_null_raw);
  j["p_f_null_raw"] = number(r.p_f_null_raw);
  j["c_less"] = number(r.c_less);
  j["c_less_overridden"] = r.c_less_overridden;
  j["delta_t"] = number(r.delta_t);
  j["delta_omega"] = number(r.delta_omega);
  j["t_c"] = number(r.t_c);
  j["time_bins"] = r.time_bins;
  j["freq_bins"] = r.freq_bins;
  j["zero_rate_onset_km"] = r.zero_rate_onset_km ? number(*r.zero_rate_onset_km) : Json(nullptr);
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json e;
    e["distance_km"] = number(row.distance_km);
    e["transmission"] = number(row.transmission);
    e["p_t_null_bob"] = number(row.p_t_null_bob);
    e["h_max_proxy"] = number(row.h_max_proxy);
    e["leak"] = number(row.leak);
    e["bound"] = to_json(row.bound);
    e["key_rate"] = number(row.key_rate);
    rows.push_back(e);
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const CvSaturationReport& r) {
  Json j;
  j["antisqueezing_db"] = number(r.spec.antisqueezing_db);
  j["vacuum"] = r.spec.vacuum == VacuumConvention::HalfVariance ? "half" : "unit";
  j["quadrature_variance"] = number(r.spec.quadrature_variance());
  j["range_lo"] = number(r.range_lo);
  j["range_hi"] = number(r.range_hi);
  j["bin_width"] = number(r.bin_width);
  j["h_max"] = number(r.h_max);
  j["mean_shift"] = number(r.mean_shift);
  j["bins_per_quadrature"] = r.bins_per_quadrature;
  j["p_sat_x_raw"] = number(r.p_sat_x_raw);
  j["p_sat_p_raw"] = number(r.p_sat_p_raw);
  j["p_sat_x"] = number(r.p_sat_x);
  j["p_sat_p"] = number(r.p_sat_p);
  j["c_less"] = number(r.c_less);
  j["bound"] = to_json(r.bound);
  j["unmodified_bound"] = number(r.unmodified_bound);
  j["abort"] = r.abort;
  return j;
}

namespace {

Json estimate(const AttackEstimate& e) {
  Json j;
  j["value"] = number(e.value);
  j["standard_error"] = number(e.standard_error);
  return j;
}

}  // namespace

Json to_json(const AttackReport& r) {
  Json j;
  j["model_note"] = r.model_note;
  j["seed"] = r.seed;
  j["eve_bin_width"] = number(r.eve_bin_width);
  j["attack_active"] = r.attack_active;
  j["n_trials"] = r.n_trials;
  j["batches"] = r.batches;
  j["transmission"] = number(r.transmission);
  j["c_less"] = number(r.c_less);
  j["observed_p_t_null"] = number(r.observed_p_t_null);
  j["observed_p_f_null"] = number(r.observed_p_f_null);
  j["surviving_time_rounds"] = r.surviving_time_rounds;
  j["h_max_plugin"] = number(r.h_max_plugin);
  j["naive"] = estimate(r.naive);
  j["modified"] = estimate(r.modified);
  j["difference"] = estimate(r.difference);
  j["modified_clamped"] = r.modified_clamped;
  j["eve_guess_probability"] = number(r.eve_guess_probability);
  j["loophole_exhibited"] = r.loophole_exhibited;
  return j;
}

Json to_json(const FalsifierReport& r) {
  Json j;
  j["note"] = r.note;
  j["seed"] = r.config.seed;
  j["n_states"] = r.config.n_states;
  j["max_dim"] = r.config.max_dim;
  j["n_measurements"] = r.config.n_measurements;
  j["tolerance"] = number(r.config.tolerance);
  j["instances"] = r.instances;
  j["searched"] = r.searched;
  j["exact"] = r.exact;
  j["violations"] = r.violations;
  j["max_excess"] = number(r.max_excess);
  j["worst_instance"] = r.worst_instance ? Json(*r.worst_instance) : Json(nullptr);
  j["max_nontrivial_rhs"] = number(r.max_nontrivial_rhs);
  j["lemma_checks"] = r.lemma_checks;
  j["lemma_violations"] = r.lemma_violations;
  j["lemma_max_excess"] = number(r.lemma_max_excess);
  j["pass"] = r.violations == 0 && r.lemma_violations == 0;
  return j;
}

Json to_json(const EquivalenceReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["max_dim"] = r.max_dim;
  j["povm_failures"] = r.povm_failures;
  j["probability_failures"] = r.probability_failures;
  j["max_probability_error"] = number(r.max_probability_error);
  j["rank_deficient_trials"] = r.rank_deficient_trials;
  j["pass"] = r.povm_failures == 0 && r.probability_failures == 0;
  return j;
}

void write_csv(std::ostream& out, const ContourResult& r) {
  out << "p_z_null,p_x_null,raw_bound,bound\n";
  for (const auto& p : r.grid) {
    out << format_double(p.p_z_null) << ',' << format_double(p.p_x_null) << ',' << format_double(p.raw_bound)
        << ',' << format_double(p.bound) << '\n';
  }
}

void write_csv(std::ostream& out, const KeyRateResult& r) {
  out << "distance_km,transmission,p_t_null_bob,h_max_proxy,leak,raw_bound,bound,clamped,key_rate\n";
  for (const auto& row : r.rows) {
    out << format_double(row.distance_km) << ',' << format_double(row.transmission) << ','
        << format_double(row.p_t_null_bob) << ',' << format_double(row.h_max_proxy) << ','
        << format_double(row.leak) << ',' << format_double(row.bound.raw_bound) << ','
        << format_double(row.bound.clamped_bound) << ',' << (row.bound.clamped ? 1 : 0) << ','
        << format_double(row.key_rate) << '\n';
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace eurlab::report
