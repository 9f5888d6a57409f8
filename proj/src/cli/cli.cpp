#include "eurlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eurlab/continuous_povm.hpp"
#include "eurlab/format.hpp"
#include "eurlab/povm_io.hpp"
#include "eurlab/reports.hpp"
#include "eurlab/scenarios.hpp"

namespace eurlab::cli {

namespace {

struct KeySpec {
  const char* name;
  const char* fallback;
  const char* help;
};

const std::vector<KeySpec> kRunKeys = {
    {"seed", "0", "base seed of every random draw"},
    {"threads", "0", "worker threads, 0 = one per core"},
    {"output_dir", ".", "directory for CSV/JSON output"},
    {"format", "both", "csv, json or both"},
};

const std::vector<KeySpec> kScenarioKeys = {
    {"sigma_coh", "6e-9", "coherence time (s)"},
    {"sigma_cor", "2e-12", "correlation time (s)"},
    {"time_convention", "halved_sum_width", "halved_sum_width or direct_transform"},
    {"center_nm", "1550", "central wavelength (nm)"},
    {"lo_nm", "1520", "short edge of the detection band (nm)"},
    {"hi_nm", "1610", "long edge of the detection band (nm)"},
    {"rep_rate_hz", "55.6e6", "repetition rate; time window is +-1/(2 rate)"},
    {"time_bin_s", "20e-12", "arrival-time bin width (s)"},
    {"freq_bin_rad_s", "", "frequency bin width (rad/s); empty = from target_overlap"},
    {"target_overlap", "0.001", "overlap used to size the frequency bins"},
    {"loss_db_per_km", "0.2", "fiber loss"},
    {"c_less", "", "overlap override; empty = computed"},
};

std::vector<KeySpec> own_keys(Subcommand s) {
  switch (s) {
    case Subcommand::Bound:
      return {{"p_z_null", "0", "null probability of the guessed measurement"},
              {"p_x_null", "0", "null probability of the conjugate measurement"},
              {"c_less", "0.001", "overlap without null elements"},
              {"h_max", "1", "max-entropy term (bits)"},
              {"epsilon", "0", "smoothing parameter"}};
    case Subcommand::Overlap:
      return {{"povm_x", "", "POVM file"},
              {"povm_z", "", "POVM file"},
              {"delta_omega", "", "frequency bin width (rad/s)"},
              {"delta_t", "", "time bin width (s)"}};
    case Subcommand::Contour:
      return {{"c_less", "0.001", "overlap without null elements"},
              {"h_max", "1", "max-entropy term (bits)"},
              {"grid", "101", "points per axis"},
              {"frontier_p_z", "0.001", "row for the positive-bound frontier"}};
    case Subcommand::TfScan: {
      auto keys = kScenarioKeys;
      keys.push_back({"distances_km", "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5", "comma-separated, increasing"});
      keys.push_back({"epsilon", "0", "smoothing parameter"});
      keys.push_back({"joint_csv", "false", "also write the time joint distribution at the first distance"});
      return keys;
    }
    case Subcommand::CvSat:
      return {{"antisqueezing_db", "19.3", "anti-squeezing (dB)"},
              {"vacuum", "half", "vacuum variance convention: half or unit"},
              {"range_lo", "-61.6", "lower detection limit (vacuum units)"},
              {"range_hi", "61.6", "upper detection limit (vacuum units)"},
              {"bin_width", "0.1", "quadrature bin width"},
              {"h_max", "1", "max-entropy term (bits)"},
              {"mean_shift", "0", "displacement of the quadrature"},
              {"target_saturation", "", "if set, choose mean_shift to give this saturation probability"}};
    case Subcommand::AttackSim: {
      auto keys = kScenarioKeys;
      keys.push_back({"distance_km", "0", "fiber length"});
      keys.push_back({"eve_bin_width", "1e5", "Eve's frequency bin (rad/s)"});
      keys.push_back({"n_trials", "200000", "Monte Carlo rounds"});
      return keys;
    }
    case Subcommand::Falsify:
      return {{"n_states", "1000", "random tripartite states"},
              {"max_dim", "4", "largest local dimension"},
              {"n_measurements", "1", "measurement pairs per state"},
              {"tolerance", "1e-9", "violation tolerance"}};
    case Subcommand::CheckPovm:
      return {{"path", "", "POVM file; empty = randomized shared-null check"},
              {"trials", "1000", "random trials of the shared-null check"},
              {"max_dim", "6", "largest dimension of the shared-null check"}};
  }
  return {};
}

std::vector<KeySpec> all_keys(Subcommand s) {
  auto keys = kRunKeys;
  for (const auto& k : own_keys(s)) keys.push_back(k);
  return keys;
}

const std::vector<Subcommand> kAllSubcommands = {Subcommand::Bound,  Subcommand::Overlap,   Subcommand::Contour,
                                                 Subcommand::TfScan, Subcommand::CvSat,     Subcommand::AttackSim,
                                                 Subcommand::Falsify, Subcommand::CheckPovm};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unknown_key_message(const std::string& key, const std::string& where,
                                const std::vector<std::string>& valid) {
  return "unknown key '" + key + "'" + where + "; nearest valid key is '" + nearest(key, valid) + "'";
}

// Typed access to the resolved table.
class Params {
 public:
  explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const { return values_.at(key); }
  bool has(const std::string& key) const { return !values_.at(key).empty(); }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) fail(key, "a number");
    return x;
  }

  std::uint64_t unsigned_int(const std::string& key) const {
    const std::string& v = str(key);
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) fail(key, "a non-negative integer");
    return x;
  }

  bool boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "true or false");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      char* end = nullptr;
      const double x = std::strtod(item.c_str(), &end);
      if (item.empty() || end != item.c_str() + item.size()) fail(key, "a comma-separated list of numbers");
      out.push_back(x);
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("key '" + key + "': expected " + what + ", got '" + str(key) + "'");
  }

  std::map<std::string, std::string> values_;
};

OutputFormat parse_format(const std::string& v) {
  if (v == "csv") return OutputFormat::Csv;
  if (v == "json") return OutputFormat::Json;
  if (v == "both") return OutputFormat::Both;
  throw ConfigError("key 'format': expected csv, json or both, got '" + v + "'");
}

class Output {
 public:
  Output(std::filesystem::path dir, OutputFormat format) : dir_(std::move(dir)), format_(format) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (!std::filesystem::is_directory(dir_)) throw ConfigError("cannot create output directory " + dir_.string());
  }

  bool csv() const { return format_ != OutputFormat::Json; }
  bool json() const { return format_ != OutputFormat::Csv; }

  // Returns the path written.
  std::filesystem::path write(const std::string& name, const std::string& body) const {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << body;
    if (!f) throw ConfigError("write failed for " + path.string());
    return path;
  }

 private:
  std::filesystem::path dir_;
  OutputFormat format_;
};

// Keys that do not change results are left out of JSON summaries so output
// is byte-identical across thread counts and output locations.
report::Json parameter_block(Subcommand s, const std::map<std::string, std::string>& resolved) {
  report::Json j;
  for (const auto& k : all_keys(s)) {
    const std::string name = k.name;
    if (name == "threads" || name == "output_dir" || name == "format") continue;
    j[name] = resolved.at(name);
  }
  return j;
}

report::Json envelope(Subcommand s, const std::map<std::string, std::string>& resolved, report::Json result) {
  report::Json j;
  j["command"] = to_string(s);
  j["seed"] = std::stoull(resolved.at("seed"));
  j["parameters"] = parameter_block(s, resolved);
  j["result"] = std::move(result);
  return j;
}

ScenarioConfig scenario_from(const Params& p) {
  ScenarioConfig cfg;
  GaussianBiphoton src;
  src.sigma_coh = p.real("sigma_coh");
  src.sigma_cor = p.real("sigma_cor");
  const std::string& conv = p.str("time_convention");
  if (conv == "halved_sum_width") {
    src.time_convention = TimeStdConvention::HalvedSumWidth;
  } else if (conv == "direct_transform") {
    src.time_convention = TimeStdConvention::DirectTransform;
  } else {
    throw ConfigError("key 'time_convention': expected halved_sum_width or direct_transform, got '" + conv + "'");
  }
  cfg.source = src;
  cfg.center_wavelength_m = p.real("center_nm") * 1e-9;
  cfg.wavelength_lo_m = p.real("lo_nm") * 1e-9;
  cfg.wavelength_hi_m = p.real("hi_nm") * 1e-9;
  cfg.rep_rate_hz = p.real("rep_rate_hz");
  cfg.time_bin_s = p.real("time_bin_s");
  if (p.has("freq_bin_rad_s")) cfg.freq_bin_rad_s = p.real("freq_bin_rad_s");
  cfg.target_overlap = p.real("target_overlap");
  cfg.channel.loss_db_per_km = p.real("loss_db_per_km");
  if (p.has("c_less")) cfg.c_less_override = p.real("c_less");
  cfg.seed = p.unsigned_int("seed");
  cfg.threads = static_cast<unsigned>(p.unsigned_int("threads"));
  return cfg;
}

void print_bound(std::ostream& out, const BoundResult& b) {
  out << "raw bound: " << format_double(b.raw_bound) << " bits\n";
  out << "clamped bound: " << format_double(b.clamped_bound) << " bits\n";
  out << "dominant term: " << to_string(b.dominant_term) << '\n';
  if (b.diagnostic) out << "diagnostic: " << *b.diagnostic << '\n';
}

int run_bound(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  const BoundInput in{p.real("p_z_null"), p.real("p_x_null"), p.real("c_less"), p.real("h_max")};
  const double eps = p.real("epsilon");
  const BoundResult b = eps > 0 ? eur_modified_smooth(in, {eps}) : eur_modified(in);
  print_bound(out, b);
  const double unmodified = eur_unmodified(in.c_less, in.h_max);
  out << "unmodified bound: " << format_double(unmodified) << " bits\n";
  if (o.json()) {
    report::Json r = report::to_json(b);
    r["unmodified_bound"] = report::number(unmodified);
    report::Json env = params_env;
    env["result"] = r;
    out << "wrote " << o.write("bound.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int report_povm(std::ostream& out, const std::string& label, const PovmReport& r) {
  out << label << ": " << r.summary() << '\n';
  return r.pass ? kExitOk : kExitValidation;
}

int run_overlap(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  report::Json r;
  if (p.has("povm_x") || p.has("povm_z")) {
    if (!p.has("povm_x") || !p.has("povm_z")) throw ConfigError("overlap needs both povm_x and povm_z");
    const MatrixPovm x = io::read_povm(p.str("povm_x"));
    const MatrixPovm z = io::read_povm(p.str("povm_z"));
    const PovmReport rx = validate_povm(x);
    const PovmReport rz = validate_povm(z);
    const int code = std::max(report_povm(out, "povm_x", rx), report_povm(out, "povm_z", rz));
    if (code != kExitOk) return code;
    const double c = max_overlap_c(x, z);
    const double cp = overlap_cprime(x, z);
    const double cl = restricted_overlap(x, z);
    out << "c: " << format_double(c) << "\nc_prime: " << format_double(cp) << "\nc_less: " << format_double(cl) << '\n';
    r["c"] = report::number(c);
    r["c_prime"] = report::number(cp);
    r["c_less"] = report::number(cl);
  } else if (p.has("delta_omega") && p.has("delta_t")) {
    const double dw = p.real("delta_omega");
    const double dt = p.real("delta_t");
    const double analytic = analytic_overlap(dw, dt);
    const SlepianOracleResult oracle = slepian_overlap_oracle(dw, dt);
    out << "analytic overlap: " << format_double(analytic) << '\n';
    out << "oracle overlap: " << format_double(oracle.eigenvalue) << " (" << oracle.n_points << " points)\n";
    r["analytic"] = report::number(analytic);
    r["oracle"] = report::number(oracle.eigenvalue);
    r["oracle_points"] = oracle.n_points;
    r["oracle_last_change"] = report::number(oracle.last_change);
  } else {
    throw ConfigError("overlap needs povm_x and povm_z, or delta_omega and delta_t");
  }
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = r;
    out << "wrote " << o.write("overlap.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int run_contour(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  const std::uint64_t grid = p.unsigned_int("grid");
  if (grid < 2 || grid > 10000) throw ConfigError("key 'grid': must lie in [2, 10000]");
  const ContourResult c =
      threshold_contour(p.real("c_less"), p.real("h_max"), static_cast<int>(grid), p.real("frontier_p_z"));
  out << "equal-null crossing: " << format_double(c.equal_null_crossing) << '\n';
  out << "frontier p_x_null at p_z_null = " << format_double(c.frontier_p_z) << ": " << format_double(c.frontier_p_x)
      << '\n';
  if (o.csv()) {
    std::ostringstream s;
    report::write_csv(s, c);
    out << "wrote " << o.write("contour.csv", s.str()).string() << '\n';
  }
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = report::to_json(c);
    out << "wrote " << o.write("contour.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int run_tf_scan(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  ScenarioConfig cfg = scenario_from(p);
  cfg.distances_km = p.list("distances_km");
  cfg.smoothing.epsilon = p.real("epsilon");
  const KeyRateResult r = tf_keyrate_scan(cfg);
  out << "p_t_null (Alice): " << format_double(r.p_t_null_alice) << "\np_f_null (Alice): "
      << format_double(r.p_f_null_alice) << "\nc_less: " << format_double(r.c_less) << '\n';
  out << "distance_km key_rate\n";
  for (const auto& row : r.rows) out << format_double(row.distance_km) << ' ' << format_double(row.key_rate) << '\n';
  out << "zero-rate onset: "
      << (r.zero_rate_onset_km ? format_double(*r.zero_rate_onset_km) + " km" : std::string("none on grid")) << '\n';
  if (o.csv()) {
    std::ostringstream s;
    report::write_csv(s, r);
    out << "wrote " << o.write("tf_keyrate.csv", s.str()).string() << '\n';
    if (p.boolean("joint_csv")) {
      ChannelModel channel = cfg.channel;
      channel.distance_km = cfg.distances_km.front();
      const double t_c = cfg.time_window();
      const IntervalBinSpec bins = IntervalBinSpec::uniform(cfg.time_bin_s, -t_c, t_c);
      std::ostringstream js;
      joint_time_distribution(cfg.biphoton(), bins, bins, channel, true).write_csv(js);
      out << "wrote " << o.write("time_joint.csv", js.str()).string() << '\n';
    }
  }
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = report::to_json(r);
    out << "wrote " << o.write("tf_keyrate.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int run_cv_sat(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  TmsvSpec spec;
  spec.antisqueezing_db = p.real("antisqueezing_db");
  const std::string& vac = p.str("vacuum");
  if (vac == "half") {
    spec.vacuum = VacuumConvention::HalfVariance;
  } else if (vac == "unit") {
    spec.vacuum = VacuumConvention::UnitVariance;
  } else {
    throw ConfigError("key 'vacuum': expected half or unit, got '" + vac + "'");
  }
  const double lo = p.real("range_lo");
  const double hi = p.real("range_hi");
  double shift = p.real("mean_shift");
  if (p.has("target_saturation")) shift = mean_shift_for_saturation(spec, lo, hi, p.real("target_saturation"));
  const CvSaturationReport r = cv_saturation_report(spec, lo, hi, p.real("bin_width"), p.real("h_max"), shift);
  out << "p_sat (x): " << format_double(r.p_sat_x) << "\np_sat (p): " << format_double(r.p_sat_p)
      << "\nc_less: " << format_double(r.c_less) << '\n';
  print_bound(out, r.bound);
  out << "unmodified bound: " << format_double(r.unmodified_bound) << " bits\nabort: " << (r.abort ? "yes" : "no")
      << '\n';
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = report::to_json(r);
    out << "wrote " << o.write("cv_saturation.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int run_attack(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  ScenarioConfig cfg = scenario_from(p);
  cfg.distances_km = {p.real("distance_km")};
  const AttackReport r = narrow_bin_attack_sim(cfg, p.real("eve_bin_width"), p.unsigned_int("n_trials"));
  out << "attack active: " << (r.attack_active ? "yes" : "no") << '\n';
  out << "observed p_t_null: " << format_double(r.observed_p_t_null) << '\n';
  out << "naive bound: " << format_double(r.naive.value) << " +- " << format_double(r.naive.standard_error) << '\n';
  out << "modified bound: " << format_double(r.modified.value) << " +- " << format_double(r.modified.standard_error)
      << '\n';
  out << "Eve's guess probability: " << format_double(r.eve_guess_probability) << '\n';
  out << "loophole exhibited: " << (r.loophole_exhibited ? "yes" : "no") << '\n';
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = report::to_json(r);
    out << "wrote " << o.write("narrow_bin_attack.json", report::dump(env)).string() << '\n';
  }
  return kExitOk;
}

int run_falsify(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  FalsifierConfig cfg;
  cfg.n_states = p.unsigned_int("n_states");
  const std::uint64_t dim = p.unsigned_int("max_dim");
  if (dim > 4) throw ConfigError("key 'max_dim': must be at most 4");
  cfg.max_dim = static_cast<int>(dim);
  cfg.n_measurements = p.unsigned_int("n_measurements");
  cfg.tolerance = p.real("tolerance");
  cfg.seed = p.unsigned_int("seed");
  cfg.threads = static_cast<unsigned>(p.unsigned_int("threads"));
  const FalsifierReport r = bound_falsifier(cfg);
  out << "instances: " << r.instances << " (searched " << r.searched << ", exact " << r.exact << ")\n";
  out << "violations: " << r.violations << "\nmax excess: " << format_double(r.max_excess) << '\n';
  out << "lemma violations: " << r.lemma_violations << " of " << r.lemma_checks << '\n';
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = report::to_json(r);
    out << "wrote " << o.write("falsifier.json", report::dump(env)).string() << '\n';
  }
  return r.violations == 0 && r.lemma_violations == 0 ? kExitOk : kExitViolation;
}

int run_check_povm(const Params& p, const Output& o, const report::Json& params_env, std::ostream& out) {
  report::Json r;
  int code = kExitOk;
  std::string name;
  if (p.has("path")) {
    const MatrixPovm povm = io::read_povm(p.str("path"));
    const PovmReport rep = validate_povm(povm);
    code = report_povm(out, "povm", rep);
    r["povm"] = report::to_json(rep);
    r["effective"] = nullptr;
    if (rep.pass && povm.null_index) {
      const PovmReport eff = validate_effective_povm(effective_povm(povm));
      code = std::max(code, report_povm(out, "effective povm", eff));
      r["effective"] = report::to_json(eff);
    }
    r["pass"] = code == kExitOk;
    name = "povm_check.json";
  } else {
    const std::uint64_t dim = p.unsigned_int("max_dim");
    if (dim < 2 || dim > 6) throw ConfigError("key 'max_dim': must lie in [2, 6]");
    const EquivalenceReport rep = shared_null_equivalence_check(
        p.unsigned_int("trials"), static_cast<int>(dim), p.unsigned_int("seed"),
        static_cast<unsigned>(p.unsigned_int("threads")));
    out << "trials: " << rep.trials << "\npovm failures: " << rep.povm_failures << "\nprobability failures: "
        << rep.probability_failures << "\nmax probability error: " << format_double(rep.max_probability_error) << '\n';
    r = report::to_json(rep);
    code = rep.povm_failures == 0 && rep.probability_failures == 0 ? kExitOk : kExitValidation;
    name = "equivalence.json";
  }
  if (o.json()) {
    report::Json env = params_env;
    env["result"] = r;
    out << "wrote " << o.write(name, report::dump(env)).string() << '\n';
  }
  return code;
}

}  // namespace

const char* describe(Subcommand s) {
  switch (s) {
    case Subcommand::Bound: return "evaluate the bound at one operating point";
    case Subcommand::Overlap: return "bin overlap constant, analytic and numerical";
    case Subcommand::Contour: return "positive-bound region over the two null probabilities";
    case Subcommand::TfScan: return "time-frequency key rate versus fiber distance";
    case Subcommand::CvSat: return "homodyne saturation probability and bound";
    case Subcommand::AttackSim: return "narrow-bin attack, naive versus modified estimate";
    case Subcommand::Falsify: return "random search for states violating the bound";
    case Subcommand::CheckPovm: return "shared-null equivalence check, or validate a POVM file";
  }
  return "";
}

const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Bound: return "bound";
    case Subcommand::Overlap: return "overlap";
    case Subcommand::Contour: return "contour";
    case Subcommand::TfScan: return "tf-scan";
    case Subcommand::CvSat: return "cv-sat";
    case Subcommand::AttackSim: return "attack-sim";
    case Subcommand::Falsify: return "falsify";
    case Subcommand::CheckPovm: return "check-povm";
  }
  return "?";
}

std::optional<Subcommand> parse_subcommand(const std::string& name) {
  for (Subcommand s : kAllSubcommands) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::string> keys_for(Subcommand s) {
  std::vector<std::string> out;
  for (const auto& k : all_keys(s)) out.emplace_back(k.name);
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, Subcommand s) {
  std::vector<std::string> sections = {"run"};
  for (Subcommand x : kAllSubcommands) sections.emplace_back(to_string(x));

  std::vector<std::pair<std::string, std::string>> out;
  std::string section = to_string(s);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header" + where);
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        throw ConfigError("unknown section '" + section + "'" + where + "; nearest valid section is '" +
                          nearest(section, sections) + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value" + where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    std::vector<std::string> valid;
    if (section == "run") {
      for (const auto& k : kRunKeys) valid.emplace_back(k.name);
    } else {
      for (const auto& k : own_keys(*parse_subcommand(section))) valid.emplace_back(k.name);
    }
    if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
      throw ConfigError(unknown_key_message(key, " in [" + section + "]" + where, valid));
    }
    if (section == "run" || section == to_string(s)) out.emplace_back(key, value);
  }
  return out;
}

std::string bin_spec_to_config(const IntervalBinSpec& spec) {
  const IntervalBinSpec block = IntervalBinSpec::uniform(spec.width(), spec.range_lo(), spec.range_hi());
  std::string centers = "auto";
  if (block.centers() != spec.centers()) {
    centers.clear();
    for (std::size_t i = 0; i < spec.size(); ++i) centers += (i ? "," : "") + format_double(spec.centers()[i]);
  }
  return "centers = " + centers + "\nwidth = " + format_double(spec.width()) +
         "\nrange_lo = " + format_double(spec.range_lo()) + "\nrange_hi = " + format_double(spec.range_hi()) + "\n";
}

IntervalBinSpec bin_spec_from_config(const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) {
    if (k != "centers" && k != "width" && k != "range_lo" && k != "range_hi") {
      throw ConfigError(unknown_key_message(k, "", {"centers", "width", "range_lo", "range_hi"}));
    }
  }
  std::map<std::string, std::string> full = {{"centers", "auto"}, {"width", ""}, {"range_lo", ""}, {"range_hi", ""}};
  for (const auto& [k, v] : values) full[k] = v;
  const Params p(full);
  const double width = p.real("width");
  const double lo = p.real("range_lo");
  const double hi = p.real("range_hi");
  if (p.str("centers") == "auto") return IntervalBinSpec::uniform(width, lo, hi);
  return IntervalBinSpec(p.list("centers"), width, lo, hi);
}

std::map<std::string, std::string> resolve(const CliConfig& cfg) {
  std::map<std::string, std::string> values;
  for (const auto& k : all_keys(cfg.subcommand)) values[k.name] = k.fallback;
  values["output_dir"] = cfg.output_dir.string();
  values["format"] = cfg.format == OutputFormat::Csv ? "csv" : cfg.format == OutputFormat::Json ? "json" : "both";

  const auto valid = keys_for(cfg.subcommand);
  auto apply = [&](const std::string& key, const std::string& value, const std::string& where) {
    if (!values.count(key)) throw ConfigError(unknown_key_message(key, where, valid));
    values[key] = value;
  };
  if (cfg.config_path) {
    std::ifstream f(*cfg.config_path);
    if (!f) throw ConfigError("cannot read config file " + cfg.config_path->string());
    std::stringstream buf;
    buf << f.rdbuf();
    for (const auto& [k, v] : parse_config_text(buf.str(), cfg.subcommand)) apply(k, v, "");
  }
  for (const auto& [k, v] : cfg.overrides) apply(k, v, " on the command line");
  if (const char* env = std::getenv("EURLAB_SEED"); env && *env) values["seed"] = env;
  return values;
}

std::optional<CliConfig> parse_command_line(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Entropic uncertainty bounds with null outcomes"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "config file (key = value, [section] headers)");

  struct Registered {
    Subcommand sub;
    CLI::App* app;
    std::map<std::string, std::string> storage;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Registered>> subs;
  for (Subcommand s : kAllSubcommands) {
    auto reg = std::make_unique<Registered>();
    reg->sub = s;
    reg->app = app.add_subcommand(to_string(s), describe(s));
    reg->app->allow_extras();
    reg->app->add_option("--config", config_path, "config file (key = value, [section] headers)");
    for (const auto& k : all_keys(s)) {
      std::string flag = dashed(k.name);
      if (s == Subcommand::CheckPovm && std::string(k.name) == "path") flag = "path," + flag;
      reg->options[k.name] = reg->app->add_option(flag, reg->storage[k.name], k.help);
    }
    subs.push_back(std::move(reg));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  CliConfig cfg;
  if (config_path) cfg.config_path = *config_path;
  for (const auto& reg : subs) {
    if (!reg->app->parsed()) continue;
    if (reg->app->get_help_ptr() && reg->app->get_help_ptr()->count() > 0) {
      out << reg->app->help();
      return std::nullopt;
    }
    cfg.subcommand = reg->sub;
    const auto valid = keys_for(reg->sub);
    for (const auto& extra : reg->app->remaining()) {
      std::string key = extra;
      if (key.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + extra + "'");
      key = key.substr(2);
      std::replace(key.begin(), key.end(), '-', '_');
      throw ConfigError("unknown flag '" + extra + "'; nearest valid flag is '" + dashed(nearest(key, valid)) + "'");
    }
    for (const auto& k : valid) {
      if (reg->options.at(k)->count() > 0) cfg.overrides.emplace_back(k, reg->storage.at(k));
    }
  }
  return cfg;
}

int run(const CliConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const auto resolved = resolve(cfg);
  const Params p(resolved);
  p.unsigned_int("seed");
  p.unsigned_int("threads");

  out << "# " << to_string(cfg.subcommand) << '\n';
  for (const auto& k : keys_for(cfg.subcommand)) out << k << " = " << resolved.at(k) << '\n';

  const Output o(resolved.at("output_dir"), parse_format(resolved.at("format")));
  const report::Json env = envelope(cfg.subcommand, resolved, nullptr);
  switch (cfg.subcommand) {
    case Subcommand::Bound: return run_bound(p, o, env, out);
    case Subcommand::Overlap: return run_overlap(p, o, env, out);
    case Subcommand::Contour: return run_contour(p, o, env, out);
    case Subcommand::TfScan: return run_tf_scan(p, o, env, out);
    case Subcommand::CvSat: return run_cv_sat(p, o, env, out);
    case Subcommand::AttackSim: return run_attack(p, o, env, out);
    case Subcommand::Falsify: return run_falsify(p, o, env, out);
    case Subcommand::CheckPovm: return run_check_povm(p, o, env, out);
  }
  return kExitConfig;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_command_line(argc, argv, out);
    if (!cfg) return kExitOk;
    return run(*cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace eurlab::cli
