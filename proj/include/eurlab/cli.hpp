#pragma once

// Command-line frontend.
//
// Parameters come from three layers, later ones winning: built-in
// defaults, an optional config file, inline `--key value` flags. The
// seed can also be set through the EURLAB_SEED environment variable,
// which overrides both file and flags.
//
// Config files hold `key = value` lines under `[section]` headers. A
// section is either `run` (seed, threads, output_dir, format) or a
// subcommand name; lines before the first header belong to the subcommand
// being run. Sections of other subcommands are checked but not used. '#'
// starts a comment.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eurlab/continuous_povm.hpp"
#include "eurlab/error.hpp"

namespace eurlab::cli {

enum class Subcommand { Bound, Overlap, Contour, TfScan, CvSat, AttackSim, Falsify, CheckPovm };

const char* to_string(Subcommand s);
const char* describe(Subcommand s);
std::optional<Subcommand> parse_subcommand(const std::string& name);

enum class OutputFormat { Csv, Json, Both };

struct CliConfig {
  Subcommand subcommand = Subcommand::Bound;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // key, value
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::Both;
};

// Bad config file, unknown key, malformed value; exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitViolation = 3;

std::size_t edit_distance(const std::string& a, const std::string& b);

// Closest candidate by edit distance (ties: first in order).
std::string nearest(const std::string& key, const std::vector<std::string>& candidates);

// Keys accepted by a subcommand, `run` keys included, in display order.
std::vector<std::string> keys_for(Subcommand s);

// Resolved key -> value table: defaults, then the config file, then
// overrides, then EURLAB_SEED. Throws ConfigError.
std::map<std::string, std::string> resolve(const CliConfig& cfg);

// Parses a config file body for `s`; returns the key/value pairs that apply.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, Subcommand s);

// Bin specs as config lines: centers (comma list, or `auto` for a
// uniform block), width, range_lo, range_hi.
std::string bin_spec_to_config(const IntervalBinSpec& spec);
IntervalBinSpec bin_spec_from_config(const std::map<std::string, std::string>& values);

// Parses argv into a config. Returns nothing when help was printed.
// Throws ConfigError.
std::optional<CliConfig> parse_command_line(int argc, const char* const* argv, std::ostream& out);

int run(const CliConfig& cfg, std::ostream& out, std::ostream& err);

// Full entry point: parse, run, map exceptions to exit codes.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eurlab::cli
