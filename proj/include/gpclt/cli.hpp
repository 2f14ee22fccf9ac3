#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gpclt::cli {

/// Union of the parameters of every subcommand. Loaded from a JSON config
/// file, then overridden by command-line flags.
struct ExperimentConfig {
  std::string sigma;  // empty: not given
  std::string f;
  double a = 0.0;
  double b = 1.0;
  std::optional<double> h;
  std::vector<double> h_grid;
  std::vector<int> k;
  std::size_t n_paths = 4000;
  int n_per_h = 8;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  int max = 64;
  int j_max = 4;
  std::optional<int> k0;
  bool with_sup = true;
  std::string expect;  // "normal", "nonnormal" or empty
  bool explore = false;
  std::string out;
  std::string z_out;
  std::string hist_out;

  bool operator==(const ExperimentConfig&) const = default;
};

std::string to_json(const ExperimentConfig& cfg, int indent = 2);
/// Throws ParseError on malformed documents or unknown keys.
ExperimentConfig config_from_json(const std::string& text);

/// Parses `dyadic:<i>:<j>` (2^-i down to 2^-j) or a comma-separated list.
std::vector<double> parse_h_grid(const std::string& text);

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitDomain = 3,
  kExitCovariance = 4,
  kExitVerification = 5,
};

/// Runs one subcommand. `args` excludes the program name. Data goes to `out`
/// (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpclt::cli
