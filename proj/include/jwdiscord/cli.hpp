#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jwdiscord/spectral.hpp"

namespace jwd::cli {

extern const char* const kVersion;

/// Fully resolved run parameters: defaults, then config file, then flags.
struct RunConfig {
  std::string experiment;  ///< spectrum | discord-matrix | sweep-b | sweep-noise | verify
  ChainConfig chain;
  int j0 = 0;  ///< 0 selects the middle node (N+1)/2
  double b_j0 = 10.0;
  std::string state = "three-node";  ///< discord-matrix only: three-node | noise
  double b = 0.0;
  double b_max = 0.96;
  int points = 97;
  std::vector<double> eps{0.0, 0.1, 0.2, 0.3, 0.4};
  int n_real = 100;
  std::vector<int> orders{1, 2};
  std::uint64_t seed = 20240601;
  double t = 0.0;
  std::string out;
  std::string format = "csv";
  int threads = 1;

  /// Fills derived defaults (j0).
  void resolve();
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// 64-bit FNV-1a of the canonical JSON form of the parameters that affect
/// results (output path, format and thread count excluded).
std::string config_hash(const RunConfig& config);

/// Parses argv into a RunConfig. Throws CLI11 parse errors or
/// std::invalid_argument.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes one run. Results go to config.out, to $JWD_OUT_DIR/<experiment>.<format>
/// when no path is given, or to `out` when neither is set. Returns 0, or 1
/// when `verify` found failing checks; other failures throw.
int execute(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Parse + execute with error reporting; returns the process exit status.
/// Failures print one JSON line to `err`.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jwd::cli
