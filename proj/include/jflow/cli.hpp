#pragma once

#include "jflow/io.hpp"

#include <map>
#include <string>
#include <vector>

namespace jflow::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kPositivityLoss = 2,
  kContinuationStuck = 3,
  kVerificationFailure = 4,
};

/// One run of the tool: a subcommand plus its key-value parameters.
/// Rationals travel as "p/q" strings, reals as decimal strings.
struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> parameters;
  std::string output_dir = ".";
  int grid = 1024;
  double tol = 1e-9;

  Json toJson() const;
  static RunConfig fromJson(const Json& j);
};

/// Validates the subcommand name and rejects unknown parameter keys.
void validate(const RunConfig& config);

/// Dispatches to the owning module; writes reports under output_dir and
/// returns the process exit code.
int run(const RunConfig& config);

/// Parses "1e-1.5" style values: mantissa times 10^exponent with a possibly
/// fractional exponent. Plain decimals pass through.
double parseEps(const std::string& text);

std::vector<std::string> splitList(const std::string& text, char sep = ',');

}  // namespace jflow::cli
