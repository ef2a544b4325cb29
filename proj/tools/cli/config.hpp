#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rankone/construction.hpp"

namespace rankone::cli {

/// Schema violation in a run configuration. The message names the offending
/// key path, e.g. "construction.stages.pattern[0].r: r must be >= 2".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& command_names();

/// Parameter keys accepted by a command, in documentation order.
const std::vector<std::string>& command_keys(std::string_view command);

/// Validated parameters. Zero-valued stage/depth fields mean "pick a default".
struct CommandParams {
  int J = 10;
  int horizon = 20;
  int bound = kDefaultParameterBound;
  int j = 0;
  int K = 0;
  std::int64_t n = 1;
  std::int64_t d = 1;
  bool d_given = false;
  int m = 0;
  int Z = 8;
  int count = 3;
  std::int64_t p = 2;
  std::int64_t q = 3;
  std::uint64_t N = 100000;
  int M = 1;
  std::uint64_t start = 0;
  double tau = 0.02;
  double tol = 0.02;
  double stability_tol = 0.02;
  double residual = 0.05;
  std::uint64_t min_levels = 10000;
  int levels = 3;
  /// Explicit stage-j coefficients; empty selects the command's default observable.
  std::vector<std::int64_t> observable;
};

struct RunConfig {
  Construction construction = Construction::chacon();
  std::string command;
  CommandParams params;
  std::uint64_t seed = 0;
  std::optional<std::string> csv_path;
  std::optional<std::string> report_path;
};

/// Parse and validate JSON run configuration text.
RunConfig parse_config(std::string_view text);

}  // namespace rankone::cli
