#pragma once

#include <string>

#include "cli/config.hpp"

namespace rankone::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitComputation = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::string report;
  /// Empty for commands without tabular output.
  std::string csv;
  std::string error;
};

/// Execute one command. Never throws; library errors become exit code 3.
RunResult run(const RunConfig& config);

/// Write artifacts to the configured paths, or to stdout when unset.
/// Returns the exit code to use.
int emit(const RunConfig& config, const RunResult& result);

}  // namespace rankone::cli
