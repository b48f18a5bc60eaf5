#pragma once

#include <string>
#include <vector>

namespace flattri::cli {

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 fail with a verdict, 2 undecided or error
  std::string out;
  std::string err;
};

/// Runs one command line (without the program name). Options fall back to
/// FLATTRI_SEED, FLATTRI_SAMPLES, FLATTRI_BOUND and FLATTRI_FORMAT.
RunResult run(const std::vector<std::string>& args);

}  // namespace flattri::cli
