#pragma once

// lfrect command-line front end. Exit codes:
//   0 success
//   1 unexpected failure
//   2 usage or configuration error (bad flags, malformed or invalid input files)
//   3 generation failure (simulation or rendering could not produce data)
//   4 coplanar correspondences
//   5 the two light fields share no aligned sub-aperture row

#include <iosfwd>
#include <string>
#include <vector>

namespace lfrect::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kGenerationError = 3,
  kCoplanar = 4,
  kNoOverlap = 5,
};

/// Runs one command line (args[0] is the program name). Diagnostics go to
/// `err`, data only to the files named on the command line.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace lfrect::cli
