#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bootseq::cli {

enum ExitCode : int {
  kLegitimate = 0,
  kError = 1,
  kUsage = 2,
  kMalicious = 3,
  kUnknownApp = 4,
};

/// Full command line, argv[0] included. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bootseq::cli
