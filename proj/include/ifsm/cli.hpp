#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ifsm::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kModelError = 1,
  kNotConverged = 2,
  kIoError = 3,
  kUsage = 64,
};

// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ifsm::cli
