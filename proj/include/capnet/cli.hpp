#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace capnet::cli {

enum ExitCode : int {
  ok = 0,
  internal_error = 1,
  usage_error = 2,
  input_error = 3,
  infeasible = 4,
};

/// Directory holding the shipped fixtures (set at build time).
std::filesystem::path default_data_dir();

/// Entry point of the capnet tool. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capnet::cli
