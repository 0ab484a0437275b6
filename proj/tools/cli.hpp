#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kmodal::cli {

enum ExitCode : int
{
  ok = 0,
  runtime_error = 1,
  usage_error = 2
};

//! Runs one `kmodal` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace kmodal::cli
