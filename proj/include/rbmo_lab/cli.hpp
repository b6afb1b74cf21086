#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rbmo_lab::cli {

/// Runs one command line (args excludes the program name). Returns the exit
/// status: 0 success, 2 validation, 3 domain, 4 internal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbmo_lab::cli
