#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vrph::cli {

/// Entry point of the command line tool, without the program name in `args`.
/// Returns 0 on success, 1 on data errors and 2 on flag errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vrph::cli
