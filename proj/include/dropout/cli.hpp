#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dropout {

/// Command-line entry point. `args` excludes the program name.
/// Returns 0 on success, 2 on a usage error (usage text on `err`) and 1 on
/// a runtime error (one diagnostic line on `err`).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dropout
