#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pottsrf::cli {

/// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pottsrf::cli
