#pragma once

#include <iosfwd>

namespace varest {

/// Entry point of the `varest` command line. Returns the process exit status:
/// 0 success, 1 runtime failure, 2 configuration or parse error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace varest
