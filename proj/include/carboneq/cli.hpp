#pragma once

#include <iosfwd>
#include <string>

namespace carboneq {

/// Shortest decimal that round-trips to `value`; "-0" prints as "0".
std::string format_number(double value);

/// Entry point of the `carboneq` command. Returns the process exit code:
/// 0 success, 1 usage or input error, 2 model error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace carboneq
