#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sybilreg {

/// Entry point of the `sybilreg` tool. Returns the process exit status:
/// 0 success, 2 validation, 3 resource refusal, 4 estimation failure.
/// Results go to the files named on the command line, or to `out` when
/// `--out` is omitted.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sybilreg
