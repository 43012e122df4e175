#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mvreg {

/// Entry point of the `mvreg` tool. Returns 0 on success, 1 for input errors
/// (bad arguments, files or configuration) and 2 for numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvreg
