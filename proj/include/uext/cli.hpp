#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uext::cli {

/// Runs one CLI invocation. Exit codes: 0 pass/true verdicts, 1
/// fail/counterexample verdicts, 2 usage or parse errors, 3 exceeded caps.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uext::cli
