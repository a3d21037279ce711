#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foc {

/// Runs one CLI invocation (check | eval | ground | mx). Returns the process
/// exit status: 0 ok, 1 input/check error, 2 unsat under --expect-sat,
/// 3 cap/timeout, 64 usage.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace foc
