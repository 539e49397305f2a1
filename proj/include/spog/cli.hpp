#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spog {

/// Runs one subcommand. `args` excludes the program name, e.g. {"train", "--config", "c.json"}.
/// Returns 0 on success, 1 on a validation error, 2 on a runtime or numeric error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spog
