#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kcoddp::pipeline {

/// Runs one subcommand (simulate, fit, loo, predict, corr, bound, w126).
/// `args` excludes the program name. Returns the process exit code; errors
/// are reported on `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_dispatch(int argc, char** argv);

}  // namespace kcoddp::pipeline
