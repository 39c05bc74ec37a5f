#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ringlio::cli {

/// Full command line without the program name, e.g. {"run", "--config", "c.txt"}.
/// Returns the process exit status; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Per-subcommand entry points; `args` excludes the subcommand name.
int cmd_simulate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ringlio::cli
