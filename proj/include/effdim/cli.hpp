#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace effdim {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

/// Malformed JSON, schema violation, unknown key or missing output path.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Subcommands in help order.
const std::vector<std::string> &cli_commands();

/// Entry point of effdim_lab: parse argv, run the subcommand, write
/// <out>/<command>.csv plus <out>/<command>.config.json. Diagnostics go to `err`.
int run_cli(int argc, const char *const *argv, std::ostream &err);

} // namespace effdim
