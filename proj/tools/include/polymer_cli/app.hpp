#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace polymer::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_acceptance = 2 };

const std::vector<std::string>& subcommands();

// Runs one subcommand. The configuration is read from `config_path` (the
// section named after the subcommand, plus top-level keys) with `overrides`
// ("key=value") applied last. Output files are written only after every
// computation has succeeded.
int run(const std::string& subcommand, const std::optional<std::string>& config_path,
        const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err);

}  // namespace polymer::cli
