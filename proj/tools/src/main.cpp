#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polymer_cli/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Regularized Edwards polymer measure experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    for (const auto& name : polymer::cli::subcommands()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("-c,--config", config_path, "INI configuration file");
        sub->add_option("-s,--set", overrides, "override a key, as key=value (repeatable)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : polymer::cli::exit_validation;
    }
    const auto* sub = app.get_subcommands().front();
    std::optional<std::string> cfg;
    if (!config_path.empty()) cfg = config_path;
    return polymer::cli::run(sub->get_name(), cfg, overrides, std::cout, std::cerr);
}
