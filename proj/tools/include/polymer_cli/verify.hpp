#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polymer/paths.hpp"
#include "polymer_cli/config.hpp"
#include "polymer_cli/output.hpp"

namespace polymer::cli {

// Settings of the verification suite. Monte Carlo sizes are given for
// replicas = 20000 and scale linearly with `replicas`.
struct VerifyConfig {
    double lambda = 1.0;
    double eps0 = 1.0 / 22.0;
    std::size_t n_steps = 128;
    std::size_t replicas = 20000;
    int levels_lo = 3;
    int levels_hi = 6;
    std::uint64_t seed = 0;
    double beta_pcn = 0.2;
    double tau_langevin = 1.0 / 128.0;
    double delta1 = 1.0 / 256.0;
    DirectionPreset direction_preset = DirectionPreset::sine;
    std::string output_dir = "results";

    // `seed` is mandatory. Throws ConfigError on unknown keys or bad values.
    static VerifyConfig from_config(const Config& cfg);
    void validate() const;
    nlohmann::json to_json() const;
    // Same settings at replicas = 400.
    VerifyConfig reduced() const;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    std::vector<CsvTable> tables;
    bool all_pass() const;
};

struct VerifyOptions {
    // Also repeat the suite at reduced size twice and compare the CSVs.
    bool determinism_check = true;
    std::ostream* progress = nullptr;
};

VerifyReport run_verify(const VerifyConfig& cfg, const VerifyOptions& opt = {});

// Stationary law of the tabulated pCN chain on the two-step toy space
// against the target; exposed for tests.
struct ToyChainResult {
    std::size_t states = 0;
    std::size_t iterations = 0;
    double tv_to_target = 0.0;
    double tv_last_step = 0.0;
    double tv_prior_target = 0.0;  // how far the target is from the lambda = 0 law
};
ToyChainResult toy_pcn_stationarity(double lambda, double beta, int points_per_axis = 4);

}  // namespace polymer::cli
