#pragma once

// Experiment configuration: a single JSON document describing which protocol
// to run and with what physics.  Everything is schema-checked up front so a
// malformed file fails before any computation starts, and the fully resolved
// document is kept for embedding into reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ggethermo/bathtrade.hpp"
#include "ggethermo/gge.hpp"
#include "ggethermo/qcore.hpp"

namespace ggethermo {

// Lifted-battery demonstration step: system rotation by theta followed by the
// two-level swap between the given block indices.
struct BatteryConfig {
    std::vector<double> sys_a;
    std::vector<double> sys_b;
    std::vector<double> bath_a;
    std::vector<double> bath_b;
    double theta = 0.0;
    long long swap_low = 0;
    long long swap_high = 0;
    int ladder_size = 0;
    double ladder_spacing = 1.0;
    double width = 0.0;
};

struct SolveConfig {
    std::vector<double> targets;
    std::vector<double> initial_betas;
    SolveOptions options;
};

// At most two swept parameters, realized one row per value combination.
struct GridAxis {
    std::string parameter;
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string kind;
    std::optional<std::uint64_t> seed;

    std::optional<ChargeSet> charges;
    std::vector<double> betas;
    std::optional<BathSpec> bath;
    std::optional<DensityMatrix> state;
    std::optional<DensityMatrix> target;

    double delta_p = 0.0;
    double eta = 0.0;
    double epsilon = 0.0;
    char target_charge = 'A';
    int trials = 0;

    std::optional<SolveConfig> solve;
    std::optional<BatteryConfig> battery;
    std::vector<GridAxis> grid;

    nlohmann::json resolved;  // the full document as parsed
};

// Parse and validate a document; throws ConfigError on any schema problem.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Charge parsing used by the config schema: "sigma_x" | "sigma_y" | "sigma_z"
// presets, {"diag": [...]}, or {"matrix": [[[re, im], ...], ...]} row-major.
HermitianOperator parse_charge(const nlohmann::json& node);
Matrix parse_matrix(const nlohmann::json& node);
DensityMatrix parse_state(const nlohmann::json& node);

}  // namespace ggethermo
