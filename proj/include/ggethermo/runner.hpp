#pragma once

// Protocol orchestration: dispatch a parsed config to the right module, build
// its report and step table, and map failures onto the documented exit codes.

#include <filesystem>
#include <string>

#include "ggethermo/config.hpp"
#include "ggethermo/report.hpp"

namespace ggethermo {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int invariant = 2;  // a physical invariant or resource limit failed
inline constexpr int respecify = 3;  // excluded ratio / measurement must be respecified
inline constexpr int config = 4;     // malformed or inconsistent configuration
}  // namespace exit_code

struct RunArtifacts {
    RunReport report;
    CsvTable steps;
    std::string steps_name = "steps";  // file stem for the table
};

// Execute one experiment.  Throws the module errors unchanged; callers map
// them with exit_code_for.
RunArtifacts run_experiment(const ExperimentConfig& config);

// Grid sweep: one row per grid point with the experiment's headline metric.
CsvTable run_sweep(const ExperimentConfig& config);

// Write report.json and steps.csv (or sweep.csv) under out_dir, atomically.
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& out_dir,
                     const std::string& format);

int exit_code_for(const std::exception& error);

}  // namespace ggethermo
