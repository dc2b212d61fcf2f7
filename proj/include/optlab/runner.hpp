#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "optlab/config.hpp"

namespace optlab {

// Process-style exit codes shared by the library runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitUnwritable = 4;

struct RunArtifacts {
    std::filesystem::path directory;
    std::vector<std::string> files;
    int exit_code = kExitOk;
    double final_metric = 0.0;  // experiment-specific headline number
};

// Execute one resolved experiment and write its artifacts (CSV outputs, a
// JSON sidecar with the fully resolved config, and summary.json).
RunArtifacts run_experiment(const ExperimentConfig& cfg);

struct SweepCell {
    ExperimentConfig cfg;
    RunArtifacts artifacts;
};

struct SweepResult {
    std::vector<SweepCell> cells;  // deterministic grid order
    int exit_code = kExitOk;
    std::filesystem::path table_path;
};

// Cartesian-product expansion over the non-empty list axes, executed on a
// worker pool (cfg.jobs threads; 0 = hardware concurrency). Each run owns its
// state; aggregation follows grid order, so outputs are deterministic.
SweepResult sweep(const ExperimentConfig& cfg);

// Aggregate summary.json files under a directory tree into report.csv and
// report.json with a stable column order.
int emit_report(const std::filesystem::path& dir, const std::string& format);

}  // namespace optlab
