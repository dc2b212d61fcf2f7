#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optlab/core.hpp"

namespace optlab {

// Configuration problem; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { reddi, function, smoke, adaptivity, ablation };

std::string experiment_name(ExperimentKind k);
ExperimentKind parse_experiment(const std::string& s);

// One experiment, fully declarative. Every field has a default so a resolved
// config can be serialized next to the outputs and replayed bit-exactly.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::smoke;
    OptimizerKind optimizer = OptimizerKind::anon;
    std::string function = "beale-log";

    double gamma = 1.0;
    double lr = std::numeric_limits<double>::quiet_NaN();  // schedule eta0
    ScheduleKind schedule = ScheduleKind::constant;
    bool schedule_set = false;  // resolution fills per-experiment default
    double beta1 = 0.9;
    double beta2 = 0.999;
    double beta3 = 0.5;
    int ratio = 2;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double padam_p = 0.25;
    double bound_scale = std::numeric_limits<double>::quiet_NaN();
    bool paper_literal = false;
    bool sgdm_debias = false;

    std::int64_t steps = 0;  // 0 resolves per experiment
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    double theta0 = 1.0;
    double start_x = -2.5, start_y = -1.5;
    double weight_decay = 0.0;
    double clip_norm = 0.0;
    std::vector<std::int64_t> checkpoints;  // empty resolves to powers of ten
    int jobs = 0;                           // 0 = hardware concurrency
    int trials = 100;                       // adaptivity histories per kind

    // Sweep axes (cartesian product); empty means "not swept".
    std::vector<double> gamma_list;
    std::vector<double> beta3_list;
    std::vector<int> ratio_list;
    std::vector<double> lr_list;

    // Materialize per-experiment defaults (schedule, lr, steps, checkpoints,
    // epsilon, bound scale) and validate invariants.
    void resolve();
    void validate() const;

    HyperParams hyper_params() const;
    Schedule schedule_spec() const { return {schedule, lr}; }

    // Canonical key-value document (stable key order, 17-digit floats).
    std::string emit() const;
    nlohmann::json to_json() const;
    std::uint64_t hash() const;  // FNV-1a of the canonical document
};

// Parse the human-readable key-value document ("key: value" or "key = value",
// '#' comments). Unknown keys and malformed values throw ConfigError naming
// the key. The result is not yet resolved.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Apply one key=value override (CLI flags win over the file).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

}  // namespace optlab
