#include "optlab/cli.hpp"

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optlab/config.hpp"
#include "optlab/runner.hpp"

namespace optlab {

namespace {

struct FlagOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> experiment;
    std::optional<std::string> optimizer;
    std::optional<std::string> function;
    std::optional<double> gamma, lr, beta1, beta2, beta3, epsilon;
    std::optional<std::string> schedule;
    std::optional<int> ratio, jobs, trials;
    std::optional<long long> steps, seed;
    std::optional<std::string> out;
    bool paper_literal = false;
    std::optional<std::string> gamma_list, beta3_list, ratio_list, lr_list;
    std::optional<std::string> checkpoints;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--config", f.config_path, "experiment config file");
    cmd->add_option("--experiment", f.experiment, "reddi|function|smoke|adaptivity|ablation");
    cmd->add_option("--optimizer", f.optimizer, "optimizer name");
    cmd->add_option("--function", f.function, "beale-log|rosenbrock|rastrigin");
    cmd->add_option("--gamma", f.gamma, "adaptivity exponent");
    cmd->add_option("--lr", f.lr, "schedule eta0");
    cmd->add_option("--schedule", f.schedule, "constant|inverse-sqrt");
    cmd->add_option("--beta1", f.beta1, "momentum decay");
    cmd->add_option("--beta2", f.beta2, "second-moment decay");
    cmd->add_option("--beta3", f.beta3, "milestone fold decay");
    cmd->add_option("--ratio", f.ratio, "milestone ratio");
    cmd->add_option("--epsilon", f.epsilon, "stability shift");
    cmd->add_option("--steps", f.steps, "horizon / epochs");
    cmd->add_option("--seed", f.seed, "rng seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--paper-literal", f.paper_literal,
                  "debias momentum by (1-beta2^t) instead of (1-beta1^t)");
    cmd->add_option("--jobs", f.jobs, "parallel worker count");
    cmd->add_option("--trials", f.trials, "adaptivity trial count");
    cmd->add_option("--gamma-list", f.gamma_list, "comma-separated sweep axis");
    cmd->add_option("--beta3-list", f.beta3_list, "comma-separated sweep axis");
    cmd->add_option("--ratio-list", f.ratio_list, "comma-separated sweep axis");
    cmd->add_option("--lr-list", f.lr_list, "comma-separated sweep axis");
    cmd->add_option("--checkpoints", f.checkpoints, "comma-separated step list");
}

ExperimentConfig build_config(const FlagOverrides& f) {
    ExperimentConfig cfg;
    if (f.config_path) cfg = parse_config_file(*f.config_path);
    // flags win over the file
    if (f.experiment) apply_override(cfg, "experiment", *f.experiment);
    if (f.optimizer) apply_override(cfg, "optimizer", *f.optimizer);
    if (f.function) apply_override(cfg, "function", *f.function);
    if (f.gamma) cfg.gamma = *f.gamma;
    if (f.lr) cfg.lr = *f.lr;
    if (f.schedule) apply_override(cfg, "schedule", *f.schedule);
    if (f.beta1) cfg.beta1 = *f.beta1;
    if (f.beta2) cfg.beta2 = *f.beta2;
    if (f.beta3) cfg.beta3 = *f.beta3;
    if (f.ratio) cfg.ratio = *f.ratio;
    if (f.epsilon) cfg.epsilon = *f.epsilon;
    if (f.steps) cfg.steps = *f.steps;
    if (f.seed) cfg.seed = static_cast<std::uint64_t>(*f.seed);
    if (f.out) cfg.out_dir = *f.out;
    if (f.paper_literal) cfg.paper_literal = true;
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.trials) cfg.trials = *f.trials;
    if (f.gamma_list) apply_override(cfg, "gamma_list", *f.gamma_list);
    if (f.beta3_list) apply_override(cfg, "beta3_list", *f.beta3_list);
    if (f.ratio_list) apply_override(cfg, "ratio_list", *f.ratio_list);
    if (f.lr_list) apply_override(cfg, "lr_list", *f.lr_list);
    if (f.checkpoints) apply_override(cfg, "checkpoints", *f.checkpoints);
    return cfg;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"tunable-adaptivity optimizer testbed"};
    app.require_subcommand(1);

    FlagOverrides run_flags, sweep_flags, adapt_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment");
    add_common_flags(run_cmd, run_flags);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "expand grid axes and run all");
    add_common_flags(sweep_cmd, sweep_flags);
    CLI::App* adapt_cmd =
        app.add_subcommand("adaptivity", "measured vs analytic adaptivity report");
    add_common_flags(adapt_cmd, adapt_flags);

    std::string report_dir = "out";
    std::string report_format = "csv";
    CLI::App* report_cmd =
        app.add_subcommand("report", "aggregate run summaries under a directory");
    report_cmd->add_option("--out", report_dir, "directory to aggregate");
    report_cmd->add_option("--format", report_format, "csv|json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run_cmd->parsed()) {
            ExperimentConfig cfg = build_config(run_flags);
            cfg.resolve();
            const auto art = run_experiment(cfg);
            if (art.exit_code == kExitOk) {
                std::printf("run complete: %s (final metric %g)\n",
                            art.directory.string().c_str(), art.final_metric);
            } else if (art.exit_code == kExitDiverged) {
                std::fprintf(stderr, "run flagged divergence: %s\n",
                             art.directory.string().c_str());
            }
            return art.exit_code;
        }
        if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = build_config(sweep_flags);
            cfg.resolve();
            const auto result = sweep(cfg);
            std::printf("sweep complete: %zu runs, table %s\n", result.cells.size(),
                        result.table_path.string().c_str());
            return result.exit_code;
        }
        if (adapt_cmd->parsed()) {
            ExperimentConfig cfg = build_config(adapt_flags);
            cfg.experiment = ExperimentKind::adaptivity;
            cfg.resolve();
            const auto art = run_experiment(cfg);
            if (art.exit_code == kExitOk) {
                std::printf("adaptivity report: %s (worst gap %g)\n",
                            art.directory.string().c_str(), art.final_metric);
            }
            return art.exit_code;
        }
        if (report_cmd->parsed()) {
            return emit_report(report_dir, report_format);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}

}  // namespace optlab
