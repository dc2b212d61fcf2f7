#include "optlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "optlab/adaptivity.hpp"
#include "optlab/anon.hpp"
#include "optlab/csv.hpp"
#include "optlab/rng.hpp"
#include "optlab/testbed.hpp"

namespace optlab {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_sidecar(const ExperimentConfig& cfg, const fs::path& dir,
                   RunArtifacts& art) {
    write_json(dir / "config.json", cfg.to_json());
    write_text(dir / "config.txt", cfg.emit());
    art.files.push_back("config.json");
    art.files.push_back("config.txt");
}

constexpr const char* kVersion = "0.1.0";

nlohmann::json base_summary(const ExperimentConfig& cfg, double wall_seconds) {
    return nlohmann::json{
        {"experiment", experiment_name(cfg.experiment)},
        {"optimizer", kind_name(cfg.optimizer)},
        {"config_hash", cfg.hash()},
        {"seed", cfg.seed},
        {"wall_seconds", wall_seconds},
        {"version", kVersion},
        {"format_version", 1},
    };
}

class StopWatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

RunArtifacts run_reddi(const ExperimentConfig& cfg, const fs::path& dir) {
    RunArtifacts art;
    art.directory = dir;
    StopWatch watch;
    auto opt = make_optimizer(cfg.optimizer, cfg.hyper_params());
    const auto result = run_online(*opt, cfg.schedule_spec(), cfg.steps,
                                   cfg.checkpoints, {cfg.theta0});
    {
        CsvWriter csv(dir / "regret.csv", {"t", "regret", "avg_regret"});
        for (const auto& cp : result.ledger.checkpoints) {
            csv.row(std::vector<double>{static_cast<double>(cp.t), cp.regret,
                                        cp.avg_regret});
        }
    }
    art.files.push_back("regret.csv");
    nlohmann::json summary = base_summary(cfg, watch.seconds());
    summary["final_regret"] = result.ledger.final_regret;
    summary["final_avg_regret"] = result.ledger.final_avg_regret;
    summary["theta_end"] = result.theta_end;
    summary["final_metric"] = result.ledger.final_avg_regret;
    if (result.first_cross) summary["first_cross_step"] = *result.first_cross;
    write_json(dir / "summary.json", summary);
    art.files.push_back("summary.json");
    art.final_metric = result.ledger.final_avg_regret;
    write_sidecar(cfg, dir, art);
    return art;
}

RunArtifacts run_function_experiment(const ExperimentConfig& cfg,
                                     const fs::path& dir) {
    RunArtifacts art;
    art.directory = dir;
    StopWatch watch;
    const TestFunction& fn = test_function_by_name(cfg.function);
    auto opt = make_optimizer(cfg.optimizer, cfg.hyper_params());
    FunctionRunOptions options;
    options.weight_decay = cfg.weight_decay;
    options.clip_norm = cfg.clip_norm;
    options.record_trace = true;
    const auto result = run_function(fn, *opt, cfg.start_x, cfg.start_y, cfg.steps,
                                     cfg.schedule_spec(), options);
    {
        CsvWriter csv(dir / "trajectory.csv",
                      {"step", "loss", "theta_0", "theta_1", "grad_norm", "lr",
                       "psi_min", "psi_max"});
        for (const auto& r : result.trajectory) {
            csv.row(std::vector<double>{static_cast<double>(r.step), r.loss,
                                        r.theta[0], r.theta[1], r.grad_norm, r.lr,
                                        r.psi_min, r.psi_max});
        }
    }
    art.files.push_back("trajectory.csv");

    // Landscape in the view of the delayed pre-conditioner, taken at step 100
    // (or the last recorded step of shorter runs).
    if ((cfg.optimizer == OptimizerKind::anon ||
         cfg.optimizer == OptimizerKind::anon_alt) &&
        !result.trace.psi.empty()) {
        const std::size_t at = std::min<std::size_t>(100, result.trace.psi.size());
        const ParamVector& psi = result.trace.psi[at - 1];
        const auto grid = landscape_scale(fn, psi[0], psi[1], GridSpec{});
        std::ofstream out(dir / "landscape.csv");
        for (const auto& row : grid) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                out << format_double(row[i]);
            }
            out << '\n';
        }
        art.files.push_back("landscape.csv");
    }

    nlohmann::json summary = base_summary(cfg, watch.seconds());
    summary["function"] = fn.name;
    summary["final_loss"] = result.final_loss;
    summary["final_metric"] = result.final_loss;
    summary["diverged"] = result.diverged;
    if (result.diverged) summary["truncated_at"] = result.truncated_at;
    summary["theta_end"] = result.theta_end;
    write_json(dir / "summary.json", summary);
    art.files.push_back("summary.json");
    art.final_metric = result.final_loss;
    write_sidecar(cfg, dir, art);
    art.exit_code = result.diverged ? kExitDiverged : kExitOk;
    return art;
}

RunArtifacts run_smoke(const ExperimentConfig& cfg, const fs::path& dir) {
    RunArtifacts art;
    art.directory = dir;
    StopWatch watch;
    auto opt = make_optimizer(cfg.optimizer, cfg.hyper_params());
    const auto result = smoke_train(cfg.seed, *opt, cfg.schedule_spec(), cfg.steps);
    {
        CsvWriter csv(dir / "loss.csv", {"epoch", "loss"});
        for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
            csv.row(std::vector<double>{static_cast<double>(e),
                                        result.epoch_loss[e]});
        }
    }
    art.files.push_back("loss.csv");
    nlohmann::json summary = base_summary(cfg, watch.seconds());
    summary["initial_loss"] = result.initial_loss;
    summary["final_loss"] = result.final_loss;
    summary["loss_reduction"] = result.initial_loss - result.final_loss;
    summary["final_metric"] = result.final_loss;
    write_json(dir / "summary.json", summary);
    art.files.push_back("summary.json");
    art.final_metric = result.final_loss;
    write_sidecar(cfg, dir, art);
    return art;
}

std::vector<double> random_history(CounterRng& rng, std::size_t len) {
    std::vector<double> h(len);
    const double scale = std::pow(4.0, rng.uniform(-1.0, 1.0));
    for (auto& v : h) v = rng.normal() * scale;
    return h;
}

RunArtifacts run_adaptivity(const ExperimentConfig& cfg, const fs::path& dir) {
    RunArtifacts art;
    art.directory = dir;
    StopWatch watch;
    const std::vector<OptimizerKind> kinds = {
        OptimizerKind::sgd,      OptimizerKind::rmsprop,  OptimizerKind::adam,
        OptimizerKind::amsgrad,  OptimizerKind::adabound, OptimizerKind::adabelief,
        OptimizerKind::padam,    OptimizerKind::anon,
    };
    nlohmann::json reports = nlohmann::json::array();
    CsvWriter csv(dir / "adaptivity.csv",
                  {"optimizer", "trial", "history_len", "measured", "analytic",
                   "gap", "kink_suspected"});
    double worst_gap = 0.0;
    for (const auto kind : kinds) {
        HyperParams hp = cfg.hyper_params();
        AdaptivityReport report;
        report.kind = kind;
        CounterRng rng(cfg.seed ^ (0x9E37u + static_cast<unsigned>(kind)));
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 511.0);
            const auto history = random_history(rng, len);
            const auto eval = make_psi_evaluator(kind, hp);
            const auto meas = measure_adaptivity_checked(eval, history);
            AdaptivityRow row;
            row.trial = static_cast<std::size_t>(trial);
            row.history_len = len;
            row.measured = meas.central;
            row.kink_suspected = meas.kink_suspected;
            row.analytic = analytic_adaptivity(kind, hp, history);
            row.gap = std::abs(meas.central - *row.analytic);
            worst_gap = std::max(worst_gap, *row.gap);
            report.rows.push_back(row);
            if (kind == OptimizerKind::anon) {
                IduConfig idu{hp.gamma, hp.beta2, hp.beta3,
                              hp.resolved_epsilon(kind), {hp.ratio}};
                report.bound_verdicts.push_back(
                    adaptivity_bound_check(history, idu, meas.central));
            }
            csv.row_raw(std::vector<std::string>{
                kind_name(kind), std::to_string(trial), std::to_string(len),
                format_double(meas.central), format_double(*row.analytic),
                format_double(*row.gap), meas.kink_suspected ? "1" : "0"});
        }
        reports.push_back(report.to_json());
    }
    art.files.push_back("adaptivity.csv");
    write_json(dir / "adaptivity_report.json", reports);
    art.files.push_back("adaptivity_report.json");
    nlohmann::json summary = base_summary(cfg, watch.seconds());
    summary["worst_gap"] = worst_gap;
    summary["final_metric"] = worst_gap;
    write_json(dir / "summary.json", summary);
    art.files.push_back("summary.json");
    art.final_metric = worst_gap;
    write_sidecar(cfg, dir, art);
    return art;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& raw_cfg) {
    ExperimentConfig cfg = raw_cfg;
    cfg.resolve();
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        RunArtifacts art;
        art.exit_code = kExitUnwritable;
        return art;
    }
    try {
        switch (cfg.experiment) {
            case ExperimentKind::reddi: return run_reddi(cfg, dir);
            case ExperimentKind::function: return run_function_experiment(cfg, dir);
            case ExperimentKind::smoke: return run_smoke(cfg, dir);
            case ExperimentKind::adaptivity: return run_adaptivity(cfg, dir);
            case ExperimentKind::ablation: {
                // beta3 x ratio grid on the smoke problem, Table-6 shape
                ExperimentConfig grid_cfg = cfg;
                grid_cfg.experiment = ExperimentKind::smoke;
                if (grid_cfg.beta3_list.empty()) {
                    grid_cfg.beta3_list = {0.1, 0.3, 0.5, 0.7, 0.9};
                }
                if (grid_cfg.ratio_list.empty()) grid_cfg.ratio_list = {2, 3, 4};
                const auto sw = sweep(grid_cfg);
                RunArtifacts art;
                art.directory = dir;
                art.exit_code = sw.exit_code;
                return art;
            }
        }
    } catch (const std::ios_base::failure&) {
        RunArtifacts art;
        art.exit_code = kExitUnwritable;
        return art;
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()).find("cannot write") != std::string::npos ||
            std::string(e.what()).find("cannot open") != std::string::npos) {
            RunArtifacts art;
            art.exit_code = kExitUnwritable;
            return art;
        }
        throw;
    }
    throw std::logic_error("run_experiment: unknown experiment kind");
}

SweepResult sweep(const ExperimentConfig& raw_cfg) {
    ExperimentConfig base = raw_cfg;
    base.resolve();
    const auto gammas = base.gamma_list.empty()
                            ? std::vector<double>{base.gamma}
                            : base.gamma_list;
    const auto beta3s = base.beta3_list.empty()
                            ? std::vector<double>{base.beta3}
                            : base.beta3_list;
    const auto ratios = base.ratio_list.empty() ? std::vector<int>{base.ratio}
                                                : base.ratio_list;
    const auto lrs =
        base.lr_list.empty() ? std::vector<double>{base.lr} : base.lr_list;
    const bool multi = gammas.size() * beta3s.size() * ratios.size() * lrs.size() > 1;

    SweepResult result;
    const fs::path root(base.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
        result.exit_code = kExitUnwritable;
        return result;
    }

    std::vector<ExperimentConfig> grid;
    for (const int r : ratios) {
        for (const double b3 : beta3s) {
            for (const double g : gammas) {
                for (const double lr : lrs) {
                    ExperimentConfig cell = base;
                    cell.ratio = r;
                    cell.beta3 = b3;
                    cell.gamma = g;
                    cell.lr = lr;
                    cell.gamma_list.clear();
                    cell.beta3_list.clear();
                    cell.ratio_list.clear();
                    cell.lr_list.clear();
                    if (multi) {
                        std::ostringstream name;
                        name << "r" << r << "_b3" << b3 << "_g" << g << "_lr" << lr;
                        cell.out_dir = (root / name.str()).string();
                    }
                    grid.push_back(std::move(cell));
                }
            }
        }
    }
    if (grid.empty()) throw ConfigError("sweep: empty grid");

    result.cells.resize(grid.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = base.jobs > 0
                                 ? static_cast<unsigned>(base.jobs)
                                 : hw;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) break;
            result.cells[i].cfg = grid[i];
            result.cells[i].artifacts = run_experiment(grid[i]);
        }
    };
    if (workers <= 1 || grid.size() == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(workers, grid.size()); ++w) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& cell : result.cells) {
        result.exit_code = std::max(result.exit_code, cell.artifacts.exit_code);
    }

    // Aggregate table in grid order.
    result.table_path = root / "sweep_table.csv";
    CsvWriter csv(result.table_path,
                  {"ratio", "beta3", "gamma", "lr", "final_metric", "exit_code"});
    for (const auto& cell : result.cells) {
        csv.row_raw(std::vector<std::string>{
            std::to_string(cell.cfg.ratio), format_double(cell.cfg.beta3),
            format_double(cell.cfg.gamma), format_double(cell.cfg.lr),
            format_double(cell.artifacts.final_metric),
            std::to_string(cell.artifacts.exit_code)});
    }

    // Matrix view (rows = ratio, columns = beta3) mirroring the ablation
    // table shape, emitted when exactly those two axes vary.
    if (ratios.size() > 1 && beta3s.size() > 1 && gammas.size() == 1 &&
        lrs.size() == 1) {
        CsvWriter grid_csv(root / "ablation_grid.csv", [&] {
            std::vector<std::string> cols{"ratio"};
            for (const double b3 : beta3s) {
                char label[32];
                std::snprintf(label, sizeof(label), "beta3_%g", b3);
                cols.emplace_back(label);
            }
            return cols;
        }());
        std::size_t idx = 0;
        for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
            std::vector<std::string> cells{std::to_string(ratios[ri])};
            for (std::size_t bi = 0; bi < beta3s.size(); ++bi) {
                cells.push_back(
                    format_double(result.cells[idx].artifacts.final_metric));
                ++idx;
            }
            grid_csv.row_raw(cells);
        }
    }
    return result;
}

int emit_report(const std::filesystem::path& dir, const std::string& format) {
    if (format != "csv" && format != "json") {
        throw ConfigError("format: expected csv or json, got '" + format + "'");
    }
    std::vector<fs::path> summaries;
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, ec);
         it != fs::recursive_directory_iterator(); ++it) {
        if (it->is_regular_file() && it->path().filename() == "summary.json") {
            summaries.push_back(it->path());
        }
    }
    if (ec) return kExitUnwritable;
    std::sort(summaries.begin(), summaries.end());

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& path : summaries) {
        std::ifstream in(path);
        if (!in) continue;
        nlohmann::json j;
        in >> j;
        j["path"] = fs::relative(path, dir).string();
        rows.push_back(std::move(j));
    }
    try {
        if (format == "json") {
            write_json(dir / "report.json", rows);
        } else {
            CsvWriter csv(dir / "report.csv",
                          {"path", "experiment", "optimizer", "config_hash",
                           "seed", "final_metric"});
            for (const auto& j : rows) {
                csv.row_raw(std::vector<std::string>{
                    j.value("path", ""), j.value("experiment", ""),
                    j.value("optimizer", ""),
                    std::to_string(j.value("config_hash", 0ULL)),
                    std::to_string(j.value("seed", 0ULL)),
                    format_double(j.value("final_metric", 0.0))});
            }
        }
    } catch (const std::runtime_error&) {
        return kExitUnwritable;
    }
    return kExitOk;
}

}  // namespace optlab
